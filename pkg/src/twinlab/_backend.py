"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback
is bit-identical, just slower on the biggest inputs.  Set
``TWINLAB_BACKEND=python`` to force the fallback (or ``compiled`` to
fail loudly when the extension is missing).
"""

from __future__ import annotations

import os

_choice = os.environ.get("TWINLAB_BACKEND", "auto").strip().lower()

if _choice in ("auto", "", "compiled", "cy", "c"):
    try:
        from . import _kernels_cy as K  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        if _choice in ("compiled", "cy", "c"):
            raise
        from . import _kernels_py as K  # type: ignore[no-redef]

        COMPILED = False
elif _choice in ("python", "py", "numpy"):
    from . import _kernels_py as K  # type: ignore[no-redef]

    COMPILED = False
else:
    raise ImportError(
        f"TWINLAB_BACKEND={_choice!r} not recognized; "
        "use 'auto', 'compiled' or 'python'"
    )


def backend_name() -> str:
    return "compiled" if COMPILED else "python"
