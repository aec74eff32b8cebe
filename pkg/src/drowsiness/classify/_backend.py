"""Select the compiled core when it imports, else the numpy fallback.

Set ``DROWSINESS_PURE=1`` to force the fallback.
"""

import os

if os.environ.get("DROWSINESS_PURE", "") not in ("", "0"):
    from . import _pycore as core
else:
    try:
        from . import _ccore as core
    except ImportError:  # extension not built
        from . import _pycore as core

BACKEND = "compiled" if core.__name__.endswith("_ccore") else "python"
