"""Backend selection for the hot loops.

The compiled extension is preferred. Set ``CCEMBED_BACKEND=python`` to force
the numpy fallback (useful for debugging and for the backend benchmark).
"""
import os
import types

from ccembed import _pykernels
from ccembed.errors import ConfigError

BACKENDS = {"python": _pykernels}

try:
    from ccembed import _ckernels
except ImportError:  # extension not built
    _ckernels = None
else:
    BACKENDS["cython"] = _ckernels


def _select(name=None):
    name = name or os.environ.get("CCEMBED_BACKEND", "")
    if name:
        if name not in BACKENDS:
            raise ConfigError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
        return name
    return "cython" if "cython" in BACKENDS else "python"


BACKEND = _select()


def get(name: str | None = None) -> types.ModuleType:
    """Kernel module for ``name`` (default: the one selected at import)."""
    return BACKENDS[_select(name) if name else BACKEND]


def available() -> list[str]:
    return sorted(BACKENDS)
