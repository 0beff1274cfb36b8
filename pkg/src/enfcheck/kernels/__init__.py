"""Hot loops behind a backend switch.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
pure-Python ``_pykernels`` module is used. Both produce identical results.
"""

from __future__ import annotations

from contextlib import contextmanager

import numpy as np

from . import _pykernels

try:  # pragma: no cover - depends on the build
    from . import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

_active = "compiled" if _ckernels is not None else "python"


def available() -> list[str]:
    return sorted(BACKENDS)


def backend() -> str:
    return _active


def set_backend(name: str) -> str:
    """Select the kernel implementation; returns the previous choice."""
    global _active
    if name not in BACKENDS:
        raise ValueError(f"kernel backend {name!r} is not available (have {available()})")
    previous, _active = _active, name
    return previous


@contextmanager
def using(name: str):
    previous = set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def explore(tables, initial: tuple[int, ...], max_states: int, backend: str | None = None):
    return BACKENDS[backend or _active].explore(tables, tuple(int(x) for x in initial), int(max_states))


def eu(pred_ptr, pred_idx, sat_left, sat_right, backend: str | None = None) -> list[bool]:
    """Least fixpoint for E[left U right] given the predecessor relation in CSR form."""
    name = backend or _active
    if name == "python":
        return _pykernels.eu(_list(pred_ptr), _list(pred_idx), _list(sat_left), _list(sat_right))
    return _ckernels.eu(_i32(pred_ptr), _i32(pred_idx), _u8(sat_left), _u8(sat_right))


def eg(succ_ptr, succ_idx, pred_ptr, pred_idx, sat, backend: str | None = None) -> list[bool]:
    """Greatest fixpoint for EG sat given both relations in CSR form."""
    name = backend or _active
    if name == "python":
        return _pykernels.eg(_list(succ_ptr), _list(succ_idx), _list(pred_ptr), _list(pred_idx), _list(sat))
    return _ckernels.eg(_i32(succ_ptr), _i32(succ_idx), _i32(pred_ptr), _i32(pred_idx), _u8(sat))


def _list(xs) -> list:
    return xs.tolist() if isinstance(xs, np.ndarray) else list(xs)


def _i32(xs) -> np.ndarray:
    return np.ascontiguousarray(xs, dtype=np.int32)


def _u8(xs) -> np.ndarray:
    return np.ascontiguousarray(xs, dtype=np.uint8)
