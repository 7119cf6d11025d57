"""Floating-point precision switch.

``double`` maps to ``complex128``; ``extended`` to numpy's ``clongdouble``
(80-bit on x86-64 Linux). Linear algebra in this package is written by hand
so both dtypes flow through every numeric path.
"""

from __future__ import annotations

import contextlib
from typing import Iterator

import numpy as np

_DTYPES = {
    "double": (np.complex128, np.float64),
    "extended": (np.clongdouble, np.longdouble),
}

_current = "double"


def set_precision(name: str) -> None:
    global _current
    if name not in _DTYPES:
        raise ValueError(f"unknown precision {name!r}; expected one of {sorted(_DTYPES)}")
    _current = name


def get_precision() -> str:
    return _current


def complex_dtype():
    return _DTYPES[_current][0]


def real_dtype():
    return _DTYPES[_current][1]


@contextlib.contextmanager
def precision(name: str) -> Iterator[None]:
    previous = _current
    set_precision(name)
    try:
        yield
    finally:
        set_precision(previous)
