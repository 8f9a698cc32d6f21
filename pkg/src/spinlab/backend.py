"""Arithmetic backends: exact Gaussian rationals or complex floats.

Every routine that builds matrices or spinors takes a :class:`Backend` and
goes through it for array creation, scalar coercion and zero tests, so the
same code path runs in both arithmetics.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact as ex
from .exact import ExactArray

__all__ = ["Backend", "EXACT", "FLOAT", "get_backend"]


@dataclass(frozen=True)
class Backend:
    """Array factory and comparison policy.

    ``tolerance`` is the Frobenius-norm threshold used by :meth:`is_zero`;
    it is 0 for the exact backend, which compares against literal zero.
    """

    name: str
    tolerance: float

    @property
    def is_exact(self) -> bool:
        return self.name == "exact"

    def with_tolerance(self, tol: float) -> "Backend":
        if self.is_exact:
            return self
        return dataclasses.replace(self, tolerance=float(tol))

    # construction -------------------------------------------------------
    def asarray(self, data):
        if self.is_exact:
            return ExactArray.from_entries(data)
        if isinstance(data, ExactArray):
            return data.to_complex()
        if isinstance(data, np.ndarray) and data.dtype != object:
            return data.astype(complex)
        return np.array(_to_complex_nested(data), dtype=complex)

    def scalar(self, x):
        """Coerce a coefficient (int, Fraction, complex, 0-d array) for
        multiplication with arrays of this backend."""
        if self.is_exact:
            if isinstance(x, (float, np.floating)) and not float(x).is_integer():
                raise TypeError("float coefficient passed to the exact backend")
            if isinstance(x, (complex, ExactArray)):
                return ex.ExactArray.from_entries(x) if not isinstance(x, ExactArray) else x
            return ex.as_fraction(x)
        if isinstance(x, ExactArray):
            return complex(x.to_complex())
        if isinstance(x, Fraction):
            return float(x)
        return x

    def zeros(self, shape):
        if self.is_exact:
            return ExactArray.zeros(shape)
        return np.zeros(shape, dtype=complex)

    def eye(self, n: int):
        if self.is_exact:
            return ExactArray.eye(n)
        return np.eye(n, dtype=complex)

    def stack(self, arrays, axis: int = 0):
        if self.is_exact:
            return ex.stack(arrays, axis)
        return np.stack(arrays, axis=axis)

    def kron(self, a, b):
        if self.is_exact:
            return ex.kron(a, b)
        return np.kron(a, b)

    def lincomb(self, coeffs, arrays):
        """Sum of ``c * A`` over paired coefficients and arrays, skipping zeros."""
        total = None
        for c, a in zip(coeffs, arrays):
            if c == 0:
                continue
            term = a * self.scalar(c)
            total = term if total is None else total + term
        if total is None:
            return self.zeros(arrays[0].shape) if len(arrays) else None
        return total

    # comparisons --------------------------------------------------------
    def norm(self, arr) -> float:
        if isinstance(arr, ExactArray):
            return arr.norm()
        return float(np.linalg.norm(np.asarray(arr).ravel()))

    def is_zero(self, arr) -> bool:
        if isinstance(arr, ExactArray):
            return arr.is_zero()
        return self.norm(arr) <= self.tolerance

    def inner(self, phi, psi):
        """Hermitian product summed over the spinor axis, linear in ``phi``."""
        if self.is_exact:
            prod = phi * psi.conj()
            re = prod.re.sum(axis=0)
            im = prod.im.sum(axis=0)
            return ExactArray(np.asarray(re, dtype=object), np.asarray(im, dtype=object), prod.den)
        return np.sum(phi * np.conj(psi), axis=0)

    def to_complex(self, arr) -> np.ndarray:
        if isinstance(arr, ExactArray):
            return arr.to_complex()
        return np.asarray(arr, dtype=complex)


def _to_complex_nested(data):
    if isinstance(data, (list, tuple)):
        return [_to_complex_nested(x) for x in data]
    if isinstance(data, Fraction):
        return float(data)
    if isinstance(data, ExactArray):
        return data.to_complex()
    return data


EXACT = Backend("exact", 0.0)
FLOAT = Backend("float", 1e-10)


def get_backend(name) -> Backend:
    if isinstance(name, Backend):
        return name
    if name == "exact":
        return EXACT
    if name == "float":
        return FLOAT
    raise ValueError(f"unknown backend {name!r}")
