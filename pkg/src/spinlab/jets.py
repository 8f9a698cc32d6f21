"""Point jets of spinor fields on constant-structure frame models.

Spinor fields are trivialized by the (spin lift of the) orthonormal frame,
so a field is a map to the spin module and frame derivatives e_i act
componentwise.  A 2-jet stores the value, the first frame derivatives and
the symmetric part of the second derivatives; the antisymmetric part is
dictated by the brackets, e_i e_j - e_j e_i = sum_k c_ijk e_k.

All spinor slots are backend arrays of shape (dim,) or (dim, batch).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .clifford import GammaRep
from .exact import ExactArray

__all__ = ["Jet1", "SpinorJet2", "JetInconsistency", "random_jet", "basis_jets"]


class JetInconsistency(ValueError):
    """The requested derivative data violate the bracket constraint."""

    def __init__(self, message: str, pair=None):
        self.pair = pair
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Jet1:
    """Value and first frame derivatives of a spinor field at the point."""

    value: object
    d1: tuple

    def map(self, fn) -> "Jet1":
        return Jet1(fn(self.value), tuple(fn(d) for d in self.d1))

    def apply(self, mat) -> "Jet1":
        """Multiply by a constant endomorphism (frame-constant coefficients)."""
        return self.map(lambda v: mat @ v)

    def __add__(self, other: "Jet1") -> "Jet1":
        return Jet1(self.value + other.value, tuple(a + b for a, b in zip(self.d1, other.d1)))

    def __sub__(self, other: "Jet1") -> "Jet1":
        return Jet1(self.value - other.value, tuple(a - b for a, b in zip(self.d1, other.d1)))

    def scale(self, c) -> "Jet1":
        return self.map(lambda v: v * c)


@dataclass(frozen=True, eq=False)
class SpinorJet2:
    """2-jet: value, d1[i] = e_i(phi), d2sym[i][j] = symmetric second derivative.

    ``c`` holds the structure constants of the model the jet lives on.
    """

    value: object
    d1: tuple
    d2sym: tuple
    c: np.ndarray

    def __post_init__(self):
        n = len(self.d1)
        if len(self.d2sym) != n or any(len(row) != n for row in self.d2sym):
            raise ValueError("d2sym must be an n x n array of spinors")
        if self.c.shape != (n, n, n):
            raise ValueError("structure constants do not match the jet dimension")

    @property
    def n(self) -> int:
        return len(self.d1)

    @property
    def shape(self) -> tuple:
        return self.value.shape

    def d2(self, i: int, j: int):
        """Full second derivative e_i(e_j phi)."""
        out = self.d2sym[i][j]
        for k in range(self.n):
            ck = self.c[i, j, k]
            if ck:
                out = out + self.d1[k] * _coef(self.value, ck / 2)
        return out

    def map(self, fn) -> "SpinorJet2":
        return SpinorJet2(fn(self.value), tuple(fn(d) for d in self.d1),
                          tuple(tuple(fn(d) for d in row) for row in self.d2sym), self.c)

    def apply(self, mat) -> "SpinorJet2":
        """Jet of (constant endomorphism) . phi."""
        return self.map(lambda v: mat @ v)

    def scale(self, c) -> "SpinorJet2":
        return self.map(lambda v: v * c)

    def _zip(self, other: "SpinorJet2", op) -> "SpinorJet2":
        return SpinorJet2(op(self.value, other.value), tuple(op(a, b) for a, b in zip(self.d1, other.d1)),
                          tuple(tuple(op(a, b) for a, b in zip(r, s)) for r, s in zip(self.d2sym, other.d2sym)), self.c)

    def __add__(self, other: "SpinorJet2") -> "SpinorJet2":
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other: "SpinorJet2") -> "SpinorJet2":
        return self._zip(other, lambda a, b: a - b)

    def column(self, k) -> "SpinorJet2":
        """Select one (or a slice of) batch columns."""
        return self.map(lambda v: v[:, k])

    def combine(self, coeffs) -> "SpinorJet2":
        """Right-multiply every slot by a (batch, m) coefficient matrix."""
        return self.map(lambda v: v @ coeffs)

    def check_symmetric(self, backend) -> None:
        for i in range(self.n):
            for j in range(i + 1, self.n):
                if not backend.is_zero(self.d2sym[i][j] - self.d2sym[j][i]):
                    raise JetInconsistency(f"d2sym not symmetric at ({i + 1}, {j + 1})", (i, j))

    @classmethod
    def from_full(cls, value, d1, d2, c, backend) -> "SpinorJet2":
        """Build from full second derivatives d2[i][j] = e_i(e_j phi),
        checking the bracket constraint d2[i][j] - d2[j][i] = sum_k c_ijk d1[k]."""
        n = len(d1)
        half = backend.scalar(Fraction(1, 2))
        for i in range(n):
            for j in range(i + 1, n):
                comm = d2[i][j] - d2[j][i]
                for k in range(n):
                    if c[i, j, k]:
                        comm = comm - d1[k] * backend.scalar(c[i, j, k])
                if not backend.is_zero(comm):
                    raise JetInconsistency(
                        f"bracket constraint violated for frame pair ({i + 1}, {j + 1})", (i, j))
        sym = tuple(tuple((d2[i][j] + d2[j][i]) * half for j in range(n)) for i in range(n))
        return cls(value, tuple(d1), sym, c)


def _coef(like, c):
    if isinstance(like, ExactArray):
        return c
    return float(c)


def _random_block(rng, shape, backend, low=-3, high=3):
    q = int(rng.choice((1, 2, 3)))
    re = rng.integers(low * q, high * q + 1, size=shape)
    im = rng.integers(low * q, high * q + 1, size=shape)
    if backend.is_exact:
        return ExactArray(re.astype(object), im.astype(object), q)
    return (re + 1j * im) / q


def random_jet(c: np.ndarray, rep: GammaRep, rng, batch: int | None = None) -> SpinorJet2:
    """Random 2-jet with Gaussian-rational entries in [-3, 3] + i[-3, 3]."""
    n = c.shape[0]
    shape = (rep.dim,) if batch is None else (rep.dim, batch)
    bk = rep.backend
    value = _random_block(rng, shape, bk)
    d1 = tuple(_random_block(rng, shape, bk) for _ in range(n))
    upper = {}
    for i in range(n):
        for j in range(i, n):
            upper[i, j] = _random_block(rng, shape, bk)
    d2sym = tuple(tuple(upper[min(i, j), max(i, j)] for j in range(n)) for i in range(n))
    return SpinorJet2(value, d1, d2sym, c)


def jet_coordinates(n: int) -> int:
    """Number of spinor slots in a 2-jet: value, n first and n(n+1)/2 second derivatives."""
    return 1 + n + n * (n + 1) // 2


def basis_jets(c: np.ndarray, rep: GammaRep) -> SpinorJet2:
    """A batch whose columns run over the standard basis of the 2-jet space.

    Column order: value components, then d1[0], ..., d1[n-1], then the upper
    triangle of d2sym in row-major order; each block spans the spin module.
    """
    n = c.shape[0]
    dim = rep.dim
    bk = rep.backend
    slots = jet_coordinates(n)
    total = slots * dim
    eye = np.eye(total, dtype=np.int64)

    def block(s):
        rows = eye[s * dim:(s + 1) * dim, :]
        return bk.asarray(rows)

    value = block(0)
    d1 = tuple(block(1 + i) for i in range(n))
    upper = {}
    s = 1 + n
    for i in range(n):
        for j in range(i, n):
            upper[i, j] = block(s)
            s += 1
    d2sym = tuple(tuple(upper[min(i, j), max(i, j)] for j in range(n)) for i in range(n))
    return SpinorJet2(value, d1, d2sym, c)
