"""Exact Gaussian-rational arrays.

An :class:`ExactArray` stores a complex array with rational real and
imaginary parts as two numpy object arrays of Python integers sharing one
positive common denominator.  Keeping the numerators as plain integers lets
numpy drive the loops (including ``@``) while Python's arbitrary precision
integers keep every result exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral, Rational

import numpy as np

__all__ = [
    "ExactArray",
    "as_fraction",
    "exact_array",
    "gaussian",
    "nullspace",
    "rank",
]


def as_fraction(x) -> Fraction:
    """Convert an int, Fraction or decimal string to a Fraction.

    Floats are accepted only when they are integral, so that rounding never
    leaks silently into exact computations.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float) and x.is_integer():
        return Fraction(int(x))
    if isinstance(x, (np.integer,)):
        return Fraction(int(x))
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def _split(x) -> tuple[Fraction, Fraction]:
    if isinstance(x, ExactArray):
        if x.ndim != 0:
            raise TypeError("expected a 0-d ExactArray")
        return Fraction(int(x.re[()]), x.den), Fraction(int(x.im[()]), x.den)
    if isinstance(x, complex):
        return as_fraction(x.real), as_fraction(x.imag)
    return as_fraction(x), Fraction(0)


def _int_array(values, shape) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    out[:] = values
    return out.reshape(shape)


class ExactArray:
    """Complex array with exact rational entries.

    Supports ``+``, ``-``, multiplication by scalars or broadcastable arrays,
    ``@``, indexing, conjugation and transposition.  Equality with ``==``
    compares whole arrays and returns a plain bool.
    """

    __slots__ = ("re", "im", "den")
    __array_priority__ = 1000
    __hash__ = None

    def __init__(self, re: np.ndarray, im: np.ndarray, den: int = 1, normalize: bool = True):
        if den <= 0:
            raise ValueError("denominator must be positive")
        self.re = re if isinstance(re, np.ndarray) else np.asarray(re, dtype=object)
        self.im = im if isinstance(im, np.ndarray) else np.asarray(im, dtype=object)
        self.den = int(den)
        if normalize:
            self._normalize()

    def _normalize(self) -> None:
        if self.den == 1:
            return
        g = math.gcd(self.den, *self.re.flat, *self.im.flat)
        if g > 1:
            self.re = np.asarray(self.re // g, dtype=object)
            self.im = np.asarray(self.im // g, dtype=object)
            self.den //= g

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, shape) -> "ExactArray":
        z = np.zeros(shape, dtype=np.int64).astype(object)
        return cls(z, z.copy(), 1, normalize=False)

    @classmethod
    def eye(cls, n: int) -> "ExactArray":
        return cls(np.eye(n, dtype=np.int64).astype(object), np.zeros((n, n), dtype=np.int64).astype(object), 1, False)

    @classmethod
    def from_parts(cls, re_data, im_data) -> "ExactArray":
        """Build from nested sequences of rational real and imaginary parts."""
        shape = np.shape(re_data)
        re_flat = [as_fraction(x) for x in _flatten(re_data, shape)]
        im_flat = [as_fraction(x) for x in _flatten(im_data, shape)]
        den = 1
        for x in re_flat + im_flat:
            den = math.lcm(den, x.denominator)
        re = _int_array([x.numerator * (den // x.denominator) for x in re_flat], shape)
        im = _int_array([x.numerator * (den // x.denominator) for x in im_flat], shape)
        return cls(re, im, den)

    @classmethod
    def from_entries(cls, data) -> "ExactArray":
        """Build from nested sequences of ints, Fractions, Gaussian-integer
        complex numbers or 0-d ExactArrays."""
        if isinstance(data, ExactArray):
            return data
        arr = np.empty(np.shape(data) if not isinstance(data, np.ndarray) else data.shape, dtype=object)
        if isinstance(data, np.ndarray) and data.dtype.kind in "iub":
            z = data.astype(np.int64).astype(object)
            return cls(z, np.zeros_like(z), 1, False)
        if isinstance(data, np.ndarray) and data.dtype.kind == "c":
            if np.any(data.real != np.round(data.real)) or np.any(data.imag != np.round(data.imag)):
                raise TypeError("complex float input must have integer parts")
            re = np.round(data.real).astype(np.int64).astype(object)
            im = np.round(data.imag).astype(np.int64).astype(object)
            return cls(re, im, 1, False)
        flat = _flatten(data, arr.shape)
        pairs = [_split(x) for x in flat]
        den = 1
        for a, b in pairs:
            den = math.lcm(den, a.denominator, b.denominator)
        re = _int_array([a.numerator * (den // a.denominator) for a, _ in pairs], arr.shape)
        im = _int_array([b.numerator * (den // b.denominator) for _, b in pairs], arr.shape)
        return cls(re, im, den)

    # basic attributes ---------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.re.shape

    @property
    def ndim(self) -> int:
        return self.re.ndim

    def __len__(self) -> int:
        return len(self.re)

    def __repr__(self) -> str:
        return f"ExactArray(shape={self.shape}, den={self.den})"

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "ExactArray":
        if isinstance(other, ExactArray):
            return other
        if isinstance(other, np.ndarray):
            return ExactArray.from_entries(other)
        a, b = _split(other)
        den = math.lcm(a.denominator, b.denominator)
        re = np.array(a.numerator * (den // a.denominator), dtype=object)
        im = np.array(b.numerator * (den // b.denominator), dtype=object)
        return ExactArray(re, im, den, False)

    def __add__(self, other) -> "ExactArray":
        o = self._coerce(other)
        den = math.lcm(self.den, o.den)
        fa, fb = den // self.den, den // o.den
        return ExactArray(self.re * fa + o.re * fb, self.im * fa + o.im * fb, den)

    __radd__ = __add__

    def __neg__(self) -> "ExactArray":
        return ExactArray(np.asarray(-self.re, dtype=object), np.asarray(-self.im, dtype=object), self.den, False)

    def __sub__(self, other) -> "ExactArray":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExactArray":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ExactArray":
        o = self._coerce(other)
        re = self.re * o.re - self.im * o.im
        im = self.re * o.im + self.im * o.re
        return ExactArray(re, im, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExactArray":
        a, b = _split(other)
        norm = a * a + b * b
        if norm == 0:
            raise ZeroDivisionError("division by exact zero")
        return self * gaussian(a / norm, -b / norm)

    def __matmul__(self, other) -> "ExactArray":
        o = self._coerce(other)
        re = self.re @ o.re - self.im @ o.im
        im = self.re @ o.im + self.im @ o.re
        return ExactArray(np.asarray(re, dtype=object), np.asarray(im, dtype=object), self.den * o.den)

    def __rmatmul__(self, other) -> "ExactArray":
        return self._coerce(other) @ self

    def __getitem__(self, idx) -> "ExactArray":
        return ExactArray(np.asarray(self.re[idx], dtype=object), np.asarray(self.im[idx], dtype=object), self.den)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return (self - o).is_zero()

    # shape manipulation -------------------------------------------------
    def reshape(self, *shape) -> "ExactArray":
        return ExactArray(self.re.reshape(*shape), self.im.reshape(*shape), self.den, False)

    def transpose(self, *axes) -> "ExactArray":
        return ExactArray(self.re.transpose(*axes), self.im.transpose(*axes), self.den, False)

    @property
    def T(self) -> "ExactArray":
        return ExactArray(np.swapaxes(self.re, -1, -2), np.swapaxes(self.im, -1, -2), self.den, False)

    def conj(self) -> "ExactArray":
        return ExactArray(self.re, np.asarray(-self.im, dtype=object), self.den, False)

    @property
    def H(self) -> "ExactArray":
        return self.conj().T

    def copy(self) -> "ExactArray":
        return ExactArray(self.re.copy(), self.im.copy(), self.den, False)

    # queries ------------------------------------------------------------
    def is_zero(self) -> bool:
        return np.count_nonzero(self.re) == 0 and np.count_nonzero(self.im) == 0

    def to_complex(self) -> np.ndarray:
        re = np.array([int(v) / self.den for v in self.re.flat], dtype=float).reshape(self.shape)
        im = np.array([int(v) / self.den for v in self.im.flat], dtype=float).reshape(self.shape)
        return re + 1j * im

    def norm(self) -> float:
        """Frobenius norm, as a float."""
        sq = sum(int(a) * int(a) for a in self.re.flat) + sum(int(b) * int(b) for b in self.im.flat)
        return math.sqrt(Fraction(sq, self.den * self.den))

    def entry(self, *idx) -> tuple[Fraction, Fraction]:
        """Real and imaginary part of one entry."""
        return Fraction(int(self.re[idx]), self.den), Fraction(int(self.im[idx]), self.den)

    def real_part(self) -> Fraction:
        """Real part of a 0-d array."""
        return Fraction(int(self.re[()]), self.den)

    def imag_part(self) -> Fraction:
        return Fraction(int(self.im[()]), self.den)

    def is_real(self) -> bool:
        return np.count_nonzero(self.im) == 0


def _flatten(data, shape) -> list:
    if shape == ():
        return [data]
    out = []
    for item in data:
        out.extend(_flatten(item, shape[1:]))
    return out


def exact_array(data) -> ExactArray:
    return ExactArray.from_entries(data)


def gaussian(re, im=0) -> ExactArray:
    """A 0-d exact scalar ``re + i*im``."""
    return ExactArray.from_parts(as_fraction(re), as_fraction(im))


def stack(arrays, axis: int = 0) -> ExactArray:
    arrays = [ExactArray.from_entries(a) for a in arrays]
    den = 1
    for a in arrays:
        den = math.lcm(den, a.den)
    re = np.stack([a.re * (den // a.den) for a in arrays], axis=axis)
    im = np.stack([a.im * (den // a.den) for a in arrays], axis=axis)
    return ExactArray(re, im, den)


def tensordot(a: ExactArray, b: ExactArray, axes=1) -> ExactArray:
    re = np.tensordot(a.re, b.re, axes) - np.tensordot(a.im, b.im, axes)
    im = np.tensordot(a.re, b.im, axes) + np.tensordot(a.im, b.re, axes)
    return ExactArray(np.asarray(re, dtype=object), np.asarray(im, dtype=object), a.den * b.den)


def kron(a: ExactArray, b: ExactArray) -> ExactArray:
    re = np.kron(a.re, b.re) - np.kron(a.im, b.im)
    im = np.kron(a.re, b.im) + np.kron(a.im, b.re)
    return ExactArray(re.astype(object), im.astype(object), a.den * b.den)


# exact linear algebra through sympy's Gaussian-rational domain ----------

def _to_domain_matrix(mat: ExactArray):
    from sympy.polys.domains import QQ, QQ_I
    from sympy.polys.matrices import DomainMatrix

    if mat.ndim != 2:
        raise ValueError("expected a matrix")
    rows, cols = mat.shape
    d = mat.den
    entries = [
        [QQ_I(QQ(int(mat.re[i, j]), d), QQ(int(mat.im[i, j]), d)) for j in range(cols)]
        for i in range(rows)
    ]
    return DomainMatrix(entries, (rows, cols), QQ_I)


def _mpq(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def nullspace(mat: ExactArray) -> ExactArray:
    """Basis of the right kernel of ``mat``, one basis vector per row.

    Each basis vector is scaled so that its last nonzero entry equals 1.
    """
    rows, cols = mat.shape
    if rows == 0:
        return ExactArray.eye(cols)
    ns = _to_domain_matrix(mat).nullspace()
    ddm = ns.rep.to_ddm()
    basis = []
    for vec in ddm:
        vals = [(_mpq(z.x), _mpq(z.y)) for z in vec]
        last = next(v for v in reversed(vals) if v != (0, 0))
        a, b = last
        nrm = a * a + b * b
        ia, ib = a / nrm, -b / nrm
        basis.append([(x * ia - y * ib, x * ib + y * ia) for x, y in vals])
    if not basis:
        return ExactArray.zeros((0, cols))
    return ExactArray.from_parts([[x for x, _ in v] for v in basis], [[y for _, y in v] for v in basis])


def rank(mat: ExactArray) -> int:
    if 0 in mat.shape:
        return 0
    return int(_to_domain_matrix(mat).rank())
