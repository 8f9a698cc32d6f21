"""Alternating forms on R^n in an orthonormal frame.

Indices are 0-based throughout the API.  :meth:`AltForm.parse` reads the
familiar 1-based blade notation such as ``"2*e125 + 2*e345"``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction

__all__ = ["AltForm", "perm_sign", "sort_with_sign"]


def sort_with_sign(idx) -> tuple[int, tuple[int, ...]]:
    """Sort an index tuple; return (sign of the sorting permutation, sorted).

    The sign is 0 when an index repeats.
    """
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
            elif idx[j] == idx[j + 1]:
                return 0, tuple(idx)
    if len(set(idx)) != len(idx):
        return 0, tuple(idx)
    return sign, tuple(idx)


def perm_sign(idx) -> int:
    return sort_with_sign(idx)[0]


_TERM = re.compile(r"\s*([+-]?)\s*(?:([0-9/]+)\s*\*?\s*)?e([0-9]+)\s*")


@dataclass(frozen=True)
class AltForm:
    """A p-form stored as {strictly increasing index tuple: coefficient}.

    Zero coefficients are never stored, so two forms are equal exactly when
    their coefficient maps agree.
    """

    n: int
    p: int
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for idx, c in self.coeffs.items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != self.p:
                raise ValueError(f"index {idx} has wrong degree for a {self.p}-form")
            if any(i < 0 or i >= self.n for i in idx):
                raise ValueError(f"index {idx} out of range for n={self.n}")
            sign, key = sort_with_sign(idx)
            if sign == 0 or c == 0:
                continue
            clean[key] = clean.get(key, 0) + sign * c
        clean = {k: v for k, v in clean.items() if v != 0}
        object.__setattr__(self, "coeffs", clean)

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, n: int, p: int) -> "AltForm":
        return cls(n, p, {})

    @classmethod
    def scalar(cls, n: int, c) -> "AltForm":
        return cls(n, 0, {(): c})

    @classmethod
    def blade(cls, n: int, idx, c=1) -> "AltForm":
        return cls(n, len(idx), {tuple(idx): c})

    @classmethod
    def vector(cls, X) -> "AltForm":
        """The 1-form dual to the coefficient vector X."""
        X = list(X)
        return cls(len(X), 1, {(i,): x for i, x in enumerate(X)})

    @classmethod
    def parse(cls, n: int, text: str) -> "AltForm":
        """Parse 1-based blade notation, e.g. ``"e135 - e146 - 1/2*e236"``."""
        pos = 0
        coeffs: dict = {}
        p = None
        text = text.strip()
        while pos < len(text):
            m = _TERM.match(text, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse form {text!r} at position {pos}")
            sign = -1 if m.group(1) == "-" else 1
            c = Fraction(m.group(2)) if m.group(2) else Fraction(1)
            idx = tuple(int(ch) - 1 for ch in m.group(3))
            if p is None:
                p = len(idx)
            elif p != len(idx):
                raise ValueError("mixed degrees in form expression")
            s, key = sort_with_sign(idx)
            coeffs[key] = coeffs.get(key, 0) + s * sign * c
            pos = m.end()
        return cls(n, p or 0, coeffs)

    @staticmethod
    def basis_indices(n: int, p: int):
        return list(itertools.combinations(range(n), p))

    # queries -----------------------------------------------------------
    def __getitem__(self, idx) -> object:
        """Evaluate on an arbitrary index tuple, with the sorting sign."""
        sign, key = sort_with_sign(idx)
        if sign == 0:
            return 0
        return sign * self.coeffs.get(key, 0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def items(self):
        return sorted(self.coeffs.items())

    def norm_sq(self):
        """Sum of squared coefficients over increasing index tuples."""
        return sum((c * c for c in self.coeffs.values()), 0)

    def map_coeffs(self, fn) -> "AltForm":
        return AltForm(self.n, self.p, {k: fn(v) for k, v in self.coeffs.items()})

    # linear structure ---------------------------------------------------
    def _check(self, other: "AltForm") -> None:
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "AltForm") -> "AltForm":
        self._check(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if other.p != self.p:
            raise ValueError("cannot add forms of different degree")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return AltForm(self.n, self.p, out)

    def __neg__(self) -> "AltForm":
        return self.map_coeffs(lambda v: -v)

    def __sub__(self, other: "AltForm") -> "AltForm":
        return self + (-other)

    def __mul__(self, c) -> "AltForm":
        if isinstance(c, AltForm):
            return NotImplemented
        return self.map_coeffs(lambda v: v * c)

    __rmul__ = __mul__

    # exterior algebra ---------------------------------------------------
    def wedge(self, other: "AltForm") -> "AltForm":
        self._check(other)
        out: dict = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                sign, key = sort_with_sign(i + j)
                if sign:
                    out[key] = out.get(key, 0) + sign * a * b
        return AltForm(self.n, self.p + other.p, out)

    def contract(self, X) -> "AltForm":
        """Interior product X⌟ω for a coefficient vector X."""
        X = list(X)
        if len(X) != self.n:
            raise ValueError(f"vector of length {len(X)} for n={self.n}")
        if self.p == 0:
            return AltForm.zero(self.n, 0)
        out: dict = {}
        for idx, c in self.coeffs.items():
            for r, i in enumerate(idx):
                if X[i] == 0:
                    continue
                key = idx[:r] + idx[r + 1:]
                out[key] = out.get(key, 0) + (-1) ** r * X[i] * c
        return AltForm(self.n, self.p - 1, out)

    def contract_basis(self, i: int) -> "AltForm":
        X = [0] * self.n
        X[i] = 1
        return self.contract(X)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for idx, c in self.items():
            label = "e" + "".join(str(i + 1) for i in idx) if idx else "1"
            parts.append(f"{c}*{label}")
        return " + ".join(parts)


def wedge(a: AltForm, b: AltForm) -> AltForm:
    return a.wedge(b)


def contract(X, w: AltForm) -> AltForm:
    return w.contract(X)


def random_form(n: int, p: int, rng, low: int = -3, high: int = 3, denominators=(1, 2, 3)) -> AltForm:
    """Random p-form with rational coefficients in [low, high]."""
    coeffs = {}
    for idx in itertools.combinations(range(n), p):
        q = int(rng.choice(denominators))
        coeffs[idx] = Fraction(int(rng.integers(low * q, high * q + 1)), q)
    return AltForm(n, p, coeffs)


def random_vector(n: int, rng, low: int = -3, high: int = 3, denominators=(1, 2, 3)) -> list:
    out = []
    for _ in range(n):
        q = int(rng.choice(denominators))
        out.append(Fraction(int(rng.integers(low * q, high * q + 1)), q))
    return out
