"""Constant-structure frame models: brackets, connections and curvature.

A model is an orthonormal frame e_1..e_n with [e_i, e_j] = sum_k c[i,j,k] e_k
and a torsion 3-form with constant coefficients.  All tensors are numpy object
arrays of Fractions; connection coefficients follow
Gamma[i, j, k] = g(nabla_{e_i} e_j, e_k).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact import as_fraction
from .forms import AltForm
from .torsion import IdentityViolation, Torsion3Form, sigma_T

__all__ = [
    "GeometryError",
    "ModelGeometry",
    "CurvatureData",
    "ParallelTorsionResult",
    "levi_civita",
    "connection_s",
    "curvature",
    "covariant_derivative_form",
    "frame_d",
    "frame_delta",
    "is_parallel_torsion",
]


class GeometryError(ValueError):
    pass


def _zeros(*shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


@dataclass(frozen=True, eq=False)
class ModelGeometry:
    """Orthonormal frame with constant structure constants and torsion."""

    name: str
    n: int
    c: np.ndarray
    torsion: Torsion3Form
    metadata: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=object)
        if c.shape != (self.n,) * 3:
            raise GeometryError(f"structure constants must have shape {(self.n,) * 3}")
        c = np.vectorize(as_fraction, otypes=[object])(c)
        object.__setattr__(self, "c", c)
        if self.torsion.n != self.n:
            raise GeometryError("torsion dimension does not match the frame")
        if np.any(c + c.transpose(1, 0, 2) != 0):
            raise GeometryError(f"{self.name}: structure constants are not antisymmetric")
        jac = jacobiator(c)
        bad = np.argwhere(jac != 0)
        if len(bad):
            raise GeometryError(f"{self.name}: Jacobi identity fails at indices {tuple(int(x) for x in bad[0])}")

    @classmethod
    def from_brackets(cls, name: str, n: int, brackets, torsion, metadata=None) -> "ModelGeometry":
        """Build from a list of (i, j, {k: coefficient}) with 0-based indices."""
        c = _zeros(n, n, n)
        for i, j, coeffs in brackets:
            for k, v in coeffs.items():
                v = as_fraction(v)
                c[i, j, k] += v
                c[j, i, k] -= v
        if not isinstance(torsion, Torsion3Form):
            torsion = Torsion3Form(torsion)
        return cls(name, n, c, torsion, dict(metadata or {}))

    def cached(self, key, build):
        val = self._cache.get(key)
        if val is None:
            with self._lock:
                val = self._cache.get(key)
                if val is None:
                    val = build()
                    self._cache[key] = val
        return val

    @property
    def T(self) -> Torsion3Form:
        return self.torsion

    def bracket(self, X, Y) -> list:
        return [sum(X[i] * Y[j] * self.c[i, j, k] for i in range(self.n) for j in range(self.n)) for k in range(self.n)]


def jacobiator(c: np.ndarray) -> np.ndarray:
    """J[i,j,k,l]: coefficient of e_l in the cyclic sum [[e_i,e_j],e_k]."""
    cc = np.einsum("ijm,mkl->ijkl", c, c)
    return cc + cc.transpose(1, 2, 0, 3) + cc.transpose(2, 0, 1, 3)


def levi_civita(geom: ModelGeometry) -> np.ndarray:
    """Koszul formula in an orthonormal frame with constant brackets."""
    def build():
        c = geom.c
        c_jki = np.einsum("jki->ijk", c)
        c_kij = np.einsum("kij->ijk", c)
        return (c - c_jki + c_kij) * Fraction(1, 2)
    return geom.cached(("lc",), build)


def connection_s(geom: ModelGeometry, s) -> np.ndarray:
    """Gamma^s = Gamma^g + 2 s T."""
    s = as_fraction(s)
    return geom.cached(("conn", s), lambda: levi_civita(geom) + geom.torsion.tensor() * (2 * s))


@dataclass(frozen=True)
class CurvatureData:
    """R[i,j,k,l] = g(R(e_i,e_j) e_k, e_l), Ricci, scalar curvature and S."""

    s: Fraction
    R: np.ndarray
    ric: np.ndarray
    sca: Fraction
    S: np.ndarray


def curvature_tensor(c: np.ndarray, G: np.ndarray) -> np.ndarray:
    """R(e_i,e_j)e_k = nabla_i nabla_j e_k - nabla_j nabla_i e_k - nabla_[e_i,e_j] e_k."""
    first = np.einsum("jkm,imp->ijkp", G, G)
    return first - first.transpose(1, 0, 2, 3) - np.einsum("ijm,mkp->ijkp", c, G)


def s_tensor(T: Torsion3Form) -> np.ndarray:
    t = T.tensor()
    return np.einsum("aik,bik->ab", t, t)


def curvature(geom: ModelGeometry, s) -> CurvatureData:
    s = as_fraction(s)

    def build():
        R = curvature_tensor(geom.c, connection_s(geom, s))
        ric = np.einsum("aiib->ab", R)
        sca = sum(ric[a, a] for a in range(geom.n))
        return CurvatureData(s, R, ric, Fraction(sca), s_tensor(geom.torsion))

    return geom.cached(("curv", s), build)


# differentials of constant forms ----------------------------------------

def covariant_derivative_form(geom: ModelGeometry, w: AltForm, s) -> list:
    """[nabla^s_{e_j} w for j in frame] for a form with constant coefficients."""
    G = connection_s(geom, s)
    n = geom.n
    out = []
    for j in range(n):
        coeffs = {}
        for idx in AltForm.basis_indices(n, w.p):
            acc = 0
            for r, a in enumerate(idx):
                for m in range(n):
                    g = G[j, a, m]
                    if g:
                        acc -= g * w[idx[:r] + (m,) + idx[r + 1:]]
            if acc:
                coeffs[idx] = acc
        out.append(AltForm(n, w.p, coeffs))
    return out


def frame_d(geom: ModelGeometry, w: AltForm, s=0) -> AltForm:
    """d^s w = sum_j e_j ∧ nabla^s_{e_j} w (s = 0 is the exterior derivative)."""
    if w.n != geom.n:
        raise GeometryError("form dimension does not match the frame")
    out = AltForm.zero(geom.n, w.p + 1)
    for j, dw in enumerate(covariant_derivative_form(geom, w, s)):
        out = out + AltForm.blade(geom.n, (j,)).wedge(dw)
    return out


def frame_delta(geom: ModelGeometry, w: AltForm, s=0) -> AltForm:
    """delta^s w = -sum_j e_j ⌟ nabla^s_{e_j} w."""
    if w.n != geom.n:
        raise GeometryError("form dimension does not match the frame")
    out = AltForm.zero(geom.n, max(w.p - 1, 0))
    for j, dw in enumerate(covariant_derivative_form(geom, w, s)):
        out = out - dw.contract_basis(j)
    return out


@dataclass(frozen=True)
class ParallelTorsionResult:
    parallel: bool
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.parallel


def is_parallel_torsion(geom: ModelGeometry) -> ParallelTorsionResult:
    """Test nabla^{1/4} T = 0.

    When it holds, the consequences dT = 2 sigma_T, delta T = delta^s T = 0 and
    nabla^{1/4} sigma_T = 0 are asserted as well; a failure there raises
    :class:`IdentityViolation`.  A negative answer carries the first
    offending (frame index, blade) pair.
    """
    def build():
        quarter = Fraction(1, 4)
        T = geom.torsion.form
        for j, dT in enumerate(covariant_derivative_form(geom, T, quarter)):
            if not dT.is_zero():
                return ParallelTorsionResult(False, (j, dT.items()[0][0]))
        sig = sigma_T(T)
        if frame_d(geom, T, 0) != sig * 2:
            raise IdentityViolation("dT=2sigma", 1.0, str(frame_d(geom, T, 0) - sig * 2))
        for s in (Fraction(0), quarter, Fraction(-1, 3), Fraction(7, 5)):
            if not frame_delta(geom, T, s).is_zero():
                raise IdentityViolation("coclosed", 1.0, f"s={s}")
        for dsig in covariant_derivative_form(geom, sig, quarter):
            if not dsig.is_zero():
                raise IdentityViolation("sigma-parallel", 1.0, str(dsig))
        return ParallelTorsionResult(True, None)

    return geom.cached(("parallel",), build)
