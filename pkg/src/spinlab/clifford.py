"""Complex spin representations of Cl_n with e_i e_j + e_j e_i = -2 delta_ij.

The generators are gamma_j = i * G_j where G_j are the Hermitian Pauli
string generators of the Jordan-Wigner construction.  All entries lie in
{0, +-1, +-i}, so the same matrices are exact in both backends.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .backend import Backend, get_backend
from .forms import AltForm

__all__ = [
    "GammaRep",
    "build_rep",
    "vector_action",
    "form_action",
    "form_matrix",
    "contraction_sum",
    "wedge_sum",
]

_I2 = np.eye(2, dtype=complex)
_S1 = np.array([[0, 1], [1, 0]], dtype=complex)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S3 = np.array([[1, 0], [0, -1]], dtype=complex)


def _kron_all(mats) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _hermitian_generators(n: int) -> list[np.ndarray]:
    m = n // 2
    gens = []
    for k in range(m):
        head = [_S3] * k
        tail = [_I2] * (m - k - 1)
        gens.append(_kron_all(head + [_S1] + tail))
        gens.append(_kron_all(head + [_S2] + tail))
    if n % 2:
        gens.append(_kron_all([_S3] * m))
    return gens


@dataclass(frozen=True, eq=False)
class GammaRep:
    """Matrices gamma_1..gamma_n acting on the spin module of dimension dim.

    For odd n the volume element gamma_1...gamma_n acts as the scalar
    ``volume_scalar`` (+-1 when n = 3 mod 4, +-i when n = 1 mod 4) and
    ``volume_sign`` records which of the two inequivalent modules was built.
    For even n both fields are None.
    """

    n: int
    dim: int
    gamma: tuple
    backend: Backend
    volume_sign: int | None
    volume_scalar: complex | None
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    @property
    def eye(self):
        return self._cached(("eye",), lambda: self.backend.eye(self.dim))

    def _cached(self, key, build):
        val = self._cache.get(key)
        if val is None:
            with self._lock:
                val = self._cache.get(key)
                if val is None:
                    val = build()
                    self._cache[key] = val
        return val

    def product(self, idx) -> object:
        """Matrix of gamma_{i1} gamma_{i2} ... for an arbitrary index sequence."""
        idx = tuple(idx)
        if not idx:
            return self.eye
        if len(idx) == 1:
            return self.gamma[idx[0]]
        return self._cached(("prod", idx), lambda: self.product(idx[:-1]) @ self.gamma[idx[-1]])

    def vector(self, X):
        """Clifford matrix of the vector with frame coefficients X."""
        X = list(X)
        if len(X) != self.n:
            raise ValueError(f"vector of length {len(X)} for n={self.n}")
        return self.backend.lincomb(X, list(self.gamma)) if any(x != 0 for x in X) else self.backend.zeros((self.dim, self.dim))

    def form(self, w: AltForm):
        """Dense Clifford matrix of a form (sum over increasing blades)."""
        return form_matrix(self, w)

    def gamma_stack(self):
        return self._cached(("stack",), lambda: self.backend.stack(list(self.gamma)))

    def to_backend(self, backend) -> "GammaRep":
        return build_rep(self.n, backend, self.volume_sign or 1)


@lru_cache(maxsize=None)
def _build_rep_cached(n: int, backend: Backend, volume_sign: int) -> GammaRep:
    gens = [1j * g for g in _hermitian_generators(n)]
    dim = 2 ** (n // 2)
    vol_sign = None
    vol_scalar = None
    if n % 2:
        vol = np.eye(dim, dtype=complex)
        for g in gens:
            vol = vol @ g
        c = complex(vol[0, 0])
        unit = 1 if n % 4 == 3 else 1j
        if c / unit not in (1, -1):
            raise AssertionError("volume element is not a unit scalar")
        if round((c / unit).real) != volume_sign:
            # gamma -> -gamma flips the volume element for odd n
            gens = [-g for g in gens]
            c = -c
        vol_sign = volume_sign
        vol_scalar = c
    gamma = tuple(backend.asarray(np.round(g.real) + 1j * np.round(g.imag)) for g in gens)
    return GammaRep(n, dim, gamma, backend, vol_sign, vol_scalar)


def build_rep(n: int, backend="exact", volume_sign: int = 1) -> GammaRep:
    """Deterministic spin representation of Cl_n for 3 <= n <= 8.

    ``volume_sign`` selects, for odd n, whether the volume element acts as
    +1 (resp. +i) or its negative.  It is ignored for even n.
    """
    if not isinstance(n, (int, np.integer)) or not 3 <= n <= 8:
        raise ValueError(f"unsupported dimension n={n}; need 3 <= n <= 8")
    if volume_sign not in (1, -1):
        raise ValueError("volume_sign must be +1 or -1")
    if n % 2 == 0:
        volume_sign = 1
    return _build_rep_cached(int(n), get_backend(backend), int(volume_sign))


def _as_backend_spinor(rep: GammaRep, phi):
    return rep.backend.asarray(phi) if not hasattr(phi, "shape") else phi


def vector_action(rep: GammaRep, X, phi):
    """X . phi for a frame vector X and a spinor (or batch of spinors)."""
    phi = _as_backend_spinor(rep, phi)
    if phi.shape[0] != rep.dim:
        raise ValueError(f"spinor of length {phi.shape[0]} for dim={rep.dim}")
    return rep.vector(X) @ phi


def form_matrix(rep: GammaRep, w: AltForm):
    """Dense matrix of the Clifford action of w."""
    if w.n != rep.n:
        raise ValueError(f"form on R^{w.n} acting on rep of Cl_{rep.n}")
    items = w.items()
    if not items:
        return rep.backend.zeros((rep.dim, rep.dim))
    return rep.backend.lincomb([c for _, c in items], [rep.product(idx) for idx, _ in items])


def form_action(rep: GammaRep, w: AltForm, phi):
    """w . phi evaluated blade by blade: each blade applies its gammas in turn."""
    if w.n != rep.n:
        raise ValueError(f"form on R^{w.n} acting on rep of Cl_{rep.n}")
    phi = _as_backend_spinor(rep, phi)
    if phi.shape[0] != rep.dim:
        raise ValueError(f"spinor of length {phi.shape[0]} for dim={rep.dim}")
    bk = rep.backend
    total = bk.zeros(phi.shape)
    for idx, c in w.items():
        v = phi
        for i in reversed(idx):
            v = rep.gamma[i] @ v
        total = total + v * bk.scalar(c)
    return total


def contraction_sum(rep: GammaRep, w: AltForm):
    """Matrix of sum_j e_j . (e_j ⌟ w)."""
    bk = rep.backend
    out = bk.zeros((rep.dim, rep.dim))
    for j in range(rep.n):
        out = out + rep.gamma[j] @ form_matrix(rep, w.contract_basis(j))
    return out


def wedge_sum(rep: GammaRep, w: AltForm):
    """Matrix of sum_j e_j . (e_j ∧ w)."""
    bk = rep.backend
    out = bk.zeros((rep.dim, rep.dim))
    for j in range(rep.n):
        out = out + rep.gamma[j] @ form_matrix(rep, AltForm.blade(rep.n, (j,)).wedge(w))
    return out
