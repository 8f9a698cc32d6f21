"""Totally skew torsion 3-forms, the 4-form sigma_T, spectra of T on spinors
and the Clifford contraction identities built from T."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import exact as ex
from .backend import Backend
from .clifford import GammaRep, build_rep, form_matrix
from .forms import AltForm, random_form, random_vector

__all__ = [
    "IdentityViolation",
    "Torsion3Form",
    "sigma_T",
    "EigenSpace",
    "SpectralSplit",
    "t_spectrum",
    "eigenspace",
    "IdentityResult",
    "CONTRACTION_IDENTITIES",
    "contraction_residuals",
    "check_contraction_identities",
]


class IdentityViolation(AssertionError):
    """An algebraic identity failed; carries the identity id and a witness."""

    def __init__(self, identity: str, residual: float, witness=None):
        self.identity = identity
        self.residual = residual
        self.witness = witness
        super().__init__(f"{identity}: residual {residual:.3e} (witness {witness})")


def _is_exact_number(c) -> bool:
    return isinstance(c, (int, Fraction))


def sigma_T(T) -> AltForm:
    """The 4-form 1/2 sum_i (e_i ⌟ T) ∧ (e_i ⌟ T)."""
    w = T.form if isinstance(T, Torsion3Form) else T
    out = AltForm.zero(w.n, 4)
    for i in range(w.n):
        a = w.contract_basis(i)
        out = out + a.wedge(a)
    return out * Fraction(1, 2)


@dataclass(frozen=True)
class Torsion3Form:
    """A 3-form T with its norm ‖T‖² = sum_{i<j<k} T_ijk².

    On construction the norm convention is cross-checked against the
    spinorial identity sum_j (e_j⌟T)² = 2 sigma_T - 3‖T‖² in the exact
    representation (float representation for float coefficients).
    """

    form: AltForm
    norm_sq: object = field(init=False)
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        if self.form.p != 3 and not self.form.is_zero():
            raise ValueError(f"torsion must be a 3-form, got degree {self.form.p}")
        if self.form.is_zero() and self.form.p != 3:
            object.__setattr__(self, "form", AltForm.zero(self.form.n, 3))
        object.__setattr__(self, "norm_sq", self.form.norm_sq())
        if self.validate and 3 <= self.n <= 8:
            exact = all(_is_exact_number(c) for c in self.form.coeffs.values())
            rep = build_rep(self.n, "exact" if exact else "float")
            res = identity_norm(rep, self)
            if not rep.backend.is_zero(res):
                raise IdentityViolation("norm-convention", rep.backend.norm(res))

    @classmethod
    def parse(cls, n: int, text: str) -> "Torsion3Form":
        return cls(AltForm.parse(n, text))

    @property
    def n(self) -> int:
        return self.form.n

    def __getitem__(self, idx):
        return self.form[idx]

    def contract(self, X) -> AltForm:
        return self.form.contract(X)

    def contract_basis(self, i: int) -> AltForm:
        return self.form.contract_basis(i)

    def vector(self, X, Y) -> list:
        """T(X, Y) as a frame vector: sum_k T(X, Y, e_k) e_k."""
        n = self.n
        out = []
        for k in range(n):
            acc = 0
            for i in range(n):
                if X[i] == 0:
                    continue
                for j in range(n):
                    if Y[j] == 0:
                        continue
                    t = self.form[(i, j, k)]
                    if t:
                        acc += X[i] * Y[j] * t
            out.append(acc)
        return out

    def tensor(self) -> np.ndarray:
        """Full antisymmetric coefficient array T[i, j, k] (object dtype)."""
        n = self.n
        out = np.zeros((n, n, n), dtype=object)
        for (i, j, k), c in self.form.coeffs.items():
            for a, b, d, sgn in ((i, j, k, 1), (j, k, i, 1), (k, i, j, 1), (j, i, k, -1), (i, k, j, -1), (k, j, i, -1)):
                out[a, b, d] = sgn * c
        return out

    def sigma(self) -> AltForm:
        return sigma_T(self)

    def scaled(self, c) -> "Torsion3Form":
        return Torsion3Form(self.form * c)


def _basis(n: int, i: int) -> list:
    e = [0] * n
    e[i] = 1
    return e


# contraction identities --------------------------------------------------

def identity_frame_torsion(rep: GammaRep, T: Torsion3Form, X):
    """sum_j e_j . T(X, e_j) - 2 (X⌟T)."""
    n = rep.n
    lhs = rep.backend.zeros((rep.dim, rep.dim))
    for j in range(n):
        v = T.vector(X, _basis(n, j))
        if any(v):
            lhs = lhs + rep.gamma[j] @ rep.vector(v)
    return lhs - form_matrix(rep, T.contract(X)) * 2


def identity_frame_torsion_mirror(rep: GammaRep, T: Torsion3Form, X):
    """sum_j T(X, e_j) . e_j + 2 (X⌟T)."""
    n = rep.n
    lhs = rep.backend.zeros((rep.dim, rep.dim))
    for j in range(n):
        v = T.vector(X, _basis(n, j))
        if any(v):
            lhs = lhs + rep.vector(v) @ rep.gamma[j]
    return lhs + form_matrix(rep, T.contract(X)) * 2


def identity_norm(rep: GammaRep, T: Torsion3Form):
    """sum_j (e_j⌟T)² - (2 sigma_T - 3‖T‖²)."""
    bk = rep.backend
    lhs = bk.zeros((rep.dim, rep.dim))
    for j in range(rep.n):
        a = form_matrix(rep, T.contract_basis(j))
        lhs = lhs + a @ a
    rhs = form_matrix(rep, sigma_T(T)) * 2 - rep.eye * bk.scalar(3 * T.norm_sq)
    return lhs - rhs


def identity_swap(rep: GammaRep, T: Torsion3Form, X):
    """sum_j e_j . (T(X,e_j)⌟T) + sum_j T(X,e_j) . (e_j⌟T)."""
    n = rep.n
    out = rep.backend.zeros((rep.dim, rep.dim))
    for j in range(n):
        v = T.vector(X, _basis(n, j))
        if not any(v):
            continue
        out = out + rep.gamma[j] @ form_matrix(rep, T.contract(v))
        out = out + rep.vector(v) @ form_matrix(rep, T.contract_basis(j))
    return out


def identity_mixed_product(rep: GammaRep, T: Torsion3Form, X):
    """sum_j T(X,e_j).(e_j⌟T) + 1/2 sum_j e_j.(X⌟T).(e_j⌟T) - 3/2 (X⌟T).T."""
    n = rep.n
    bk = rep.backend
    xt = form_matrix(rep, T.contract(X))
    out = bk.zeros((rep.dim, rep.dim))
    half = Fraction(1, 2)
    for j in range(n):
        ejt = form_matrix(rep, T.contract_basis(j))
        v = T.vector(X, _basis(n, j))
        if any(v):
            out = out + rep.vector(v) @ ejt
        out = out + rep.gamma[j] @ xt @ ejt * bk.scalar(half)
    return out - xt @ form_matrix(rep, T.form) * bk.scalar(Fraction(3, 2))


def identity_sigma_square(rep: GammaRep, T: Torsion3Form):
    """sigma_T - 1/2 (‖T‖² - T²)."""
    bk = rep.backend
    t = form_matrix(rep, T.form)
    rhs = (rep.eye * bk.scalar(T.norm_sq) - t @ t) * bk.scalar(Fraction(1, 2))
    return form_matrix(rep, sigma_T(T)) - rhs


CONTRACTION_IDENTITIES = {
    "frame-torsion": identity_frame_torsion,
    "frame-torsion-mirror": identity_frame_torsion_mirror,
    "norm": identity_norm,
    "swap": identity_swap,
    "mixed-product": identity_mixed_product,
    "sigma-square": identity_sigma_square,
}

_NEEDS_X = {"frame-torsion", "frame-torsion-mirror", "swap", "mixed-product"}


def contraction_residuals(rep: GammaRep, T: Torsion3Form, X) -> dict:
    """Residual matrices of all contraction identities at one (T, X)."""
    out = {}
    for name, fn in CONTRACTION_IDENTITIES.items():
        out[name] = fn(rep, T, X) if name in _NEEDS_X else fn(rep, T)
    return out


@dataclass(frozen=True)
class IdentityResult:
    identity: str
    trials: int
    max_residual: float
    tolerance: float
    passed: bool
    witness: object = None


def check_contraction_identities(rep: GammaRep, T: Torsion3Form | None = None, trials: int = 20, seed: int = 0,
                                 raise_on_failure: bool = False) -> list:
    """Check every contraction identity on ``trials`` random vectors X.

    When ``T`` is None a fresh random rational 3-form is drawn per trial.
    Returns one :class:`IdentityResult` per identity.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    bk = rep.backend
    worst = {name: (0.0, None) for name in CONTRACTION_IDENTITIES}
    for t in range(trials):
        TT = T if T is not None else Torsion3Form(random_form(rep.n, 3, rng), validate=False)
        X = random_vector(rep.n, rng)
        for name, res in contraction_residuals(rep, TT, X).items():
            r = 0.0 if (bk.is_exact and res.is_zero()) else bk.norm(res)
            if r > worst[name][0]:
                worst[name] = (r, {"trial": t, "X": [str(x) for x in X], "T": str(TT.form)})
    results = []
    for name, (r, wit) in worst.items():
        ok = r <= bk.tolerance
        results.append(IdentityResult(name, trials, r, bk.tolerance, ok, None if ok else wit))
        if raise_on_failure and not ok:
            raise IdentityViolation(name, r, wit)
    return results


# spectra ------------------------------------------------------------------

@dataclass(frozen=True)
class EigenSpace:
    """One eigenvalue of T with its multiplicity and an orthogonal eigenbasis.

    ``value`` is a Fraction when the eigenvalue was snapped to a rational and
    certified by an exact kernel computation; otherwise it is
    a float and ``certified`` is False.  ``basis`` has shape (dim, mult).
    """

    value: object
    multiplicity: int
    basis: object
    certified: bool


@dataclass(frozen=True)
class SpectralSplit:
    spaces: tuple

    def values(self) -> list:
        return [s.value for s in self.spaces]

    def multiplicities(self) -> dict:
        return {s.value: s.multiplicity for s in self.spaces}

    def __iter__(self):
        return iter(self.spaces)

    def space(self, value) -> EigenSpace:
        for s in self.spaces:
            if s.value == value:
                return s
        raise KeyError(value)


def _snap(x: float, den: int = 2, tol: float = 1e-8):
    """Nearest rational with denominator ``den`` when within ``tol``.

    A rational eigenvalue of a 3-form whose coefficients have common
    denominator q is an algebraic integer divided by q, hence lies in (1/q)Z.
    """
    k = round(den * x)
    if abs(den * x - k) < den * tol:
        return Fraction(k, den)
    return None


def eigenspace(rep: GammaRep, w: AltForm, value) -> object:
    """Exact kernel of (w - value) as columns of a (dim, k) exact array."""
    mat = form_matrix(rep if rep.backend.is_exact else rep.to_backend("exact"), w)
    shifted = mat - ex.ExactArray.eye(mat.shape[0]) * ex.as_fraction(value)
    return _orthogonalize(ex.nullspace(shifted).T)


def _orthogonalize(cols: ex.ExactArray) -> ex.ExactArray:
    """Exact Gram-Schmidt without normalization (columns stay rational)."""
    vecs = []
    for j in range(cols.shape[1]):
        v = cols[:, j]
        for u in vecs:
            num = _hdot(v, u)
            den = _hdot(u, u)
            v = v - u * (num / den)
        vecs.append(v)
    if not vecs:
        return ex.ExactArray.zeros((cols.shape[0], 0))
    return ex.stack(vecs, axis=1)


def _hdot(a: ex.ExactArray, b: ex.ExactArray) -> ex.ExactArray:
    prod = a * b.conj()
    return ex.ExactArray(np.asarray(prod.re.sum(), dtype=object), np.asarray(prod.im.sum(), dtype=object), prod.den)


def t_spectrum(rep: GammaRep, T, snap_tol: float = 1e-8) -> SpectralSplit:
    """Eigen-decomposition of the Clifford action of T on spinors.

    Eigenvalues come from a Hermitian float eigensolver.  Those within
    ``snap_tol`` of a multiple of 1/q (q the common denominator of the
    coefficients of T) are snapped and re-certified
    by an exact kernel computation, whose dimension must equal the float
    multiplicity.  With the exact backend the returned bases are exact and
    pairwise orthogonal; with the float backend they are orthonormal.
    """
    form = T.form if isinstance(T, Torsion3Form) else T
    if form.n != rep.n:
        raise ValueError(f"form on R^{form.n} acting on rep of Cl_{rep.n}")
    mat = rep.backend.to_complex(form_matrix(rep, form))
    if not np.allclose(mat, mat.conj().T, atol=1e-12):
        raise ValueError("Clifford action of a 3-form must be Hermitian")
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as err:
        raise RuntimeError(f"eigensolver failed: {err}") from err
    den = None
    if all(isinstance(c, (int, Fraction)) for c in form.coeffs.values()):
        den = 1
        for c in form.coeffs.values():
            den = math.lcm(den, Fraction(c).denominator)
    groups = []
    for k, v in enumerate(vals):
        if groups and abs(v - groups[-1][0][-1]) < 1e-6:
            groups[-1][0].append(v)
            groups[-1][1].append(k)
        else:
            groups.append(([v], [k]))
    spaces = []
    for gvals, idx in groups:
        mean = float(np.mean(gvals))
        snapped = _snap(mean, den, snap_tol) if den else None
        mult = len(idx)
        if snapped is not None:
            basis = eigenspace(rep, form, snapped)
            if basis.shape[1] != mult:
                raise RuntimeError(f"exact multiplicity {basis.shape[1]} != float multiplicity {mult} for {snapped}")
            if not rep.backend.is_exact:
                basis = vecs[:, idx]
            spaces.append(EigenSpace(snapped, mult, basis, True))
        else:
            spaces.append(EigenSpace(mean, mult, vecs[:, idx], False))
    return SpectralSplit(tuple(spaces))
