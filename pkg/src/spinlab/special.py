"""Algebraic consequences of a spinor that is parallel for the characteristic
connection: Ricci actions for the whole family nabla^s, the S-endomorphism,
integrability conditions, Killing numbers and slashed-D eigenvalues.

Everything here is pointwise Clifford algebra on the exact backend.  A datum
may carry a single spinor (shape (dim,)) or a basis of spinors as columns;
all checks then run on every column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import sympy

from .clifford import GammaRep, form_matrix
from .exact import ExactArray, as_fraction
from .forms import AltForm
from .geometry import ModelGeometry, curvature
from .torsion import IdentityViolation, Torsion3Form, sigma_T

__all__ = [
    "DatumError",
    "ParallelSpinorDatum",
    "ricci_parallel_expressions",
    "ricci_action_parallel",
    "ricci_matrix_from_action",
    "ricci_eigenvalues_parallel",
    "scalar_contraction_residual",
    "s_endomorphism_parallel",
    "integrability_parallel",
    "harmony_factor",
    "harmony_einstein",
    "killing_number",
    "killing_correspondence",
    "slashed_eigen_parallel",
    "slashed_on_killing",
    "tspin_residual",
    "dirac_from_slashed",
    "sasakian_checks",
]

GENERIC = "generic"
EINSTEIN_KILLING = "einstein-killing"


class DatumError(ValueError):
    """A parallel-spinor datum fails one of its defining equations."""


def _basis(n: int, i: int) -> list:
    e = [0] * n
    e[i] = 1
    return e


def _frame(n: int):
    return [_basis(n, i) for i in range(n)]


def _check_zero(name: str, residual, witness=None) -> None:
    if not residual.is_zero():
        raise IdentityViolation(name, residual.norm(), witness)


# Clifford sums built from T ---------------------------------------------

def tx_sum(rep: GammaRep, T: Torsion3Form, X):
    """sum_j T(X, e_j) . (e_j ⌟ T)."""
    out = rep.backend.zeros((rep.dim, rep.dim))
    for j in range(rep.n):
        v = T.vector(X, _basis(rep.n, j))
        if any(v):
            out = out + rep.vector(v) @ form_matrix(rep, T.contract_basis(j))
    return out


def ex_sum(rep: GammaRep, T: Torsion3Form, X):
    """sum_j e_j . (T(X, e_j) ⌟ T)."""
    out = rep.backend.zeros((rep.dim, rep.dim))
    for j in range(rep.n):
        v = T.vector(X, _basis(rep.n, j))
        if any(v):
            out = out + rep.gamma[j] @ form_matrix(rep, T.contract(v))
    return out


def exe_sum(rep: GammaRep, T: Torsion3Form, X):
    """sum_j e_j . (X ⌟ T) . (e_j ⌟ T)."""
    xt = form_matrix(rep, T.contract(X))
    out = rep.backend.zeros((rep.dim, rep.dim))
    for j in range(rep.n):
        out = out + rep.gamma[j] @ xt @ form_matrix(rep, T.contract_basis(j))
    return out


def ricci_parallel_expressions(rep: GammaRep, T: Torsion3Form, X, s) -> tuple:
    """Both closed forms of the Ricci action on a parallel spinor, as endomorphisms.

    First:  -((16s^2-1)/4) sum_j e_j (T(X,e_j)⌟T) + ((16s^2+3)/4)(X⌟sigma_T)
    Second:  ((16s^2-1)/4) sum_j T(X,e_j)(e_j⌟T) + ((16s^2+3)/4)(X⌟sigma_T)
    They agree for every 3-form, so this is also a pure Clifford identity.
    """
    s = as_fraction(s)
    a = (16 * s * s - 1) / 4
    b = (16 * s * s + 3) / 4
    sig = form_matrix(rep, sigma_T(T).contract(X)) * b
    return ex_sum(rep, T, X) * (-a) + sig, tx_sum(rep, T, X) * a + sig


# the datum ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ParallelSpinorDatum:
    """T, a constant T-eigenvalue gamma and spinor(s) phi0 with T phi0 = gamma phi0.

    ``kind="einstein-killing"`` additionally asserts
    (X⌟T) phi0 + (3 gamma / n) X phi0 = 0 for all frame X and
    gamma^2 = 2n/(9-n) |T|^2.
    """

    rep: GammaRep
    T: Torsion3Form
    gamma: Fraction
    phi0: ExactArray
    kind: str = GENERIC
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gamma", as_fraction(self.gamma))
        if self.kind not in (GENERIC, EINSTEIN_KILLING):
            raise DatumError(f"unknown datum kind {self.kind!r}")
        if self.phi0.is_zero():
            raise DatumError("phi0 must be non-trivial")
        T_mat = form_matrix(self.rep, self.T.form)
        if not (T_mat @ self.phi0 - self.phi0 * self.gamma).is_zero():
            raise DatumError(f"phi0 is not a T-eigenspinor for gamma={self.gamma}")
        if self.kind == EINSTEIN_KILLING:
            n = self.n
            for i, X in enumerate(_frame(n)):
                r = form_matrix(self.rep, self.T.contract(X)) @ self.phi0 \
                    + self.rep.vector(X) @ self.phi0 * (3 * self.gamma / n)
                if not r.is_zero():
                    raise DatumError(f"Killing-type relation fails for e{i + 1}")
            if n != 9 and self.gamma ** 2 != Fraction(2 * n, 9 - n) * self.T.norm_sq:
                raise DatumError("gamma^2 differs from 2n/(9-n) |T|^2")

    @property
    def n(self) -> int:
        return self.rep.n

    @property
    def columns(self) -> int:
        return 1 if self.phi0.ndim == 1 else self.phi0.shape[1]

    def column(self, k: int) -> ExactArray:
        return self.phi0 if self.phi0.ndim == 1 else self.phi0[:, k]

    def act(self, X):
        return self.rep.vector(X) @ self.phi0


def ricci_action_parallel(datum: ParallelSpinorDatum, s, X):
    """Ric^s(X) . phi0 from the torsion alone.

    Both closed forms are evaluated and must agree; at s = 0 the
    Riemannian reformulation that uses the eigenvalue gamma is checked too.
    """
    rep, T, phi = datum.rep, datum.T, datum.phi0
    s = as_fraction(s)
    first, second = ricci_parallel_expressions(rep, T, X, s)
    out = second @ phi
    _check_zero("ricci-action-two-forms", first @ phi - out, X)
    if s == 0:
        alt = exe_sum(rep, T, X) @ phi * Fraction(1, 8) \
            - form_matrix(rep, T.contract(X)) @ phi * (3 * datum.gamma / 8) \
            + form_matrix(rep, sigma_T(T).contract(X)) @ phi * Fraction(3, 4)
        _check_zero("riemannian-ricci-action", alt - out, X)
    return out


def _real_inner(a: ExactArray, b: ExactArray) -> Fraction:
    prod = a * b.conj()
    return sum((Fraction(*_re(prod, k)) for k in range(prod.shape[0])), Fraction(0))


def _re(arr: ExactArray, k: int):
    re, _ = arr.entry(k)
    return (re.numerator, re.denominator)


def ricci_matrix_from_action(rep: GammaRep, action, psi: ExactArray) -> np.ndarray:
    """Recover the matrix r with action(e_a) = sum_b r[a,b] e_b . psi.

    Since Re<e_a psi, e_b psi> = delta_ab |psi|^2, the coefficients are
    Re<action(e_a), e_b psi> / |psi|^2; the reconstruction is then checked
    exactly, so a non-vectorial action raises :class:`IdentityViolation`.
    """
    n = rep.n
    norm = _real_inner(psi, psi)
    r = np.empty((n, n), dtype=object)
    for a in range(n):
        va = action(_basis(n, a))
        recon = psi * 0
        for b in range(n):
            eb = rep.gamma[b] @ psi
            r[a, b] = _real_inner(va, eb) / norm
            if r[a, b]:
                recon = recon + eb * r[a, b]
        _check_zero("ricci-matrix-reconstruction", va - recon, a)
    return r


def sorted_eigenvalues(mat: np.ndarray) -> list:
    """Exact eigenvalues (with multiplicity) of a rational symmetric matrix."""
    n = mat.shape[0]
    off = any(mat[i, j] != 0 for i in range(n) for j in range(n) if i != j)
    if not off:
        return sorted(Fraction(mat[i, i]) for i in range(n))
    M = sympy.Matrix(n, n, lambda i, j: sympy.Rational(mat[i, j].numerator, mat[i, j].denominator))
    vals = []
    for v, m in M.eigenvals().items():
        if not v.is_rational:
            raise ValueError(f"irrational eigenvalue {v}")
        vals.extend([Fraction(int(v.p), int(v.q))] * m)
    return sorted(vals)


def ricci_eigenvalues_parallel(datum: ParallelSpinorDatum, s) -> tuple:
    """(Ricci matrix, sorted eigenvalues) of Ric^s read off from its action on phi0.

    Every column of phi0 must give the same matrix.
    """
    out = None
    for k in range(datum.columns):
        psi = datum.column(k)
        sub = ParallelSpinorDatum(datum.rep, datum.T, datum.gamma, psi, GENERIC)
        r = ricci_matrix_from_action(datum.rep, lambda X: ricci_action_parallel(sub, s, X), psi)
        if out is not None and np.any(r != out):
            raise IdentityViolation("ricci-matrix-column-dependence", 1.0, k)
        out = r
    return out, sorted_eigenvalues(out)


def scalar_contraction_residual(datum: ParallelSpinorDatum, s):
    """Residual of sum_a e_a Ric^s(e_a) phi0 = 4 sigma_T phi0 + (3(16s^2-1)/2)|T|^2 phi0."""
    rep, phi = datum.rep, datum.phi0
    s = as_fraction(s)
    lhs = phi * 0
    for a, X in enumerate(_frame(datum.n)):
        lhs = lhs + rep.gamma[a] @ ricci_action_parallel(datum, s, X)
    rhs = form_matrix(rep, sigma_T(datum.T)) @ phi * 4 + phi * (Fraction(3, 2) * (16 * s * s - 1) * datum.T.norm_sq)
    return lhs - rhs


def s_endomorphism_parallel(datum: ParallelSpinorDatum, X):
    """S(X) . phi0 from the torsion, with both closed forms cross-checked.

    Also asserts Ric^s = Ric^c - ((16s^2-1)/4) S on phi0 for a few s, and
    agreement with the direct S-tensor action sum_b S(X, e_b) e_b . phi0.
    """
    rep, T, phi = datum.rep, datum.T, datum.phi0
    xs = form_matrix(rep, sigma_T(T).contract(X)) @ phi
    first = ex_sum(rep, T, X) @ phi - xs
    second = exe_sum(rep, T, X) @ phi * Fraction(1, 2) \
        - form_matrix(rep, T.contract(X)) @ phi * (3 * datum.gamma / 2) - xs
    _check_zero("s-action-two-forms", first - second, X)
    t = T.tensor()
    row = [sum(X[a] * t[a, i, k] * t[b, i, k] for a in range(datum.n) for i in range(datum.n) for k in range(datum.n))
           for b in range(datum.n)]
    _check_zero("s-action-tensor", rep.vector(row) @ phi - first, X)
    ric_c = ricci_action_parallel(datum, Fraction(1, 4), X)
    for s in (Fraction(0), Fraction(1, 2), Fraction(-2, 3)):
        diff = ricci_action_parallel(datum, s, X) - (ric_c - first * ((16 * s * s - 1) / 4))
        _check_zero("ricci-s-from-characteristic", diff, (X, s))
    return first


def integrability_parallel(geom: ModelGeometry, rep: GammaRep, phi0, s) -> tuple:
    """Residuals of Ric^s(X) phi0 = 2s(3-4s)(X⌟sigma_T) phi0 (stacked over X)
    and Sca^s phi0 = -8s(3-4s) sigma_T phi0, with curvature from the model."""
    s = as_fraction(s)
    cd = curvature(geom, s)
    sig = sigma_T(geom.torsion)
    k = 2 * s * (3 - 4 * s)
    rows = []
    for a in range(geom.n):
        ric_row = [cd.ric[a, b] for b in range(geom.n)]
        lhs = rep.vector(ric_row) @ phi0 if any(ric_row) else phi0 * 0
        rows.append(lhs - form_matrix(rep, sig.contract_basis(a)) @ phi0 * k)
    from .exact import stack
    ricci = stack(rows, axis=0)
    scalar = phi0 * cd.sca + form_matrix(rep, sig) @ phi0 * (4 * k)
    return ricci, scalar


def curvature_action(geom: ModelGeometry, rep: GammaRep, s, X, phi0):
    """Ric^s(X) . phi0 with Ric^s taken from the model curvature."""
    ric = curvature(geom, s).ric
    row = [sum(X[a] * ric[a, b] for a in range(geom.n)) for b in range(geom.n)]
    return rep.vector(row) @ phi0


# Einstein-Killing type ---------------------------------------------------

def harmony_factor(gamma, n: int, s) -> Fraction:
    """3 gamma^2 (-3 + 3n - 144 s^2 + 16 n s^2) / (4 n^2), i.e. Sca^s / n."""
    s = as_fraction(s)
    g2 = as_fraction(gamma) ** 2
    return 3 * g2 * (-3 + 3 * n - 144 * s * s + 16 * n * s * s) / (4 * n * n)


def _require_ek(datum: ParallelSpinorDatum) -> None:
    if datum.kind != EINSTEIN_KILLING:
        raise DatumError(f"{datum.label or 'datum'} is not of Einstein-Killing type")


def harmony_einstein(datum: ParallelSpinorDatum, s) -> Fraction:
    """Check Ric^s(X) phi0 = (Sca^s/n) X phi0 for every frame X; return Sca^s/n."""
    _require_ek(datum)
    f = harmony_factor(datum.gamma, datum.n, s)
    for X in _frame(datum.n):
        _check_zero("harmony", ricci_action_parallel(datum, s, X) - datum.act(X) * f, X)
    return f


def killing_number(gamma, n: int, s) -> Fraction:
    """zeta = 3(1-4s) gamma / (4n)."""
    s = as_fraction(s)
    return 3 * (1 - 4 * s) * as_fraction(gamma) / (4 * n)


def killing_correspondence(datum: ParallelSpinorDatum, s) -> Fraction:
    """Return zeta after checking nabla^s_X phi0 = ((4s-1)/4)(X⌟T) phi0 = zeta X phi0
    and Ric^c(X) phi0 = (X⌟sigma_T) phi0 = (3 gamma^2 (n-3)/n^2) X phi0."""
    _require_ek(datum)
    rep, T, phi, n = datum.rep, datum.T, datum.phi0, datum.n
    s = as_fraction(s)
    z = killing_number(datum.gamma, n, s)
    ric_c = 3 * datum.gamma ** 2 * (n - 3) / Fraction(n * n)
    for X in _frame(n):
        nab = form_matrix(rep, T.contract(X)) @ phi * ((4 * s - 1) / 4)
        _check_zero("killing-equation", nab - datum.act(X) * z, X)
        _check_zero("characteristic-einstein", ricci_action_parallel(datum, Fraction(1, 4), X) - datum.act(X) * ric_c, X)
        _check_zero("sigma-einstein", form_matrix(rep, sigma_T(T).contract(X)) @ phi - datum.act(X) * ric_c, X)
    return z


# slashed Dirac operator --------------------------------------------------

def _nabla_parallel(datum: ParallelSpinorDatum, s, i: int):
    """nabla^s_{e_i} phi0 = ((4s-1)/4)(e_i⌟T) phi0 for a nabla^c-parallel phi0."""
    return form_matrix(datum.rep, datum.T.contract_basis(i)) @ datum.phi0 * ((4 * as_fraction(s) - 1) / 4)


def _dirac_parallel(datum: ParallelSpinorDatum, s):
    out = datum.phi0 * 0
    for i in range(datum.n):
        out = out + datum.rep.gamma[i] @ _nabla_parallel(datum, s, i)
    return out


def slashed_eigen_parallel(datum: ParallelSpinorDatum, s) -> Fraction:
    """beta with slashed-D^s phi0 = beta phi0, beta = -((4s-1)/4)(gamma^2 + 2|T|^2).

    Checked along three routes: the defining sum, the Clifford form
    -1/2 sum_j e_j T nabla_j - 1/2 T D, and slashed-D^c + ((4s-1)/4)(2 sigma_T - 3|T|^2).
    """
    rep, T, phi = datum.rep, datum.T, datum.phi0
    s = as_fraction(s)
    beta = -((4 * s - 1) / 4) * (datum.gamma ** 2 + 2 * T.norm_sq)
    nab = [_nabla_parallel(datum, s, i) for i in range(datum.n)]
    direct = phi * 0
    for i in range(datum.n):
        direct = direct + form_matrix(rep, T.contract_basis(i)) @ nab[i]
    _check_zero("slashed-eigen", direct - phi * beta, s)
    T_mat = form_matrix(rep, T.form)
    D = _dirac_parallel(datum, s)
    _check_zero("dirac-on-parallel", D - T_mat @ phi * (3 * (4 * s - 1) / Fraction(4)), s)
    cl = phi * 0
    for j in range(datum.n):
        cl = cl + rep.gamma[j] @ (T_mat @ nab[j])
    cl = (cl + T_mat @ D) * Fraction(-1, 2)
    _check_zero("slashed-clifford-form", cl - direct, s)
    shift = (form_matrix(rep, sigma_T(T)) @ phi * 2 - phi * (3 * T.norm_sq)) * ((4 * s - 1) / 4)
    _check_zero("slashed-shift", shift - direct, s)
    return beta


def slashed_on_killing(datum: ParallelSpinorDatum, s) -> Fraction:
    """For Einstein-Killing data: slashed-D^s phi0 = 3 zeta T phi0 and
    = -(3/n) T D^s phi0; returns beta = 3 gamma zeta."""
    _require_ek(datum)
    rep, T, phi, n = datum.rep, datum.T, datum.phi0, datum.n
    s = as_fraction(s)
    z = killing_number(datum.gamma, n, s)
    # the Killing equation lets nabla_{e_i} phi0 = zeta e_i phi0
    slashed = phi * 0
    for i in range(n):
        slashed = slashed + form_matrix(rep, T.contract_basis(i)) @ (rep.gamma[i] @ phi) * z
    T_mat = form_matrix(rep, T.form)
    _check_zero("slashed-killing", slashed - T_mat @ phi * (3 * z), s)
    _check_zero("twistor-slashed", slashed + T_mat @ _dirac_parallel(datum, s) * Fraction(3, n), s)
    beta = 3 * datum.gamma * z
    _check_zero("killing-beta", slashed - phi * beta, s)
    return beta


def tspin_residual(geom: ModelGeometry, rep: GammaRep, s, jet):
    """slashed-D^s phi + (3/n) T . D^s phi on a jet (zero on twistor jets)."""
    from .operators import spin_operators
    ops = spin_operators(geom, rep, s)
    nab = ops.nablas(jet)
    D = ops.dirac_from(nab).value
    return ops.slashed(jet, nab) + ops.T_mat @ D * ops.c(Fraction(3, ops.n))


def dirac_from_slashed(datum: ParallelSpinorDatum, s0, beta=None):
    """D^{s0} phi0 = ((n-6) beta / (3 gamma)) phi0 + (2(1-4 s0)/gamma) sigma_T phi0.

    ``beta`` defaults to the parallel-spinor eigenvalue.  The result is
    checked against D^{s0} phi0 = (3(4 s0 - 1) gamma / 4) phi0.
    """
    if datum.gamma == 0:
        raise DatumError("the relation needs a non-zero T-eigenvalue")
    rep, phi, n, g = datum.rep, datum.phi0, datum.n, datum.gamma
    s0 = as_fraction(s0)
    if beta is None:
        beta = slashed_eigen_parallel(datum, s0)
    beta = as_fraction(beta)
    out = phi * ((n - 6) * beta / (3 * g)) + form_matrix(rep, sigma_T(datum.T)) @ phi * (2 * (1 - 4 * s0) / g)
    _check_zero("dirac-from-slashed", out - phi * (3 * (4 * s0 - 1) * g / 4), s0)
    _check_zero("dirac-from-slashed-direct", out - _dirac_parallel(datum, s0), s0)
    return out


def g2_dirac_closed_form(s, norm_T: float) -> float:
    """-21(4s-1)|T| / (4 sqrt 7), the D^s eigenvalue on the G2 spinor (float)."""
    return -21 * (4 * float(s) - 1) * norm_T / (4 * math.sqrt(7))


def g2_killing_closed_form(s, norm_T: float) -> float:
    """-(3(4s-1)/(4 sqrt 7)) |T|."""
    return -3 * (4 * float(s) - 1) * norm_T / (4 * math.sqrt(7))


# Sasakian algebra --------------------------------------------------------

def sasakian_checks(rep: GammaRep, T: Torsion3Form, spaces: dict) -> dict:
    """Matrix identities of the 5-dimensional Sasakian model.

    With xi = e5, F = e12 + e34, d eta = 2F and phi = -(e12 + e34) as an
    endomorphism of R^5, checks: sum_j T(xi,e_j)(e_j⌟T) = -16 xi;
    e2 . d eta = 2(e1 + e234); X d eta - d eta X = -2 (X⌟d eta) = 4 phi(X);
    e234 acts as +e1 on the (+-4)-eigenspaces and as -e1 on the kernel of T.
    Returns {check name: bool}.
    """
    n = 5
    xi = _basis(n, 4)
    deta = AltForm.parse(n, "2*e12 + 2*e34")
    D = form_matrix(rep, deta)
    out = {}
    out["W=-16xi"] = (tx_sum(rep, T, xi) + rep.vector(xi) * 16).is_zero()
    out["W-two-forms"] = (tx_sum(rep, T, xi) + ex_sum(rep, T, xi)).is_zero()
    H = rep.product((1, 2, 3))
    out["e2*deta"] = (rep.gamma[1] @ D - (rep.gamma[0] + H) * 2).is_zero()
    phi_map = {0: [0, -1, 0, 0, 0], 1: [1, 0, 0, 0, 0], 2: [0, 0, 0, -1, 0], 3: [0, 0, 1, 0, 0], 4: [0] * 5}
    ok_contact = True
    for i in range(n):
        X = _basis(n, i)
        comm = rep.gamma[i] @ D - D @ rep.gamma[i]
        ok_contact &= (comm + form_matrix(rep, deta.contract(X)) * 2).is_zero()
        ok_contact &= (comm - rep.vector(phi_map[i]) * 4).is_zero()
    out["contact"] = ok_contact
    sig = sigma_T(T)
    out["sigma=4e1234"] = sig == AltForm.parse(n, "4*e1234")
    out["xi-sigma=0"] = sig.contract(xi).is_zero()
    out["xi-T=deta"] = T.contract(xi) == deta
    for value, basis in spaces.items():
        sign = -1 if value == 0 else 1
        out[f"H-on-{value}"] = (H @ basis - rep.gamma[0] @ basis * sign).is_zero()
    return out
