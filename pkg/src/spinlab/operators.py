"""First and second order spinor operators on 2-jets, and residuals of the
differential identities relating them to curvature.

With the frame trivialization, nabla^s_{e_i} = e_i + omega_i where
omega_i = 1/4 sum_{j,k} Gamma^s[i,j,k] gamma_j gamma_k is constant, so every
operator at the base point is finite linear algebra on the 2-jet.

Vector fields X are taken with constant frame coefficients; then
nabla^s_{e_j} X = sum_i X_i Gamma^s[j,i,k] e_k and [X, e_j] = sum_i X_i c[i,j,k] e_k.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact as ex
from .clifford import GammaRep, form_matrix
from .exact import as_fraction
from .forms import AltForm
from .geometry import (
    ModelGeometry,
    connection_s,
    curvature,
    frame_d,
    frame_delta,
    is_parallel_torsion,
    levi_civita,
)
from .jets import Jet1, JetInconsistency, SpinorJet2, basis_jets, jet_coordinates
from .torsion import IdentityViolation, sigma_T

__all__ = [
    "PreconditionError",
    "SpinOperators",
    "spin_operators",
    "nabla_s",
    "dirac",
    "dirac_squared",
    "laplacian",
    "slashed_d",
    "penrose",
    "verify_half_ricci",
    "verify_curvature_form",
    "verify_sl",
    "verify_product_rules",
    "verify_twistorial",
    "make_parallel_jet",
    "make_killing_jet",
    "admissible_spinors",
    "twistor_jets",
]


class PreconditionError(ValueError):
    """An identity was requested outside its hypotheses."""


def _basis(n: int, i: int) -> list:
    e = [0] * n
    e[i] = 1
    return e


class SpinOperators:
    """Operators of the connection nabla^s on one model geometry and rep."""

    def __init__(self, geom: ModelGeometry, rep: GammaRep, s):
        if geom.n != rep.n:
            raise ValueError(f"geometry of dimension {geom.n} with rep of Cl_{rep.n}")
        self.geom = geom
        self.rep = rep
        self.bk = rep.backend
        self.n = geom.n
        self.s = as_fraction(s)
        self.G = connection_s(geom, self.s)
        self.Gg = levi_civita(geom)
        self.omega = tuple(self._omega(i) for i in range(self.n))
        T = geom.torsion
        self.T = T
        self.T_mat = form_matrix(rep, T.form)
        self.sigma_mat = form_matrix(rep, sigma_T(T))
        self.contr_mat = tuple(form_matrix(rep, T.contract_basis(i)) for i in range(self.n))

    def _omega(self, i: int):
        coeffs, mats = [], []
        for j in range(self.n):
            for k in range(self.n):
                g = self.G[i, j, k]
                if g:
                    coeffs.append(g / 4)
                    mats.append(self.rep.product((j, k)))
        if not coeffs:
            return self.bk.zeros((self.rep.dim, self.rep.dim))
        return self.bk.lincomb(coeffs, mats)

    def c(self, x):
        return self.bk.scalar(x)

    # vector calculus with constant frame coefficients -------------------
    def nabla_of_vector(self, j: int, X) -> list:
        """nabla^s_{e_j} X."""
        return [sum(X[i] * self.G[j, i, k] for i in range(self.n)) for k in range(self.n)]

    def nabla_along(self, X, j: int) -> list:
        """nabla^s_X e_j."""
        return [sum(X[i] * self.G[i, j, k] for i in range(self.n)) for k in range(self.n)]

    def bracket(self, X, j: int) -> list:
        """[X, e_j]."""
        return [sum(X[i] * self.geom.c[i, j, k] for i in range(self.n)) for k in range(self.n)]

    # first order ---------------------------------------------------------
    def nabla(self, i: int, jet: SpinorJet2) -> Jet1:
        """1-jet of nabla^s_{e_i} phi."""
        if not 0 <= i < self.n:
            raise IndexError(f"frame index {i} out of range")
        w = self.omega[i]
        value = jet.d1[i] + w @ jet.value
        d1 = tuple(jet.d2(l, i) + w @ jet.d1[l] for l in range(self.n))
        return Jet1(value, d1)

    def nablas(self, jet: SpinorJet2) -> list:
        return [self.nabla(i, jet) for i in range(self.n)]

    def combine(self, X, jets: list):
        """sum_i X_i jets[i] for a list of Jet1 or of arrays."""
        out = None
        for x, j in zip(X, jets):
            if x == 0:
                continue
            term = j.scale(self.c(x)) if isinstance(j, Jet1) else j * self.c(x)
            out = term if out is None else out + term
        if out is None:
            first = jets[0]
            return first.scale(0) if isinstance(first, Jet1) else first * 0
        return out

    def nabla1(self, i: int, j1: Jet1):
        """nabla^s_{e_i} applied to a 1-jet, evaluated at the point."""
        return j1.d1[i] + self.omega[i] @ j1.value

    def nabla1_vec(self, X, j1: Jet1):
        return self.combine(X, [self.nabla1(i, j1) for i in range(self.n)])

    def dirac_from(self, nab: list) -> Jet1:
        out = None
        for i, j in enumerate(nab):
            term = j.apply(self.rep.gamma[i])
            out = term if out is None else out + term
        return out

    def dirac(self, jet: SpinorJet2) -> Jet1:
        return self.dirac_from(self.nablas(jet))

    def dirac1(self, j1: Jet1):
        """D^s of a 1-jet, evaluated at the point."""
        out = None
        for i in range(self.n):
            term = self.rep.gamma[i] @ self.nabla1(i, j1)
            out = term if out is None else out + term
        return out

    def dirac_value_first_order(self, value, d1):
        """D^s at the point from value and first derivatives only."""
        return self.dirac1(Jet1(value, tuple(d1)))

    def dirac_squared(self, jet: SpinorJet2):
        return self.dirac1(self.dirac(jet))

    def laplacian(self, jet: SpinorJet2, convention: str = "plus", nab=None):
        """-sum_i [nabla_i nabla_i + sign * nabla_{nabla^g_{e_i} e_i}].

        ``convention="plus"`` uses sign +1, ``"minus"`` uses sign -1.
        """
        sign = {"plus": 1, "minus": -1}[convention]
        nab = nab if nab is not None else self.nablas(jet)
        out = None
        for i in range(self.n):
            term = self.nabla1(i, nab[i])
            lc = [self.Gg[i, i, k] for k in range(self.n)]
            if any(lc):
                term = term + self.combine(lc, [j.value for j in nab]) * sign
            out = term if out is None else out + term
        return -out

    def slashed(self, jet: SpinorJet2, nab=None):
        """sum_i (e_i ⌟ T) . nabla^s_{e_i} phi."""
        nab = nab if nab is not None else self.nablas(jet)
        out = None
        for i in range(self.n):
            term = self.contr_mat[i] @ nab[i].value
            out = term if out is None else out + term
        return out

    def penrose(self, jet: SpinorJet2, nab=None) -> list:
        """Components nabla^s_{e_i} phi + (1/n) e_i . D^s phi."""
        return [j.value for j in self.penrose_jet(jet, nab)]

    def penrose_jet(self, jet: SpinorJet2, nab=None) -> list:
        """1-jets of the twistor operator components."""
        nab = nab if nab is not None else self.nablas(jet)
        D = self.dirac_from(nab)
        k = self.c(Fraction(1, self.n))
        return [nab[i] + D.apply(self.rep.gamma[i]).scale(k) for i in range(self.n)]

    # curvature actions ---------------------------------------------------
    def ricci_action(self, X, phi):
        """Ric^s(X) . phi = sum_i Ric^s(X, e_i) e_i . phi."""
        ric = curvature(self.geom, self.s).ric
        row = [sum(X[a] * ric[a, i] for a in range(self.n)) for i in range(self.n)]
        return self.rep.vector(row) @ phi if any(row) else phi * 0

    def curvature_endo(self, a: int, b: int):
        """Spinorial curvature 1/4 sum_{k,l} R^s[a,b,k,l] gamma_k gamma_l."""
        R = curvature(self.geom, self.s).R
        key = ("curv-endo", self.s, a, b)

        def build():
            coeffs, mats = [], []
            for k in range(self.n):
                for l in range(self.n):
                    if R[a, b, k, l]:
                        coeffs.append(R[a, b, k, l] / 4)
                        mats.append(self.rep.product((k, l)))
            return self.bk.lincomb(coeffs, mats) if coeffs else self.bk.zeros((self.rep.dim, self.rep.dim))

        return self.rep._cached((key, id(self.geom)), build)

    def curvature_commutator(self, a: int, b: int):
        """[omega_a, omega_b] - sum_k c[a,b,k] omega_k."""
        out = self.omega[a] @ self.omega[b] - self.omega[b] @ self.omega[a]
        for k in range(self.n):
            if self.geom.c[a, b, k]:
                out = out - self.omega[k] * self.c(self.geom.c[a, b, k])
        return out

    # identities ----------------------------------------------------------
    def half_ricci_terms(self, X, jet: SpinorJet2, nab=None, D=None) -> dict:
        """Left side and three right-hand-side evaluations of the half-Ricci identity.

        ``rhs``: the torsion form with nabla_{nabla_{e_j} X} and T(X, e_j);
        ``rhs_bracket``: the frame-covariant bracket form
        sum_j (nabla_X e_j) . nabla_{e_j} phi + sum_j e_j . nabla_{[X, e_j]} phi;
        ``rhs_bracket_parallel_frame``: the bracket form without the first sum,
        valid only when the frame is nabla^s-parallel at the point.
        """
        n = self.n
        nab = nab if nab is not None else self.nablas(jet)
        D = D if D is not None else self.dirac_from(nab)
        vals = [j.value for j in nab]
        v = jet.value
        sc = self.c
        lhs = self.ricci_action(X, v) * sc(Fraction(1, 2))
        nabX = self.combine(X, nab)
        common = self.dirac1(nabX) - self.nabla1_vec(X, D)
        sig = form_matrix(self.rep, sigma_T(self.T).contract(X)) @ v * sc(self.s * (3 - 4 * self.s))
        torsion_sum = None
        bracket_sum = None
        frame_sum = None
        for j in range(n):
            t = self.combine(self.nabla_of_vector(j, X), vals) + \
                self.combine(self.T.vector(X, _basis(n, j)), vals) * sc(4 * self.s)
            t = self.rep.gamma[j] @ t
            torsion_sum = t if torsion_sum is None else torsion_sum + t
            b = self.rep.gamma[j] @ self.combine(self.bracket(X, j), vals)
            bracket_sum = b if bracket_sum is None else bracket_sum + b
            f = self.rep.vector(self.nabla_along(X, j)) @ vals[j]
            frame_sum = f if frame_sum is None else frame_sum + f
        rhs = common - torsion_sum + sig
        rhs_parallel = common + bracket_sum + sig
        return {
            "lhs": lhs,
            "rhs": rhs,
            "rhs_bracket": rhs_parallel + frame_sum,
            "rhs_bracket_parallel_frame": rhs_parallel,
        }

    def frame_is_parallel(self) -> bool:
        """True when all Gamma^s vanish, i.e. the frame is nabla^s-parallel."""
        return not any(x != 0 for x in self.G.flat)


def spin_operators(geom: ModelGeometry, rep: GammaRep, s) -> SpinOperators:
    s = as_fraction(s)
    return geom.cached(("spin-ops", rep.backend, rep.volume_sign, s), lambda: SpinOperators(geom, rep, s))


# functional surface ------------------------------------------------------

def nabla_s(geom, rep, s, i: int, jet) -> Jet1:
    return spin_operators(geom, rep, s).nabla(i, jet)


def dirac(geom, rep, s, jet) -> Jet1:
    return spin_operators(geom, rep, s).dirac(jet)


def dirac_squared(geom, rep, s, jet):
    return spin_operators(geom, rep, s).dirac_squared(jet)


def laplacian(geom, rep, s, jet, convention: str = "plus"):
    return spin_operators(geom, rep, s).laplacian(jet, convention)


def slashed_d(geom, rep, s, jet):
    return spin_operators(geom, rep, s).slashed(jet)


def penrose(geom, rep, s, jet) -> list:
    return spin_operators(geom, rep, s).penrose(jet)


def _require_parallel(geom) -> None:
    res = is_parallel_torsion(geom)
    if not res:
        raise PreconditionError(f"{geom.name}: torsion is not parallel for the characteristic connection "
                                f"(witness {res.witness})")


def verify_half_ricci(geom, rep, s, X, jet, nab=None, D=None):
    """Residual of the half-Ricci identity for one frame vector X.

    Also checks that the bracket form of the right-hand side agrees with the
    torsion form; a disagreement raises :class:`IdentityViolation`.
    """
    _require_parallel(geom)
    ops = spin_operators(geom, rep, s)
    terms = ops.half_ricci_terms(X, jet, nab, D)
    if not ops.bk.is_zero(terms["rhs"] - terms["rhs_bracket"]):
        raise IdentityViolation("half-ricci-bracket-form", ops.bk.norm(terms["rhs"] - terms["rhs_bracket"]))
    return terms["lhs"] - terms["rhs"]


def half_ricci_forms_agree(geom, rep, s, X, jet) -> bool:
    """The torsion and bracket right-hand sides agree (no parallelism needed)."""
    ops = spin_operators(geom, rep, s)
    terms = ops.half_ricci_terms(X, jet)
    return ops.bk.is_zero(terms["rhs"] - terms["rhs_bracket"])


def verify_curvature_form(geom, rep, s, X, jet):
    """Residual of 1/2 Ric^s(X) phi = -sum_i e_i R_{X,e_i} phi + s(3-4s)(X⌟sigma_T) phi."""
    _require_parallel(geom)
    ops = spin_operators(geom, rep, s)
    v = jet.value
    n = ops.n
    lhs = ops.ricci_action(X, v) * ops.c(Fraction(1, 2))
    rhs = form_matrix(rep, sigma_T(ops.T).contract(X)) @ v * ops.c(ops.s * (3 - 4 * ops.s))
    for i in range(n):
        endo = ops.combine(X, [ops.curvature_endo(a, i) for a in range(n)])
        rhs = rhs - rep.gamma[i] @ (endo @ v)
    return lhs - rhs


def verify_sl(geom, rep, s, jet, convention: str = "plus", nab=None):
    """Residual of (D^s)^2 = Delta^s + s(3-4s) dT - 4s slashed-D^s + Sca^s/4."""
    _require_parallel(geom)
    ops = spin_operators(geom, rep, s)
    nab = nab if nab is not None else ops.nablas(jet)
    D = ops.dirac_from(nab)
    v = jet.value
    sc = ops.c
    dT = frame_d(geom, ops.T.form, 0)
    sca = curvature(geom, ops.s).sca
    rhs = ops.laplacian(jet, convention, nab) \
        + form_matrix(rep, dT) @ v * sc(ops.s * (3 - 4 * ops.s)) \
        - ops.slashed(jet, nab) * sc(4 * ops.s) \
        + v * sc(sca / 4)
    return ops.dirac1(D) - rhs


@dataclass(frozen=True)
class AffineFunction:
    """Real function given by its value and frame gradient at the point."""

    value: Fraction
    grad: tuple


def verify_product_rules(geom, rep, s, jet, X, w: AltForm, f: AffineFunction | None = None) -> dict:
    """Residuals of the product rules for D^s.

    ``"function"``: D(f phi) = grad f . phi + f D phi;
    ``"vector"``: D(X phi) = sum_j e_j (nabla_{e_j} X) phi - X D phi - 2 nabla_X phi;
    ``"form"``: D(w phi) = (-1)^p w D phi + (d^s w + delta^s w) phi - 2 sum_j (e_j⌟w) nabla_{e_j} phi.
    """
    ops = spin_operators(geom, rep, s)
    n = ops.n
    sc = ops.c
    v = jet.value
    nab = ops.nablas(jet)
    D = ops.dirac_from(nab).value
    out = {}
    if f is None:
        f = AffineFunction(Fraction(2), tuple(Fraction(k - 1, 2) for k in range(n)))
    fv = sc(f.value)
    fd1 = [jet.d1[i] * fv + v * sc(f.grad[i]) for i in range(n)]
    lhs = ops.dirac_value_first_order(v * fv, fd1)
    out["function"] = lhs - (rep.vector(list(f.grad)) @ v + D * fv)

    Xm = rep.vector(X)
    lhs = ops.dirac(jet.apply(Xm)).value
    rhs = -(Xm @ D) - ops.combine(X, [j.value for j in nab]) * sc(2)
    for j in range(n):
        rhs = rhs + rep.gamma[j] @ (rep.vector(ops.nabla_of_vector(j, X)) @ v)
    out["vector"] = lhs - rhs

    W = form_matrix(rep, w)
    lhs = ops.dirac(jet.apply(W)).value
    dw = frame_d(geom, w, ops.s)
    delta_w = frame_delta(geom, w, ops.s)
    rhs = (W @ D) * sc((-1) ** w.p) + (form_matrix(rep, dw) + form_matrix(rep, delta_w)) @ v
    for j in range(n):
        rhs = rhs - form_matrix(rep, w.contract_basis(j)) @ nab[j].value * sc(2)
    out["form"] = lhs - rhs
    return out


def slashed_alternatives(geom, rep, s, jet) -> dict:
    """Residuals of the alternative expressions of slashed-D^s.

    ``"pair-sum"``: slashed = 1/2 sum_{i,j} e_i e_j nabla_{T(e_i,e_j)} phi;
    ``"dirac-of-T"``: slashed = -1/2 [D(T phi) + T D phi - 2(1-4s) sigma_T phi];
    ``"clifford"``: slashed = -1/2 sum_j e_j T nabla_{e_j} phi - 1/2 T D phi.
    The last two need parallel torsion.
    """
    ops = spin_operators(geom, rep, s)
    n = ops.n
    sc = ops.c
    nab = ops.nablas(jet)
    vals = [j.value for j in nab]
    D = ops.dirac_from(nab).value
    sl = ops.slashed(jet, nab)
    half = sc(Fraction(1, 2))
    pair_sum = None
    for i in range(n):
        for j in range(n):
            t = ops.combine(ops.T.vector(_basis(n, i), _basis(n, j)), vals)
            t = rep.product((i, j)) @ t
            pair_sum = t if pair_sum is None else pair_sum + t
    out = {"pair-sum": sl - pair_sum * half}
    dT = ops.dirac(jet.apply(ops.T_mat)).value
    alt = (dT + ops.T_mat @ D - ops.sigma_mat @ jet.value * sc(2 * (1 - 4 * ops.s))) * half
    out["dirac-of-T"] = sl + alt
    cl = None
    for j in range(n):
        t = rep.gamma[j] @ (ops.T_mat @ vals[j])
        cl = t if cl is None else cl + t
    out["clifford"] = sl + cl * half + ops.T_mat @ D * half
    return out


def twistor_residual(geom, rep, s, jet, nab=None):
    """Largest norm among the twistor operator and its first derivatives."""
    ops = spin_operators(geom, rep, s)
    worst = 0.0
    for pj in ops.penrose_jet(jet, nab):
        for part in (pj.value,) + pj.d1:
            worst = max(worst, ops.bk.norm(part))
    return worst


def verify_twistorial(geom, rep, s, X, jet, check_precondition: bool = True) -> dict:
    """Residuals of the twistorial half-Ricci formula and of its contraction.

    Requires the twistor operator to vanish at the point together with its
    first derivatives; otherwise :class:`PreconditionError` is raised.
    Returns {"formula": residual, "contraction": residual}.
    """
    _require_parallel(geom)
    ops = spin_operators(geom, rep, s)
    nab = ops.nablas(jet)
    if check_precondition:
        for pj in ops.penrose_jet(jet, nab):
            for part in (pj.value,) + pj.d1:
                if not ops.bk.is_zero(part):
                    raise PreconditionError("jet is not a twistor jet to first order")
    n = ops.n
    sc = ops.c
    s_ = ops.s
    v = jet.value
    D = ops.dirac_from(nab)
    D2 = ops.dirac1(D)
    Xm = rep.vector(X)
    lhs = ops.ricci_action(X, v) * sc(Fraction(1, 2))
    rhs = Xm @ D2 * sc(Fraction(1, n)) - ops.nabla1_vec(X, D) * sc(Fraction(n - 2, n)) \
        + form_matrix(rep, ops.T.contract(X)) @ D.value * sc(Fraction(8, n) * s_) \
        + form_matrix(rep, sigma_T(ops.T).contract(X)) @ v * sc(s_ * (3 - 4 * s_))
    sca = curvature(geom, s_).sca
    c_lhs = v * sc(sca / 2)
    c_rhs = ops.T_mat @ D.value * sc(-Fraction(24, n) * s_) + D2 * sc(Fraction(2 * (n - 1), n)) \
        - ops.sigma_mat @ v * sc(4 * s_ * (3 - 4 * s_))
    return {"formula": lhs - rhs, "contraction": c_lhs - c_rhs}


# special jets ------------------------------------------------------------

def _killing_generators(ops: SpinOperators, zeta):
    z = ops.c(zeta)
    return [ops.rep.gamma[i] * z - ops.omega[i] for i in range(ops.n)]


def _constraint_matrices(ops: SpinOperators, A) -> dict:
    out = {}
    n = ops.n
    for i in range(n):
        for l in range(i + 1, n):
            m = A[i] @ A[l] - A[l] @ A[i]
            for k in range(n):
                if ops.geom.c[l, i, k]:
                    m = m - A[k] * ops.c(ops.geom.c[l, i, k])
            out[i, l] = m
    return out


def make_killing_jet(geom, rep, s, zeta, phi0) -> SpinorJet2:
    """2-jet of a solution of nabla^s_X phi = zeta X . phi with phi(x) = phi0.

    Writing A_i = zeta gamma_i - omega_i, the field satisfies e_i phi = A_i phi,
    hence d1[i] = A_i phi0 and e_l e_i phi = A_i A_l phi0.  Such a jet exists
    only if ([A_i, A_l] - sum_k c[l,i,k] A_k) phi0 = 0 for every pair; this is
    checked and a :class:`JetInconsistency` names the first failing pair.
    """
    ops = spin_operators(geom, rep, s)
    bk = ops.bk
    phi0 = bk.asarray(phi0) if not hasattr(phi0, "shape") else phi0
    A = _killing_generators(ops, zeta)
    for (i, l), m in _constraint_matrices(ops, A).items():
        if not bk.is_zero(m @ phi0):
            raise JetInconsistency(
                f"{geom.name} does not admit this spinor: constraint fails for frame pair ({i + 1}, {l + 1})", (i, l))
    n = ops.n
    d1 = [A[i] @ phi0 for i in range(n)]
    d2 = [[A[j] @ d1[i] for j in range(n)] for i in range(n)]
    return SpinorJet2.from_full(phi0, d1, d2, geom.c, bk)


def make_parallel_jet(geom, rep, s0, phi0) -> SpinorJet2:
    """2-jet of a nabla^{s0}-parallel spinor through phi0 (zeta = 0)."""
    return make_killing_jet(geom, rep, s0, 0, phi0)


def admissible_spinors(geom, rep, s, zeta=0):
    """Exact basis (columns) of all phi0 passing the Killing-jet constraint."""
    ops = spin_operators(geom, rep.to_backend("exact"), s)
    A = _killing_generators(ops, zeta)
    mats = list(_constraint_matrices(ops, A).values())
    if not mats:
        return ex.ExactArray.eye(rep.dim)
    stacked = ex.stack(mats, axis=0).reshape(len(mats) * rep.dim, rep.dim)
    return ex.nullspace(stacked).T


def twistor_jets(geom, rep, s):
    """Exact basis of 2-jets on which the twistor operator vanishes to first order.

    Returns a SpinorJet2 whose batch columns span that space (possibly zero
    columns).
    """
    erep = rep.to_backend("exact")
    ops = spin_operators(geom, erep, s)
    basis = basis_jets(geom.c, erep)
    rows = []
    for pj in ops.penrose_jet(basis):
        rows.append(pj.value)
        rows.extend(pj.d1)
    mat = ex.stack(rows, axis=0)
    mat = mat.reshape(mat.shape[0] * mat.shape[1], mat.shape[2])
    kernel = ex.nullspace(mat)
    return basis.combine(kernel.T)
