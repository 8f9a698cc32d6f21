from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from spinlab import operators as op
from spinlab.catalog import load_entry, twisted_torus
from spinlab.clifford import build_rep, form_matrix
from spinlab.exact import ExactArray
from spinlab.forms import AltForm, random_form, random_vector
from spinlab.geometry import ModelGeometry
from spinlab.jets import JetInconsistency, SpinorJet2, random_jet
from spinlab.torsion import Torsion3Form, t_spectrum

from conftest import random_spinor

GRID = [Fraction(x) for x in ("-1/2", "-1/4", "0", "1/12", "1/4", "1/2", "3/4", "1")]


def _setup(name, backend="exact", param=None):
    entry = load_entry(name, param)
    return entry.geometry, entry.rep.to_backend(backend)


def _constant_jet(geom, rep, phi):
    z = phi * 0
    n = geom.n
    return SpinorJet2(phi, tuple(z for _ in range(n)), tuple(tuple(z for _ in range(n)) for _ in range(n)), geom.c)


def _e(n, i):
    return [1 if k == i else 0 for k in range(n)]


def _abelian(n, T_text=None):
    T = Torsion3Form.parse(n, T_text) if T_text else Torsion3Form(AltForm.zero(n, 3))
    return ModelGeometry.from_brackets(f"abelian{n}", n, [], T)


# jets ------------------------------------------------------------------

def test_second_derivatives_respect_brackets(rng):
    geom, rep = _setup("heisenberg5")
    jet = random_jet(geom.c, rep, rng, batch=3)
    for i in range(5):
        for j in range(5):
            comm = jet.d2(i, j) - jet.d2(j, i)
            for k in range(5):
                comm = comm - jet.d1[k] * geom.c[i, j, k]
            assert comm.is_zero()


def test_from_full_rejects_inconsistent_data(rng):
    geom, rep = _setup("su2")
    phi = random_spinor(rng, 2)
    d1 = [random_spinor(rng, 2) for _ in range(3)]
    d2 = [[phi * 0 for _ in range(3)] for _ in range(3)]
    with pytest.raises(JetInconsistency) as err:
        SpinorJet2.from_full(phi, d1, d2, geom.c, rep.backend)
    assert err.value.pair == (0, 1)


# first-order operators ----------------------------------------------------

def test_nabla_on_constant_spinor_flat_torus(rng):
    geom, rep = _setup("flat_torus_3")
    phi = random_spinor(rng, 2)
    jet = _constant_jet(geom, rep, phi)
    for s in GRID:
        got = op.nabla_s(geom, rep, s, 0, jet).value
        want = form_matrix(rep, AltForm.parse(3, "e23")) @ phi * s
        assert (got - want).is_zero()


def test_nabla_cartan_schouten_kills_constants(rng):
    geom, rep = _setup("su2")
    jet = _constant_jet(geom, rep, random_spinor(rng, 2, batch=4))
    for i in range(3):
        assert op.nabla_s(geom, rep, Fraction(-1, 4), i, jet).value.is_zero()


def test_nabla_levi_civita_on_abelian_is_derivative(rng):
    geom = _abelian(4)
    rep = build_rep(4)
    jet = random_jet(geom.c, rep, rng, batch=2)
    for i in range(4):
        assert (op.nabla_s(geom, rep, 0, i, jet).value - jet.d1[i]).is_zero()


def test_dirac_on_constant_spinor(rng):
    geom, rep = _setup("flat_torus_3")
    phi = random_spinor(rng, 2, batch=3)
    jet = _constant_jet(geom, rep, phi)
    T = form_matrix(rep, geom.torsion.form)
    for s in GRID:
        assert (op.dirac(geom, rep, s, jet).value - T @ phi * (3 * s)).is_zero()
        if s == 0:
            assert op.slashed_d(geom, rep, s, jet).is_zero()


def test_dirac_cartan_schouten_frame_oracle(rng):
    # in the su2 frame the -1/4 connection forms vanish, so D = sum e_i e_i(phi)
    geom, rep = _setup("su2")
    jet = random_jet(geom.c, rep, rng, batch=5)
    D = op.dirac(geom, rep, Fraction(-1, 4), jet).value
    want = sum((rep.gamma[i] @ jet.d1[i] for i in range(1, 3)), rep.gamma[0] @ jet.d1[0])
    assert (D - want).is_zero()


@pytest.mark.parametrize("name", ["su2", "heisenberg5"])
def test_exact_and_float_routes_agree(name, rng):
    geom, rep = _setup(name)
    frep = rep.to_backend("float")
    jet = random_jet(geom.c, rep, rng, batch=4)
    fjet = jet.map(lambda v: v.to_complex())
    s = Fraction(3, 7)
    for fn in (op.dirac_squared, op.laplacian, op.slashed_d):
        a = fn(geom, rep, s, jet)
        b = fn(geom, frep, s, fjet)
        assert np.allclose(a.to_complex(), b, atol=1e-10)


def test_dirac_is_linear(rng):
    geom, rep = _setup("heisenberg5")
    a = random_jet(geom.c, rep, rng, batch=2)
    b = random_jet(geom.c, rep, rng, batch=2)
    s = Fraction(-2, 5)
    lhs = op.dirac(geom, rep, s, a.scale(Fraction(2, 3)) + b).value
    rhs = op.dirac(geom, rep, s, a).value * Fraction(2, 3) + op.dirac(geom, rep, s, b).value
    assert (lhs - rhs).is_zero()


def test_parallel_jet_dirac_eigen():
    entry = load_entry("heisenberg5")
    geom, rep = entry.geometry, entry.rep
    phi0 = entry.datum("zero").phi0
    jet = op.make_parallel_jet(geom, rep, Fraction(1, 4), phi0)
    T = form_matrix(rep, geom.torsion.form)
    for s in GRID:
        D = op.dirac(geom, rep, s, jet).value
        assert (D - T @ phi0 * (Fraction(3, 4) * (4 * s - 1))).is_zero()


def test_penrose_components_sum_to_zero(rng):
    geom, rep = _setup("su2")
    jet = random_jet(geom.c, rep, rng, batch=2)
    P = op.penrose(geom, rep, Fraction(1, 3), jet)
    total = sum((rep.gamma[i] @ P[i] for i in range(1, 3)), rep.gamma[0] @ P[0])
    assert total.is_zero()


# identities ------------------------------------------------------------

@pytest.mark.parametrize("lam", [1, 2, Fraction(1, 2)])
def test_half_ricci_flat_torus_random_s(lam, rng):
    geom, rep = _setup("flat_torus_3", param=lam)
    jet = random_jet(geom.c, rep, rng, batch=100)
    for _ in range(3):
        s = Fraction(int(rng.integers(-30, 31)), int(rng.integers(1, 13)))
        for i in range(3):
            assert op.verify_half_ricci(geom, rep, s, _e(3, i), jet).is_zero()


@pytest.mark.parametrize("s", [0, Fraction(1, 4), Fraction(-1, 4), Fraction(1, 2), Fraction(3, 4)])
def test_half_ricci_su2(s, rng):
    geom, rep = _setup("su2")
    jet = random_jet(geom.c, rep, rng, batch=20)
    X = random_vector(3, rng)
    assert op.verify_half_ricci(geom, rep, s, X, jet).is_zero()


def test_half_ricci_riemannian_specialization(rng):
    geom = _abelian(4)
    rep = build_rep(4)
    jet = random_jet(geom.c, rep, rng, batch=5)
    ops = op.spin_operators(geom, rep, 0)
    for i in range(4):
        terms = ops.half_ricci_terms(_e(4, i), jet)
        assert terms["lhs"].is_zero() and terms["rhs"].is_zero()


def test_bracket_form_literal_only_on_parallel_frame(rng):
    geom, rep = _setup("su2")
    jet = random_jet(geom.c, rep, rng, batch=3)
    ops = op.spin_operators(geom, rep, Fraction(-1, 4))
    assert ops.frame_is_parallel()
    t = ops.half_ricci_terms([1, 0, 0], jet)
    assert (t["rhs"] - t["rhs_bracket_parallel_frame"]).is_zero()
    ops = op.spin_operators(geom, rep, 0)
    assert not ops.frame_is_parallel()
    assert op.half_ricci_forms_agree(geom, rep, 0, [1, 0, 0], jet)


def test_identities_require_parallel_torsion(rng):
    geom = twisted_torus()
    rep = build_rep(5)
    jet = random_jet(geom.c, rep, rng)
    with pytest.raises(op.PreconditionError):
        op.verify_half_ricci(geom, rep, 0, _e(5, 0), jet)
    with pytest.raises(op.PreconditionError):
        op.verify_sl(geom, rep, 0, jet)


def test_curvature_form_heisenberg_and_degenerate_cases(rng):
    geom, rep = _setup("heisenberg5")
    jet = random_jet(geom.c, rep, rng, batch=10)
    for s in (Fraction(0), Fraction(1, 4), Fraction(-5, 7)):
        for i in range(5):
            assert op.verify_curvature_form(geom, rep, s, _e(5, i), jet).is_zero()
    geom3, rep3 = _setup("su2")
    jet3 = random_jet(geom3.c, rep3, rng, batch=3)
    assert op.spin_operators(geom3, rep3, Fraction(1, 4)).ricci_action([1, 0, 0], jet3.value).is_zero()
    assert op.verify_curvature_form(geom3, rep3, Fraction(1, 4), [1, 0, 0], jet3).is_zero()
    geom0 = _abelian(3)
    assert op.verify_curvature_form(geom0, build_rep(3), Fraction(1, 3), [1, 0, 0], random_jet(geom0.c, build_rep(3), rng)).is_zero()


def test_curvature_endomorphism_equals_connection_commutator():
    geom, rep = _setup("heisenberg5")
    for s in (Fraction(0), Fraction(1, 4), Fraction(2, 3)):
        ops = op.spin_operators(geom, rep, s)
        for a in range(5):
            for b in range(5):
                assert (ops.curvature_endo(a, b) - ops.curvature_commutator(a, b)).is_zero()


def test_sl_flat_torus_reduced_form(rng):
    geom, rep = _setup("flat_torus_3")
    jet = random_jet(geom.c, rep, rng, batch=50)
    for s in GRID:
        ops = op.spin_operators(geom, rep, s)
        lhs = ops.dirac_squared(jet)
        rhs = ops.laplacian(jet) - ops.slashed(jet) * (4 * s) - jet.value * (6 * s * s)
        assert (lhs - rhs).is_zero()
        assert op.verify_sl(geom, rep, s, jet).is_zero()


@pytest.mark.parametrize("convention", ["plus", "minus"])
def test_sl_heisenberg(convention, rng):
    geom, rep = _setup("heisenberg5")
    jet = random_jet(geom.c, rep, rng, batch=20)
    assert op.verify_sl(geom, rep, Fraction(1, 4), jet, convention).is_zero()


def test_sl_classical_without_torsion(rng):
    geom = _abelian(4)
    rep = build_rep(4)
    jet = random_jet(geom.c, rep, rng, batch=5)
    ops = op.spin_operators(geom, rep, Fraction(5, 3))
    assert (ops.dirac_squared(jet) - ops.laplacian(jet)).is_zero()


@pytest.mark.parametrize("name", ["flat_torus_3", "su2", "heisenberg5"])
def test_product_rules(name, rng):
    geom, rep = _setup(name)
    jet = random_jet(geom.c, rep, rng, batch=5)
    n = geom.n
    for s in (Fraction(0), Fraction(1, 4), Fraction(-3, 8)):
        for p in (1, 2, 3):
            res = op.verify_product_rules(geom, rep, s, jet, random_vector(n, rng), random_form(n, p, rng))
            assert all(r.is_zero() for r in res.values()), name
    res = op.verify_product_rules(geom, rep, 0, jet, _e(n, 0), random_form(n, 2, rng),
                          op.AffineFunction(Fraction(3), tuple([0] * n)))
    assert res["function"].is_zero() and res["vector"].is_zero()


def test_slashed_alternatives_su2_with_T(rng):
    geom, rep = _setup("su2")
    jet = random_jet(geom.c, rep, rng, batch=10)
    for s in GRID:
        res = op.slashed_alternatives(geom, rep, s, jet)
        assert set(res) == {"pair-sum", "dirac-of-T", "clifford"}
        assert all(r.is_zero() for r in res.values())
        form = op.verify_product_rules(geom, rep, s, jet, [1, 0, 0], geom.torsion.form)["form"]
        assert form.is_zero()


# special jets ------------------------------------------------------------

def test_parallel_jet_cartan_schouten_is_constant(rng):
    geom, rep = _setup("su2")
    jet = op.make_parallel_jet(geom, rep, Fraction(-1, 4), random_spinor(rng, 2))
    assert all(d.is_zero() for d in jet.d1)
    assert all(d.is_zero() for row in jet.d2sym for d in row)


def test_heisenberg_admits_only_kernel_spinors():
    entry = load_entry("heisenberg5")
    geom, rep = entry.geometry, entry.rep
    spec = t_spectrum(rep, geom.torsion)
    jet = op.make_parallel_jet(geom, rep, Fraction(1, 4), spec.space(0).basis)
    assert op.twistor_residual(geom, rep, Fraction(1, 4), jet) == 0.0
    for v in (4, -4):
        with pytest.raises(JetInconsistency):
            op.make_parallel_jet(geom, rep, Fraction(1, 4), spec.space(v).basis[:, 0])


def test_admissible_spinor_dimensions():
    geom, rep = _setup("su2")
    assert op.admissible_spinors(geom, rep, Fraction(1, 4)).shape[1] == 2
    assert op.admissible_spinors(geom, rep, Fraction(-1, 4)).shape[1] == 2
    assert op.admissible_spinors(geom, rep, 0).shape[1] == 0
    geom, rep = _setup("heisenberg5")
    assert op.admissible_spinors(geom, rep, Fraction(1, 4)).shape[1] == 2
    assert op.admissible_spinors(geom, rep, Fraction(-1, 4)).shape[1] == 0


def test_twistor_jet_dimensions():
    geom, rep = _setup("heisenberg5")
    assert op.twistor_jets(geom, rep, 0).value.shape[1] == 6
    assert op.twistor_jets(geom, rep, Fraction(1, 4)).value.shape[1] == 4
    geom, rep = _setup("su2")
    assert op.twistor_jets(geom, rep, Fraction(1, 2)).value.shape[1] == 4


@pytest.mark.parametrize("s", [0, Fraction(1, 2), Fraction(3, 4)])
def test_twistorial_on_su2_parallel_jets(s):
    entry = load_entry("su2")
    geom, rep = entry.geometry, entry.rep
    jet = op.make_parallel_jet(geom, rep, Fraction(1, 4), entry.datum().phi0)
    for i in range(3):
        res = op.verify_twistorial(geom, rep, s, _e(3, i), jet)
        assert res["formula"].is_zero() and res["contraction"].is_zero()


def test_twistorial_rejects_generic_jets(rng):
    geom, rep = _setup("su2")
    with pytest.raises(op.PreconditionError):
        op.verify_twistorial(geom, rep, 0, [1, 0, 0], random_jet(geom.c, rep, rng))


def test_twistorial_flat_parallel_reduces_to_zero(rng):
    geom = _abelian(3)
    rep = build_rep(3)
    jet = _constant_jet(geom, rep, random_spinor(rng, 2))
    res = op.verify_twistorial(geom, rep, 0, [1, 0, 0], jet)
    assert res["formula"].is_zero()
