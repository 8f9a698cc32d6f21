from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from spinlab import special as sp
from spinlab.catalog import load_entry
from spinlab.clifford import build_rep, form_matrix
from spinlab.exact import ExactArray
from spinlab.forms import AltForm, random_form, random_vector
from spinlab.operators import make_parallel_jet, spin_operators, twistor_jets
from spinlab.torsion import Torsion3Form, sigma_T, t_spectrum

GRID = [Fraction(x) for x in ("-1/2", "-1/4", "0", "1/12", "1/4", "1/2", "3/4", "1")]


def _e(n, i):
    return [1 if k == i else 0 for k in range(n)]


def _all_data():
    for name in ("su2", "heisenberg5", "sasaki5_alg", "nk6_alg", "g2_7_alg"):
        entry = load_entry(name)
        for case, d in entry.data.items():
            yield f"{name}:{case}", d


@pytest.mark.parametrize("label,datum", list(_all_data()))
def test_characteristic_ricci_action_is_sigma(label, datum):
    for i in range(datum.n):
        X = _e(datum.n, i)
        want = form_matrix(datum.rep, sigma_T(datum.T).contract(X)) @ datum.phi0
        assert (sp.ricci_action_parallel(datum, Fraction(1, 4), X) - want).is_zero(), label


@pytest.mark.parametrize("s", GRID)
def test_g2_ricci_action(s):
    d = load_entry("g2_7_alg").datum()
    factor = 3 * (9 - 16 * s * s) * d.T.norm_sq / 14
    assert (sp.ricci_action_parallel(d, s, _e(7, 0)) - d.act(_e(7, 0)) * factor).is_zero()


@pytest.mark.parametrize("s", GRID)
@pytest.mark.parametrize("case", ["plus4", "minus4"])
def test_sasakian_ricci_action(s, case):
    d = load_entry("sasaki5_alg").datum(case)
    assert (sp.ricci_action_parallel(d, s, _e(5, 0)) - d.act(_e(5, 0)) * (6 - 32 * s * s)).is_zero()
    assert (sp.ricci_action_parallel(d, s, _e(5, 4)) - d.act(_e(5, 4)) * (-4 * (16 * s * s - 1))).is_zero()


def test_s_tensor_action():
    d = load_entry("g2_7_alg").datum()
    for i in range(7):
        X = _e(7, i)
        assert (sp.s_endomorphism_parallel(d, X) - d.act(X) * (Fraction(6, 7) * d.T.norm_sq)).is_zero()
    for name in ("nk6_alg", "su2"):
        for d in load_entry(name).data.values():
            n = d.n
            f = -3 * d.gamma ** 2 * (n - 9) / Fraction(n * n)
            assert (sp.s_endomorphism_parallel(d, _e(n, 1)) - d.act(_e(n, 1)) * f).is_zero()


def test_integrability_su2_and_heisenberg():
    entry = load_entry("su2")
    phi = entry.datum().phi0
    ric, sca = sp.integrability_parallel(entry.geometry, entry.rep, phi, Fraction(-1, 4))
    assert ric.is_zero() and sca.is_zero()
    for i in range(3):
        assert sp.curvature_action(entry.geometry, entry.rep, Fraction(-1, 4), _e(3, i), phi).is_zero()
    entry = load_entry("heisenberg5")
    phi = entry.datum("zero").phi0
    ric, sca = sp.integrability_parallel(entry.geometry, entry.rep, phi, Fraction(1, 4))
    assert ric.is_zero() and sca.is_zero()
    assert (form_matrix(entry.rep, sigma_T(entry.torsion)) @ phi - phi * 4).is_zero()


def test_integrability_trivial_without_torsion():
    from spinlab.geometry import ModelGeometry
    geom = ModelGeometry.from_brackets("t3", 3, [], Torsion3Form(AltForm.zero(3, 3)))
    rep = build_rep(3)
    ric, sca = sp.integrability_parallel(geom, rep, ExactArray.eye(2), 0)
    assert ric.is_zero() and sca.is_zero()


def test_harmony_factor_special_values():
    # n = 7 with gamma^2 = 7|T|^2
    g = load_entry("g2_7_alg").datum().gamma
    for s in GRID:
        assert sp.harmony_factor(g, 7, s) == 3 * (9 - 16 * s * s) * Fraction(7) / 14
    # n = 6, gamma = 2|T| with |T|^2 = 4: Sca^g / 6 = 9(n-1) gamma^2 / (4 n^2)
    assert sp.harmony_factor(4, 6, 0) == Fraction(9 * 5 * 16, 4 * 36)
    assert 6 * sp.harmony_factor(4, 6, 0) == Fraction(15, 2) * 4
    # n = 3 at s = 1/4 vanishes
    assert sp.harmony_factor(1, 3, Fraction(1, 4)) == 0


@pytest.mark.parametrize("name", ["su2", "nk6_alg", "g2_7_alg"])
def test_harmony_einstein(name):
    for d in load_entry(name).data.values():
        for s in GRID:
            assert sp.harmony_einstein(d, s) == sp.harmony_factor(d.gamma, d.n, s)


def test_killing_numbers():
    for name in ("su2", "nk6_alg", "g2_7_alg"):
        for d in load_entry(name).data.values():
            assert sp.killing_correspondence(d, 0) == 3 * d.gamma / (4 * d.n)
            assert sp.killing_correspondence(d, Fraction(1, 4)) == 0


@pytest.mark.parametrize("s", [Fraction(0), Fraction(1, 2), Fraction(-1, 3)])
def test_g2_killing_number_sign(s):
    d = load_entry("g2_7_alg").datum()
    z = sp.killing_correspondence(d, s)
    norm = math.sqrt(d.T.norm_sq)
    assert abs(float(z) - 3 * (4 * float(s) - 1) * norm / (4 * math.sqrt(7))) < 1e-12
    # the closed form printed for this example carries the opposite sign
    assert abs(sp.g2_killing_closed_form(s, norm) + float(z)) < 1e-12


@pytest.mark.parametrize("s", GRID)
def test_slashed_eigenvalues(s):
    d = load_entry("g2_7_alg").datum()
    assert sp.slashed_eigen_parallel(d, s) == -Fraction(9, 4) * (4 * s - 1) * d.T.norm_sq
    for d in load_entry("nk6_alg").data.values():
        assert sp.slashed_eigen_parallel(d, s) == -Fraction(3, 2) * (4 * s - 1) * d.T.norm_sq
    for d in load_entry("sasaki5_alg").data.values():
        beta = sp.slashed_eigen_parallel(d, s)
        if s == Fraction(1, 4):
            assert beta == 0


@pytest.mark.parametrize("name", ["su2", "nk6_alg", "g2_7_alg"])
def test_slashed_on_killing(name):
    for d in load_entry(name).data.values():
        for s in GRID:
            z = sp.killing_correspondence(d, s)
            assert sp.slashed_on_killing(d, s) == 3 * d.gamma * z
            assert sp.slashed_on_killing(d, s) == sp.slashed_eigen_parallel(d, s)


@pytest.mark.parametrize("s", GRID)
def test_g2_dirac_from_slashed(s):
    d = load_entry("g2_7_alg").datum()
    out = sp.dirac_from_slashed(d, s)
    val = (3 * (4 * s - 1) * d.gamma / 4)
    assert (out - d.phi0 * val).is_zero()
    assert abs(float(val) - sp.g2_dirac_closed_form(s, math.sqrt(d.T.norm_sq))) < 1e-12


def test_dirac_from_slashed_six_dimensions():
    for d in load_entry("nk6_alg").data.values():
        for s in GRID:
            out = sp.dirac_from_slashed(d, s)
            alt = form_matrix(d.rep, sigma_T(d.T)) @ d.phi0 * (2 * (1 - 4 * s) / d.gamma)
            assert (out - alt).is_zero()


def test_dirac_from_slashed_with_zero_beta():
    d = load_entry("g2_7_alg").datum()
    out = sp.dirac_from_slashed(d, Fraction(1, 4), beta=0)
    assert out.is_zero()


def test_tspin_vanishes_on_twistor_jets():
    for name in ("su2", "heisenberg5"):
        entry = load_entry(name)
        for s in (Fraction(0), Fraction(1, 4), Fraction(2, 3)):
            K = twistor_jets(entry.geometry, entry.rep, s)
            assert sp.tspin_residual(entry.geometry, entry.rep, s, K).is_zero()


def test_ricci_parallel_expressions_agree_on_random_forms(rng):
    for n in (5, 6, 7):
        rep = build_rep(n)
        T = Torsion3Form(random_form(n, 3, rng), validate=False)
        X = random_vector(n, rng)
        a, b = sp.ricci_parallel_expressions(rep, T, X, Fraction(int(rng.integers(-5, 6)), 3))
        assert (a - b).is_zero()


def test_datum_validation():
    entry = load_entry("sasaki5_alg")
    bad = t_spectrum(entry.rep, entry.torsion).space(4).basis
    with pytest.raises(sp.DatumError):
        sp.ParallelSpinorDatum(entry.rep, entry.torsion, 0, bad)
    with pytest.raises(sp.DatumError):
        sp.ParallelSpinorDatum(entry.rep, entry.torsion, 4, bad, sp.EINSTEIN_KILLING)
    with pytest.raises(sp.DatumError):
        sp.harmony_einstein(entry.datum("plus4"), 0)


def test_sasakian_algebra():
    entry = load_entry("sasaki5_alg")
    spaces = {c: entry.datum(c).phi0 for c in entry.cases}
    spaces = {4: spaces["plus4"], -4: spaces["minus4"], 0: spaces["zero"]}
    res = sp.sasakian_checks(entry.rep, entry.torsion, spaces)
    assert all(res.values()), res
    assert {"W=-16xi", "e2*deta", "contact", "H-on-0", "H-on-4"} <= set(res)


@pytest.mark.parametrize("s", GRID)
def test_heisenberg_algebraic_action_matches_curvature(s):
    entry = load_entry("heisenberg5")
    d = entry.datum("zero")
    for i in range(5):
        X = _e(5, i)
        got = sp.ricci_action_parallel(d, s, X)
        assert (got - sp.curvature_action(entry.geometry, entry.rep, s, X, d.phi0)).is_zero()
