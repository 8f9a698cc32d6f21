from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from spinlab.clifford import build_rep, form_matrix
from spinlab.exact import ExactArray
from spinlab.forms import AltForm, random_form, random_vector
from spinlab.torsion import (
    CONTRACTION_IDENTITIES,
    Torsion3Form,
    check_contraction_identities,
    contraction_residuals,
    sigma_T,
    t_spectrum,
)

from conftest import random_spinor

SASAKI_T = "2*e125 + 2*e345"
G2_OMEGA = "e127 + e347 + e567 + e135 - e146 - e236 - e245"


def _sigma_bruteforce(T: AltForm) -> AltForm:
    """1/2 sum_i (e_i⌟T) ∧ (e_i⌟T), written out blade by blade."""
    n = T.n
    out = AltForm.zero(n, 4)
    for i in range(n):
        a = T.contract_basis(i)
        out = out + a.wedge(a) * Fraction(1, 2)
    return out


def test_sigma_sasakian():
    T = Torsion3Form.parse(5, SASAKI_T)
    assert sigma_T(T) == AltForm.parse(5, "4*e1234")


@pytest.mark.parametrize("n", [3, 4])
def test_sigma_vanishes_in_low_dimension_exhaustively(n):
    for idx in itertools.combinations(range(n), 3):
        assert sigma_T(Torsion3Form(AltForm.blade(n, idx), validate=False)).is_zero()
    # sums of basis 3-forms with varying coefficients
    for coeffs in itertools.product((0, 1, -2), repeat=len(list(itertools.combinations(range(n), 3)))):
        w = AltForm(n, 3, dict(zip(itertools.combinations(range(n), 3), coeffs)))
        assert sigma_T(Torsion3Form(w, validate=False)).is_zero()


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_sigma_matches_wedge_oracle(n, rng):
    for _ in range(5):
        w = random_form(n, 3, rng)
        assert sigma_T(Torsion3Form(w, validate=False)) == _sigma_bruteforce(w)


def test_sigma_on_g2_spinor():
    rep = build_rep(7, volume_sign=-1)
    T = Torsion3Form(AltForm.parse(7, G2_OMEGA) * -1)
    phi0 = t_spectrum(rep, T).space(-7).basis
    assert (form_matrix(rep, sigma_T(T)) @ phi0 + phi0 * (3 * T.norm_sq)).is_zero()


def test_norm_convention_and_symmetry(rng):
    T = Torsion3Form.parse(5, SASAKI_T)
    assert T.norm_sq == 8
    rep = build_rep(5)
    bk = rep.backend
    M = form_matrix(rep, T.form)
    phi, psi = random_spinor(rng, 4), random_spinor(rng, 4)
    assert (bk.inner(M @ phi, psi) - bk.inner(phi, M @ psi)).is_zero()


def test_spectrum_sasakian():
    sp = t_spectrum(build_rep(5), Torsion3Form.parse(5, SASAKI_T))
    assert sp.multiplicities() == {-4: 1, 0: 2, 4: 1}
    for space in sp:
        assert space.certified


def test_spectrum_g2_and_orthogonality():
    rep = build_rep(7, volume_sign=-1)
    T = Torsion3Form(AltForm.parse(7, G2_OMEGA) * -1)
    sp = t_spectrum(rep, T)
    assert sp.multiplicities() == {-7: 1, 1: 7}
    M = form_matrix(rep, T.form)
    total = 0
    for space in sp:
        B = space.basis
        total += space.multiplicity
        assert (M @ B - B * space.value).is_zero()
        gram = B.H @ B
        off = gram.to_complex() - np.diag(np.diag(gram.to_complex()))
        assert np.all(off == 0)
    assert total == rep.dim


def test_spectrum_nearly_kaehler_extremes():
    T = Torsion3Form.parse(6, "e135 - e146 - e236 - e245")
    sp = t_spectrum(build_rep(6), T)
    assert sp.multiplicities() == {-4: 1, 0: 6, 4: 1}
    assert max(sp.values()) ** 2 == 4 * T.norm_sq


def test_spectrum_float_backend_matches_exact():
    T = Torsion3Form.parse(5, SASAKI_T)
    a = t_spectrum(build_rep(5, "float"), T).multiplicities()
    b = t_spectrum(build_rep(5), T).multiplicities()
    assert a == b


def test_contraction_hand_value_n3():
    rep = build_rep(3)
    T = Torsion3Form.parse(3, "e123")
    lhs = None
    for j in range(3):
        a = form_matrix(rep, T.contract_basis(j))
        lhs = a @ a if lhs is None else lhs + a @ a
    assert (lhs + ExactArray.eye(2) * 3).is_zero()
    assert contraction_residuals(rep, T, [1, 2, 3])["norm"].is_zero()


def test_contraction_identities_sasakian_exact():
    rep = build_rep(5)
    T = Torsion3Form.parse(5, SASAKI_T)
    res = check_contraction_identities(rep, T, trials=100, seed=1)
    assert {r.identity for r in res} == set(CONTRACTION_IDENTITIES)
    assert all(r.passed and r.max_residual == 0.0 for r in res)


def test_contraction_identities_zero_vector():
    rep = build_rep(6)
    T = Torsion3Form(random_form(6, 3, np.random.default_rng(3)), validate=False)
    for name, r in contraction_residuals(rep, T, [0] * 6).items():
        if name in ("frame-torsion", "frame-torsion-mirror", "swap", "mixed-product"):
            assert r.is_zero()


@pytest.mark.parametrize("n", range(3, 9))
def test_contraction_identities_random_forms(n):
    res = check_contraction_identities(build_rep(n), None, trials=4, seed=n)
    assert all(r.passed for r in res), [r for r in res if not r.passed]


def test_contraction_identities_float_backend():
    res = check_contraction_identities(build_rep(7, "float"), None, trials=5, seed=2)
    assert all(r.passed and r.max_residual < 1e-10 for r in res)


@pytest.mark.parametrize("scale", [Fraction(1, 3), Fraction(7, 12), Fraction(5, 2)])
def test_spectrum_rational_values_stay_exact(scale):
    T = Torsion3Form(AltForm.parse(6, "e135 - e146 - e236 - e245") * scale)
    sp = t_spectrum(build_rep(6), T)
    assert sp.multiplicities() == {-4 * scale: 1, 0: 6, 4 * scale: 1}
    M = form_matrix(build_rep(6), T.form)
    for space in sp:
        assert space.certified
        assert isinstance(space.value, (int, Fraction))
        assert (M @ space.basis - space.basis * space.value).is_zero()
