from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from spinlab.catalog import load_entry, twisted_torus
from spinlab.forms import AltForm, random_form
from spinlab.geometry import (
    GeometryError,
    ModelGeometry,
    connection_s,
    curvature,
    frame_d,
    frame_delta,
    is_parallel_torsion,
    levi_civita,
)
from spinlab.torsion import Torsion3Form, sigma_T

GRID = [Fraction(x) for x in ("-1/2", "-1/4", "0", "1/12", "1/4", "1/2", "3/4", "1")]


def _eps():
    e = np.zeros((3, 3, 3), dtype=object)
    for (i, j, k), v in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (1, 0, 2): -1, (0, 2, 1): -1, (2, 1, 0): -1}.items():
        e[i, j, k] = v
    return e


def _lc_by_conditions(geom):
    """Levi-Civita coefficients solved from torsion-freeness and metricity.

    G[i, j, k] = g(nabla_{e_i} e_j, e_k) is the unique solution with
    G[i,j,k] = -G[i,k,j] and G[i,j,k] - G[j,i,k] = c[i,j,k]; we solve this
    linear system by least squares as an independent check of Koszul.
    """
    n = geom.n
    idx = {(i, j, k): a for a, (i, j, k) in enumerate(np.ndindex(n, n, n))}
    rows, rhs = [], []
    for i, j, k in np.ndindex(n, n, n):
        r = np.zeros(n ** 3)
        r[idx[i, j, k]] += 1
        r[idx[i, k, j]] += 1
        rows.append(r)
        rhs.append(0.0)
        r = np.zeros(n ** 3)
        r[idx[i, j, k]] += 1
        r[idx[j, i, k]] -= 1
        rows.append(r)
        rhs.append(float(geom.c[i, j, k]))
    sol = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0]
    return sol.reshape(n, n, n)


@pytest.mark.parametrize("name", ["flat_torus_3", "flat_torus_4", "su2", "heisenberg5"])
def test_levi_civita_matches_linear_solve(name):
    geom = load_entry(name).geometry
    G = levi_civita(geom)
    assert np.allclose(G.astype(float), _lc_by_conditions(geom), atol=1e-12)
    assert np.all(G + G.transpose(0, 2, 1) == 0)


def test_su2_connections():
    geom = load_entry("su2").geometry
    eps = _eps()
    assert np.all(levi_civita(geom) == eps * Fraction(1, 2))
    assert np.all(connection_s(geom, 0) == levi_civita(geom))
    assert np.all(connection_s(geom, Fraction(1, 4)) == eps)
    assert np.all(connection_s(geom, Fraction(-1, 4)) == 0)


def test_su2_scaled_connections():
    geom = load_entry("su2", 2).geometry
    assert np.all(levi_civita(geom) == _eps())


def test_heisenberg_diagonal_christoffels_vanish():
    G = levi_civita(load_entry("heisenberg5").geometry)
    for i in range(5):
        assert all(G[i, i, k] == 0 for k in range(5))


def test_flat_torus_is_flat_at_s0():
    geom = load_entry("flat_torus_3").geometry
    assert np.all(levi_civita(geom) == 0)
    assert np.all(curvature(geom, 0).R == 0)


def test_cartan_schouten_flatness():
    geom = load_entry("su2").geometry
    for s in (Fraction(1, 4), Fraction(-1, 4)):
        assert np.all(curvature(geom, s).R == 0)
    assert np.all(curvature(geom, Fraction(1, 4)).ric == 0)


def test_heisenberg_curvature_constants():
    geom = load_entry("heisenberg5").geometry
    ric = curvature(geom, 0).ric
    assert np.all(ric == np.diag([-2, -2, -2, -2, 4]).astype(object))
    assert curvature(geom, 0).sca == -4
    assert curvature(geom, Fraction(1, 4)).sca == -16
    assert geom.torsion.norm_sq == 8


@pytest.mark.parametrize("s", GRID)
def test_flat_torus_torsion_curvature(s):
    geom = load_entry("flat_torus_3").geometry
    cd = curvature(geom, s)
    assert np.all(cd.S == np.eye(3, dtype=int) * 2)
    assert np.all(cd.ric == np.eye(3, dtype=int) * (-8 * s * s))
    assert cd.sca == -24 * s * s


@pytest.mark.parametrize("name", ["flat_torus_3", "flat_torus_4", "su2", "heisenberg5"])
@pytest.mark.parametrize("s", GRID)
def test_curvature_symmetries_with_parallel_torsion(name, s):
    R = curvature(load_entry(name).geometry, s).R
    assert np.all(R + R.transpose(1, 0, 2, 3) == 0)
    assert np.all(R + R.transpose(0, 1, 3, 2) == 0)
    assert np.all(R - R.transpose(2, 3, 0, 1) == 0)
    ric = curvature(load_entry(name).geometry, s).ric
    assert np.all(ric == ric.T)


def test_exterior_derivative_of_contact_form():
    geom = load_entry("heisenberg5").geometry
    assert frame_d(geom, AltForm.parse(5, "e5")) == AltForm.parse(5, "2*e12 + 2*e34")


def test_torus_forms_are_closed(rng):
    geom = load_entry("flat_torus_4").geometry
    w = random_form(4, 2, rng)
    assert frame_d(geom, w).is_zero()
    assert frame_delta(geom, w).is_zero()


@pytest.mark.parametrize("name", ["flat_torus_3", "su2", "heisenberg5"])
def test_d_s_of_torsion(name, rng):
    geom = load_entry(name).geometry
    T = geom.torsion.form
    dT = frame_d(geom, T)
    for _ in range(4):
        s = Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 9)))
        assert frame_d(geom, T, s) == dT - sigma_T(T) * (8 * s)


def test_parallel_torsion_detection():
    assert is_parallel_torsion(load_entry("su2").geometry)
    assert is_parallel_torsion(load_entry("heisenberg5").geometry)
    res = is_parallel_torsion(twisted_torus())
    assert not res and res.witness is not None


def test_invalid_structure_constants_rejected():
    T = Torsion3Form.parse(3, "e123")
    c = np.zeros((3, 3, 3), dtype=object)
    c[0, 1, 2] = 1
    with pytest.raises(GeometryError):
        ModelGeometry("bad", 3, c, T)
    # [e1,e2] = e3 and [e3,e1] = e1: the cyclic sum on (e1,e2,e3) is e3
    with pytest.raises(GeometryError):
        ModelGeometry.from_brackets("bad", 3, [(0, 1, {2: 1}), (2, 0, {0: 1})], T)
