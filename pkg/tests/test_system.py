import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fewbody.system import (
    PairPotential, SystemSpec, WidthConvention, build_jacobi, characteristic_energy,
    depth_from_reduced_strength, reduced_strength,
)


def test_characteristic_energy_is_one_in_natural_units():
    assert characteristic_energy(SystemSpec.identical(3, -2.0)) == 1.0
    assert characteristic_energy(SystemSpec.identical(3, -2.0, b=2.0)) == 0.25


def test_reduced_strength_round_trip():
    assert reduced_strength(-2.706) == pytest.approx(-1.353)
    assert depth_from_reduced_strength(reduced_strength(-1.7, 1.3), 1.3) == pytest.approx(-1.7)


def test_width_conventions():
    assert PairPotential(-1.0).width == 1.0
    pot = PairPotential(-1.0, 2.0, "EXP_R2_OVER_2B2")
    assert pot.width_convention is WidthConvention.EXP_R2_OVER_2B2
    assert pot(2.0 * math.sqrt(2.0)) == pytest.approx(-math.exp(-1.0))


@pytest.mark.parametrize("masses", [(1.0, 2.0), (1.0, 0.5, 1.0), (1.0, 0.5, 0.4)])
def test_invalid_mass_layouts(masses):
    with pytest.raises(ValueError):
        SystemSpec(masses, PairPotential(-1.0))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        PairPotential(-1.0, 0.0)
    with pytest.raises(ValueError):
        SystemSpec.with_light(4, 1.5, -1.0)


def test_json_round_trip():
    spec = SystemSpec.with_light(4, 0.2, -3.1, 1.5)
    back = SystemSpec.from_json(spec.to_json())
    assert back == spec
    assert back.pair_species().count("HL") == 3


def test_symmetry_group_sizes():
    assert len(SystemSpec.identical(4, -1.0).symmetry_group()) == 24
    assert len(SystemSpec.with_light(4, 0.5, -1.0).symmetry_group()) == 6
    # unit mass ratio behaves like identical bosons
    assert len(SystemSpec.with_light(4, 1.0, -1.0).symmetry_group()) == 24


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), ratio=st.floats(0.05, 1.0), seed=st.integers(0, 10**6))
def test_jacobi_pair_vectors_and_kinetic(n, ratio, seed):
    spec = SystemSpec.with_light(n, ratio, -1.0)
    frame = build_jacobi(spec)
    rng = np.random.default_rng(seed)
    r = rng.normal(size=(n, 3))
    x = frame.to_jacobi(r)
    for (i, j), w in zip(frame.pairs, frame.pair_vectors):
        assert np.allclose(r[i] - r[j], w @ x, atol=1e-12)
    # kinetic energy: sum p^2/2m minus the centre-of-mass part equals sum mu_k^-1 pi_k^2 / 2
    masses = np.array(spec.masses)
    v = rng.normal(size=(n, 3))
    p = masses[:, None] * v
    t_rel = 0.5 * np.sum(masses[:, None] * v**2) - 0.5 * np.sum(p.sum(0) ** 2) / masses.sum()
    xdot = frame.to_jacobi(v)
    t_jac = 0.5 * np.sum(xdot**2 / frame.inverse_mass[:, None])
    assert t_rel == pytest.approx(t_jac, rel=1e-10, abs=1e-12)


def test_permutation_matrix_acts_on_jacobi_vectors():
    spec = SystemSpec.identical(4, -1.0)
    frame = build_jacobi(spec)
    r = np.random.default_rng(3).normal(size=(4, 3))
    for perm in spec.symmetry_group()[:8]:
        T = frame.permutation_matrix(perm)
        assert np.allclose(frame.to_jacobi(r[list(perm)]), T @ frame.to_jacobi(r))
