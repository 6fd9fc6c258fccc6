import math

import numpy as np
import pytest

from pseudomolecule import (
    YB171,
    TrapConfig,
    axial_normal_modes,
    equilibrium_positions,
    length_scale,
    linear_chain_stable,
    min_spacing,
)
from pseudomolecule.crystal import _hessian, dimensionless_equilibrium

from conftest import REF_TRAP, TWO_PI


def trap(n, nu=TWO_PI * 123.5e3, nu_r=TWO_PI * 502e3):
    return TrapConfig(nu, nu_r, n)


def test_length_scale_reference_trap():
    assert length_scale(REF_TRAP.nu_axial, YB171.mass) == pytest.approx(11.0517e-6, rel=1e-4)


def test_single_ion_sits_at_center():
    assert equilibrium_positions(trap(1), YB171) == pytest.approx([0.0], abs=1e-18)


def test_two_ions_analytic():
    ell = length_scale(REF_TRAP.nu_axial, YB171.mass)
    z = equilibrium_positions(trap(2), YB171)
    assert z / ell == pytest.approx([-0.25 ** (1 / 3), 0.25 ** (1 / 3)], rel=1e-12)


def test_three_ion_spacing_matches_figure(ref_modes):
    assert np.diff(ref_modes.positions) * 1e6 == pytest.approx([11.9, 11.9], abs=0.1)


@pytest.mark.parametrize("n", [2, 3, 5, 8, 20, 50])
def test_equilibrium_is_antisymmetric_and_balanced(n):
    u = dimensionless_equilibrium(n)
    assert np.all(np.diff(u) > 0)
    assert np.max(np.abs(u + u[::-1])) < 1e-12
    force = u.copy()
    for i in range(n):
        d = u[i] - np.delete(u, i)
        force[i] -= np.sum(np.sign(d) / d**2)
    assert np.max(np.abs(force)) < 1e-12


@pytest.mark.parametrize("n, ratios", [
    (2, [1.0, math.sqrt(3)]),
    (3, [1.0, math.sqrt(3), math.sqrt(29 / 5)]),
])
def test_mode_frequencies_analytic(n, ratios):
    modes = axial_normal_modes(trap(n), YB171)
    assert modes.mode_freqs / REF_TRAP.nu_axial == pytest.approx(ratios, rel=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7, 12])
def test_mode_matrix_properties(n):
    modes = axial_normal_modes(trap(n, nu_r=TWO_PI * 5e6), YB171)
    s = modes.mode_matrix
    assert np.max(np.abs(s @ s.T - np.eye(n))) < 1e-10
    assert np.max(np.abs(s.T @ s - np.eye(n))) < 1e-10
    assert modes.mode_freqs[0] == pytest.approx(REF_TRAP.nu_axial, rel=1e-9)
    assert s[0] == pytest.approx(np.full(n, 1 / math.sqrt(n)), abs=1e-10)
    assert np.all(np.diff(modes.mode_freqs) > 0)
    # largest-magnitude entry of each row is positive
    for row in s:
        assert row[np.argmax(np.abs(row) - 1e-9 * np.arange(n))] > 0


def test_eigenvalue_sum_matches_hessian_trace():
    n = 6
    u = dimensionless_equilibrium(n)
    modes = axial_normal_modes(trap(n, nu_r=TWO_PI * 5e6), YB171)
    expected = np.trace(_hessian(u)) * REF_TRAP.nu_axial**2
    assert np.sum(modes.mode_freqs**2) == pytest.approx(expected, rel=1e-9)


def test_mode_matrix_is_reproducible():
    a = axial_normal_modes(trap(5, nu_r=TWO_PI * 3e6), YB171).mode_matrix
    b = axial_normal_modes(trap(5, nu_r=TWO_PI * 3e6), YB171).mode_matrix
    assert np.array_equal(a, b)


def test_center_spacing_is_smallest():
    z = equilibrium_positions(trap(8, nu_r=TWO_PI * 5e6), YB171)
    d = np.diff(z)
    assert np.argmin(d) == 3


def test_min_spacing_examples(ref_modes):
    assert min_spacing(trap(2), YB171) * 1e6 == pytest.approx(15.1, abs=0.1)
    assert min_spacing(REF_TRAP, YB171) == pytest.approx(ref_modes.spacings.min(), rel=0.02)
    ratio = min_spacing(trap(3, nu=TWO_PI * 247e3), YB171) / min_spacing(REF_TRAP, YB171)
    assert ratio == pytest.approx(2 ** (-2 / 3), rel=1e-12)


def test_linear_chain_stability():
    assert linear_chain_stable(REF_TRAP)
    assert linear_chain_stable(trap(1, nu_r=TWO_PI * 1e3))
    assert not linear_chain_stable(trap(10, nu_r=TWO_PI * 123.5e3))


@pytest.mark.parametrize("kwargs", [
    dict(nu_axial=0.0, nu_radial=1.0, n_ions=2),
    dict(nu_axial=1.0, nu_radial=-1.0, n_ions=2),
    dict(nu_axial=1.0, nu_radial=1.0, n_ions=0),
])
def test_trap_validation(kwargs):
    with pytest.raises(ValueError):
        TrapConfig(**kwargs)

