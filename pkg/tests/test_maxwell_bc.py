"""Condizioni di Maxwell: operatore di Grad, operatore modificato e risoluzione a due stadi"""

import math

import numpy as np
import pytest

from grad_halfspace.error_handler import NotPositiveDefiniteError, TheoremHypothesisError, ValidationError
from grad_halfspace.exp_poly import ExpPolyVec
from grad_halfspace.halfspace_solver import instability_witness, pure_zero_mode_source, unit_profile
from grad_halfspace.maxwell_bc import (
    MaxwellBC, assemble_grad_bc, assemble_modified_bc, check_maxwell_bc, flux_continuity_H,
    positivity_margin, reduced_operator, solve_layer_with_maxwell, structure_residuals,
)
from grad_halfspace.moment_system_builder import build_full3d, build_reduced_couette, chi_hat
from helpers import analyzed, random_exp_poly, safe_weight

SQRT2 = math.sqrt(2.0)
CHI_HAT_ONE = 2.0 / math.sqrt(2.0 * math.pi)


def test_grad_row_for_kramers(kramers):
    system, _, _ = kramers
    bc = assemble_grad_bc(system, 1.0)
    assert bc.chi_hat == pytest.approx(CHI_HAT_ONE)
    np.testing.assert_allclose(bc.operator, [[CHI_HAT_ONE, CHI_HAT_ONE * SQRT2 / 2.0, 1.0]], atol=1e-11)


def test_grad_without_accommodation_drops_even_block(full3):
    system, _, _ = full3
    bc = assemble_grad_bc(system, 0.0)
    assert bc.operator.shape == (system.n, system.N)
    assert not np.any(bc.operator[:, :system.m])
    assert np.any(bc.operator[:, system.m:])


def test_modified_row_for_kramers(kramers):
    system, _, _ = kramers
    bc = assemble_modified_bc(system, "identity", chi=1.0, scale=2.5)
    np.testing.assert_allclose(bc.operator, [[CHI_HAT_ONE, CHI_HAT_ONE * SQRT2, 2.5]], atol=1e-15)
    assert bc.to_dict() == {"kind": "modified", "chi": 1.0, "chi_hat": bc.chi_hat, "H": "identity", "c": 2.5}


def test_flux_H_is_spd(full3):
    system, _, _ = full3
    H = flux_continuity_H(system)
    np.testing.assert_allclose(H, H.T, atol=0)
    assert np.linalg.eigvalsh(H).min() > 0


def test_modified_rejects_bad_H(full3):
    system, _, _ = full3
    with pytest.raises(NotPositiveDefiniteError):
        assemble_modified_bc(system, -np.eye(system.n))
    with pytest.raises(ValidationError):
        assemble_modified_bc(system, "diagonal")
    with pytest.raises(ValidationError):
        assemble_modified_bc(system, "identity", scale=0.0)
    with pytest.raises(ValidationError):
        MaxwellBC(kind="modified", operator=np.zeros((1, 3)), chi=1.0, chi_hat=chi_hat(1.0))


def test_grad_condition_is_not_stable_at_order_five(full5):
    system, dec, spec = full5
    report = check_maxwell_bc(system, assemble_grad_bc(system, 1.0), dec, spec)
    assert not report["verdict"].stable
    assert "reduced" not in report


@pytest.mark.parametrize("H_option", ["identity", "flux"])
@pytest.mark.parametrize("chi", [0.0, 0.5, 1.0])
def test_modified_condition_is_well_posed_at_order_five(full5, H_option, chi):
    system, dec, spec = full5
    bc = assemble_modified_bc(system, H_option, chi=chi)
    report = check_maxwell_bc(system, bc, dec, spec)
    assert report["verdict"].well_posed
    reduced = report["reduced"]
    assert reduced.well_posed
    assert reduced.sigma_min_BTplus > 1e-8
    assert reduced_operator(bc, dec).shape == (spec.n_plus, spec.dim)
    assert max(report["structure"].values()) <= 1e-12
    assert positivity_margin(bc, dec, spec) > 0


def _random_spd(rng, n):
    X = rng.standard_normal((n, n))
    return X @ X.T + 0.1 * np.eye(n)


@pytest.mark.parametrize("build", [
    lambda: build_reduced_couette(3), lambda: build_reduced_couette(5), lambda: build_reduced_couette(7),
    lambda: build_full3d(3), lambda: build_full3d(5),
    pytest.param(lambda: build_full3d(7), marks=pytest.mark.slow),
])
def test_modified_condition_with_random_H(build, rng):
    system, dec, spec = analyzed(build())
    for chi in (0.0, 0.3, 1.0):
        bc = assemble_modified_bc(system, _random_spd(rng, system.n), chi=chi, scale=float(rng.uniform(0.5, 2.0)))
        assert bc.H_option == "matrix"
        report = check_maxwell_bc(system, bc, dec, spec)
        assert report["verdict"].well_posed
        assert report["reduced"].well_posed
        assert max(report["structure"].values()) <= 1e-10
        assert positivity_margin(bc, dec, spec) > 0


def test_structure_residuals(full3):
    system, dec, _ = full3
    residuals = structure_residuals(system, dec)
    assert set(residuals) == {"Z3t_Mt_Y1", "Z3t_Mt_Ge"}
    assert max(residuals.values()) <= 1e-12


def test_grad_witness_at_order_five(full5):
    system, dec, spec = full5
    a = safe_weight(spec)
    bc = assemble_grad_bc(system, 1.0).boundary_operator(dec)
    report = instability_witness(system, dec, spec, bc, a, 1e3)
    assert report is not None
    assert report.h_norm == pytest.approx(1.0, rel=1e-8)
    assert report.achieved >= 1e3
    assert report.monotone
    modified = assemble_modified_bc(system, "flux").boundary_operator(dec)
    assert instability_witness(system, dec, spec, modified, a, 1e3) is None


@pytest.fixture
def layer_data(full3, rng):
    system, dec, spec = full3
    a = safe_weight(spec)
    h = random_exp_poly(rng, system.N, a)
    g1 = rng.standard_normal(system.n)
    g2 = rng.standard_normal(system.m)
    return a, h, g1, g2


def test_layer_solution_satisfies_full_condition(full3, layer_data):
    system, dec, spec = full3
    a, h, g1, g2 = layer_data
    bc = assemble_modified_bc(system, "flux", chi=1.0)
    layer = solve_layer_with_maxwell(system, dec, spec, bc, g1, g2, h, a)
    assert layer.bc_residual <= 1e-9
    assert layer.verdict.well_posed
    assert layer.solution.residual_ok
    V3W0 = layer.solution.V3W(0.0)
    np.testing.assert_allclose(layer.reduced.B3 @ V3W0, layer.reduced.g, atol=1e-10)
    assert layer.compat.shape == (dec.parity.p1,)
    assert set(layer.to_dict()) >= {"solution", "compat", "bc_residual", "ratios", "verdict"}


def test_compatibility_ignores_pure_zero_mode_sources(full3, layer_data, rng):
    system, dec, spec = full3
    a, h, g1, g2 = layer_data
    bc = assemble_modified_bc(system, "flux", chi=1.0)
    base = solve_layer_with_maxwell(system, dec, spec, bc, g1, g2, h, a)
    c0 = rng.standard_normal(spec.n_zero)
    bump_norms = []
    # ||phi_s||_a = 1: la perturbazione ha la stessa norma per ogni s
    for s in (a + 2.0, a + 20.0, a + 200.0):
        bump = pure_zero_mode_source(dec, spec, c0, unit_profile(s, a))
        bump_norms.append(bump.weighted_norm(a))
        perturbed = solve_layer_with_maxwell(system, dec, spec, bc, g1, g2, h + bump, a)
        np.testing.assert_allclose(perturbed.compat, base.compat, atol=1e-9)
        assert perturbed.bc_residual <= 1e-9
        assert perturbed.trace_bound_holds
    np.testing.assert_allclose(bump_norms, bump_norms[0], rtol=1e-10)


def test_g2_component_along_invariants_is_ignored(full3, layer_data):
    system, dec, spec = full3
    a, h, g1, g2 = layer_data
    bc = assemble_modified_bc(system, "identity", chi=0.5)
    base = solve_layer_with_maxwell(system, dec, spec, bc, g1, g2, h, a)
    shifted = g2 + dec.parity.G_e @ np.arange(1.0, dec.parity.p1 + 1.0)
    other = solve_layer_with_maxwell(system, dec, spec, bc, g1, shifted, h, a)
    np.testing.assert_allclose(other.compat, base.compat, atol=1e-10)


@pytest.mark.parametrize("c", [0.5, 1.0, 3.0])
def test_kramers_mean_velocity(kramers, c):
    system, dec, spec = kramers
    bc = assemble_modified_bc(system, "identity", chi=1.0, scale=c)
    sigma_bar = 0.7
    expected = -c * sigma_bar / bc.chi_hat
    for strength in (0.0, 1.0, -4.0):
        h = ExpPolyVec.exponential(1.0, [0.0, strength, 0.0])
        layer = solve_layer_with_maxwell(system, dec, spec, bc, [sigma_bar], [5.0, 0.0], h, 0.5)
        assert layer.compat[0] == pytest.approx(expected, rel=1e-12)
        assert layer.bc_residual <= 1e-12


def test_kramers_zero_data(kramers):
    system, dec, spec = kramers
    bc = assemble_modified_bc(system, "identity")
    layer = solve_layer_with_maxwell(system, dec, spec, bc, [0.0], [0.0, 0.0], ExpPolyVec.zeros(3), 0.5)
    np.testing.assert_array_equal(layer.compat, [0.0])
    assert layer.solution.W.is_zero
    assert layer.ratios == {"W": 0.0, "compat": 0.0}


def test_two_stage_hypotheses(kramers):
    system, dec, spec = kramers
    h = ExpPolyVec.zeros(3)
    with pytest.raises(TheoremHypothesisError):
        solve_layer_with_maxwell(system, dec, spec, assemble_grad_bc(system, 1.0), [0.0], [0.0, 0.0], h, 0.5)
    with pytest.raises(TheoremHypothesisError):
        solve_layer_with_maxwell(system, dec, spec, assemble_modified_bc(system, "identity", chi=0.0),
                                 [0.0], [0.0, 0.0], h, 0.5)
