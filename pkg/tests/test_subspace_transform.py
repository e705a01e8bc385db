"""Decomposizione dei sottospazi e fattorizzazione spettrale del blocco ridotto"""

import numpy as np
import pytest

from grad_halfspace import subspace_transform
from grad_halfspace.error_handler import (
    IncompatibleSystemError, ParityStructureError, RankDetectionError, WeightError,
)
from grad_halfspace.moment_system_builder import (
    MomentSystem, build_full3d, build_kramers3, build_reduced_couette,
)
from grad_halfspace.subspace_transform import (
    build_decomposition, decomposition_report, inertia, nullspace_basis, spectral_factorization,
)


def _projector(basis):
    return basis @ basis.T


def _assert_structure(system, dec):
    A, Q = system.A, system.Q
    scale = max(1.0, float(np.linalg.norm(A)), float(np.linalg.norm(Q)))
    V = dec.V
    np.testing.assert_allclose(V.T @ V, np.eye(dec.N), atol=1e-12)
    # U1 = G nel nucleo di Q, V1 nel nucleo di Q e di G^T A
    assert np.linalg.norm(dec.UtQV[:dec.p, :]) <= 1e-12 * scale
    assert np.linalg.norm(dec.UtQV[:, :dec.r]) <= 1e-12 * scale
    assert np.linalg.norm(dec.A_block(3, 1)) <= 1e-12 * scale
    assert np.linalg.norm(dec.A_block(1, 1)) <= 1e-12 * scale
    np.testing.assert_allclose(dec.A33, dec.A33.T, atol=1e-12 * scale)
    if dec.r:
        assert np.linalg.matrix_rank(dec.A21) == dec.r
    if dec.dim3:
        assert np.linalg.eigvalsh((dec.Q33 + dec.Q33.T) / 2).min() > 0


@pytest.mark.parametrize("M", [3, 4, 5])
def test_structure_full3d(M):
    system = build_full3d(M)
    _assert_structure(system, build_decomposition(system))


@pytest.mark.slow
@pytest.mark.parametrize("M", [6, 7, 8, 9])
def test_structure_full3d_high_order(M):
    system = build_full3d(M)
    dec = build_decomposition(system)
    _assert_structure(system, dec)
    assert spectral_factorization(dec).sylvester_consistent


@pytest.mark.parametrize("M", [3, 5, 7, 9])
def test_structure_reduced_couette(M):
    system = build_reduced_couette(M)
    _assert_structure(system, build_decomposition(system))


def test_kramers_bases(kramers):
    _, dec, spec = kramers
    np.testing.assert_allclose(np.abs(dec.V1[:, 0]), [1.0, 0.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(np.abs(dec.V3[:, 0]), [0.0, 1.0, 0.0], atol=1e-14)
    assert (dec.p, dec.r, dec.dim3) == (1, 1, 1)
    assert (spec.n_plus, spec.n_zero, spec.n_minus) == (0, 1, 0)
    assert spec.lambda_max == 0.0
    assert spec.weight_bound == float("inf")


def test_parity_and_generic_spans_agree():
    system = build_full3d(4)
    generic = build_decomposition(system, use_parity=False)
    parity = build_decomposition(system, use_parity=True)
    assert generic.counts()["p"] == parity.counts()["p"]
    assert generic.r == parity.r
    for name in ("V1", "V2", "V3"):
        np.testing.assert_allclose(_projector(getattr(generic, name)), _projector(getattr(parity, name)),
                                   atol=1e-10, err_msg=name)
    values_generic = spectral_factorization(generic).eigenvalues
    values_parity = spectral_factorization(parity).eigenvalues
    np.testing.assert_allclose(values_generic, values_parity, atol=1e-10)


@pytest.mark.parametrize("fixture", ["full3", "full5", "couette5"])
def test_spectral_factorization(fixture, request):
    _, dec, spec = request.getfixturevalue(fixture)
    assert spec.sylvester_consistent
    assert spec.sylvester_counts == inertia(dec.A33, 1e-10)
    # T^T Q33 T = I e T^T A33 T = Lambda
    np.testing.assert_allclose(spec.T.T @ dec.Q33 @ spec.T, np.eye(spec.dim), atol=1e-10)
    np.testing.assert_allclose(spec.T.T @ dec.A33 @ spec.T, np.diag(spec.eigenvalues), atol=1e-10)
    np.testing.assert_allclose(spec.T_inv @ spec.T, np.eye(spec.dim), atol=1e-10)
    values = spec.eigenvalues
    assert np.all(np.diff(values) <= 1e-12)
    assert spec.lambda_max == pytest.approx(values[0])


def test_spectral_checks_are_enforced(full3, monkeypatch):
    _, dec, spec = full3
    shifted = (spec.n_plus + 1, spec.n_zero - 1, spec.n_minus)
    monkeypatch.setattr(subspace_transform, "inertia", lambda matrix, tol_factor=1e-10: shifted)
    with pytest.raises(RankDetectionError) as info:
        spectral_factorization(dec)
    assert info.value.context["check"] == "sylvester"

    monkeypatch.undo()
    monkeypatch.setattr(subspace_transform, "fix_column_signs", lambda basis: basis + 1e-6)
    with pytest.raises(RankDetectionError) as info:
        spectral_factorization(dec)
    assert info.value.context["check"] == "spectral_eigen"


def test_full3d_order3_counts(full3):
    _, dec, spec = full3
    assert dec.parity.counts() == {"p1": 4, "p2": 1, "r1": 3, "r2": 0}
    assert dec.dim3 == 12
    assert spec.n_plus == 3


def test_weight_checks(full3):
    _, dec, spec = full3
    with pytest.raises(WeightError):
        spectral_factorization(dec, a=1.0 / spec.lambda_max)
    with pytest.raises(WeightError):
        spec.check_weight(0.0)
    spec.check_weight(0.5 / spec.lambda_max)


def test_kramers_accepts_any_positive_weight(kramers):
    _, _, spec = kramers
    spec.check_weight(100.0)


def test_incompatible_system_rejected():
    with pytest.raises(IncompatibleSystemError):
        build_decomposition(build_full3d(2))


def test_flux_block_without_full_column_rank_rejected():
    A = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    system = MomentSystem(order=0, A=A, Q=np.diag([0.0, 1.0, 1.0]), nu=1.0, m=1, n=2)
    assert system.has_parity
    with pytest.raises(IncompatibleSystemError) as info:
        build_decomposition(system)
    assert info.value.context["n"] == 2
    assert info.value.context["sigma_min"] == 0.0


def test_parity_required_on_unstructured_system():
    system = MomentSystem(order=0, A=np.diag([1.0, -1.0]), Q=np.diag([0.0, 1.0]), nu=1.0, m=1, n=1)
    assert not system.has_parity
    with pytest.raises(ParityStructureError):
        build_decomposition(system, use_parity=True)
    dec = build_decomposition(system)
    assert dec.parity is None


def test_nullspace_basis_edge_cases():
    assert nullspace_basis(np.zeros((0, 3))).shape == (3, 3)
    basis = nullspace_basis(np.array([[1.0, 1.0]]))
    np.testing.assert_allclose(np.abs(basis[:, 0]), [np.sqrt(0.5)] * 2)


def test_report_is_serialisable(kramers):
    _, dec, spec = kramers
    report = decomposition_report(dec, spec)
    assert report["dimensions"]["n_zero"] == 1
    assert report["weight_bound"] is None
    assert report["eigenvalues"] == [0.0]
