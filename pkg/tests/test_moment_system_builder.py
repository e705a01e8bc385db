"""Costruzione dei sistemi di momenti e delle matrici di bordo"""

import math
from functools import lru_cache

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import eval_hermitenorm

from grad_halfspace.config import DEFAULT_CONFIG

from grad_halfspace.error_handler import IndexCountError, ValidationError
from grad_halfspace.moment_system_builder import (
    BoundaryData, MomentSystem, MultiIndex, build_bgk_collision, build_flux_matrix, build_full3d,
    build_half_flux_matrix, build_kramers3, build_reduced_couette, build_selection_matrix,
    build_wall_vector, chi_hat, collision_invariants, enumerate_indices, half_range_moments,
)
from grad_halfspace.subspace_transform import check_compatibility, check_flux_rank


@pytest.mark.parametrize("M, N, m, n", [(2, 10, 7, 3), (3, 20, 13, 7), (5, 56, 34, 22)])
def test_index_counts(M, N, m, n):
    enum = enumerate_indices(M)
    assert (len(enum.indices), enum.m, enum.n) == (N, m, n)


def test_index_ordering_even_first_then_graded():
    enum = enumerate_indices(3)
    even, odd = enum.indices[:enum.m], enum.indices[enum.m:]
    assert all(alpha.a2 % 2 == 0 for alpha in even)
    assert all(alpha.a2 % 2 == 1 for alpha in odd)
    assert even[0] == MultiIndex(0, 0, 0)
    assert even[1:3] == (MultiIndex(1, 0, 0), MultiIndex(0, 0, 1))
    assert odd[0] == MultiIndex(0, 1, 0)
    degrees = [alpha.degree for alpha in even]
    assert degrees == sorted(degrees)


def test_flux_matrix_entries():
    enum = enumerate_indices(4)
    A = build_flux_matrix(enum.indices)
    np.testing.assert_array_equal(A, A.T)
    position = {alpha: i for i, alpha in enumerate(enum.indices)}
    for alpha, i in position.items():
        j = position.get(alpha.shifted(+1))
        if j is not None:
            assert A[i, j] == math.sqrt(alpha.a2 + 1)
    # accoppiamento solo tra parità diverse
    assert not np.any(A[:enum.m, :enum.m]) and not np.any(A[enum.m:, enum.m:])


def test_kramers_matrices():
    system = build_kramers3(2.0)
    s2 = math.sqrt(2.0)
    np.testing.assert_array_equal(system.A, [[0, 0, 1], [0, 0, s2], [1, s2, 0]])
    np.testing.assert_array_equal(system.Q, np.diag([0.0, 2.0, 2.0]))
    assert system.variable_labels() == ["u1", "f3", "sigma12"]
    assert system.has_parity


def test_bgk_collision_is_symmetric_psd_with_five_invariants():
    enum = enumerate_indices(4)
    Q = build_bgk_collision(enum.indices, 1.5)
    np.testing.assert_allclose(Q, Q.T, atol=0)
    values = np.linalg.eigvalsh(Q)
    assert np.sum(np.abs(values) < 1e-12) == 5
    assert values.min() > -1e-12
    G = collision_invariants(enum.indices)
    np.testing.assert_allclose(G.T @ G, np.eye(5), atol=1e-14)


def test_bgk_rejects_non_positive_frequency():
    with pytest.raises(ValidationError):
        build_bgk_collision(enumerate_indices(2).indices, 0.0)


def test_full3d_order_two_has_joint_kernel():
    system = build_full3d(2)
    report = check_compatibility(system.A, system.Q)
    assert not report.compatible
    assert report.joint_nullity == 1


def test_reduced_couette_layout():
    system = build_reduced_couette(5)
    assert (system.m, system.n) == (3, 2)
    assert system.variable_labels() == ["f1", "f3", "f5", "f2", "f4"]
    assert system.Q[0, 0] == 0.0 and np.all(np.diag(system.Q)[1:] == 1.0)
    with pytest.raises(ValidationError):
        build_reduced_couette(4)


def test_half_range_moments_closed_forms():
    J = half_range_moments(2)
    # E|t| = sqrt(2/pi), J(0,2) = (E|t|^3 - E|t|)/sqrt(2)
    assert J[0, 0] == pytest.approx(math.sqrt(2.0 / math.pi), abs=1e-11)
    assert J[0, 2] == pytest.approx(math.sqrt(2.0 / math.pi) / math.sqrt(2.0), abs=1e-11)
    assert J[0, 1] == 0.0


def test_half_flux_matrix_is_spd():
    enum = enumerate_indices(5)
    S = build_half_flux_matrix(enum.indices[:enum.m])
    np.testing.assert_allclose(S, S.T, atol=1e-15)
    assert np.linalg.eigvalsh(S).min() > 0


@lru_cache(maxsize=None)
def _half_range_oracle(p: int, q: int) -> float:
    if (p + q) % 2:
        return 0.0
    value = quad(lambda t: t * math.exp(-t * t / 2.0) * eval_hermitenorm(p, t) * eval_hermitenorm(q, t),
                 0.0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return 2.0 * value / math.sqrt(2.0 * math.pi * math.factorial(p) * math.factorial(q))


def test_half_flux_matrix_matches_quadrature_oracle():
    enum = enumerate_indices(5)
    even = enum.indices[:enum.m]
    S = build_half_flux_matrix(even)
    for i, alpha in enumerate(even):
        for j, beta in enumerate(even):
            same_plane = alpha.a1 == beta.a1 and alpha.a3 == beta.a3
            expected = _half_range_oracle(alpha.a2, beta.a2) if same_plane else 0.0
            assert abs(S[i, j] - expected) <= 1e-10, (alpha, beta)


@pytest.mark.parametrize("build", [build_kramers3, lambda: build_reduced_couette(7),
                                   lambda: build_full3d(3), lambda: build_full3d(5)])
def test_flux_block_has_full_column_rank(build):
    system = build()
    Mb, _, _ = system.parity_blocks()
    assert Mb.shape == (system.m, system.n)
    values = np.linalg.svd(Mb, compute_uv=False)
    tol = DEFAULT_CONFIG.rank_tol(system.N)
    assert values.size == system.n
    assert values[-1] > tol * values[0]
    assert check_flux_rank(Mb, tol) == pytest.approx(values[-1])


def test_reduced_couette_order3_is_kramers():
    couette, kramers = build_reduced_couette(3, 0.7), build_kramers3(0.7)
    # f1 = u1, f3 = f3, f2 = sigma12
    assert couette.labels == ("f1", "f3", "f2")
    assert kramers.labels == ("u1", "f3", "sigma12")
    assert couette.indices == kramers.indices
    assert (couette.m, couette.n) == (kramers.m, kramers.n)
    np.testing.assert_array_equal(couette.A, kramers.A)
    np.testing.assert_array_equal(couette.Q, kramers.Q)


@pytest.mark.parametrize("M", [3, 4, 5, 6])
def test_selection_matrix_picks_n_rows(M):
    enum = enumerate_indices(M)
    E = build_selection_matrix(enum.indices[:enum.m], M, enum.n)
    assert E.shape == (enum.n, enum.m)
    np.testing.assert_array_equal(E.sum(axis=1), np.ones(enum.n))


def test_selection_matrix_count_mismatch():
    enum = enumerate_indices(3)
    with pytest.raises(IndexCountError):
        build_selection_matrix(enum.indices[:enum.m], 3, enum.n + 1)


def test_chi_hat_values():
    assert chi_hat(0.0) == 0.0
    assert chi_hat(1.0) == pytest.approx(2.0 / math.sqrt(2.0 * math.pi))
    with pytest.raises(ValidationError):
        chi_hat(1.5)


def test_wall_vector_and_tangential_velocity():
    enum = enumerate_indices(2)
    b = build_wall_vector(enum.indices, BoundaryData(rho_w=0.1, u_w=(0.2, 0.0, 0.3), theta_w=math.sqrt(2.0)))
    position = {alpha: i for i, alpha in enumerate(enum.indices)}
    assert b[position[MultiIndex(0, 0, 0)]] == 0.1
    assert b[position[MultiIndex(0, 0, 1)]] == 0.3
    assert b[position[MultiIndex(2, 0, 0)]] == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        BoundaryData(u_w=(0.0, 0.1, 0.0))


def test_system_document_reload():
    system = build_full3d(3, 0.5)
    assert MomentSystem.from_dict(system.to_dict()).nu == 0.5
    explicit = MomentSystem(order=0, A=system.A, Q=system.Q, nu=0.5, m=system.m, n=system.n,
                            indices=system.indices)
    reloaded = MomentSystem.from_dict(explicit.to_dict())
    np.testing.assert_array_equal(reloaded.A, system.A)
    assert reloaded.has_parity
    assert reloaded.indices == system.indices
