"""Costruttori di dati di prova condivisi dai test"""

import numpy as np

from grad_halfspace.exp_poly import ExpPolyVec
from grad_halfspace.subspace_transform import build_decomposition, spectral_factorization
from grad_halfspace.wellposedness_checker import BoundaryOperator


def analyzed(system, **kwargs):
    dec = build_decomposition(system, **kwargs)
    return system, dec, spectral_factorization(dec)


def safe_weight(spec, cap: float = 0.25) -> float:
    """Peso ammesso: min(cap, 0.9 / lambda_max)"""
    if spec.lambda_max > 0:
        return min(cap, 0.9 / spec.lambda_max)
    return cap


def random_exp_poly(rng, dim: int, a: float, terms: int = 3, max_degree: int = 2,
                    rate_high: float = 5.0) -> ExpPolyVec:
    """Funzione casuale con tassi uniformi in (a + 0.1, rate_high)"""
    pieces = []
    for _ in range(terms):
        rate = rng.uniform(a + 0.1, rate_high)
        degree = int(rng.integers(0, max_degree + 1))
        pieces.append((rate, rng.standard_normal((dim, degree + 1))))
    return ExpPolyVec(dim, pieces)


def well_posed_bc(rng, spec, g=None) -> BoundaryOperator:
    """B = F T^{-1}[+] + G2 T^{-1}[-]: B T+ = F invertibile e B T0 = 0"""
    n_plus, n_zero = spec.n_plus, spec.n_zero
    F = rng.standard_normal((n_plus, n_plus)) + 3.0 * np.eye(n_plus)
    G2 = rng.standard_normal((n_plus, spec.n_minus))
    B = F @ spec.T_inv[:n_plus] + G2 @ spec.T_inv[n_plus + n_zero:]
    if g is None:
        g = np.zeros(n_plus)
    return BoundaryOperator(B, g, "random")


def decay_rates(spec):
    """Tassi 1/lambda+ dei modi decrescenti"""
    return [1.0 / lam for lam in spec.lambda_plus]
