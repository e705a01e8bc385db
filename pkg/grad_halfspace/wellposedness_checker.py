"""
Criteri di buona posizione per operatori di bordo: rango di B T+, annullamento
di B T0, ricerca del certificato C nel caso rettangolare e conteggi di parità.

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .config import DEFAULT_CONFIG, NumericsConfig
from .error_handler import CountMismatchError, ParityStructureError, ShapeMismatchError
from .logger import logger
from .moment_system_builder import MomentSystem
from .subspace_transform import (
    SpectralFactorization,
    SubspaceDecomposition,
    inertia,
    nullspace_basis,
)


@dataclass(frozen=True, eq=False)
class BoundaryOperator:
    """Condizione B3 V3^T W(0) = g"""
    B3: np.ndarray
    g: np.ndarray
    description: str = "custom"

    def __post_init__(self):
        B3 = np.asarray(self.B3, dtype=float)
        if B3.ndim != 2:
            raise ShapeMismatchError("B3 deve essere una matrice bidimensionale")
        g = np.asarray(self.g, dtype=float).reshape(-1)
        if g.size != B3.shape[0]:
            raise ShapeMismatchError(f"g ha {g.size} componenti, B3 ha {B3.shape[0]} righe")
        object.__setattr__(self, "B3", B3)
        object.__setattr__(self, "g", g)

    @property
    def rows(self) -> int:
        return self.B3.shape[0]

    @classmethod
    def homogeneous(cls, B3: np.ndarray, description: str = "custom") -> "BoundaryOperator":
        B3 = np.asarray(B3, dtype=float)
        return cls(B3, np.zeros(B3.shape[0]), description)


@dataclass(frozen=True, eq=False)
class WellposednessVerdict:
    """Esito dei criteri con margini e certificato"""
    solvable: bool
    stable: bool
    n_plus: int
    n_zero: int
    n_minus: int
    sigma_min_BTplus: float
    norm_BT0: float
    n_plus_expected: Optional[int] = None
    certificate_C: Optional[np.ndarray] = None
    counts: Dict[str, int] = field(default_factory=dict)
    description: str = "custom"

    @property
    def well_posed(self) -> bool:
        return self.solvable and self.stable

    def to_dict(self) -> Dict[str, Any]:
        return {
            "description": self.description,
            "solvable": self.solvable,
            "stable": self.stable,
            "well_posed": self.well_posed,
            "margins": {"sigma_min_BTplus": self.sigma_min_BTplus, "norm_BT0": self.norm_BT0},
            "counts": {"n_plus": self.n_plus, "n_zero": self.n_zero, "n_minus": self.n_minus,
                       **self.counts},
            "n_plus_expected": self.n_plus_expected,
            "certificate_C": None if self.certificate_C is None else self.certificate_C.tolist(),
        }


def _check_columns(B: np.ndarray, spec: SpectralFactorization):
    if B.shape[1] != spec.dim:
        raise ShapeMismatchError(f"B ha {B.shape[1]} colonne, attese n+ + n0 + n- = {spec.dim}")


def _sigma_min(matrix: np.ndarray) -> Tuple[float, float]:
    if matrix.size == 0:
        return float("inf"), 0.0
    s = np.linalg.svd(matrix, compute_uv=False)
    return float(s[-1]), float(s[0])


def check_square_bc(B: np.ndarray, spec: SpectralFactorization,
                    config: NumericsConfig = DEFAULT_CONFIG, description: str = "custom",
                    counts: Optional[Dict[str, int]] = None) -> WellposednessVerdict:
    """
    Criteri per B quadrata (n+ righe): rango di B T+ e B T0 = 0

    Raises:
        ShapeMismatchError: righe diverse da n+ o colonne diverse da dim3
    """
    B = np.asarray(B, dtype=float)
    if B.size == 0:
        B = B.reshape(0, spec.dim) if B.ndim != 2 or B.shape[1] != spec.dim else B
    if B.ndim != 2:
        raise ShapeMismatchError("B deve essere una matrice bidimensionale")
    _check_columns(B, spec)
    if B.shape[0] != spec.n_plus:
        raise ShapeMismatchError(f"B ha {B.shape[0]} righe, attese n+ = {spec.n_plus}")
    BTp = B @ spec.T_plus
    BT0 = B @ spec.T_zero
    sigma_min, sigma_max = _sigma_min(BTp)
    solvable = spec.n_plus == 0 or sigma_min > config.rank_tol(spec.dim) * sigma_max
    norm_BT0 = float(np.linalg.norm(BT0)) if BT0.size else 0.0
    scale = float(np.linalg.norm(B)) * float(np.linalg.norm(spec.T_zero)) if BT0.size else 0.0
    stable = norm_BT0 <= config.tol_stable * scale
    logger.log_numeric_check("BT0", norm_BT0, config.tol_stable * scale, stable, "WELLPOSED")
    return WellposednessVerdict(
        solvable=bool(solvable), stable=bool(stable), n_plus=spec.n_plus, n_zero=spec.n_zero,
        n_minus=spec.n_minus, sigma_min_BTplus=sigma_min if spec.n_plus else 0.0, norm_BT0=norm_BT0,
        certificate_C=np.eye(spec.n_plus) if solvable and stable else None,
        counts=dict(counts or {}), description=description,
    )


def certificate_margins(C: np.ndarray, B3: np.ndarray, spec: SpectralFactorization) -> Dict[str, float]:
    """Margini di un certificato dato: sigma_min(C^T B3 T+) e ||C^T B3 T0||"""
    CB = C.T @ B3
    sigma_min, sigma_max = _sigma_min(CB @ spec.T_plus)
    BT0 = CB @ spec.T_zero
    return {
        "sigma_min": sigma_min if spec.n_plus else float("inf"),
        "sigma_max": sigma_max,
        "norm_CBT0": float(np.linalg.norm(BT0)) if BT0.size else 0.0,
    }


def find_certificate_C(B3: np.ndarray, spec: SpectralFactorization,
                       config: NumericsConfig = DEFAULT_CONFIG) -> Optional[np.ndarray]:
    """
    Cerca C (k x n+) con C^T B3 T+ invertibile e C^T B3 T0 = 0

    Proietta le righe di B3 sul complemento ortogonale di range(B3 T0) e
    verifica che il rango proiettato sia almeno n+.

    Returns:
        Certificato C oppure None
    """
    B3 = np.asarray(B3, dtype=float)
    _check_columns(B3, spec)
    k = B3.shape[0]
    if spec.n_plus == 0:
        return np.zeros((k, 0))
    BT0 = B3 @ spec.T_zero
    BTp = B3 @ spec.T_plus
    scale = float(np.linalg.norm(B3)) * float(np.linalg.norm(spec.T_zero)) if BT0.size else 0.0
    if not BT0.size or float(np.linalg.norm(BT0)) <= config.tol_stable * scale:
        left = np.eye(k)
    else:
        left = nullspace_basis(BT0.T, atol=config.tol_stable * scale)
    if left.shape[1] < spec.n_plus:
        logger.debug(f"complemento di range(B3 T0) di dimensione {left.shape[1]} < n+", "WELLPOSED")
        return None
    projected = left.T @ BTp
    U, s, _ = np.linalg.svd(projected, full_matrices=False)
    if s.size < spec.n_plus or s[0] == 0.0:
        return None
    rank = int(np.sum(s > config.rank_tol(spec.dim) * s[0]))
    if rank < spec.n_plus:
        logger.debug(f"rango proiettato {rank} < n+ = {spec.n_plus}", "WELLPOSED")
        return None
    C = left @ U[:, :spec.n_plus]
    margins = certificate_margins(C, B3, spec)
    if margins["norm_CBT0"] > config.tol_stable * max(1.0, scale):
        return None
    return C


def check_general_bc(bc: BoundaryOperator, spec: SpectralFactorization,
                     config: NumericsConfig = DEFAULT_CONFIG,
                     counts: Optional[Dict[str, int]] = None,
                     n_plus_expected: Optional[int] = None) -> WellposednessVerdict:
    """
    Criteri per B3 rettangolare: rango di B3 T+ e ricerca del certificato C

    Con k = n+ si riduce a check_square_bc.
    """
    B3 = bc.B3
    _check_columns(B3, spec)
    if B3.shape[0] == spec.n_plus:
        verdict = check_square_bc(B3, spec, config, bc.description, counts)
        if n_plus_expected is not None:
            object.__setattr__(verdict, "n_plus_expected", n_plus_expected)
        return verdict
    BTp = B3 @ spec.T_plus
    sigma_min, sigma_max = _sigma_min(BTp)
    if spec.n_plus and BTp.shape[0] < spec.n_plus:
        sigma_min = 0.0
    solvable = spec.n_plus == 0 or sigma_min > config.rank_tol(spec.dim) * sigma_max
    C = find_certificate_C(B3, spec, config) if solvable else None
    BT0 = B3 @ spec.T_zero
    norm_BT0 = float(np.linalg.norm(BT0)) if BT0.size else 0.0
    if C is not None:
        margins = certificate_margins(C, B3, spec)
        logger.debug(f"certificato trovato: {margins}", "WELLPOSED")
    verdict = WellposednessVerdict(
        solvable=bool(solvable), stable=C is not None, n_plus=spec.n_plus, n_zero=spec.n_zero,
        n_minus=spec.n_minus, sigma_min_BTplus=sigma_min if spec.n_plus else 0.0,
        norm_BT0=norm_BT0, n_plus_expected=n_plus_expected, certificate_C=C,
        counts=dict(counts or {}), description=bc.description,
    )
    logger.log_pipeline_step("verdetto", f"{bc.description}: solvable={verdict.solvable} stable={verdict.stable}",
                             "WELLPOSED")
    return verdict


def predicted_counts(system: MomentSystem, dec: SubspaceDecomposition,
                     spec: Optional[SpectralFactorization] = None) -> Dict[str, Any]:
    """
    Conteggi di parità: n+ = n - r2 - p1 e identità r1 + p2 = r2 + p1

    Raises:
        ParityStructureError: sistema o decomposizione senza blocchi di parità
        CountMismatchError: n+ previsto diverso da quello spettrale
    """
    if not system.has_parity or dec.parity is None:
        raise ParityStructureError("conteggi di parità non disponibili senza decomposizione per blocchi")
    blocks = dec.parity
    n_plus = system.n - blocks.r2 - blocks.p1
    identity = blocks.r1 + blocks.p2 == blocks.r2 + blocks.p1
    result = {"n_plus": n_plus, "identity_holds": identity, **blocks.counts()}
    if spec is not None:
        result["n_plus_spectral"] = spec.n_plus
        if spec.n_plus != n_plus:
            raise CountMismatchError(f"n+ previsto {n_plus} diverso da n+ spettrale {spec.n_plus}",
                                     predicted=n_plus, spectral=spec.n_plus)
    if not identity:
        raise CountMismatchError(
            f"r1 + p2 = {blocks.r1 + blocks.p2} diverso da r2 + p1 = {blocks.r2 + blocks.p1}"
        )
    return result


def offdiag_signature(D: np.ndarray, tol: Optional[float] = None) -> Tuple[int, int, int]:
    """
    Segnatura di [[0, D], [D^T, 0]]: (gamma, gamma, alpha + beta - 2 gamma), gamma = rango di D

    Confrontata con la decomposizione simmetrica diretta della matrice a blocchi.
    """
    D = np.atleast_2d(np.asarray(D, dtype=float))
    alpha, beta = D.shape
    s = np.linalg.svd(D, compute_uv=False) if D.size else np.zeros(0)
    if tol is None:
        tol = 1e-10
    gamma = int(np.sum(s > tol * max(1.0, float(s[0]) if s.size else 0.0)))
    signature = (gamma, gamma, alpha + beta - 2 * gamma)
    block = np.block([[np.zeros((alpha, alpha)), D], [D.T, np.zeros((beta, beta))]])
    direct = inertia(block, tol)
    if direct != signature:
        logger.warning(f"segnatura {signature} diversa dalla diagonalizzazione diretta {direct}", "WELLPOSED")
    return signature
