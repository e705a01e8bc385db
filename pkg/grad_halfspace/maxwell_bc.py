"""
Condizioni al bordo di tipo Maxwell: operatore di Grad, operatore modificato
H(W_o + W̄_o - b_o) + chi_hat M^T (W_e + W̄_e - b_e) = 0 e risoluzione a due
stadi (condizione ridotta ben posta + sistema di compatibilità per i valori
del flusso esterno).

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_CONFIG, NumericsConfig
from .error_handler import (
    ShapeMismatchError, SingularCompatibilityError, TheoremHypothesisError, ValidationError,
)
from .exp_poly import VectorFunction
from .halfspace_solver import HalfspaceSolution, solve, v2_trace, bounded_trace_combination
from .logger import logger
from .moment_system_builder import (
    MomentSystem, build_half_flux_matrix, build_selection_matrix, chi_hat as compute_chi_hat,
)
from .subspace_transform import SpectralFactorization, SubspaceDecomposition
from .validation_mixin import ValidationMixin
from .wellposedness_checker import BoundaryOperator, WellposednessVerdict, check_general_bc, check_square_bc

BC_KINDS = ("grad", "modified")
H_OPTIONS = ("identity", "flux")

# S con la normalizzazione delle righe di bordo: J(0,0) = 1
HALF_FLUX_SCALE = math.sqrt(math.pi / 2.0)


@dataclass(frozen=True, eq=False)
class MaxwellBC(ValidationMixin):
    """
    Operatore di bordo su (W_e, W_o) con i dati g1 = W̄_o - b_o e g2 = (I - G_e G_e^T)(W̄_e - b_e)

    Per il tipo grad: [chi_hat E S, E M]; per il tipo modified: [chi_hat M^T, H].
    """
    kind: str
    operator: np.ndarray
    chi: float
    chi_hat: float
    H: Optional[np.ndarray] = None
    H_option: Optional[str] = None
    scale: float = 1.0
    g1: Optional[np.ndarray] = None
    g2: Optional[np.ndarray] = None
    description: str = field(default="")

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ValidationError(f"tipo di condizione sconosciuto: {self.kind}")
        if self.kind == "modified":
            if self.H is None:
                raise ValidationError("la condizione modificata richiede H")
            self.require_symmetric("H", self.H, 1e-12)
            self.require_spd("H", self.H, 0.0)

    @property
    def rows(self) -> int:
        return self.operator.shape[0]

    def B3(self, dec: SubspaceDecomposition) -> np.ndarray:
        """B3 = operatore @ V3"""
        return self.operator @ dec.V3

    def boundary_operator(self, dec: SubspaceDecomposition, g: Optional[np.ndarray] = None) -> BoundaryOperator:
        g = np.zeros(self.rows) if g is None else np.asarray(g, dtype=float)
        return BoundaryOperator(self.B3(dec), g, self.description or self.kind)

    def with_data(self, g1: Optional[np.ndarray] = None, g2: Optional[np.ndarray] = None) -> "MaxwellBC":
        return MaxwellBC(kind=self.kind, operator=self.operator, chi=self.chi, chi_hat=self.chi_hat,
                         H=self.H, H_option=self.H_option, scale=self.scale,
                         g1=None if g1 is None else np.asarray(g1, dtype=float),
                         g2=None if g2 is None else np.asarray(g2, dtype=float),
                         description=self.description)

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"kind": self.kind, "chi": self.chi, "chi_hat": self.chi_hat}
        if self.kind == "modified":
            doc["H"] = self.H_option if self.H_option in H_OPTIONS else self.H.tolist()
            doc["c"] = self.scale
        if self.g1 is not None:
            doc["g1"] = self.g1.tolist()
        if self.g2 is not None:
            doc["g2"] = self.g2.tolist()
        return doc


def _half_flux_blocks(system: MomentSystem, config: NumericsConfig):
    Mb, _, _ = system.parity_blocks()
    S_hat = HALF_FLUX_SCALE * build_half_flux_matrix(system.even_indices, config)
    return Mb, S_hat


def assemble_grad_bc(system: MomentSystem, chi: float,
                     config: NumericsConfig = DEFAULT_CONFIG) -> MaxwellBC:
    """
    Condizione di Grad E M (W_o - b_o) + chi_hat E S (W_e - b_e) = 0

    Args:
        system: Sistema con struttura di parità e multi-indici
        chi: Coefficiente di accomodazione in [0, 1]

    Returns:
        Operatore n x N sulle variabili (W_e, W_o)
    """
    ch = compute_chi_hat(chi)
    Mb, S_hat = _half_flux_blocks(system, config)
    E = build_selection_matrix(system.even_indices, system.order, system.n)
    operator = np.hstack([ch * E @ S_hat, E @ Mb])
    logger.log_pipeline_step("condizione di Grad", f"chi={chi} chi_hat={ch:.6g} righe={operator.shape[0]}", "MAXWELL")
    return MaxwellBC(kind="grad", operator=operator, chi=chi, chi_hat=ch, description=f"grad:chi={chi}")


def flux_continuity_H(system: MomentSystem, config: NumericsConfig = DEFAULT_CONFIG) -> np.ndarray:
    """H = M^T S^{-1} M (SPD per congruenza: M di rango pieno per colonne)"""
    Mb, S_hat = _half_flux_blocks(system, config)
    H = Mb.T @ sla.cho_solve(sla.cho_factor(S_hat), Mb)
    return (H + H.T) / 2


def assemble_modified_bc(system: MomentSystem, H_option: Union[str, np.ndarray, None] = "flux",
                         chi: float = 1.0, scale: float = 1.0,
                         config: NumericsConfig = DEFAULT_CONFIG) -> MaxwellBC:
    """
    Condizione modificata [chi_hat M^T, c H] su (W_e, W_o)

    Args:
        system: Sistema con struttura di parità
        H_option: "identity", "flux" (M^T S^{-1} M, predefinita) o matrice SPD n x n
        chi: Coefficiente di accomodazione
        scale: Fattore c > 0 davanti a H

    Raises:
        NotPositiveDefiniteError: H non SPD
    """
    if not scale > 0:
        raise ValidationError(f"il fattore c deve essere positivo, trovato {scale}")
    ch = compute_chi_hat(chi)
    Mb, _, _ = system.parity_blocks()
    n = system.n
    if H_option is None or (isinstance(H_option, str) and H_option == "flux"):
        H, label = flux_continuity_H(system, config), "flux"
    elif isinstance(H_option, str) and H_option == "identity":
        H, label = np.eye(n), "identity"
    elif isinstance(H_option, str):
        raise ValidationError(f"opzione H sconosciuta: {H_option}")
    else:
        H, label = np.asarray(H_option, dtype=float), "matrix"
        if H.shape != (n, n):
            raise ShapeMismatchError(f"H ha forma {H.shape}, attesa ({n}, {n})")
    H = scale * H
    operator = np.hstack([ch * Mb.T, H])
    return MaxwellBC(kind="modified", operator=operator, chi=chi, chi_hat=ch, H=H, H_option=label,
                     scale=scale, description=f"modified:chi={chi},H={label},c={scale}")


def reduced_operator(bc: MaxwellBC, dec: SubspaceDecomposition) -> np.ndarray:
    """Z3^T B3: la parte della condizione che coinvolge solo i modi dello strato"""
    _require_parity(dec)
    return dec.parity.Z3.T @ bc.B3(dec)


def _require_parity(dec: SubspaceDecomposition):
    if dec.parity is None:
        raise TheoremHypothesisError("la decomposizione per blocchi di parità è necessaria")


def check_maxwell_bc(system: MomentSystem, bc: MaxwellBC, dec: SubspaceDecomposition, spec: SpectralFactorization,
                     config: NumericsConfig = DEFAULT_CONFIG) -> Dict[str, Any]:
    """
    Verdetto sulla condizione completa e, per il tipo modificato, sulla condizione ridotta Z3^T B3

    Returns:
        {"verdict", "reduced" (solo modified), "structure" (solo modified)}
    """
    report: Dict[str, Any] = {"verdict": check_general_bc(bc.boundary_operator(dec), spec, config)}
    if bc.kind == "modified" and dec.parity is not None:
        B_red = reduced_operator(bc, dec)
        report["reduced"] = check_square_bc(B_red, spec, config, f"{bc.description} ridotta")
        report["structure"] = structure_residuals(system, dec)
    return report


def structure_residuals(system: MomentSystem, dec: SubspaceDecomposition) -> Dict[str, float]:
    """||Z3^T M^T Y1|| e ||Z3^T M^T G_e|| (nulli per costruzione)"""
    _require_parity(dec)
    blocks = dec.parity
    MT = system.parity_blocks()[0].T
    return {
        "Z3t_Mt_Y1": float(np.linalg.norm(blocks.Z3.T @ MT @ blocks.Y1)) if blocks.Y1.size else 0.0,
        "Z3t_Mt_Ge": float(np.linalg.norm(blocks.Z3.T @ MT @ blocks.G_e)) if blocks.G_e.size else 0.0,
    }


def positivity_margin(bc: MaxwellBC, dec: SubspaceDecomposition, spec: SpectralFactorization,
                      samples: int = 64, seed: int = 0) -> float:
    """
    min su vettori casuali x di x^T (T+^T B3^T Z3 Z3^T B3 T+) x / ||x||^2

    Valore positivo: la condizione ridotta determina z+(0).
    """
    if spec.n_plus == 0:
        return float("inf")
    P = reduced_operator(bc, dec) @ spec.T_plus
    gram = P.T @ P
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((samples, spec.n_plus))
    quotients = np.einsum("si,ij,sj->s", xs, gram, xs) / np.einsum("si,si->s", xs, xs)
    return float(quotients.min())


@dataclass(frozen=True, eq=False)
class MaxwellLayerSolution:
    """Soluzione dello strato e valori G_e^T (W̄_e - b_e) dalla compatibilità"""
    solution: HalfspaceSolution
    compat: np.ndarray
    reduced: BoundaryOperator
    verdict: WellposednessVerdict
    bc_residual: float
    ratios: Dict[str, float]
    trace_combination: np.ndarray
    trace_bound_holds: bool = True

    def to_dict(self, labels=None) -> Dict[str, Any]:
        return {
            "solution": self.solution.to_dict(labels),
            "compat": self.compat.tolist(),
            "bc_residual": self.bc_residual,
            "ratios": dict(self.ratios),
            "verdict": self.verdict.to_dict(),
            "trace_combination": self.trace_combination.tolist(),
            "trace_bound_holds": self.trace_bound_holds,
        }


def _project_g2(g2: np.ndarray, G_e: np.ndarray) -> np.ndarray:
    if G_e.size == 0:
        return g2
    return g2 - G_e @ (G_e.T @ g2)


def solve_layer_with_maxwell(system: MomentSystem, dec: SubspaceDecomposition, spec: SpectralFactorization,
                             bc: MaxwellBC, g1: np.ndarray, g2: np.ndarray, h: VectorFunction, a: float,
                             config: NumericsConfig = DEFAULT_CONFIG) -> MaxwellLayerSolution:
    """
    Risolve lo strato con la condizione modificata e ricava G_e^T (W̄_e - b_e)

    Args:
        bc: Condizione modificata
        g1: W̄_o - b_o (n)
        g2: Componente di W̄_e - b_e ortogonale a span(G_e) (m); viene proiettata
        h: Sorgente
        a: Peso

    Returns:
        Soluzione, compatibilità, residuo della condizione completa e rapporti di stima

    Raises:
        TheoremHypothesisError: chi_hat = 0, r2 != 0 o decomposizione senza parità
        SingularCompatibilityError: U0^T M^T G_e singolare
    """
    if bc.kind != "modified":
        raise TheoremHypothesisError("la risoluzione a due stadi richiede la condizione modificata")
    if not bc.chi_hat > 0:
        raise TheoremHypothesisError("chi_hat = 0: la compatibilità non determina G_e^T(W̄_e - b_e)")
    _require_parity(dec)
    blocks = dec.parity
    if blocks.r2 != 0:
        raise TheoremHypothesisError(f"r2 = {blocks.r2} diverso da zero", r2=blocks.r2)
    m, n = blocks.m, blocks.n
    g1 = np.asarray(g1, dtype=float).reshape(-1)
    g2 = np.asarray(g2, dtype=float).reshape(-1)
    if g1.shape != (n,) or g2.shape != (m,):
        raise ShapeMismatchError(f"g1, g2 devono avere dimensioni ({n}, {m})")
    g2 = _project_g2(g2, blocks.G_e)
    Mb, _, _ = system.parity_blocks()
    H = bc.H
    K_op = bc.operator
    Z3 = blocks.Z3

    # V2^T W(0) dipende solo da h e precede il termine noto
    V2W0 = v2_trace(dec, h)
    rhs = -Z3.T @ H @ g1 - bc.chi_hat * Z3.T @ Mb.T @ g2 - Z3.T @ K_op @ dec.V2 @ V2W0
    reduced = BoundaryOperator(Z3.T @ bc.B3(dec), rhs, f"{bc.description} ridotta")
    verdict = check_square_bc(reduced.B3, spec, config, reduced.description)
    solution = solve(system, dec, spec, reduced, h, a, config)

    W0 = solution.W(0.0)
    U0 = np.hstack([blocks.G_o, Mb.T @ blocks.Y1])
    system_matrix = bc.chi_hat * U0.T @ Mb.T @ blocks.G_e
    known = -U0.T @ (K_op @ W0 + H @ g1 + bc.chi_hat * Mb.T @ g2)
    compat = _solve_compatibility(system_matrix, known, config)

    residual_vec = K_op @ W0 + H @ g1 + bc.chi_hat * Mb.T @ (g2 + blocks.G_e @ compat)
    bc_residual = float(np.max(np.abs(residual_vec))) if residual_vec.size else 0.0
    data = solution.norms["h"] + float(np.linalg.norm(g1)) + float(np.linalg.norm(g2))
    ratios = {
        "W": solution.norms["W"] / data if data > 0 else 0.0,
        "compat": float(np.linalg.norm(compat)) / data if data > 0 else 0.0,
    }
    combination = bounded_trace_combination(solution)
    logger.log_numeric_check("maxwell_bc_residual", bc_residual, 1e-9 * (1.0 + data), bc_residual <= 1e-9 * (1.0 + data),
                             "MAXWELL")
    return MaxwellLayerSolution(solution=solution, compat=compat, reduced=reduced, verdict=verdict,
                                bc_residual=bc_residual, ratios=ratios, trace_combination=combination.vector,
                                trace_bound_holds=combination.holds)


def _solve_compatibility(matrix: np.ndarray, rhs: np.ndarray, config: NumericsConfig) -> np.ndarray:
    """Sistema quadrato p1 x p1 risolto con QR a pivot di colonna"""
    k = matrix.shape[1]
    if k == 0:
        return np.zeros(0)
    if matrix.shape[0] != k:
        raise SingularCompatibilityError(f"sistema di compatibilità non quadrato: {matrix.shape}")
    Qf, R, piv = sla.qr(matrix, pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[-1] <= config.rank_tol(k) * max(1.0, diag[0]) * 1e3:
        raise SingularCompatibilityError(
            f"sistema di compatibilità singolare: |R_kk| = {diag[-1]:.3e}", pivot_min=float(diag[-1]),
        )
    y = sla.solve_triangular(R, Qf.T @ rhs, lower=False)
    x = np.zeros(k)
    x[piv] = y
    return x
