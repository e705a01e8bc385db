"""
Soluzione in forma chiusa del problema non omogeneo in semispazio

    A W'(y) + Q W(y) = h(y),  y > 0,   B V3^T W(0) = g,   W(inf) = 0

a partire dalla decomposizione dei sottospazi e dalla fattorizzazione
spettrale, con verifica del residuo, stima in norma pesata e costruzione
del testimone di instabilità.

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_CONFIG, NumericsConfig
from .error_handler import DivergentSourceError, ResidualError, ShapeMismatchError, UnsolvableBoundaryError
from .exp_poly import ExpPolyVec, SampledVec, VectorFunction
from .logger import logger
from .moment_system_builder import MomentSystem, MultiIndex
from .subspace_transform import SpectralFactorization, SubspaceDecomposition
from .wellposedness_checker import BoundaryOperator, check_general_bc, check_square_bc


@dataclass(frozen=True, eq=False)
class HalfspaceSolution:
    """Soluzione W con le componenti trasformate, le tracce e le norme diagnostiche"""
    W: VectorFunction
    V1W: VectorFunction
    V2W: VectorFunction
    V3W: VectorFunction
    z_plus: VectorFunction
    z_zero: VectorFunction
    z_minus: VectorFunction
    z_plus0: np.ndarray
    z_zero0: np.ndarray
    z_minus0: np.ndarray
    h: VectorFunction
    g: np.ndarray
    a: float
    norms: Dict[str, float]
    residual_sup: float
    h_sup: float
    dec: SubspaceDecomposition = field(repr=False)
    spec: SpectralFactorization = field(repr=False)
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    residual_tol: float = DEFAULT_CONFIG.tol_residual

    @property
    def residual_bound(self) -> float:
        return self.residual_tol * (1.0 + self.h_sup)

    @property
    def residual_ok(self) -> bool:
        return self.residual_sup <= self.residual_bound

    def to_dict(self, labels: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "weight": self.a,
            "traces": {"z_plus0": self.z_plus0.tolist(), "z_zero0": self.z_zero0.tolist(),
                       "z_minus0": self.z_minus0.tolist(), "W0": self.W(0.0).tolist()},
            "norms": dict(self.norms),
            "residual_sup": self.residual_sup,
            "h_sup": self.h_sup,
            "diagnostics": dict(self.diagnostics),
        }
        if isinstance(self.W, ExpPolyVec):
            doc["solution"] = self.W.to_dict()
        if labels is not None:
            doc["variables"] = list(labels)
        return doc

    def sample_frame(self, points: int = 200, y_max: Optional[float] = None, labels=None):
        """Campionamento (y, componenti di W) come DataFrame pandas"""
        if y_max is None:
            y_max = float(self.diagnostics.get("grid_max", 20.0))
        grid = np.linspace(0.0, y_max, points)
        return SampledVec.sample(self.W, grid).to_frame(labels)


def _inverse_transpose_upper(K: np.ndarray) -> np.ndarray:
    if K.size == 0:
        return np.zeros((0, 0))
    return sla.solve_triangular(K, np.eye(K.shape[0]), lower=False, trans='T')


def _inverse(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return np.zeros((0, 0))
    return np.linalg.solve(matrix, np.eye(matrix.shape[0]))


def v2_trace(dec: SubspaceDecomposition, h: VectorFunction) -> np.ndarray:
    """V2^T W(0) = K^{-T} (G^T A W)(0), determinata dalla sola sorgente"""
    if dec.p == 0:
        return np.zeros(0)
    return _inverse_transpose_upper(dec.K) @ h.apply(dec.G.T).integrate_tail()(0.0)


def _solve_core(system: MomentSystem, dec: SubspaceDecomposition, spec: SpectralFactorization,
                B: np.ndarray, g: np.ndarray, h: VectorFunction, a: float,
                config: NumericsConfig, least_squares: bool = False) -> HalfspaceSolution:
    N = dec.N
    if h.dim != N:
        raise ShapeMismatchError(f"h ha dimensione {h.dim}, attesa {N}")
    n_plus, n_zero = spec.n_plus, spec.n_zero

    # 1. righe G^T: G^T A W = -int_y^inf G^T h, G^T A V2 = K^T
    Kinv_T = _inverse_transpose_upper(dec.K)
    Gh = h.apply(dec.G.T)
    V2W = Gh.integrate_tail().apply(Kinv_T)
    V2W_prime = Gh.apply(Kinv_T)

    # 2. sorgente ridotta h3 e coordinate caratteristiche T^{-1} h3
    Q33_inv = sla.cho_solve((spec.L, True), np.eye(dec.dim3)) if dec.dim3 else np.zeros((0, 0))
    h3 = (h.apply(dec.V3.T) - V2W.apply(dec.Q32) - V2W_prime.apply(dec.A32)).apply(Q33_inv)
    hz = h3.apply(spec.T_inv)
    h_plus = hz.component(slice(0, n_plus))
    h_zero = hz.component(slice(n_plus, n_plus + n_zero))
    h_minus = hz.component(slice(n_plus + n_zero, spec.dim))

    # 3. modi caratteristici
    z_zero = h_zero
    z_minus = h_minus.convolve_growth_tail(spec.lambda_minus) if spec.n_minus else h_minus
    z_zero0 = z_zero(0.0)
    z_minus0 = z_minus(0.0)
    if n_plus:
        BTp = B @ spec.T_plus
        rhs = g - B @ spec.T_zero @ z_zero0 - B @ spec.T_minus @ z_minus0
        if least_squares:
            z_plus0 = np.linalg.lstsq(BTp, rhs, rcond=None)[0]
        else:
            z_plus0 = np.linalg.solve(BTp, rhs)
        z_plus = h_plus.convolve_decay(spec.lambda_plus) + h_plus.modes(1.0 / spec.lambda_plus, z_plus0)
    else:
        z_plus0 = np.zeros(0)
        z_plus = h_plus
    V3W = z_plus.apply(spec.T_plus) + z_zero.apply(spec.T_zero) + z_minus.apply(spec.T_minus)

    # 4. righe U2^T: (A21 V1W + A22 V2W + A23 V3W)' = U2^T h - Q22 V2W - Q23 V3W
    f = V2W.apply(dec.Q22) + V3W.apply(dec.Q23) - h.apply(dec.U2.T)
    combination = -f.integrate_tail()
    V1W = (combination - V2W.apply(dec.A22) - V3W.apply(dec.A23)).apply(_inverse(dec.A21))

    # 5. assemblaggio e residuo
    W = V1W.apply(dec.V1) + V2W.apply(dec.V2) + V3W.apply(dec.V3)
    rate = W.min_rate()
    if isinstance(h, SampledVec):
        grid = h.grid
    else:
        grid_max = config.grid_span / rate if math.isfinite(rate) and rate > 0 else config.grid_span
        grid = np.linspace(0.0, grid_max, config.grid_points)
    residual = (W.derivative().apply(system.A) + W.apply(system.Q) - h).evaluate(grid)
    residual_sup = float(np.max(np.abs(residual))) if residual.size else 0.0
    h_sup = h.sup_norm(grid)

    norm_W = W.weighted_norm(a)
    norm_h = h.weighted_norm(a)
    norm_g = float(np.linalg.norm(g))
    denominator = norm_h + norm_g
    norms = {"W": norm_W, "h": norm_h, "g": norm_g,
             "ratio": norm_W / denominator if denominator > 0 else 0.0}
    diagnostics: Dict[str, Any] = {"grid_max": float(grid[-1]), "grid_points": int(grid.size)}
    diagnostics.update(_mass_flux_check(system, W, h))
    if least_squares and n_plus:
        diagnostics["bc_residual"] = float(np.linalg.norm(B @ V3W(0.0) - g))

    bound = config.tol_residual * (1.0 + h_sup)
    logger.log_numeric_check("residual_sup", residual_sup, bound, residual_sup <= bound, "SOLVER")
    return HalfspaceSolution(W=W, V1W=V1W, V2W=V2W, V3W=V3W, z_plus=z_plus, z_zero=z_zero,
                             z_minus=z_minus, z_plus0=np.asarray(z_plus0), z_zero0=z_zero0,
                             z_minus0=z_minus0, h=h, g=np.asarray(g, dtype=float), a=a, norms=norms,
                             residual_sup=residual_sup, h_sup=h_sup, dec=dec, spec=spec,
                             diagnostics=diagnostics, residual_tol=config.tol_residual)


def _mass_flux_check(system: MomentSystem, W: VectorFunction, h: VectorFunction) -> Dict[str, Any]:
    i_mass = system.index_of(MultiIndex(0, 0, 0))
    i_flux = system.index_of(MultiIndex(0, 1, 0))
    if i_mass is None or i_flux is None:
        return {}
    trace = float(W(0.0)[i_flux])
    mass_row = h.component(i_mass)
    if isinstance(mass_row, ExpPolyVec):
        mass_row_zero = mass_row.is_zero
    else:
        mass_row_zero = not np.any(mass_row.evaluate(getattr(mass_row, "grid", np.zeros(1))))
    if mass_row_zero and abs(trace) > 1e-10 * (1.0 + float(np.linalg.norm(W(0.0)))):
        logger.warning(f"flusso di massa w_e2(0) = {trace:.3e} non nullo con riga di massa nulla", "SOLVER")
    return {"mass_flux_trace": trace, "mass_flux_checked": bool(mass_row_zero)}


def solve(system: MomentSystem, dec: SubspaceDecomposition, spec: SpectralFactorization,
          bc: BoundaryOperator, h: VectorFunction, a: float,
          config: NumericsConfig = DEFAULT_CONFIG) -> HalfspaceSolution:
    """
    Risolve il problema in semispazio con condizione quadrata B V3^T W(0) = g

    Args:
        system: Sistema di momenti
        dec: Decomposizione dei sottospazi
        spec: Fattorizzazione spettrale
        bc: Operatore di bordo con n+ righe
        h: Sorgente (norma pesata finita)
        a: Peso, 0 < a < 1/lambda_max

    Returns:
        Soluzione con residuo e norme

    Raises:
        UnsolvableBoundaryError: rango di B T+ insufficiente
        WeightError: peso non ammesso
        DivergentSourceError: ||h||_a non finita
        ResidualError: residuo della forma chiusa oltre tol_residual (1 + sup |h|)
    """
    spec.check_weight(a)
    B = bc.B3
    if B.shape[0] == 0 and spec.n_plus == 0:
        B = np.zeros((0, spec.dim))
    verdict = check_square_bc(B, spec, config, bc.description)
    if not verdict.solvable:
        raise UnsolvableBoundaryError(
            f"rango di B T+ insufficiente (sigma_min = {verdict.sigma_min_BTplus:.3e})",
            sigma_min=verdict.sigma_min_BTplus,
        )
    if not verdict.stable:
        logger.warning(f"condizione {bc.description} non stabile: ||B T0|| = {verdict.norm_BT0:.3e}", "SOLVER")
    if not h.finite_a_norm(a):
        raise DivergentSourceError(f"||h||_a non finita: tasso minimo {h.min_rate()} <= a = {a}", a=a)
    solution = _solve_core(system, dec, spec, B, bc.g, h, a, config)
    # sulle griglie la derivata è alle differenze: il residuo resta diagnostico
    if isinstance(h, ExpPolyVec) and not solution.residual_ok:
        raise ResidualError(
            f"residuo {solution.residual_sup:.3e} oltre {solution.residual_bound:.3e}",
            residual_sup=solution.residual_sup, bound=solution.residual_bound,
        )
    logger.log_pipeline_step("soluzione", f"||W||_a={solution.norms['W']:.6g} residuo={solution.residual_sup:.3e}",
                             "SOLVER")
    return solution


def verify_estimate(sol: HalfspaceSolution) -> float:
    """Rapporto ||W||_a / (||h||_a + ||g||); 0 per dati e soluzione nulli, inf se W != 0 con dati nulli"""
    denominator = sol.norms["h"] + sol.norms["g"]
    if denominator > 0:
        return sol.norms["W"] / denominator
    if sol.norms["W"] == 0.0:
        return 0.0
    logger.warning("soluzione non nulla con dati nulli", "SOLVER")
    return float("inf")


def empirical_constant(jobs: Sequence[Callable[[], HalfspaceSolution]],
                       max_workers: Optional[int] = None) -> Dict[str, Any]:
    """
    Costante empirica sup ||W||_a / (||h||_a + ||g||) su un lotto di istanze

    Args:
        jobs: Funzioni senza argomenti che restituiscono una soluzione
        max_workers: Thread paralleli (None = esecuzione sequenziale)

    Returns:
        {"constant", "ratios", "residual_max"}
    """
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            solutions = list(pool.map(lambda job: job(), jobs))
    else:
        solutions = [job() for job in jobs]
    ratios = [verify_estimate(sol) for sol in solutions]
    return {
        "constant": max(ratios, default=0.0),
        "ratios": ratios,
        "residual_max": max((sol.residual_sup for sol in solutions), default=0.0),
    }


def pure_zero_mode_source(dec: SubspaceDecomposition, spec: SpectralFactorization,
                          c0: np.ndarray, profile: ExpPolyVec) -> ExpPolyVec:
    """
    Sorgente h = U^{-T} [0; 0; Q33 T0 c0] phi(y) con z0 = c0 phi esattamente

    Args:
        c0: Vettore di ampiezze dei modi nulli (n0)
        profile: Profilo scalare phi
    """
    lift = zero_mode_lift(dec, spec, c0)
    return profile.apply(lift[:, None])


def zero_mode_lift(dec: SubspaceDecomposition, spec: SpectralFactorization, c0: np.ndarray) -> np.ndarray:
    """Vettore v con G^T v = 0, U2^T v = 0 e V3^T v = Q33 T0 c0"""
    c0 = np.asarray(c0, dtype=float).reshape(spec.n_zero)
    target = np.zeros(dec.N)
    target[dec.p + dec.r:] = dec.Q33 @ spec.T_zero @ c0
    return np.linalg.solve(dec.U.T, target)


@dataclass(frozen=True, eq=False)
class WitnessReport:
    """Sorgente di norma unitaria che produce ||z+(0)|| >= target"""
    h: ExpPolyVec
    s: float
    achieved: float
    h_norm: float
    target: float
    amplification: float
    lift_norm: float
    c0: np.ndarray
    samples: List[Dict[str, float]]

    @property
    def monotone(self) -> bool:
        values = [sample["z_plus0_norm"] for sample in self.samples]
        return all(b > a for a, b in zip(values, values[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "s": self.s, "achieved": self.achieved, "h_norm": self.h_norm, "target": self.target,
            "amplification": self.amplification, "lift_norm": self.lift_norm,
            "c0": self.c0.tolist(), "samples": self.samples, "monotone": self.monotone,
            "h": self.h.to_dict(),
        }


def unit_profile(s: float, a: float) -> ExpPolyVec:
    """phi_s(y) = sqrt(2(s-a)) exp(-s y), con ||phi_s||_a = 1"""
    return ExpPolyVec.scalar([(s, [math.sqrt(2.0 * (s - a))])])


def instability_witness(system: MomentSystem, dec: SubspaceDecomposition, spec: SpectralFactorization,
                        bc: BoundaryOperator, a: float, target: float,
                        config: NumericsConfig = DEFAULT_CONFIG,
                        growth_factors: Sequence[float] = (1.0, 4.0, 16.0)) -> Optional[WitnessReport]:
    """
    Costruisce h con ||h||_a = 1 e ||z+(0)|| >= target per una condizione instabile

    Returns:
        Report del testimone, oppure None se la condizione è stabile o n0 = 0

    Raises:
        UnsolvableBoundaryError: rango di B T+ insufficiente
    """
    spec.check_weight(a)
    if spec.n_zero == 0:
        return None
    verdict = check_general_bc(bc, spec, config)
    if verdict.stable:
        logger.info(f"condizione {bc.description} stabile: nessun testimone", "SOLVER")
        return None
    if not verdict.solvable:
        raise UnsolvableBoundaryError("testimone richiesto per una condizione non risolubile")

    B = bc.B3
    BTp = B @ spec.T_plus
    P = np.linalg.lstsq(BTp, B @ spec.T_zero, rcond=None)[0]
    _, s_vals, vt = np.linalg.svd(P)
    sigma = float(s_vals[0]) if s_vals.size else 0.0
    if sigma <= config.tol_stable:
        return None
    c0 = vt[0]
    lift = zero_mode_lift(dec, spec, c0)
    kappa = float(np.linalg.norm(lift))
    unit = lift / kappa
    s_min = a + 0.5 * (target * kappa / sigma) ** 2
    s = max(s_min * (1.0 + 1e-6), a + 1e-6)

    least_squares = B.shape[0] != spec.n_plus
    samples = []
    chosen: Optional[HalfspaceSolution] = None
    chosen_h: Optional[ExpPolyVec] = None
    for factor in growth_factors:
        s_k = a + (s - a) * factor
        h = unit_profile(s_k, a).apply(unit[:, None])
        sol = _solve_core(system, dec, spec, B, np.zeros(B.shape[0]), h, a, config, least_squares)
        z_norm = float(np.linalg.norm(sol.z_plus0))
        samples.append({"s": s_k, "z_plus0_norm": z_norm, "h_norm": sol.norms["h"],
                        "ratio": verify_estimate(sol)})
        if chosen is None:
            chosen, chosen_h = sol, h
    achieved = samples[0]["z_plus0_norm"]
    logger.log_pipeline_step("testimone di instabilità",
                             f"s={s:.6g} ||z+(0)||={achieved:.6g} target={target:.6g}", "SOLVER")
    return WitnessReport(h=chosen_h, s=s, achieved=achieved, h_norm=samples[0]["h_norm"],
                         target=target, amplification=sigma, lift_norm=kappa, c0=c0, samples=samples)


@dataclass(frozen=True)
class TraceCombination:
    vector: np.ndarray
    norm: float
    bound: float
    holds: bool


def bounded_trace_combination(sol: HalfspaceSolution) -> TraceCombination:
    """
    A21 V1W(0) + A23 V3W(0) con il limite ||A22|| ||V2W(0)|| + sqrt(2/a) ||f||_a
    dalla disuguaglianza di traccia, f = Q22 V2W + Q23 V3W - U2^T h

    Returns:
        Combinazione, norma, limite e se il limite è rispettato
    """
    dec = sol.dec
    vector = dec.A21 @ sol.V1W(0.0) + dec.A23 @ sol.V3W(0.0)
    f = sol.V2W.apply(dec.Q22) + sol.V3W.apply(dec.Q23) - sol.h.apply(dec.U2.T)
    norm_A22 = float(np.linalg.norm(dec.A22, 2)) if dec.A22.size else 0.0
    bound = norm_A22 * float(np.linalg.norm(sol.V2W(0.0))) + math.sqrt(2.0 / sol.a) * f.weighted_norm(sol.a)
    norm = float(np.linalg.norm(vector))
    holds = norm <= bound * (1 + 1e-9) + 1e-12
    logger.log_numeric_check("trace_combination", norm, bound, holds, "SOLVER")
    return TraceCombination(vector=vector, norm=norm, bound=bound, holds=holds)
