"""
Trasformazione simultanea dei sottospazi (G, X, V, U) e fattorizzazione
spettrale del blocco ridotto (A33, Q33).

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.linalg as sla

from .config import DEFAULT_CONFIG, EPS, NumericsConfig
from .error_handler import (
    AsymmetricMatrixError,
    CholeskyError,
    IncompatibleSystemError,
    NotPositiveSemidefiniteError,
    ParityStructureError,
    RankDetectionError,
    WeightError,
)
from .logger import logger
from .moment_system_builder import MomentSystem

# Soglia assoluta sulle colonne del proiettore complementare (valori singolari 0 o 1)
PROJECTOR_RANK_TOL = 1e-8


def fix_column_signs(basis: np.ndarray) -> np.ndarray:
    """Rende positiva la componente di modulo massimo di ogni colonna"""
    basis = np.array(basis, dtype=float)
    if basis.size == 0:
        return basis
    pivots = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[pivots, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    return basis * signs


def nullspace_basis(matrix: np.ndarray, tol: Optional[float] = None,
                    atol: Optional[float] = None) -> np.ndarray:
    """
    Base ortonormale del nucleo tramite SVD

    Args:
        matrix: Matrice reale
        tol: Soglia relativa a sigma_max (default max(dim) * eps)
        atol: Soglia assoluta (ha la precedenza su tol)

    Returns:
        Matrice cols x k, eventualmente vuota
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    rows, cols = matrix.shape
    if cols == 0:
        return np.zeros((0, 0))
    if rows == 0:
        return np.eye(cols)
    _, s, vt = np.linalg.svd(matrix, full_matrices=True)
    if tol is None:
        tol = max(rows, cols) * EPS
    threshold = atol if atol is not None else tol * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > threshold))
    return fix_column_signs(vt[rank:].T)


def numerical_rank(matrix: np.ndarray, tol: float) -> int:
    """Numero di valori singolari sopra tol * sigma_max"""
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def orthonormal_complement(W: np.ndarray, size: int, expected: Optional[int] = None) -> np.ndarray:
    """
    Complemento ortonormale di span(W) in R^size via QR con pivoting del proiettore

    Raises:
        RankDetectionError: dimensione del complemento diversa da `expected`
    """
    if size == 0:
        return np.zeros((0, 0))
    P = np.eye(size) if W.shape[1] == 0 else np.eye(size) - W @ W.T
    Qf, R, _ = sla.qr(P, pivoting=True)
    rank = int(np.sum(np.abs(np.diag(R)) > PROJECTOR_RANK_TOL))
    if expected is not None and rank != expected:
        raise RankDetectionError(
            f"complemento di dimensione {rank}, attesa {expected}", size=size, expected=expected
        )
    return fix_column_signs(Qf[:, :rank])


def thin_qr(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """QR ridotta con diagonale di R non negativa"""
    rows, cols = matrix.shape
    if cols == 0:
        return np.zeros((rows, 0)), np.zeros((0, 0))
    Qf, R = sla.qr(matrix, mode='economic')
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Qf * signs, signs[:, None] * R


def block_diag_rows(top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    """Matrice a blocchi [[top, 0], [0, bottom]] (blocchi vuoti ammessi)"""
    out = np.zeros((top.shape[0] + bottom.shape[0], top.shape[1] + bottom.shape[1]))
    out[:top.shape[0], :top.shape[1]] = top
    out[top.shape[0]:, top.shape[1]:] = bottom
    return out


@dataclass(frozen=True)
class CompatibilityReport:
    compatible: bool
    joint_nullity: int
    asymmetry: float
    q_min_eig: float


def check_compatibility(A: np.ndarray, Q: np.ndarray,
                        config: NumericsConfig = DEFAULT_CONFIG) -> CompatibilityReport:
    """
    Verifica Null(A) intersecato Null(Q) = {0} tramite il rango di [A; Q]

    Raises:
        AsymmetricMatrixError: A o Q non simmetrica
        NotPositiveSemidefiniteError: Q con autovalore minimo < -tol_psd
    """
    A = np.asarray(A, dtype=float)
    Q = np.asarray(Q, dtype=float)
    N = A.shape[0]
    asym_A = float(np.linalg.norm(A - A.T))
    asym_Q = float(np.linalg.norm(Q - Q.T))
    if asym_A > config.tol_block * max(1.0, float(np.linalg.norm(A))):
        raise AsymmetricMatrixError(f"A non simmetrica: ||A - A^T|| = {asym_A:.3e}")
    if asym_Q > config.tol_block * max(1.0, float(np.linalg.norm(Q))):
        raise AsymmetricMatrixError(f"Q non simmetrica: ||Q - Q^T|| = {asym_Q:.3e}")
    q_scale = float(np.linalg.norm(Q, 2)) if Q.size else 0.0
    q_min = float(np.linalg.eigvalsh((Q + Q.T) / 2).min()) if N else 0.0
    if q_min < -config.tol_psd * (q_scale if q_scale > 0 else 1.0):
        raise NotPositiveSemidefiniteError(f"Q non semidefinita positiva: lambda_min = {q_min:.3e}")
    rank = numerical_rank(np.vstack([A, Q]), config.rank_tol(2 * N))
    nullity = N - rank
    logger.debug(f"nucleo congiunto di dimensione {nullity}", "SUBSPACE")
    return CompatibilityReport(nullity == 0, nullity, max(asym_A, asym_Q), q_min)


@dataclass(frozen=True, eq=False)
class ParityBlocks:
    """Fattori della decomposizione calcolata per blocchi di parità"""
    m: int
    n: int
    G_e: np.ndarray
    G_o: np.ndarray
    X_e: np.ndarray
    X_o: np.ndarray
    Y2: np.ndarray
    Z2: np.ndarray
    Y3: np.ndarray
    Z3: np.ndarray

    @property
    def p1(self) -> int:
        return self.G_e.shape[1]

    @property
    def p2(self) -> int:
        return self.G_o.shape[1]

    @property
    def r1(self) -> int:
        return self.X_e.shape[1]

    @property
    def r2(self) -> int:
        return self.X_o.shape[1]

    @property
    def Y1(self) -> np.ndarray:
        return self.G_e @ self.X_e

    @property
    def Z1(self) -> np.ndarray:
        return self.G_o @ self.X_o

    def counts(self) -> Dict[str, int]:
        return {"p1": self.p1, "p2": self.p2, "r1": self.r1, "r2": self.r2}


@dataclass(frozen=True, eq=False)
class SubspaceDecomposition:
    """Basi (G, X, V, U) e blocchi trasformati A_ij = U_i^T A V_j, Q_ij = U_i^T Q V_j"""
    G: np.ndarray
    X: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    V3: np.ndarray
    K: np.ndarray
    U2: np.ndarray
    UtAV: np.ndarray
    UtQV: np.ndarray
    parity: Optional[ParityBlocks] = None
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.G.shape[0]

    @property
    def p(self) -> int:
        return self.G.shape[1]

    @property
    def r(self) -> int:
        return self.X.shape[1]

    @property
    def dim3(self) -> int:
        return self.V3.shape[1]

    @property
    def U1(self) -> np.ndarray:
        return self.G

    @property
    def U3(self) -> np.ndarray:
        return self.V3

    @property
    def V(self) -> np.ndarray:
        return np.hstack([self.V1, self.V2, self.V3])

    @property
    def U(self) -> np.ndarray:
        return np.hstack([self.G, self.U2, self.V3])

    def _row_slice(self, i: int) -> slice:
        p, r = self.p, self.r
        return (slice(0, p), slice(p, p + r), slice(p + r, self.N))[i - 1]

    def _col_slice(self, j: int) -> slice:
        p, r = self.p, self.r
        return (slice(0, r), slice(r, r + p), slice(r + p, self.N))[j - 1]

    def A_block(self, i: int, j: int) -> np.ndarray:
        return self.UtAV[self._row_slice(i), self._col_slice(j)]

    def Q_block(self, i: int, j: int) -> np.ndarray:
        return self.UtQV[self._row_slice(i), self._col_slice(j)]

    @property
    def A21(self) -> np.ndarray:
        return self.A_block(2, 1)

    @property
    def A22(self) -> np.ndarray:
        return self.A_block(2, 2)

    @property
    def A23(self) -> np.ndarray:
        return self.A_block(2, 3)

    @property
    def A32(self) -> np.ndarray:
        return self.A_block(3, 2)

    @property
    def A33(self) -> np.ndarray:
        return self.A_block(3, 3)

    @property
    def Q22(self) -> np.ndarray:
        return self.Q_block(2, 2)

    @property
    def Q23(self) -> np.ndarray:
        return self.Q_block(2, 3)

    @property
    def Q32(self) -> np.ndarray:
        return self.Q_block(3, 2)

    @property
    def Q33(self) -> np.ndarray:
        return self.Q_block(3, 3)

    def counts(self) -> Dict[str, int]:
        counts = {"N": self.N, "p": self.p, "r": self.r, "dim3": self.dim3}
        if self.parity is not None:
            counts.update(self.parity.counts())
        return counts


def _decompose_generic(A: np.ndarray, Q: np.ndarray, config: NumericsConfig):
    N = A.shape[0]
    tol = config.rank_tol(N)
    G = nullspace_basis(Q, tol)
    p = G.shape[1]
    X = nullspace_basis(G.T @ A @ G, tol) if p else np.zeros((0, 0))
    V1 = G @ X if p else np.zeros((N, 0))
    V2, K = thin_qr(A @ G) if p else (np.zeros((N, 0)), np.zeros((0, 0)))
    r = X.shape[1]
    V3 = orthonormal_complement(np.hstack([V1, V2]), N, expected=N - p - r)
    return G, X, V1, V2, V3, K, None


def check_flux_rank(Mb: np.ndarray, tol: float) -> float:
    """
    Verifica che il blocco di flusso M (m x n) abbia rango di colonna pieno

    Args:
        Mb: Blocco in alto a destra di A
        tol: Soglia relativa a sigma_max

    Returns:
        sigma_min(M)

    Raises:
        IncompatibleSystemError: rango di colonna inferiore a n
    """
    m, n = Mb.shape
    values = np.linalg.svd(Mb, compute_uv=False) if Mb.size else np.zeros(0)
    sigma_min = float(values[-1]) if n <= m and values.size else 0.0
    threshold = tol * (float(values[0]) if values.size else 1.0)
    passed = n <= m and sigma_min > threshold
    logger.log_numeric_check("flux_column_rank", threshold, sigma_min, passed, "SUBSPACE")
    if not passed:
        raise IncompatibleSystemError(
            f"blocco di flusso M {m}x{n} senza rango di colonna pieno (sigma_min = {sigma_min:.3e})",
            sigma_min=sigma_min, m=m, n=n,
        )
    return sigma_min


def _decompose_parity(system: MomentSystem, config: NumericsConfig):
    Mb, Q_e, Q_o = system.parity_blocks()
    m, n = system.m, system.n
    tol = config.rank_tol(system.N)
    check_flux_rank(Mb, tol)
    G_e = nullspace_basis(Q_e, tol)
    G_o = nullspace_basis(Q_o, tol)
    C = G_e.T @ Mb @ G_o
    X_e = nullspace_basis(C.T, tol) if G_e.shape[1] else np.zeros((0, 0))
    X_o = nullspace_basis(C, tol) if G_o.shape[1] else np.zeros((0, 0))
    Z2, K_z = thin_qr(Mb.T @ G_e)
    Y2, K_y = thin_qr(Mb @ G_o)
    Y1 = G_e @ X_e if X_e.size else np.zeros((m, X_e.shape[1]))
    Z1 = G_o @ X_o if X_o.size else np.zeros((n, X_o.shape[1]))
    Y3 = orthonormal_complement(np.hstack([Y1, Y2]), m, expected=m - Y1.shape[1] - Y2.shape[1])
    Z3 = orthonormal_complement(np.hstack([Z1, Z2]), n, expected=n - Z1.shape[1] - Z2.shape[1])

    G = block_diag_rows(G_e, G_o)
    X = block_diag_rows(X_e, X_o)
    V1 = block_diag_rows(Y1, Z1)
    # colonne di V2 nello stesso ordine di G: prima quelle generate da G_e
    V2 = np.vstack([
        np.hstack([np.zeros((m, Z2.shape[1])), Y2]),
        np.hstack([Z2, np.zeros((n, Y2.shape[1]))]),
    ])
    K = block_diag_rows(K_z, K_y)
    V3 = block_diag_rows(Y3, Z3)
    blocks = ParityBlocks(m=m, n=n, G_e=G_e, G_o=G_o, X_e=X_e, X_o=X_o, Y2=Y2, Z2=Z2, Y3=Y3, Z3=Z3)
    return G, X, V1, V2, V3, K, blocks


def _verify_structure(dec: "SubspaceDecomposition", A: np.ndarray, Q: np.ndarray,
                      config: NumericsConfig) -> Dict[str, float]:
    norm_A = max(float(np.linalg.norm(A)), 1e-300)
    norm_Q = max(float(np.linalg.norm(Q)), 1e-300)
    V = dec.V
    U = dec.U
    checks: Dict[str, Tuple[float, float]] = {
        "orthogonality": (float(np.linalg.norm(V.T @ V - np.eye(dec.N))), config.tol_orth),
        "Q_1j": (float(np.linalg.norm(dec.UtQV[:dec.p, :])), config.tol_block * norm_Q),
        "Q_i1": (float(np.linalg.norm(dec.UtQV[:, :dec.r])), config.tol_block * norm_Q),
        "A_31": (float(np.linalg.norm(dec.A_block(3, 1))), config.tol_block * norm_A),
        "A33_symmetry": (float(np.linalg.norm(dec.A33 - dec.A33.T)), config.tol_block * norm_A),
        "span_AG": (float(np.linalg.norm(A @ dec.G - dec.V2 @ dec.K)) if dec.p else 0.0,
                    config.tol_block * norm_A),
    }
    residuals = {}
    for name, (value, threshold) in checks.items():
        passed = value <= threshold
        logger.log_numeric_check(name, value, threshold, passed, "SUBSPACE")
        residuals[name] = value
        if not passed:
            raise RankDetectionError(f"verifica {name} fallita: {value:.3e} > {threshold:.3e}",
                                     check=name, value=value)

    rank_tol = config.rank_tol(dec.N)
    if dec.r and numerical_rank(dec.A21, rank_tol) != dec.r:
        raise RankDetectionError("A21 non invertibile", r=dec.r)
    if dec.r and numerical_rank(dec.U2, rank_tol) != dec.r:
        raise RankDetectionError("U2 non di rango pieno", r=dec.r)
    s_U = np.linalg.svd(U, compute_uv=False) if dec.N else np.ones(1)
    residuals["U_min_singular"] = float(s_U[-1])
    if s_U[-1] <= rank_tol * s_U[0]:
        raise RankDetectionError("U non invertibile", sigma_min=float(s_U[-1]))
    if dec.dim3:
        q33_min = float(np.linalg.eigvalsh((dec.Q33 + dec.Q33.T) / 2).min())
        residuals["Q33_min_eig"] = q33_min
        if q33_min <= config.tol_spd * norm_Q:
            raise RankDetectionError(f"Q33 non definita positiva: lambda_min = {q33_min:.3e}")
    return residuals


def build_decomposition(system: MomentSystem, config: NumericsConfig = DEFAULT_CONFIG,
                        use_parity: Optional[bool] = None) -> SubspaceDecomposition:
    """
    Costruisce la decomposizione (G, X, V, U) e verifica la struttura a blocchi

    Args:
        system: Sistema di momenti
        config: Tolleranze
        use_parity: None = automatico, True = per blocchi (obbligatorio), False = generico

    Returns:
        Decomposizione con i blocchi A_ij, Q_ij

    Raises:
        IncompatibleSystemError: Null(A) e Null(Q) hanno intersezione non banale,
            oppure il blocco di flusso M non ha rango di colonna pieno
        RankDetectionError: una verifica strutturale supera la tolleranza
    """
    report = check_compatibility(system.A, system.Q, config)
    if not report.compatible:
        raise IncompatibleSystemError(
            f"Null(A) e Null(Q) si intersecano (dimensione {report.joint_nullity})",
            joint_nullity=report.joint_nullity,
        )
    if use_parity is None:
        use_parity = system.has_parity
    if use_parity and not system.has_parity:
        raise ParityStructureError("decomposizione per blocchi richiesta su un sistema senza parità")

    A, Q = system.A, system.Q
    if use_parity:
        G, X, V1, V2, V3, K, blocks = _decompose_parity(system, config)
    else:
        G, X, V1, V2, V3, K, blocks = _decompose_generic(A, Q, config)

    U2 = A @ V1
    U = np.hstack([G, U2, V3])
    V = np.hstack([V1, V2, V3])
    dec = SubspaceDecomposition(G=G, X=X, V1=V1, V2=V2, V3=V3, K=K, U2=U2,
                                UtAV=U.T @ A @ V, UtQV=U.T @ Q @ V, parity=blocks)
    residuals = _verify_structure(dec, A, Q, config)
    dec.residuals.update(residuals)
    logger.log_pipeline_step("decomposizione", f"{dec.counts()} parita={use_parity}", "SUBSPACE")
    return dec


def inertia(matrix: np.ndarray, tol_factor: float = 1e-10) -> Tuple[int, int, int]:
    """Inerzia (n+, n0, n-) di una matrice simmetrica con soglia relativa"""
    if matrix.size == 0:
        return 0, 0, 0
    values = np.linalg.eigvalsh((matrix + matrix.T) / 2)
    tol = tol_factor * max(1.0, float(np.max(np.abs(values))))
    return int(np.sum(values > tol)), int(np.sum(np.abs(values) <= tol)), int(np.sum(values < -tol))


@dataclass(frozen=True, eq=False)
class SpectralFactorization:
    """Q33 = L L^T, L^{-1} A33 L^{-T} = R Lambda R^T, T = L^{-T} R"""
    L: np.ndarray
    R: np.ndarray
    eigenvalues: np.ndarray
    T: np.ndarray
    T_inv: np.ndarray
    n_plus: int
    n_zero: int
    n_minus: int
    lambda_max: float
    tol_eig: float
    eig_margin: float
    residuals: Dict[str, float]
    sylvester_counts: Tuple[int, int, int]

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    @property
    def T_plus(self) -> np.ndarray:
        return self.T[:, :self.n_plus]

    @property
    def T_zero(self) -> np.ndarray:
        return self.T[:, self.n_plus:self.n_plus + self.n_zero]

    @property
    def T_minus(self) -> np.ndarray:
        return self.T[:, self.n_plus + self.n_zero:]

    @property
    def lambda_plus(self) -> np.ndarray:
        return self.eigenvalues[:self.n_plus]

    @property
    def lambda_minus(self) -> np.ndarray:
        return self.eigenvalues[self.n_plus + self.n_zero:]

    @property
    def weight_bound(self) -> float:
        """Estremo superiore ammesso per il peso a (inf se vincolo vacuo)"""
        return 1.0 / self.lambda_max if self.lambda_max > self.tol_eig else float("inf")

    def check_weight(self, a: float):
        """
        Verifica 0 < a < 1/lambda_max

        Raises:
            WeightError: peso fuori dall'intervallo ammesso
        """
        if not a > 0:
            raise WeightError(f"il peso a deve essere positivo, trovato {a}")
        if a >= self.weight_bound:
            raise WeightError(
                f"peso a={a} non inferiore a 1/lambda_max={self.weight_bound:.6g}",
                a=a, bound=self.weight_bound,
            )

    @property
    def sylvester_consistent(self) -> bool:
        return self.sylvester_counts == (self.n_plus, self.n_zero, self.n_minus)


def spectral_factorization(dec: SubspaceDecomposition, a: Optional[float] = None,
                           config: NumericsConfig = DEFAULT_CONFIG) -> SpectralFactorization:
    """
    Fattorizzazione di Cholesky di Q33 e decomposizione spettrale di L^{-1} A33 L^{-T}

    Args:
        dec: Decomposizione dei sottospazi
        a: Peso opzionale da validare (a < 1/lambda_max)
        config: Tolleranze

    Returns:
        Fattorizzazione con autovalori ordinati (positivi decrescenti, nulli, negativi)

    Raises:
        CholeskyError: Q33 non definita positiva
        RankDetectionError: residui spettrali oltre soglia o inerzia di Sylvester incoerente
        WeightError: peso non ammesso
    """
    k = dec.dim3
    A33 = (dec.A33 + dec.A33.T) / 2
    Q33 = (dec.Q33 + dec.Q33.T) / 2
    if k == 0:
        empty = np.zeros((0, 0))
        spec = SpectralFactorization(empty, empty, np.zeros(0), empty, empty, 0, 0, 0, 0.0,
                                     config.tol_eig, float("inf"), {}, (0, 0, 0))
        if a is not None:
            spec.check_weight(a)
        return spec
    try:
        L = sla.cholesky(Q33, lower=True)
    except np.linalg.LinAlgError as e:
        raise CholeskyError(f"Cholesky di Q33 fallita: {e}") from e

    LiA = sla.solve_triangular(L, A33, lower=True)
    C = sla.solve_triangular(L, LiA.T, lower=True)
    C = (C + C.T) / 2
    values, vectors = np.linalg.eigh(C)
    order = np.argsort(-values, kind="stable")
    values = values[order]
    R = fix_column_signs(vectors[:, order])

    tol = config.tol_eig * max(1.0, float(np.max(np.abs(values))))
    n_plus = int(np.sum(values > tol))
    n_minus = int(np.sum(values < -tol))
    n_zero = k - n_plus - n_minus
    margin = float(np.min(np.abs(np.abs(values) - tol)))

    T = sla.solve_triangular(L, R, lower=True, trans='T')
    T_inv = R.T @ L.T
    norm_A33 = max(float(np.linalg.norm(A33)), 1.0)
    residuals = {
        "eigen": float(np.linalg.norm(C @ R - R * values)),
        "pencil": float(np.linalg.norm(np.linalg.solve(Q33, A33 @ T) - T * values)),
    }
    thresholds = {"eigen": 1e-10 * max(norm_A33, float(np.linalg.norm(C))),
                  "pencil": 1e-10 * norm_A33 * max(1.0, float(np.linalg.norm(T)))}
    for name, value in residuals.items():
        passed = value <= thresholds[name]
        logger.log_numeric_check(f"spectral_{name}", value, thresholds[name], passed, "SUBSPACE")
        if not passed:
            raise RankDetectionError(f"residuo spettrale {name} {value:.3e} > {thresholds[name]:.3e}",
                                     check=f"spectral_{name}", value=value)

    # legge d'inerzia di Sylvester: A33 e L^{-1} A33 L^{-T} hanno la stessa segnatura
    sylvester = inertia(dec.A33, config.tol_eig)
    if sylvester != (n_plus, n_zero, n_minus):
        raise RankDetectionError(
            f"inerzia di A33 {sylvester} diversa da ({n_plus}, {n_zero}, {n_minus})",
            check="sylvester", expected=[n_plus, n_zero, n_minus], found=list(sylvester),
        )

    lambda_max = float(values[0]) if n_plus else 0.0
    spec = SpectralFactorization(L=L, R=R, eigenvalues=values, T=T, T_inv=T_inv,
                                 n_plus=n_plus, n_zero=n_zero, n_minus=n_minus,
                                 lambda_max=lambda_max, tol_eig=tol, eig_margin=margin,
                                 residuals=residuals, sylvester_counts=sylvester)
    logger.log_pipeline_step("fattorizzazione spettrale",
                             f"n+={n_plus} n0={n_zero} n-={n_minus} lambda_max={lambda_max:.6g}", "SUBSPACE")
    if a is not None:
        spec.check_weight(a)
    return spec


def decomposition_report(dec: SubspaceDecomposition, spec: SpectralFactorization) -> Dict[str, Any]:
    """Report JSON di decomposizione e fattorizzazione"""
    return {
        "dimensions": {**dec.counts(), "n_plus": spec.n_plus, "n_zero": spec.n_zero,
                       "n_minus": spec.n_minus},
        "eigenvalues": spec.eigenvalues.tolist(),
        "tol_eig": spec.tol_eig,
        "eig_margin": spec.eig_margin,
        "lambda_max": spec.lambda_max,
        "weight_bound": spec.weight_bound if np.isfinite(spec.weight_bound) else None,
        "sylvester_counts": list(spec.sylvester_counts),
        "structure_residuals": dict(dec.residuals),
        "spectral_residuals": dict(spec.residuals),
    }
