"""
Costruzione dei sistemi di momenti di Grad lineari in semispazio.

Enumera i multi-indici di Hermite, assembla le matrici di flusso A e di
collisione BGK Q, le matrici di bordo (S, E, b) e i sistemi ridotti 1D.

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.special import roots_legendre

from .config import DEFAULT_CONFIG, NumericsConfig
from .error_handler import (
    IndexCountError,
    NotPositiveDefiniteError,
    ParityStructureError,
    QuadratureError,
    ValidationError,
)
from .logger import logger
from .validation_mixin import ValidationMixin

VARIANTS = ("full3d", "kramers3", "reduced1d", "explicit")


class MultiIndex(NamedTuple):
    """Multi-indice di Hermite (alpha1, alpha2, alpha3); alpha2 è la direzione normale"""
    a1: int
    a2: int
    a3: int

    @property
    def degree(self) -> int:
        return self.a1 + self.a2 + self.a3

    @property
    def is_even(self) -> bool:
        return self.a2 % 2 == 0

    def shifted(self, d2: int) -> "MultiIndex":
        return MultiIndex(self.a1, self.a2 + d2, self.a3)

    def label(self) -> str:
        return f"({self.a1},{self.a2},{self.a3})"


class IndexEnumeration(NamedTuple):
    indices: Tuple[MultiIndex, ...]
    m: int
    n: int


def _graded_key(alpha: MultiIndex):
    return (alpha.degree, -alpha.a1, -alpha.a2, -alpha.a3)


def enumerate_indices(M: int) -> IndexEnumeration:
    """
    Enumera tutti i multi-indici con |alpha| <= M

    Args:
        M: Ordine del sistema

    Returns:
        (indici, m, n) con i pari in alpha2 prima dei dispari, ciascuna classe
        in ordine lessicografico graduato
    """
    if M < 0:
        raise ValidationError(f"ordine negativo: {M}")
    all_indices = [
        MultiIndex(a1, a2, d - a1 - a2)
        for d in range(M + 1)
        for a1 in range(d + 1)
        for a2 in range(d - a1 + 1)
    ]
    even = sorted((a for a in all_indices if a.is_even), key=_graded_key)
    odd = sorted((a for a in all_indices if not a.is_even), key=_graded_key)
    return IndexEnumeration(tuple(even + odd), len(even), len(odd))


def build_flux_matrix(indices: Sequence[MultiIndex]) -> np.ndarray:
    """
    Matrice di flusso A[alpha, alpha+e2] = sqrt(alpha2+1), assemblata simmetrica

    Args:
        indices: Multi-indici ordinati del sistema

    Returns:
        Matrice N x N esattamente simmetrica
    """
    position = {alpha: i for i, alpha in enumerate(indices)}
    A = np.zeros((len(indices), len(indices)))
    for i, alpha in enumerate(indices):
        j = position.get(alpha.shifted(+1))
        if j is not None:
            value = math.sqrt(alpha.a2 + 1)
            A[i, j] = value
            A[j, i] = value
    return A


def collision_invariants(indices: Sequence[MultiIndex]) -> np.ndarray:
    """
    Vettori dei coefficienti degli invarianti di collisione presenti

    Returns:
        Matrice N x k (k <= 5) con colonne ortonormali
    """
    position = {alpha: i for i, alpha in enumerate(indices)}
    N = len(indices)
    vectors = []
    for alpha in (MultiIndex(0, 0, 0), MultiIndex(1, 0, 0), MultiIndex(0, 1, 0), MultiIndex(0, 0, 1)):
        if alpha in position:
            v = np.zeros(N)
            v[position[alpha]] = 1.0
            vectors.append(v)
    energy = [MultiIndex(2, 0, 0), MultiIndex(0, 2, 0), MultiIndex(0, 0, 2)]
    if all(alpha in position for alpha in energy):
        v = np.zeros(N)
        for alpha in energy:
            v[position[alpha]] = 1.0 / math.sqrt(3.0)
        vectors.append(v)
    if not vectors:
        return np.zeros((N, 0))

    # Gram-Schmidt con doppia ortogonalizzazione
    basis: List[np.ndarray] = []
    for v in vectors:
        w = v.copy()
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm > 1e-14:
            basis.append(w / norm)
    return np.column_stack(basis)


def build_bgk_collision(indices: Sequence[MultiIndex], nu: float) -> np.ndarray:
    """
    Operatore BGK Q = nu (I - Pi), Pi proiettore sugli invarianti di collisione

    Args:
        indices: Multi-indici del sistema
        nu: Frequenza di collisione (> 0)

    Returns:
        Matrice N x N simmetrica semidefinita positiva
    """
    if not nu > 0:
        raise ValidationError(f"nu deve essere positivo, trovato {nu}")
    invariants = collision_invariants(indices)
    Q = nu * (np.eye(len(indices)) - invariants @ invariants.T)
    return (Q + Q.T) / 2


def orthonormal_hermite(t: np.ndarray, kmax: int) -> np.ndarray:
    """
    Polinomi di Hermite probabilistici ortonormali he_0..he_kmax sui nodi t

    Returns:
        Matrice (kmax+1) x len(t)
    """
    values = np.zeros((kmax + 1, t.size))
    values[0] = 1.0
    if kmax >= 1:
        values[1] = t
    for k in range(1, kmax):
        values[k + 1] = (t * values[k] - math.sqrt(k) * values[k - 1]) / math.sqrt(k + 1)
    return values


def _half_range_quadrature(kmax: int, nodes: int, upper: float) -> np.ndarray:
    x, w = roots_legendre(nodes)
    t = upper * (x + 1.0) / 2.0
    wt = upper * w / 2.0
    gauss = np.exp(-t * t / 2.0) / math.sqrt(2.0 * math.pi)
    he = orthonormal_hermite(t, kmax)
    # |t| pari: integrale su R = 2 * integrale su [0, inf)
    J = 2.0 * (he * (wt * t * gauss)) @ he.T
    parity = (np.add.outer(np.arange(kmax + 1), np.arange(kmax + 1)) % 2) == 1
    J[parity] = 0.0
    return (J + J.T) / 2


@lru_cache(maxsize=16)
def _half_range_cached(kmax: int, nodes: int, upper: float, tol: float, max_doublings: int) -> np.ndarray:
    previous = _half_range_quadrature(kmax, nodes, upper)
    for _ in range(max_doublings):
        nodes *= 2
        current = _half_range_quadrature(kmax, nodes, upper)
        change = float(np.max(np.abs(current - previous)))
        if change <= tol * max(1.0, float(np.max(np.abs(current)))):
            logger.debug(f"J({kmax}) convergente con {nodes} nodi (variazione {change:.2e})", "BUILDER")
            current.setflags(write=False)
            return current
        previous = current
    raise QuadratureError(f"quadratura half-range non convergente con {nodes} nodi", kmax=kmax)


def half_range_moments(kmax: int, config: NumericsConfig = DEFAULT_CONFIG) -> np.ndarray:
    """
    Integrali J(p,q) = int |t| g(t) he_p(t) he_q(t) dt per p, q <= kmax

    Returns:
        Matrice simmetrica (kmax+1) x (kmax+1)
    """
    return _half_range_cached(kmax, config.quad_nodes, config.quad_upper, config.quad_tol,
                              config.quad_max_doublings).copy()


def build_half_flux_matrix(indices_even: Sequence[MultiIndex],
                           config: NumericsConfig = DEFAULT_CONFIG) -> np.ndarray:
    """
    Matrice S[alpha,beta] = delta_{a1 b1} delta_{a3 b3} J(alpha2, beta2) sugli indici pari

    Raises:
        NotPositiveDefiniteError: S numericamente non SPD (quadratura fallita)
    """
    m = len(indices_even)
    if m == 0:
        return np.zeros((0, 0))
    kmax = max(alpha.a2 for alpha in indices_even)
    J = half_range_moments(kmax, config)
    S = np.zeros((m, m))
    for i, alpha in enumerate(indices_even):
        for j, beta in enumerate(indices_even):
            if alpha.a1 == beta.a1 and alpha.a3 == beta.a3:
                S[i, j] = J[alpha.a2, beta.a2]
    lam_min = float(np.linalg.eigvalsh(S).min())
    if lam_min <= config.tol_spd:
        raise NotPositiveDefiniteError(f"S non definita positiva: lambda_min = {lam_min:.3e}")
    return S


def build_selection_matrix(indices_even: Sequence[MultiIndex], M: int, n: int) -> np.ndarray:
    """
    Matrice di selezione E (n x m) degli indici pari con |alpha| <= M-1

    Raises:
        IndexCountError: il numero di indici selezionati differisce da n
    """
    rows = [i for i, alpha in enumerate(indices_even) if alpha.degree <= M - 1]
    if len(rows) != n:
        raise IndexCountError(
            f"#{{alpha pari, |alpha| <= {M - 1}}} = {len(rows)} diverso da n = {n}",
            selected=len(rows), n=n,
        )
    E = np.zeros((n, len(indices_even)))
    E[np.arange(n), rows] = 1.0
    return E


@dataclass(frozen=True)
class BoundaryData:
    """Dati di parete: densità, velocità, temperatura e coefficiente di accomodazione"""
    rho_w: float = 0.0
    u_w: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    theta_w: float = 0.0
    chi: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.chi <= 1.0:
            raise ValidationError(f"chi={self.chi} fuori dall'intervallo [0, 1]")
        if len(self.u_w) != 3:
            raise ValidationError("u_w deve avere tre componenti")
        if self.u_w[1] != 0.0:
            raise ValidationError("la velocità di parete deve essere tangente (u_w . n = 0)")

    @property
    def chi_hat(self) -> float:
        return chi_hat(self.chi)


def chi_hat(chi: float) -> float:
    """chi_hat = (2 chi / (2 - chi)) / sqrt(2 pi)"""
    if not 0.0 <= chi <= 1.0:
        raise ValidationError(f"chi={chi} fuori dall'intervallo [0, 1]")
    return (2.0 * chi / (2.0 - chi)) / math.sqrt(2.0 * math.pi)


def build_wall_vector(indices: Sequence[MultiIndex], bd: BoundaryData) -> np.ndarray:
    """Vettore di parete b: b_0 = rho, b_{e_i} = u_i, b_{2e_i} = theta/sqrt(2)"""
    b = np.zeros(len(indices))
    entries = {
        MultiIndex(0, 0, 0): bd.rho_w,
        MultiIndex(1, 0, 0): bd.u_w[0],
        MultiIndex(0, 1, 0): bd.u_w[1],
        MultiIndex(0, 0, 1): bd.u_w[2],
        MultiIndex(2, 0, 0): bd.theta_w / math.sqrt(2.0),
        MultiIndex(0, 2, 0): bd.theta_w / math.sqrt(2.0),
        MultiIndex(0, 0, 2): bd.theta_w / math.sqrt(2.0),
    }
    for i, alpha in enumerate(indices):
        if alpha in entries:
            b[i] = entries[alpha]
    return b


def _freeze(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class MomentSystem(ValidationMixin):
    """Coppia (A, Q) con la contabilità dei multi-indici e la partizione di parità"""
    order: int
    A: np.ndarray
    Q: np.ndarray
    nu: float
    m: int
    n: int
    variant: str = "explicit"
    indices: Optional[Tuple[MultiIndex, ...]] = None
    labels: Optional[Tuple[str, ...]] = None
    _parity: Optional[bool] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "A", _freeze(self.A))
        object.__setattr__(self, "Q", _freeze(self.Q))
        if self.variant not in VARIANTS:
            raise ValidationError(f"variante sconosciuta: {self.variant}")
        self.require_shape("A", self.A, self.N, self.N)
        self.require_shape("Q", self.Q, self.N, self.N)
        if self.indices is not None and len(self.indices) != self.N:
            raise ValidationError("numero di multi-indici diverso da N")
        if self.m + self.n != self.N:
            raise ValidationError(f"m + n = {self.m + self.n} diverso da N = {self.N}")

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def has_parity(self) -> bool:
        """Struttura a blocchi [[0, M],[M^T, 0]] e Q diagonale a blocchi (zeri esatti)"""
        if self._parity is None:
            m = self.m
            ok = (
                m > 0 and self.n > 0
                and not np.any(self.A[:m, :m]) and not np.any(self.A[m:, m:])
                and not np.any(self.Q[:m, m:]) and not np.any(self.Q[m:, :m])
            )
            object.__setattr__(self, "_parity", bool(ok))
        return bool(self._parity)

    def parity_blocks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Blocchi di parità

        Returns:
            (M, Q_e, Q_o) con M il blocco m x n in alto a destra di A
        """
        if not self.has_parity:
            raise ParityStructureError("il sistema non ha struttura di parità", variant=self.variant)
        m = self.m
        return self.A[:m, m:], self.Q[:m, :m], self.Q[m:, m:]

    @property
    def even_indices(self) -> Tuple[MultiIndex, ...]:
        if self.indices is None:
            raise ParityStructureError("multi-indici non disponibili per questo sistema")
        return self.indices[:self.m]

    def index_of(self, alpha: MultiIndex) -> Optional[int]:
        if self.indices is None:
            return None
        try:
            return self.indices.index(alpha)
        except ValueError:
            return None

    def variable_labels(self) -> List[str]:
        if self.labels is not None:
            return list(self.labels)
        if self.indices is not None:
            return [alpha.label() for alpha in self.indices]
        return [f"w{i}" for i in range(self.N)]

    def validate(self, config: NumericsConfig = DEFAULT_CONFIG):
        """Verifica simmetria di A e Q e semidefinitezza di Q"""
        self.require_symmetric("A", self.A, 0.0 if self.variant != "explicit" else config.tol_block)
        self.require_symmetric("Q", self.Q, config.tol_block)
        scale = self.nu if self.variant != "explicit" else max(1.0, float(np.linalg.norm(self.Q, 2)))
        self.require_psd("Q", self.Q, config.tol_psd * scale)

    # ===== SERIALIZZAZIONE =====

    def to_dict(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            "order": self.order,
            "variant": self.variant,
            "nu": self.nu,
            "parity": {"m": self.m, "n": self.n},
        }
        if self.variant == "explicit":
            doc["A"] = self.A.tolist()
            doc["Q"] = self.Q.tolist()
            if self.indices is not None:
                doc["indices"] = [list(alpha) for alpha in self.indices]
        return doc

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "MomentSystem":
        try:
            variant = doc.get("variant", "explicit")
            nu = float(doc.get("nu", 1.0))
            order = int(doc.get("order", 0))
            if variant == "full3d":
                return build_full3d(order, nu)
            if variant == "kramers3":
                return build_kramers3(nu)
            if variant == "reduced1d":
                return build_reduced_couette(order, nu)
            A = np.array(doc["A"], dtype=float)
            Q = np.array(doc["Q"], dtype=float)
            parity = doc.get("parity") or {"m": A.shape[0], "n": 0}
            indices = doc.get("indices")
            if indices is not None:
                indices = tuple(MultiIndex(*map(int, alpha)) for alpha in indices)
            return cls(order=order, A=A, Q=Q, nu=nu, m=int(parity["m"]), n=int(parity["n"]),
                       variant="explicit", indices=indices)
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"documento di sistema non valido: {e}") from e


def build_full3d(M: int, nu: float = 1.0) -> MomentSystem:
    """Sistema completo 3D di ordine M con collisione BGK"""
    if M < 2:
        raise ValidationError(f"ordine M={M} < 2")
    enum = enumerate_indices(M)
    A = build_flux_matrix(enum.indices)
    Q = build_bgk_collision(enum.indices, nu)
    logger.log_pipeline_step("sistema full3d", f"M={M}, N={len(enum.indices)}, m={enum.m}, n={enum.n}", "BUILDER")
    return MomentSystem(order=M, A=A, Q=Q, nu=nu, m=enum.m, n=enum.n,
                        variant="full3d", indices=enum.indices)


def build_kramers3(nu: float = 1.0) -> MomentSystem:
    """Sistema ridotto di Kramers con variabili (u1, f3, sigma12)"""
    if not nu > 0:
        raise ValidationError(f"nu deve essere positivo, trovato {nu}")
    indices = (MultiIndex(1, 0, 0), MultiIndex(1, 2, 0), MultiIndex(1, 1, 0))
    A = build_flux_matrix(indices)
    Q = np.diag([0.0, nu, nu])
    return MomentSystem(order=3, A=A, Q=Q, nu=nu, m=2, n=1, variant="kramers3",
                        indices=indices, labels=("u1", "f3", "sigma12"))


def build_reduced_couette(M: int, nu: float = 1.0) -> MomentSystem:
    """
    Sistema ridotto 1D con momenti f_k <-> alpha = (1, k-1, 0), k = 1..M

    Args:
        M: Ordine dispari >= 3
        nu: Frequenza di collisione

    Returns:
        Sistema con W_e = (f1, f3, ..., f_M) e W_o = (f2, ..., f_{M-1})
    """
    if M < 3 or M % 2 == 0:
        raise ValidationError(f"l'ordine del sistema ridotto deve essere dispari >= 3, trovato {M}")
    if not nu > 0:
        raise ValidationError(f"nu deve essere positivo, trovato {nu}")
    ks = list(range(1, M + 1, 2)) + list(range(2, M, 2))
    indices = tuple(MultiIndex(1, k - 1, 0) for k in ks)
    A = build_flux_matrix(indices)
    Q = nu * np.diag([0.0 if k == 1 else 1.0 for k in ks])
    m = (M + 1) // 2
    return MomentSystem(order=M, A=A, Q=Q, nu=nu, m=m, n=M - m, variant="reduced1d",
                        indices=indices, labels=tuple(f"f{k}" for k in ks))
