"""
Algebra chiusa delle funzioni vettoriali esponenziale-polinomio.

f(y) = sum_k P_k(y) exp(-b_k y), con valutazione esatta, integrali di coda,
convoluzioni di decadimento e di crescita e norme pesate in forma chiusa.
Per sorgenti fornite come dati è disponibile la modalità a griglia
(SampledVec) con la stessa interfaccia.

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid

from .config import DEFAULT_CONFIG
from .error_handler import DegreeLimitError, DivergentSourceError, InputFileError, ValidationError

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _per_component(values: ArrayLike, dim: int) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        return np.full(dim, float(values))
    if values.shape != (dim,):
        raise ValidationError(f"attesi {dim} parametri per componente, trovati {values.shape}")
    return values


class VectorFunction(ABC):
    """Interfaccia comune delle funzioni vettoriali su [0, inf)"""

    @property
    @abstractmethod
    def dim(self) -> int:
        ...

    @abstractmethod
    def evaluate(self, ys: ArrayLike) -> np.ndarray:
        """Valori sui punti ys, forma (len(ys), dim)"""

    def __call__(self, y: float) -> np.ndarray:
        return self.evaluate(np.array([float(y)]))[0]

    @abstractmethod
    def apply(self, matrix: np.ndarray) -> "VectorFunction":
        """Prodotto matrice-funzione y -> matrix @ f(y)"""

    @abstractmethod
    def scale(self, factor: float) -> "VectorFunction":
        ...

    @abstractmethod
    def integrate_tail(self) -> "VectorFunction":
        """r(y) = -int_y^inf f(s) ds"""

    @abstractmethod
    def convolve_decay(self, lam: ArrayLike) -> "VectorFunction":
        """g_i(y) = (1/lambda_i) int_0^y exp((s-y)/lambda_i) f_i(s) ds, lambda_i > 0"""

    @abstractmethod
    def convolve_growth_tail(self, lam: ArrayLike) -> "VectorFunction":
        """z_i(y) = -(1/lambda_i) int_y^inf exp((s-y)/lambda_i) f_i(s) ds, lambda_i < 0"""

    @abstractmethod
    def weighted_norm(self, a: float) -> float:
        """(int_0^inf exp(2ay) f^T f dy)^(1/2)"""

    @abstractmethod
    def derivative(self) -> "VectorFunction":
        ...

    @abstractmethod
    def modes(self, rates: ArrayLike, amplitudes: ArrayLike) -> "VectorFunction":
        """Funzione dello stesso tipo sum_i exp(-rate_i y) amplitude_i e_i"""

    @abstractmethod
    def min_rate(self) -> float:
        """Tasso di decadimento minimo (inf per la funzione nulla)"""

    def finite_a_norm(self, a: float) -> bool:
        """Se ||f||_a è finita; vero per le funzioni a supporto limitato"""
        return True

    def __neg__(self):
        return self.scale(-1.0)

    def __mul__(self, factor: float):
        return self.scale(float(factor))

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-other)

    def component(self, rows: Union[int, Sequence[int], slice]) -> "VectorFunction":
        """Selezione di componenti"""
        return self.apply(np.eye(self.dim)[rows].reshape(-1, self.dim))

    def sup_norm(self, ys: np.ndarray) -> float:
        values = self.evaluate(ys)
        return float(np.max(np.abs(values))) if values.size else 0.0


class ExpPolyVec(VectorFunction):
    """
    Somma di termini P_k(y) exp(-b_k y) con coefficienti per componente.

    Ogni termine è (rate, coeffs) con coeffs di forma (dim, grado+1); i termini
    con lo stesso tasso sono fusi, gli zeri finali eliminati.
    """

    def __init__(self, dim: int, terms: Iterable[Tuple[float, np.ndarray]] = (),
                 max_degree: int = DEFAULT_CONFIG.max_degree):
        self._dim = int(dim)
        self.max_degree = max_degree
        merged: Dict[float, np.ndarray] = {}
        for rate, coeffs in terms:
            rate = float(rate)
            coeffs = np.asarray(coeffs, dtype=float)
            coeffs = coeffs.reshape(self._dim, -1) if self._dim else np.zeros((0, max(coeffs.size, 1)))
            if rate < 0 or not math.isfinite(rate):
                raise ValidationError(f"tasso non ammesso: {rate}")
            if rate in merged:
                prev = merged[rate]
                width = max(prev.shape[1], coeffs.shape[1])
                total = np.zeros((self._dim, width))
                total[:, :prev.shape[1]] += prev
                total[:, :coeffs.shape[1]] += coeffs
                merged[rate] = total
            else:
                merged[rate] = coeffs.copy()
        cleaned = []
        for rate in sorted(merged):
            coeffs = merged[rate]
            nonzero = np.nonzero(np.any(coeffs != 0.0, axis=0))[0]
            if nonzero.size == 0:
                continue
            coeffs = coeffs[:, :nonzero[-1] + 1]
            if coeffs.shape[1] - 1 > max_degree:
                raise DegreeLimitError(f"grado {coeffs.shape[1] - 1} oltre il massimo {max_degree}")
            coeffs.setflags(write=False)
            cleaned.append((rate, coeffs))
        self.terms: Tuple[Tuple[float, np.ndarray], ...] = tuple(cleaned)

    # ===== COSTRUTTORI =====

    @classmethod
    def zeros(cls, dim: int) -> "ExpPolyVec":
        return cls(dim)

    @classmethod
    def exponential(cls, rate: float, vector: ArrayLike, degree: int = 0) -> "ExpPolyVec":
        """y^degree exp(-rate y) vector"""
        vector = np.atleast_1d(np.asarray(vector, dtype=float))
        coeffs = np.zeros((vector.size, degree + 1))
        coeffs[:, degree] = vector
        return cls(vector.size, [(rate, coeffs)])

    @classmethod
    def scalar(cls, terms: Iterable[Tuple[float, Sequence[float]]]) -> "ExpPolyVec":
        """Funzione scalare da coppie (tasso, coefficienti polinomiali)"""
        return cls(1, [(rate, np.asarray(c, dtype=float).reshape(1, -1)) for rate, c in terms])

    def modes(self, rates: ArrayLike, amplitudes: ArrayLike) -> "ExpPolyVec":
        amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=float))
        rates = _per_component(rates, amplitudes.size)
        terms = []
        for i, (rate, amp) in enumerate(zip(rates, amplitudes)):
            coeffs = np.zeros((amplitudes.size, 1))
            coeffs[i, 0] = amp
            terms.append((rate, coeffs))
        return ExpPolyVec(amplitudes.size, terms, self.max_degree)

    # ===== STRUTTURA =====

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def rates(self) -> List[float]:
        return [rate for rate, _ in self.terms]

    @property
    def degree(self) -> int:
        return max((c.shape[1] - 1 for _, c in self.terms), default=0)

    def min_rate(self) -> float:
        return min(self.rates, default=float("inf"))

    def finite_a_norm(self, a: float) -> bool:
        # i termini nulli sono già stati scartati dal costruttore
        return all(rate > a for rate in self.rates)

    def _new(self, dim: int, terms) -> "ExpPolyVec":
        return ExpPolyVec(dim, terms, self.max_degree)

    # ===== ALGEBRA =====

    def evaluate(self, ys: ArrayLike) -> np.ndarray:
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        out = np.zeros((ys.size, self._dim))
        for rate, coeffs in self.terms:
            poly = np.polynomial.polynomial.polyval(ys, coeffs.T)   # (dim, len)
            out += (poly * np.exp(-rate * ys)).T
        return out

    def apply(self, matrix: np.ndarray) -> "ExpPolyVec":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        if matrix.shape[1] != self._dim:
            raise ValidationError(f"matrice {matrix.shape} incompatibile con dimensione {self._dim}")
        return self._new(matrix.shape[0], [(rate, matrix @ coeffs) for rate, coeffs in self.terms])

    def scale(self, factor: float) -> "ExpPolyVec":
        return self._new(self._dim, [(rate, factor * coeffs) for rate, coeffs in self.terms])

    def __add__(self, other):
        if not isinstance(other, ExpPolyVec):
            return NotImplemented
        if other.dim != self._dim:
            raise ValidationError(f"dimensioni diverse: {self._dim} e {other.dim}")
        return self._new(self._dim, list(self.terms) + list(other.terms))

    def derivative(self) -> "ExpPolyVec":
        terms = []
        for rate, coeffs in self.terms:
            out = -rate * coeffs.astype(float)
            if coeffs.shape[1] > 1:
                out[:, :-1] += coeffs[:, 1:] * np.arange(1, coeffs.shape[1])
            terms.append((rate, out))
        return self._new(self._dim, terms)

    def _require_positive_rates(self, what: str):
        for rate in self.rates:
            if rate <= 0.0:
                raise DivergentSourceError(f"{what}: termine con tasso {rate} non integrabile su [y, inf)")

    def integrate_tail(self) -> "ExpPolyVec":
        self._require_positive_rates("integrale di coda")
        terms = []
        for rate, coeffs in self.terms:
            terms.append((rate, -_tail_moments(coeffs, rate)))
        return self._new(self._dim, terms)

    def convolve_growth_tail(self, lam: ArrayLike) -> "ExpPolyVec":
        lam = _per_component(lam, self._dim)
        if np.any(lam >= 0):
            raise ValidationError("la convoluzione di coda richiede lambda < 0")
        self._require_positive_rates("convoluzione di crescita")
        kappa = -1.0 / lam
        terms = []
        for rate, coeffs in self.terms:
            out = np.zeros_like(coeffs, dtype=float)
            for i in range(self._dim):
                if np.any(coeffs[i]):
                    out[i] = kappa[i] * _tail_moments(coeffs[i:i + 1], kappa[i] + rate)[0]
            terms.append((rate, out))
        return self._new(self._dim, terms)

    def convolve_decay(self, lam: ArrayLike, resonance_tol: float = DEFAULT_CONFIG.tol_resonance,
                       near_band: float = DEFAULT_CONFIG.near_resonance_band) -> "ExpPolyVec":
        """
        g_i(y) = mu_i int_0^y exp(-mu_i (y-s)) f_i(s) ds con mu_i = 1/lambda_i

        Vicino alla risonanza (|mu - b| <= near_band min(b, mu)) il termine
        P(s) e^{-bs} è riscritto come P(s) T_K((mu-b)s) e^{-mu s}, con T_K
        polinomio di Taylor di e^x, e integrato come termine risonante: la
        formula a due esponenziali perderebbe tutte le cifre per cancellazione.
        """
        lam = _per_component(lam, self._dim)
        if np.any(lam <= 0):
            raise ValidationError("la convoluzione di decadimento richiede lambda > 0")
        mu = 1.0 / lam
        terms = []
        for rate, coeffs in self.terms:
            width = coeffs.shape[1]
            for i in range(self._dim):
                c = coeffs[i]
                if not np.any(c):
                    continue
                d = mu[i] - rate
                if abs(d) <= resonance_tol * max(rate, mu[i]):
                    terms.append((mu[i], _resonant_primitive(c, mu[i], i, self._dim)))
                    continue
                if abs(d) <= near_band * min(rate, mu[i]):
                    order = _taylor_order(abs(d) / min(rate, mu[i]), self.max_degree - width)
                    taylor = d ** np.arange(order + 1) / np.array(
                        [math.factorial(q) for q in range(order + 1)], dtype=float)
                    shifted = np.polynomial.polynomial.polymul(c, taylor)
                    terms.append((mu[i], _resonant_primitive(shifted, mu[i], i, self._dim)))
                    continue
                same = np.zeros((self._dim, width))
                boundary = 0.0
                for k in range(width):
                    if c[k] == 0.0:
                        continue
                    ratio = 1.0
                    # k!/(j! d^(k-j+1)) per j = k, k-1, ..., 0
                    for j in range(k, -1, -1):
                        if j < k:
                            ratio *= (j + 1) / d
                        same[i, j] += mu[i] * c[k] * (-1) ** (k - j) * ratio / d
                    boundary += mu[i] * c[k] * (-1) ** k * ratio / d
                terms.append((rate, same))
                out = np.zeros((self._dim, 1))
                out[i, 0] = -boundary
                terms.append((mu[i], out))
        return self._new(self._dim, terms)

    def weighted_norm(self, a: float) -> float:
        if not self.finite_a_norm(a):
            raise DivergentSourceError(
                f"norma pesata divergente: tasso minimo {self.min_rate()} con a={a}", a=a
            )
        total = 0.0
        for rate_i, ci in self.terms:
            for rate_j, cj in self.terms:
                c = rate_i + rate_j - 2.0 * a
                gram = ci.T @ cj    # (deg_i+1, deg_j+1)
                k = np.add.outer(np.arange(ci.shape[1]), np.arange(cj.shape[1]))
                moments = np.array([math.factorial(int(e)) for e in k.ravel()], dtype=float).reshape(k.shape)
                total += float(np.sum(gram * moments / c ** (k + 1)))
        return math.sqrt(max(total, 0.0))

    def check_poincare(self, a: float) -> Dict[str, float]:
        return check_poincare(self, a)

    # ===== SERIALIZZAZIONE =====

    def to_dict(self) -> Dict[str, Any]:
        return {"dim": self._dim,
                "terms": [{"rate": rate, "coeffs": coeffs.tolist()} for rate, coeffs in self.terms]}

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> "ExpPolyVec":
        try:
            dim = int(doc["dim"])
            terms = [(float(t["rate"]), np.asarray(t["coeffs"], dtype=float).reshape(dim, -1))
                     for t in doc.get("terms", [])]
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"documento esponenziale-polinomio non valido: {e}") from e
        return cls(dim, terms)

    def __repr__(self) -> str:
        return f"ExpPolyVec(dim={self._dim}, rates={self.rates}, degree={self.degree})"


def _resonant_primitive(c: np.ndarray, mu: float, row: int, dim: int) -> np.ndarray:
    # mu int_0^y s^k ds = mu y^(k+1)/(k+1), sulla riga `row`
    out = np.zeros((dim, c.size + 1))
    out[row, 1:] = mu * c / np.arange(1, c.size + 1)
    return out


def _taylor_order(ratio: float, room: int) -> int:
    """Ordine K con ratio^(K+1) <= 1e-18, limitato dal grado ancora disponibile"""
    if ratio <= 0.0:
        return 0
    order = max(math.ceil(18.0 / -math.log10(ratio)) - 1, 0)
    return min(order, max(room, 0))


def _tail_moments(coeffs: np.ndarray, c: float) -> np.ndarray:
    """
    Coefficienti di exp(c y) int_y^inf P(s) exp(-c s) ds

    int_y^inf s^k e^{-cs} ds = e^{-cy} sum_j k!/(j! c^(k-j+1)) y^j
    """
    out = np.zeros(coeffs.shape, dtype=float)
    for k in range(coeffs.shape[1]):
        column = coeffs[:, k]
        if not np.any(column):
            continue
        ratio = 1.0 / c
        for j in range(k, -1, -1):
            if j < k:
                ratio *= (j + 1) / c
            out[:, j] += column * ratio
    return out


def check_poincare(f: VectorFunction, a: float) -> Dict[str, float]:
    """
    Disuguaglianze di Poincaré e di traccia per r = integrate_tail(f)

    Returns:
        {"lhs": ||r||_a, "bound": ||f||_a / a, "trace": ||r(0)||, "trace_bound": sqrt(2/a) ||f||_a}
    """
    if not a > 0:
        raise ValidationError(f"il peso a deve essere positivo, trovato {a}")
    norm_f = f.weighted_norm(a)
    r = f.integrate_tail()
    return {
        "lhs": r.weighted_norm(a),
        "bound": norm_f / a,
        "trace": float(np.linalg.norm(r(0.0))),
        "trace_bound": math.sqrt(2.0 / a) * norm_f,
    }


# ===== MODALITA' A GRIGLIA =====

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


class SampledVec(VectorFunction):
    """
    Funzione lineare a tratti su una griglia, nulla oltre l'ultimo nodo.

    Le trasformazioni usano quadratura di Gauss composita sull'interpolante;
    le tracce in y = 0 sono dati, non grandezze derivate.
    """

    def __init__(self, grid: ArrayLike, values: np.ndarray):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if grid.ndim != 1 or grid.size < 2 or values.shape[0] != grid.size:
            raise ValidationError("griglia e valori incompatibili")
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise ValidationError("la griglia deve partire da 0 ed essere strettamente crescente")
        self.grid = grid
        self.values = values
        self.grid.setflags(write=False)
        self.values.setflags(write=False)

    @classmethod
    def from_csv(cls, path: str) -> "SampledVec":
        """CSV con colonna y seguita dalle componenti"""
        try:
            frame = pd.read_csv(path)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise InputFileError(f"impossibile leggere {path}: {e}", path=str(path)) from e
        if frame.shape[1] < 2:
            raise ValidationError("il CSV deve contenere y e almeno una componente")
        frame = frame.sort_values(frame.columns[0])
        return cls(frame.iloc[:, 0].to_numpy(), frame.iloc[:, 1:].to_numpy())

    @classmethod
    def sample(cls, f: VectorFunction, grid: ArrayLike) -> "SampledVec":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, f.evaluate(grid))

    def to_frame(self, labels: Optional[Sequence[str]] = None) -> pd.DataFrame:
        labels = list(labels) if labels is not None else [f"w{i}" for i in range(self.dim)]
        frame = pd.DataFrame(self.values, columns=labels)
        frame.insert(0, "y", self.grid)
        return frame

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def _like(self, values: np.ndarray) -> "SampledVec":
        return SampledVec(self.grid, values)

    def evaluate(self, ys: ArrayLike) -> np.ndarray:
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        return np.column_stack([
            np.interp(ys, self.grid, self.values[:, i], right=0.0) for i in range(self.dim)
        ]) if self.dim else np.zeros((ys.size, 0))

    def apply(self, matrix: np.ndarray) -> "SampledVec":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return self._like(self.values @ matrix.T)

    def scale(self, factor: float) -> "SampledVec":
        return self._like(factor * self.values)

    def __add__(self, other):
        if isinstance(other, ExpPolyVec):
            other = SampledVec.sample(other, self.grid)
        if not isinstance(other, SampledVec):
            return NotImplemented
        if other.grid.shape != self.grid.shape or np.any(other.grid != self.grid):
            other = SampledVec.sample(other, self.grid)
        return self._like(self.values + other.values)

    __radd__ = __add__

    def __rsub__(self, other):
        return (-self) + other

    def modes(self, rates: ArrayLike, amplitudes: ArrayLike) -> "SampledVec":
        return SampledVec.sample(ExpPolyVec.zeros(1).modes(rates, amplitudes), self.grid)

    def min_rate(self) -> float:
        return float("inf")

    def derivative(self) -> "SampledVec":
        return self._like(np.gradient(self.values, self.grid, axis=0))

    def integrate_tail(self) -> "SampledVec":
        # trapezi esatti sull'interpolante lineare
        forward = cumulative_trapezoid(self.values, self.grid, axis=0, initial=0.0)
        return self._like(-(forward[-1] - forward))

    def _panel_integrals(self, rate: float, anchor_right: bool, i: int) -> np.ndarray:
        y0, y1 = self.grid[:-1], self.grid[1:]
        h = y1 - y0
        s = y0[:, None] + h[:, None] * (_GAUSS_NODES[None, :] + 1.0) / 2.0
        t = (s - y0[:, None]) / h[:, None]
        f = (1 - t) * self.values[:-1, i:i + 1] + t * self.values[1:, i:i + 1]
        anchor = y1[:, None] if anchor_right else y0[:, None]
        kernel = np.exp(-rate * np.abs(anchor - s))
        return (kernel * f) @ _GAUSS_WEIGHTS * h / 2.0

    def convolve_decay(self, lam: ArrayLike) -> "SampledVec":
        mu = 1.0 / _per_component(lam, self.dim)
        out = np.zeros_like(self.values)
        decay = np.exp(-np.outer(np.diff(self.grid), mu))
        for i in range(self.dim):
            panels = mu[i] * self._panel_integrals(mu[i], True, i)
            for k in range(1, self.grid.size):
                out[k, i] = decay[k - 1, i] * out[k - 1, i] + panels[k - 1]
        return self._like(out)

    def convolve_growth_tail(self, lam: ArrayLike) -> "SampledVec":
        kappa = -1.0 / _per_component(lam, self.dim)
        out = np.zeros_like(self.values)
        decay = np.exp(-np.outer(np.diff(self.grid), kappa))
        for i in range(self.dim):
            panels = kappa[i] * self._panel_integrals(kappa[i], False, i)
            for k in range(self.grid.size - 2, -1, -1):
                out[k, i] = decay[k, i] * out[k + 1, i] + panels[k]
        return self._like(out)

    def weighted_norm(self, a: float) -> float:
        y0, y1 = self.grid[:-1], self.grid[1:]
        h = y1 - y0
        t = (_GAUSS_NODES + 1.0) / 2.0
        s = y0[:, None] + h[:, None] * t[None, :]
        total = 0.0
        for i in range(self.dim):
            f = (1 - t) * self.values[:-1, i:i + 1] + t * self.values[1:, i:i + 1]
            total += float(np.sum(((np.exp(2 * a * s) * f * f) @ _GAUSS_WEIGHTS) * h / 2.0))
        return math.sqrt(total)

    def __repr__(self) -> str:
        return f"SampledVec(dim={self.dim}, points={self.grid.size}, y_max={self.grid[-1]:.4g})"
