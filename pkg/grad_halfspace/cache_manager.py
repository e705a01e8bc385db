"""
Cache delle decomposizioni e delle fattorizzazioni spettrali.

Le chiavi sono impronte sha256 delle matrici (A, Q) e delle tolleranze in
uso, così la stessa coppia analizzata con soglie diverse non viene confusa.

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

import hashlib
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, Optional

import numpy as np

_STAT_KEYS = ('hits', 'misses', 'evictions', 'total_requests')


@dataclass
class CachedResult:
    """Risultato memorizzato con il suo utilizzo"""
    value: Any
    created: float = field(default_factory=time.time)
    uses: int = 0
    last_use: float = 0.0

    def touch(self) -> Any:
        self.uses += 1
        self.last_use = time.time()
        return self.value

    @property
    def eviction_rank(self):
        return (self.uses, self.last_use)


def fingerprint(*arrays: np.ndarray, extra: Iterable[Any] = ()) -> str:
    """
    Impronta sha256 di una sequenza di matrici e parametri

    Args:
        *arrays: Matrici da includere (forma e contenuto)
        extra: Parametri scalari aggiuntivi (tolleranze, flag)

    Returns:
        Chiave esadecimale
    """
    digest = hashlib.sha256()
    for array in arrays:
        array = np.ascontiguousarray(array, dtype=float)
        digest.update(repr(array.shape).encode())
        digest.update(array.tobytes())
    for item in extra:
        digest.update(repr(item).encode())
    return digest.hexdigest()


class CacheManager:
    """Cache thread-safe a capienza fissa; quando è piena esce il risultato meno usato"""

    def __init__(self, max_size: int = 64):
        self.max_size = max_size
        self.entries: Dict[str, CachedResult] = {}
        self.lock = threading.RLock()
        self.counters: Counter = Counter()

    def get(self, key: str) -> Optional[Any]:
        """
        Cerca un risultato per impronta

        Args:
            key: Impronta prodotta da `fingerprint`

        Returns:
            Il risultato memorizzato o None
        """
        with self.lock:
            self.counters['total_requests'] += 1
            entry = self.entries.get(key)
            self.counters['hits' if entry is not None else 'misses'] += 1
            return entry.touch() if entry is not None else None

    def set(self, key: str, value: Any):
        with self.lock:
            if key not in self.entries and len(self.entries) >= self.max_size:
                self._evict()
            self.entries[key] = CachedResult(value, last_use=time.time())

    def get_or_set(self, key: str, factory: Callable[[], Any]) -> Any:
        """
        Restituisce il risultato memorizzato o lo calcola con `factory`

        Args:
            key: Impronta del problema
            factory: Calcolo da eseguire in caso di assenza

        Returns:
            Risultato (memorizzato o appena calcolato)
        """
        # factory() gira sotto lock: la stessa decomposizione non viene calcolata due volte
        with self.lock:
            cached = self.get(key)
            if cached is not None:
                return cached
            result = factory()
            self.set(key, result)
            return result

    def clear(self):
        with self.lock:
            self.entries.clear()
            self.counters.clear()

    def get_stats(self) -> Dict[str, Any]:
        """Dimensione, capienza, percentuale di successi e contatori"""
        with self.lock:
            requests = self.counters['total_requests']
            stats: Dict[str, Any] = {key: self.counters[key] for key in _STAT_KEYS}
            stats.update(size=len(self.entries), max_size=self.max_size,
                         hit_rate=100.0 * self.counters['hits'] / requests if requests else 0.0)
            return stats

    def _evict(self):
        if self.entries:
            victim = min(self.entries, key=lambda k: self.entries[k].eviction_rank)
            del self.entries[victim]
            self.counters['evictions'] += 1


_cache_manager: Optional[CacheManager] = None


def get_cache_manager() -> CacheManager:
    """Restituisce l'istanza globale della cache"""
    global _cache_manager
    if _cache_manager is None:
        _cache_manager = CacheManager()
    return _cache_manager
