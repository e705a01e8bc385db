"""
Configurazione centralizzata delle tolleranze numeriche e del logging.
"""

import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

import numpy as np

from .error_handler import ValidationError
from .logger import logger

# Intervallo ammesso per le tolleranze sovrascritte da riga di comando
TOLERANCE_OVERRIDE_RANGE = (1e-14, 1e-6)

EPS = float(np.finfo(float).eps)

# Soglia minima relativa per le decisioni di rango
RANK_TOL_FLOOR = 1e-13


@dataclass(frozen=True)
class NumericsConfig:
    """Tolleranze e parametri numerici della pipeline"""

    tol_psd: float = 1e-12          # moltiplicato per nu (o per ||Q||)
    tol_block: float = 1e-12        # residui della struttura a blocchi, relativi a ||A||, ||Q||
    tol_orth: float = 1e-12         # ortonormalità di V
    tol_eig: float = 1e-10          # soglia autovalori nulli, relativa a max(1, |lambda|_max)
    tol_stable: float = 1e-10       # ||B T0|| relativa a ||B|| ||T0||
    tol_resonance: float = 1e-12    # |b - 1/lambda| relativo
    near_resonance_band: float = 1e-2  # oltre tol_resonance: sviluppo di Taylor fino a questa distanza relativa
    tol_rank: Optional[float] = None  # None = N * eps (relativa a sigma_max)
    tol_spd: float = 1e-12
    tol_residual: float = 1e-8      # sup |A W' + Q W - h| relativo a 1 + sup |h|
    max_degree: int = 32
    grid_points: int = 512
    grid_span: float = 20.0
    quad_nodes: int = 200
    quad_upper: float = 40.0
    quad_tol: float = 1e-13
    quad_max_doublings: int = 6
    log_level: int = logging.WARNING
    log_dir: Optional[str] = None

    def rank_tol(self, size: int) -> float:
        """Tolleranza relativa di rango per una matrice di dimensione `size`"""
        if self.tol_rank is not None:
            return self.tol_rank
        return max(max(size, 1) * EPS, RANK_TOL_FLOOR)

    def with_overrides(self, **values) -> "NumericsConfig":
        """
        Restituisce una nuova configurazione con le tolleranze indicate

        Args:
            **values: Coppie nome=valore (valori None ignorati)

        Returns:
            Configurazione aggiornata

        Raises:
            ValidationError: Nome sconosciuto o tolleranza fuori intervallo
        """
        known = {f.name for f in fields(self)}
        updates = {}
        low, high = TOLERANCE_OVERRIDE_RANGE
        for name, value in values.items():
            if value is None:
                continue
            if name not in known:
                raise ValidationError(f"parametro di configurazione sconosciuto: {name}")
            if name.startswith("tol_") and not (low <= float(value) <= high):
                raise ValidationError(
                    f"tolleranza {name}={value} fuori dall'intervallo [{low:g}, {high:g}]"
                )
            updates[name] = value
        if "grid_points" in updates and int(updates["grid_points"]) < 2:
            raise ValidationError("grid_points deve essere almeno 2")
        if "near_resonance_band" in updates and not 0.0 <= float(updates["near_resonance_band"]) < 1.0:
            raise ValidationError("near_resonance_band deve stare in [0, 1)")
        return replace(self, **updates)

    def setup_logging(self):
        """Configura il logger condiviso secondo questa configurazione"""
        logger.set_console_level(self.log_level)
        if self.log_dir and not logger.log_dir:
            logger.attach_files(self.log_dir)
        logger.debug(f"configurazione numerica attiva: {self.as_dict()}", "CONFIG")

    def as_dict(self) -> Dict[str, Any]:
        """Restituisce le tolleranze come dizionario serializzabile"""
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in ("log_dir", "log_level")
        }


# Istanza globale della configurazione
DEFAULT_CONFIG = NumericsConfig()
