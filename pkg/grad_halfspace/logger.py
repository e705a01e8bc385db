"""
Sistema di logging per grad_halfspace.

Registra i passi della pipeline numerica (costruzione delle matrici,
decomposizione, fattorizzazione spettrale, verdetti e soluzioni) e l'esito
dei controlli di tolleranza.

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

import os
import logging
import logging.handlers
from typing import Any, Dict, Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def _rotating_handler(path: str, level: int, backups: int,
                      formatter: logging.Formatter) -> logging.Handler:
    # rotazione a mezzanotte
    handler = logging.handlers.TimedRotatingFileHandler(
        path, when='midnight', interval=1, backupCount=backups, encoding='utf-8'
    )
    handler.setLevel(level)
    handler.setFormatter(formatter)
    return handler


class MomentLogger:
    """Gestore del logging della libreria, con messaggi etichettati per modulo"""

    def __init__(self, log_dir: Optional[str] = None, console_level: int = logging.WARNING,
                 name: str = "grad_halfspace"):
        """
        Args:
            log_dir: Directory dei file di log (None = solo console)
            console_level: Livello minimo mostrato su console
            name: Nome del logger stdlib sottostante
        """
        self.console_level = console_level
        self.log_dir: Optional[str] = None
        self.log_file: Optional[str] = None
        self.formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.DEBUG)

        # un solo handler di console anche con istanze multiple
        if not any(type(h) is logging.StreamHandler for h in self.logger.handlers):
            console = logging.StreamHandler()
            console.setLevel(console_level)
            console.setFormatter(self.formatter)
            self.logger.addHandler(console)
        if log_dir:
            self.attach_files(log_dir)

    def attach_files(self, log_dir: str):
        """
        Aggiunge i file di log: tutto in grad_halfspace.log, solo gli errori in errori.log

        Args:
            log_dir: Directory dei file (creata se manca)
        """
        os.makedirs(log_dir, exist_ok=True)
        self.log_dir = log_dir
        self.log_file = os.path.join(log_dir, "grad_halfspace.log")
        self.logger.addHandler(_rotating_handler(self.log_file, logging.DEBUG, 7, self.formatter))
        self.logger.addHandler(_rotating_handler(os.path.join(log_dir, "errori.log"),
                                                 logging.ERROR, 30, self.formatter))

    def set_console_level(self, level: int):
        self.console_level = level
        for handler in self.logger.handlers:
            if type(handler) is logging.StreamHandler:
                handler.setLevel(level)

    def _emit(self, level: int, message: str, module: str, exception: Optional[Exception] = None):
        if exception is None:
            self.logger.log(level, "[%s] %s", module, message)
        else:
            self.logger.log(level, "[%s] %s (%s: %s)", module, message,
                            type(exception).__name__, exception, exc_info=exception)

    def debug(self, message: str, module: str = "GENERAL"):
        self._emit(logging.DEBUG, message, module)

    def info(self, message: str, module: str = "GENERAL"):
        """
        Registra un messaggio informativo

        Args:
            message: Testo del messaggio
            module: Etichetta del modulo (es. "SOLVER", "SUBSPACE")
        """
        self._emit(logging.INFO, message, module)

    def warning(self, message: str, module: str = "GENERAL"):
        self._emit(logging.WARNING, message, module)

    def error(self, message: str, module: str = "GENERAL", exception: Optional[Exception] = None):
        """Registra un errore, con traceback se viene passata l'eccezione"""
        self._emit(logging.ERROR, message, module, exception)

    def critical(self, message: str, module: str = "GENERAL", exception: Optional[Exception] = None):
        self._emit(logging.CRITICAL, message, module, exception)

    def log_numeric_check(self, name: str, value: float, threshold: float, passed: bool,
                          module: str = "NUMERICS"):
        """
        Registra l'esito di un controllo di tolleranza

        Args:
            name: Nome del controllo (es. "Q_1j")
            value: Valore misurato
            threshold: Soglia applicata
            passed: Se il controllo è superato
            module: Modulo che ha eseguito il controllo
        """
        text = f"check {name}: {value:.3e} <= {threshold:.3e} - {'OK' if passed else 'FAILED'}"
        self._emit(logging.DEBUG if passed else logging.ERROR, text, module)

    def log_pipeline_step(self, step: str, details: str = "", module: str = "PIPELINE"):
        """Registra un passo della pipeline (livello INFO)"""
        self._emit(logging.INFO, f"{step} - {details}" if details else step, module)

    def get_log_stats(self) -> Dict[str, Any]:
        """
        Returns:
            Directory, file principale, numero di handler e dimensione del file
        """
        stats: Dict[str, Any] = {
            "log_dir": self.log_dir,
            "log_file": self.log_file,
            "handlers": len(self.logger.handlers),
            "console_level": logging.getLevelName(self.console_level),
        }
        if self.log_file and os.path.exists(self.log_file):
            stats["log_file_size"] = os.path.getsize(self.log_file)
        return stats


# Istanza globale del logger
logger = MomentLogger()
