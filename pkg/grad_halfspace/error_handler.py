"""
Gestione errori per grad_halfspace.

Gestisce:
- Gerarchia di eccezioni con codice leggibile dalla macchina
- Mappatura errore -> codice di uscita della CLI
- Esecuzione sicura con logging dettagliato

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

from typing import Any, Callable, Dict, Optional, Tuple

from .logger import logger

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ILL_POSED = 2


class GradHalfspaceError(Exception):
    """Errore base della libreria"""

    code = "error"
    exit_status = EXIT_USAGE

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> Dict[str, Any]:
        """Documento JSON dell'errore"""
        return {"error": self.code, "message": self.message, "context": self.context}


# ===== USO E I/O =====

class UsageError(GradHalfspaceError):
    code = "usage_error"


class InputFileError(GradHalfspaceError):
    code = "io_error"


# ===== VALIDAZIONE =====

class ValidationError(GradHalfspaceError):
    code = "validation_error"


class AsymmetricMatrixError(ValidationError):
    code = "asymmetric_matrix"


class NotPositiveSemidefiniteError(ValidationError):
    code = "not_psd"


class NotPositiveDefiniteError(ValidationError):
    code = "not_spd"


class ShapeMismatchError(ValidationError):
    code = "shape_mismatch"


# ===== COSTRUZIONE NUMERICA =====

class IncompatibleSystemError(GradHalfspaceError):
    code = "joint_nullspace"


class RankDetectionError(GradHalfspaceError):
    code = "rank_misdetection"


class CholeskyError(GradHalfspaceError):
    code = "cholesky_failure"


class QuadratureError(GradHalfspaceError):
    code = "quadrature_failure"


class IndexCountError(GradHalfspaceError):
    code = "index_count_mismatch"


class ParityStructureError(GradHalfspaceError):
    code = "parity_structure_absent"


class CountMismatchError(GradHalfspaceError):
    code = "count_mismatch"


class ResidualError(GradHalfspaceError):
    """Residuo della soluzione in forma chiusa oltre la tolleranza"""
    code = "residual_violation"


# ===== DATI E PESO =====

class WeightError(GradHalfspaceError):
    code = "weight_violation"


class DivergentSourceError(GradHalfspaceError):
    code = "divergent_source"


class DegreeLimitError(GradHalfspaceError):
    code = "degree_limit"


# ===== BUONA POSIZIONE =====

class WellPosednessError(GradHalfspaceError):
    code = "ill_posed"
    exit_status = EXIT_ILL_POSED


class UnsolvableBoundaryError(WellPosednessError):
    code = "unsolvable_bc"


class UnstableBoundaryError(WellPosednessError):
    code = "unstable_bc"


class TheoremHypothesisError(WellPosednessError):
    code = "hypothesis_violated"


class SingularCompatibilityError(WellPosednessError):
    code = "singular_compatibility"


class ErrorHandler:
    """Gestore degli errori per le esecuzioni della CLI e dei batch"""

    def __init__(self):
        self.error_counts: Dict[str, int] = {}

    def _record(self, code: str):
        self.error_counts[code] = self.error_counts.get(code, 0) + 1

    def safe_execute(self, operation: Callable, *args, context: str = "",
                     **kwargs) -> Tuple[bool, Any, Optional[GradHalfspaceError]]:
        """
        Esegue un'operazione in modo sicuro con gestione errori

        Args:
            operation: Funzione da eseguire
            *args: Argomenti posizionali
            context: Descrizione dell'operazione per il log
            **kwargs: Argomenti keyword

        Returns:
            Tupla (successo, risultato, errore)
        """
        try:
            return True, operation(*args, **kwargs), None
        except GradHalfspaceError as e:
            self._record(e.code)
            if e.exit_status == EXIT_ILL_POSED:
                logger.warning(f"{context}: {e.code} - {e.message}", "ERROR_HANDLER")
            else:
                logger.error(f"{context}: {e.code} - {e.message}", "ERROR_HANDLER")
            return False, None, e
        except OSError as e:
            wrapped = InputFileError(str(e), operation=context)
            self._record(wrapped.code)
            logger.error(f"{context}: errore di I/O", "ERROR_HANDLER", e)
            return False, None, wrapped

    @staticmethod
    def exit_status_for(error: Optional[GradHalfspaceError]) -> int:
        """Codice di uscita associato a un errore (0 se assente)"""
        if error is None:
            return EXIT_OK
        return error.exit_status

    def get_error_stats(self) -> Dict[str, int]:
        """Conteggio degli errori per codice"""
        return dict(self.error_counts)


_error_handler: Optional[ErrorHandler] = None


def get_error_handler() -> ErrorHandler:
    """Restituisce l'istanza globale del gestore errori"""
    global _error_handler
    if _error_handler is None:
        _error_handler = ErrorHandler()
    return _error_handler
