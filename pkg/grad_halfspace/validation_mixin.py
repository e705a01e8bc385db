"""
Validation Mixin

Mixin per le validazioni comuni sulle matrici della pipeline, con la stessa
convenzione (tutti_validi, lista_errori) usata in tutto il pacchetto.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from .error_handler import (
    AsymmetricMatrixError,
    NotPositiveDefiniteError,
    NotPositiveSemidefiniteError,
    ShapeMismatchError,
    ValidationError,
)


class ValidationMixin:
    """Mixin per validazioni di matrici e parametri"""

    # ===== VALIDAZIONI DI FORMA =====

    def validate_square(self, name: str, matrix: np.ndarray) -> Tuple[bool, List[str]]:
        """
        Valida che la matrice sia quadrata e finita

        Returns:
            Tupla (tutti_validi, lista_errori)
        """
        errors = []
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            errors.append(f"{name} deve essere quadrata, forma {matrix.shape}")
        elif not np.all(np.isfinite(matrix)):
            errors.append(f"{name} contiene valori non finiti")
        return len(errors) == 0, errors

    def validate_shape(self, name: str, matrix: np.ndarray,
                       rows: Optional[int] = None, cols: Optional[int] = None) -> Tuple[bool, List[str]]:
        """Valida numero di righe e/o colonne (None = libero)"""
        errors = []
        if matrix.ndim != 2:
            errors.append(f"{name} deve essere bidimensionale")
        else:
            if rows is not None and matrix.shape[0] != rows:
                errors.append(f"{name}: attese {rows} righe, trovate {matrix.shape[0]}")
            if cols is not None and matrix.shape[1] != cols:
                errors.append(f"{name}: attese {cols} colonne, trovate {matrix.shape[1]}")
        return len(errors) == 0, errors

    # ===== VALIDAZIONI SPETTRALI =====

    def validate_symmetric(self, name: str, matrix: np.ndarray, tol: float) -> Tuple[bool, List[str]]:
        """Valida ||M - M^T|| <= tol * max(1, ||M||)"""
        ok, errors = self.validate_square(name, matrix)
        if not ok:
            return ok, errors
        asym = float(np.linalg.norm(matrix - matrix.T))
        scale = max(1.0, float(np.linalg.norm(matrix)))
        if asym > tol * scale:
            errors.append(f"{name} non simmetrica: ||M - M^T|| = {asym:.3e}")
        return len(errors) == 0, errors

    def validate_psd(self, name: str, matrix: np.ndarray, tol: float) -> Tuple[bool, List[str]]:
        """Valida autovalore minimo >= -tol"""
        errors = []
        if matrix.shape[0]:
            lam_min = float(np.linalg.eigvalsh((matrix + matrix.T) / 2).min())
            if lam_min < -tol:
                errors.append(f"{name} non semidefinita positiva: lambda_min = {lam_min:.3e}")
        return len(errors) == 0, errors

    def validate_spd(self, name: str, matrix: np.ndarray, tol: float) -> Tuple[bool, List[str]]:
        """Valida autovalore minimo > tol"""
        errors = []
        if matrix.shape[0]:
            lam_min = float(np.linalg.eigvalsh((matrix + matrix.T) / 2).min())
            if lam_min <= tol:
                errors.append(f"{name} non definita positiva: lambda_min = {lam_min:.3e}")
        return len(errors) == 0, errors

    # ===== VALIDAZIONI SCALARI =====

    def validate_range(self, name: str, value: float, low: float, high: float,
                       open_low: bool = False) -> Tuple[bool, List[str]]:
        """Valida low <= value <= high (oppure low < value se open_low)"""
        errors = []
        below = value <= low if open_low else value < low
        if below or value > high or not np.isfinite(value):
            bracket = "(" if open_low else "["
            errors.append(f"{name}={value} fuori dall'intervallo {bracket}{low}, {high}]")
        return len(errors) == 0, errors

    # ===== HELPER =====

    @staticmethod
    def raise_on_errors(result: Tuple[bool, Sequence[str]], error_type=ValidationError, **context):
        """Solleva `error_type` se la validazione non è superata"""
        ok, errors = result
        if not ok:
            raise error_type("; ".join(errors), **context)

    def require_symmetric(self, name: str, matrix: np.ndarray, tol: float):
        self.raise_on_errors(self.validate_symmetric(name, matrix, tol), AsymmetricMatrixError, matrix=name)

    def require_psd(self, name: str, matrix: np.ndarray, tol: float):
        self.raise_on_errors(self.validate_psd(name, matrix, tol), NotPositiveSemidefiniteError, matrix=name)

    def require_spd(self, name: str, matrix: np.ndarray, tol: float):
        self.raise_on_errors(self.validate_spd(name, matrix, tol), NotPositiveDefiniteError, matrix=name)

    def require_shape(self, name: str, matrix: np.ndarray, rows: Optional[int] = None,
                      cols: Optional[int] = None):
        self.raise_on_errors(self.validate_shape(name, matrix, rows, cols), ShapeMismatchError, matrix=name)
