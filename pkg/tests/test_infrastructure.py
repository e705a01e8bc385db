"""Configurazione, gestione errori, cache, logging e validazioni comuni"""

import logging

import numpy as np
import pytest

from grad_halfspace.cache_manager import CacheManager, fingerprint
from grad_halfspace.config import DEFAULT_CONFIG, RANK_TOL_FLOOR, NumericsConfig
from grad_halfspace.error_handler import (
    EXIT_ILL_POSED, EXIT_OK, EXIT_USAGE, ErrorHandler, InputFileError, NotPositiveDefiniteError,
    TheoremHypothesisError, UnstableBoundaryError, ValidationError, WeightError,
)
from grad_halfspace.logger import logger
from grad_halfspace.validation_mixin import ValidationMixin


# ===== CONFIGURAZIONE =====

def test_overrides_within_range():
    config = DEFAULT_CONFIG.with_overrides(tol_eig=1e-8, tol_stable=None, grid_points=64)
    assert config.tol_eig == 1e-8
    assert config.tol_stable == DEFAULT_CONFIG.tol_stable
    assert config.grid_points == 64
    assert DEFAULT_CONFIG.tol_eig == 1e-10


@pytest.mark.parametrize("values", [
    {"tol_eig": 1e-3},
    {"tol_block": 1e-16},
    {"unknown": 1.0},
    {"grid_points": 1},
    {"near_resonance_band": 1.5},
])
def test_overrides_rejected(values):
    with pytest.raises(ValidationError):
        DEFAULT_CONFIG.with_overrides(**values)


def test_rank_tolerance_floor():
    assert DEFAULT_CONFIG.rank_tol(3) == RANK_TOL_FLOOR
    assert DEFAULT_CONFIG.rank_tol(10 ** 6) > RANK_TOL_FLOOR
    assert NumericsConfig(tol_rank=1e-9).rank_tol(3) == 1e-9


def test_config_dictionary_excludes_logging():
    doc = DEFAULT_CONFIG.as_dict()
    assert "log_level" not in doc and "log_dir" not in doc
    assert doc["grid_points"] == 512


# ===== ERRORI =====

def test_exit_statuses():
    handler = ErrorHandler()
    assert handler.exit_status_for(None) == EXIT_OK
    assert handler.exit_status_for(WeightError("peso")) == EXIT_USAGE
    assert handler.exit_status_for(UnstableBoundaryError("instabile")) == EXIT_ILL_POSED
    assert handler.exit_status_for(TheoremHypothesisError("ipotesi")) == EXIT_ILL_POSED


def test_error_document():
    error = WeightError("peso fuori intervallo", a=2.0, bound=1.5)
    assert error.to_dict() == {"error": "weight_violation", "message": "peso fuori intervallo",
                               "context": {"a": 2.0, "bound": 1.5}}


def test_safe_execute():
    handler = ErrorHandler()
    assert handler.safe_execute(lambda x, y=1: x + y, 2, y=3) == (True, 5, None)

    def failing():
        raise UnstableBoundaryError("B T0 non nulla")

    ok, result, error = handler.safe_execute(failing, context="test")
    assert not ok and result is None
    assert isinstance(error, UnstableBoundaryError)

    def unreadable():
        raise FileNotFoundError("manca.json")

    ok, _, error = handler.safe_execute(unreadable, context="lettura")
    assert not ok
    assert isinstance(error, InputFileError)
    assert handler.get_error_stats() == {"unstable_bc": 1, "io_error": 1}


def test_unexpected_errors_propagate():
    with pytest.raises(ZeroDivisionError):
        ErrorHandler().safe_execute(lambda: 1 / 0)


# ===== CACHE =====

def test_fingerprint_sensitivity():
    A = np.arange(6.0).reshape(2, 3)
    assert fingerprint(A) == fingerprint(A.copy())
    assert fingerprint(A) != fingerprint(A.reshape(3, 2))
    assert fingerprint(A, extra=[("tol_eig", 1e-10)]) != fingerprint(A, extra=[("tol_eig", 1e-9)])


def test_cache_get_or_set_and_eviction():
    cache = CacheManager(max_size=2)
    calls = []

    def factory(value):
        def build():
            calls.append(value)
            return value
        return build

    assert cache.get_or_set("a", factory(1)) == 1
    assert cache.get_or_set("a", factory(99)) == 1
    assert calls == [1]
    cache.set("b", 2)
    cache.get("a")
    cache.set("c", 3)
    assert cache.get("b") is None
    assert cache.get("a") == 1
    stats = cache.get_stats()
    assert stats["evictions"] == 1
    assert stats["size"] == 2
    cache.clear()
    assert cache.get_stats()["total_requests"] == 0


# ===== LOGGING =====

def test_logger_tags_module(caplog):
    with caplog.at_level(logging.DEBUG, logger="grad_halfspace"):
        logger.log_pipeline_step("decomposizione", "p=5", "SUBSPACE")
        logger.log_numeric_check("Q_1j", 1e-3, 1e-12, False, "SUBSPACE")
    messages = [(record.levelno, record.getMessage()) for record in caplog.records]
    assert (logging.INFO, "[SUBSPACE] decomposizione - p=5") in messages
    assert (logging.ERROR, "[SUBSPACE] check Q_1j: 1.000e-03 <= 1.000e-12 - FAILED") in messages


def test_logger_stats():
    stats = logger.get_log_stats()
    assert stats["handlers"] >= 1


# ===== VALIDAZIONI =====

class _Checked(ValidationMixin):
    pass


def test_validation_mixin():
    checker = _Checked()
    assert checker.validate_range("chi", 0.5, 0.0, 1.0) == (True, [])
    ok, errors = checker.validate_range("a", 0.0, 0.0, 1.0, open_low=True)
    assert not ok and "(0.0, 1.0]" in errors[0]
    assert not checker.validate_square("A", np.zeros((2, 3)))[0]
    assert not checker.validate_symmetric("A", np.array([[0.0, 1.0], [0.0, 0.0]]), 1e-12)[0]
    assert checker.validate_psd("Q", np.diag([0.0, 1.0]), 1e-12)[0]
    with pytest.raises(NotPositiveDefiniteError) as info:
        checker.require_spd("H", np.diag([1.0, 0.0]), 0.0)
    assert info.value.context == {"matrix": "H"}
