"""Test utils module."""

import logging

import numpy as np

from hodgelab.utils import (
    THREADS_ENV,
    child_seeds,
    get_logger,
    make_rng,
    max_workers,
    random_hermitian_pd,
    set_verbosity,
)


def test_get_logger_default_name():
    """Test get_logger with default name."""
    logger = get_logger()
    assert logger.name == "hodgelab"
    assert len(logger.handlers) == 1


def test_get_logger_custom_name():
    logger = get_logger("custom")
    assert logger.name == "custom"
    assert logger.level == logging.INFO
    assert len(logger.handlers) == 1


def test_get_logger_idempotent():
    """Test that get_logger doesn't add duplicate handlers."""
    logger1 = get_logger("test")
    logger2 = get_logger("test")
    assert logger1 is logger2
    assert len(logger1.handlers) == 1


def test_get_logger_formatter():
    logger = get_logger("format_test")
    formatter = logger.handlers[0].formatter
    assert formatter is not None
    assert "%(name)s" in formatter._fmt


def test_set_verbosity_toggles_debug():
    get_logger("hodgelab.spectral")
    set_verbosity(True)
    assert get_logger("hodgelab").level == logging.DEBUG
    assert get_logger("hodgelab.spectral").level == logging.DEBUG
    set_verbosity(False)
    assert get_logger("hodgelab").level == logging.INFO
    assert get_logger("hodgelab.spectral").level == logging.INFO


def test_max_workers_from_environment(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)
    assert max_workers() == 1
    monkeypatch.setenv(THREADS_ENV, "4")
    assert max_workers() == 4
    monkeypatch.setenv(THREADS_ENV, "zero")
    assert max_workers() == 1
    monkeypatch.setenv(THREADS_ENV, "0")
    assert max_workers() == 1


def test_child_seeds_are_deterministic():
    first = list(child_seeds(3, 4))
    assert first == list(child_seeds(3, 4))
    assert len(set(first)) == 4
    assert first != list(child_seeds(4, 4))


def test_random_hermitian_pd():
    h = random_hermitian_pd(make_rng(0), 3)
    assert h.shape == (3, 3)
    assert np.allclose(h, h.conj().T)
    assert np.linalg.eigvalsh(h).min() >= 1.0 - 1e-12
