"""Shared helpers for hodgelab.

Logging setup, deterministic random generators and the worker cap read from
the environment.
"""

from __future__ import annotations

import logging
import os
from typing import Iterator

import numpy as np

THREADS_ENV = "HODGELAB_THREADS"


def get_logger(name: str = "hodgelab") -> logging.Logger:
    """Get a configured logger for hodgelab modules.

    Creates a logger with consistent formatting across all hodgelab modules.
    Handlers are only attached once, so repeated calls are safe.

    Args:
        name: Logger name, typically the module name (default: "hodgelab")

    Returns:
        Configured logger instance with StreamHandler and standard formatting

    Example:
        >>> logger = get_logger(__name__)
        >>> logger.debug("E_%d^{%d,%d} has dimension %d", r, p, q, dim)
    """
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter(
            fmt="%(asctime)s %(levelname)s [%(name)s] %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.setLevel(logging.INFO)
    return logger


def max_workers() -> int:
    """Worker cap from ``HODGELAB_THREADS`` (serial when unset or invalid)."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def child_seeds(seed: int, count: int) -> Iterator[int]:
    """Independent per-trial seeds derived from one root seed."""
    seq = np.random.SeedSequence(seed)
    for child in seq.spawn(count):
        yield int(child.generate_state(1)[0])


def random_complex(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian_pd(rng: np.random.Generator, n: int, spread: float = 0.5) -> np.ndarray:
    """Random Hermitian positive-definite ``n x n`` matrix close to the identity."""
    a = random_complex(rng, (n, n)) * spread
    return np.eye(n) + a @ a.conj().T


def set_verbosity(verbose: bool) -> None:
    """Switch every ``hodgelab`` logger between INFO and DEBUG."""
    level = logging.DEBUG if verbose else logging.INFO
    names = [n for n in logging.root.manager.loggerDict if n == "hodgelab" or n.startswith("hodgelab.")]
    for name in ["hodgelab"] + names:
        get_logger(name).setLevel(level)
