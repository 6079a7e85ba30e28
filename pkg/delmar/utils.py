import hashlib
import logging
import numbers
import time
from contextlib import contextmanager
from typing import Dict, Iterator

import numpy as np

from delmar.exceptions import ConfigurationError

logger = logging.getLogger("delmar")

# Stream identifiers for the counter-based generator, keyed with (seed, layer).
RNG_ROLES = {
    "x_init": 1,
    "y_init": 2,
    "synth": 3,
    "split": 4,
}  # type: Dict[str, int]


def make_rng(seed: int, layer: int = 0, role: str = "x_init") -> np.random.Generator:
    """
    Philox generator keyed by ``(seed, layer, role)``.

    Distinct keys give independent streams; the same key always gives the same stream.

    :raises ConfigurationError: if ``seed`` is not an integer in ``[0, 2**64)``.
    """
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ConfigurationError("seed must be an integer, got {!r}".format(seed))
    if seed < 0 or seed >= 2 ** 64:
        raise ConfigurationError("seed must be a 64-bit unsigned integer, got {}".format(seed))
    entropy = [int(seed) & 0xFFFFFFFF, int(seed) >> 32, int(layer), RNG_ROLES[role]]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def matrix_digest(a: np.ndarray) -> str:
    """sha256 over shape and little-endian float64 payload"""
    a = np.ascontiguousarray(a, dtype="<f8")
    h = hashlib.sha256()
    h.update("{}x{}".format(*a.shape).encode("ascii"))
    h.update(a.tobytes())
    return "sha256:" + h.hexdigest()


@contextmanager
def stage_timer(timings: Dict[str, float], stage: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[stage] = round((time.perf_counter() - start) * 1000.0, 3)
        logger.debug("Stage %s took %.3f ms", stage, timings[stage])


def set_logger(logger_name, level=logging.DEBUG):
    logger = logging.getLogger(logger_name)
    logger.setLevel(level)
    for handler in logger.handlers:
        if getattr(handler, "_delmar_handler", False):
            handler.setLevel(level)
            return logger
    handler = logging.StreamHandler()
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
    handler._delmar_handler = True  # type: ignore
    logger.addHandler(handler)
    return logger
