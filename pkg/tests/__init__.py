from typing import Sequence

import numpy as np


def rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_matrix(seed: int, rows: int, cols: int) -> np.ndarray:
    return rng(seed).standard_normal((rows, cols))


def orthonormal_columns(seed: int, rows: int, cols: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng(seed).standard_normal((rows, cols)))
    return q


def with_singular_values(seed: int, rows: int, cols: int, values: Sequence[float]) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    generator = rng(seed)
    u, _ = np.linalg.qr(generator.standard_normal((rows, values.size)))
    v, _ = np.linalg.qr(generator.standard_normal((cols, values.size)))
    return (u * values) @ v.T


def svd_rank(a: np.ndarray, relative: float) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.count_nonzero(s > relative * s[0]))


def relative_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))
