"""GF(2) helpers: bit-matrix products, affine push-forwards, affinity tests."""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DimensionError


def index_bits(k: int, index: np.ndarray | None = None) -> np.ndarray:
    """Rows of big-endian bits for every index, shape (len(index), k)."""
    if index is None:
        index = np.arange(1 << k)
    shifts = np.arange(k - 1, -1, -1)
    return ((index[:, None] >> shifts) & 1).astype(np.uint8)


def bits_to_index(bits: np.ndarray) -> np.ndarray:
    k = bits.shape[-1]
    weights = 1 << np.arange(k - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ weights


def as_matrix(matrix) -> np.ndarray:
    a = np.array(matrix, dtype=np.uint8, ndmin=2)
    if np.any(a > 1):
        raise ValueError("GF(2) matrix entries must be 0 or 1")
    return a


def matvec(matrix: np.ndarray, vec: np.ndarray) -> np.ndarray:
    return (matrix.astype(np.int64) @ np.asarray(vec, dtype=np.int64)) & 1


def affine_image(matrix: np.ndarray, offset: int, k_in: int) -> np.ndarray:
    """Output index of A.b xor c for every input index b."""
    rows, cols = matrix.shape
    if cols != k_in:
        raise DimensionError(f"matrix has {cols} columns, input has {k_in} bits")
    out_bits = (index_bits(k_in).astype(np.int64) @ matrix.T.astype(np.int64)) & 1
    return bits_to_index(out_bits) ^ offset


def pushforward(probs: np.ndarray, matrix: np.ndarray, offset: int) -> np.ndarray:
    """Distribution of A.b xor c when b is drawn from ``probs``."""
    k_in = int(probs.shape[0]).bit_length() - 1
    image = affine_image(matrix, offset, k_in)
    return np.bincount(image, weights=probs, minlength=1 << matrix.shape[0])


def is_affine(truth_table) -> bool:
    """True iff a Boolean function on n bits equals a.x xor c for some (a, c).

    ``truth_table[x]`` is the output for the big-endian input index ``x``.
    Checked by trying every affine function of the same arity.
    """
    table = [int(v) for v in truth_table]
    size = len(table)
    n = size.bit_length() - 1
    if 1 << n != size:
        raise ValueError("truth table length must be a power of two")
    for a in range(size):
        for c in (0, 1):
            if all(table[x] == ((bin(x & a).count("1") + c) & 1) for x in range(size)):
                return True
    return False


def all_affine_tables(n: int):
    """Every affine Boolean function of arity n as a truth-table tuple."""
    size = 1 << n
    for a, c in itertools.product(range(size), (0, 1)):
        yield tuple((bin(x & a).count("1") + c) & 1 for x in range(size))
