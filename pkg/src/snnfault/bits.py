"""8-bit rotate helpers used by the weight-word shuffling model.

All words are unsigned 8-bit. Array variants operate elementwise on uint8
numpy arrays with per-element shift amounts and are the hot path for
whole-matrix corruption.
"""

from __future__ import annotations

import numpy as np

WORD_BITS = 8
WORD_MASK = 0xFF

# popcount lookup for 8-bit values
_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def rotate_left8(word: int, n: int) -> int:
    """Circularly rotate an 8-bit word left by n (0..7)."""
    n &= 7
    return ((word << n) | (word >> (WORD_BITS - n))) & WORD_MASK if n else word & WORD_MASK


def rotate_right8(word: int, n: int) -> int:
    """Circularly rotate an 8-bit word right by n (0..7)."""
    n &= 7
    return ((word >> n) | (word << (WORD_BITS - n))) & WORD_MASK if n else word & WORD_MASK


def rotate_left8_array(words: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Elementwise left rotate; `words` uint8, `n` integer array in [0,7]."""
    w = words.astype(np.uint16)
    n = n.astype(np.uint16)
    return (((w << n) | (w >> (WORD_BITS - n))) & WORD_MASK).astype(np.uint8)


def rotate_right8_array(words: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Elementwise right rotate; `words` uint8, `n` integer array in [0,7]."""
    w = words.astype(np.uint16)
    n = n.astype(np.uint16)
    return (((w >> n) | (w << (WORD_BITS - n))) & WORD_MASK).astype(np.uint8)


def popcount8(words: np.ndarray | int):
    """Number of set bits per 8-bit word (scalar or uint8 array)."""
    if isinstance(words, (int, np.integer)):
        return int(_POPCOUNT[int(words) & WORD_MASK])
    return _POPCOUNT[words]
