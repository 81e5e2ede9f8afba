"""Cached unit tables and root-of-unity lookups for exact shell sums."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .local_field import legendre

# Largest residue ring we are willing to enumerate for a single shell.
MAX_SHELL_TERMS = 400_000


@lru_cache(maxsize=None)
def unit_table(p: int, level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Units w of Z/p**level, their inverses, and the Legendre symbol of w mod p."""
    mod = p**level
    if mod > MAX_SHELL_TERMS * 2:
        raise ValueError(f"refusing to enumerate (Z/{p}^{level})^x")
    w = np.arange(mod, dtype=np.int64)
    w = w[w % p != 0]
    inv = np.array([pow(int(x), -1, mod) for x in w], dtype=np.int64)
    leg_residue = np.array([0] + [legendre(r, p) for r in range(1, p)], dtype=np.int64)
    return w, inv, leg_residue[w % p]


@lru_cache(maxsize=None)
def roots_of_unity(p: int, level: int) -> np.ndarray:
    mod = p**level
    return np.exp(2j * np.pi * np.arange(mod) / mod)


def phase_sum(numerators: np.ndarray, p: int, level: int, weights: np.ndarray | None = None) -> complex:
    """Sum of weights * exp(2 pi i N / p**level), reducing N exactly first."""
    z = roots_of_unity(p, level)[numerators % p**level]
    if weights is not None:
        z = z * weights
    return complex(z.sum())
