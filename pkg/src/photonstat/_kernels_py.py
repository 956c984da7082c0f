"""Pure-Python fallback for the square-free product kernel.

Same contract as the compiled extension.  Instead of streaming atoms through
a sequential DP, rows are multiplied pairwise in a balanced tree so the inner
work stays vectorized over atoms; only the 3^n_slots submask walk runs at
Python speed.
"""

from __future__ import annotations

import numpy as np


def _pair_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise square-free product of two (C, size) coefficient blocks."""
    size = a.shape[1]
    out = np.zeros_like(a)
    nza = a.any(axis=0)
    nzb = b.any(axis=0)
    for t in range(size):
        acc = out[:, t]
        sub = t
        while True:
            if nza[sub] and nzb[t ^ sub]:
                acc += a[:, sub] * b[:, t ^ sub]
            if sub == 0:
                break
            sub = (sub - 1) & t
    return out


def product_polynomial(factors: np.ndarray) -> np.ndarray:
    """Square-free product of all factor rows, as one (size,) polynomial."""
    polys = np.array(factors, dtype=complex, copy=True)
    while polys.shape[0] > 1:
        half = polys.shape[0] // 2
        prod = _pair_convolve(polys[:half], polys[half : 2 * half])
        if polys.shape[0] % 2:
            polys = np.concatenate([prod, polys[2 * half :]], axis=0)
        else:
            polys = prod
    return polys[0]


def accumulate_product(state: np.ndarray, factors: np.ndarray) -> None:
    """Multiply every factor row into ``state`` in place."""
    factors = np.asarray(factors, dtype=complex)
    if factors.shape[1] != state.shape[0]:
        raise ValueError("state and factor widths disagree")
    poly = product_polynomial(factors)
    size = state.shape[0]
    out = np.zeros_like(state)
    for t in range(size):
        total = 0.0 + 0.0j
        sub = t
        while True:
            pv = poly[sub]
            if pv != 0:
                total += pv * state[t ^ sub]
            if sub == 0:
                break
            sub = (sub - 1) & t
        out[t] = total
    state[:] = out
