"""Independent matrix-representation oracles for the ordering identities.

The ordering module expands operator products symbolically. These helpers
evaluate the same products numerically in explicit matrix truncations, with
no shared code:

* Power base: oscillator ladder truncation, x = (a + a*) / sqrt(2),
  p = -i (a - a*) / sqrt(2), so [x, p] = i holds exactly away from the last
  basis vector. Products of banded matrices are exact on a central block
  whenever the total operator degree is below the remaining headroom.
* Exp base: e^{b x} as a dense matrix exponential of the truncated x. The
  truncation error on low-index entries falls off factorially with the
  truncation size, far below the comparison tolerances used here.
* TrigExp base: Fourier modes k = -cutoff .. cutoff, where e^{i theta} is the
  raising shift and p is diagonal in k. Exact except for edge clipping.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg


def oscillator_xp(size: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated position and momentum matrices with [x, p] = i."""
    ladder = np.diag(np.sqrt(np.arange(1, size)), 1)
    x = (ladder + ladder.T) / np.sqrt(2.0)
    p = -1j * (ladder - ladder.T) / np.sqrt(2.0)
    return x.astype(complex), p

def poly_matrix(poly, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Evaluate a canonical operator polynomial with a power base."""
    total = np.zeros_like(x)
    for term in poly.terms:
        total = total + term.coeff * (
            np.linalg.matrix_power(x, term.base_power)
            @ np.linalg.matrix_power(p, term.p_power)
        )
    return total


def exp_poly_matrix(poly, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Evaluate a canonical polynomial whose base is e^{b x}."""
    total = np.zeros_like(x)
    for term in poly.terms:
        total = total + term.coeff * (
            scipy.linalg.expm(term.base_power * x) @ np.linalg.matrix_power(p, term.p_power)
        )
    return total


def fourier_shift_p(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """e^{i theta} as the mode-raising shift and p = -i d/dtheta as diag(k)."""
    size = 2 * cutoff + 1
    shift = np.zeros((size, size), dtype=complex)
    for row in range(1, size):
        shift[row, row - 1] = 1.0
    p = np.diag(np.arange(-cutoff, cutoff + 1)).astype(complex)
    return shift, p


def trig_poly_matrix(poly, shift: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Evaluate a canonical polynomial whose base is e^{i b theta}."""
    size = shift.shape[0]
    total = np.zeros((size, size), dtype=complex)
    for term in poly.terms:
        if term.base_power >= 0:
            base = np.linalg.matrix_power(shift, term.base_power)
        else:
            base = np.linalg.matrix_power(shift.conj().T, -term.base_power)
        total = total + term.coeff * (base @ np.linalg.matrix_power(p, term.p_power))
    return total


def central_block(mat: np.ndarray, margin: int) -> np.ndarray:
    """Entries far enough from every truncation edge to be exact."""
    return mat[margin:-margin, margin:-margin] if margin else mat


def low_block(mat: np.ndarray, keep: int) -> np.ndarray:
    """Leading block, for the one-sided oscillator truncation."""
    return mat[:keep, :keep]
