"""Positivity testing for bootstrap matrices.

A candidate spectrum point survives only if its bootstrap matrix is positive
semidefinite up to tolerance.  The matrices that come out of the recursions
are badly scaled: exponential-basis entries can span twenty orders of
magnitude across one matrix, and a tolerance measured against the largest
raw entry would accept almost anything.  The test therefore acts on the
diagonally balanced congruence

    B = D M D,   D = diag(1 / sqrt(M_ii))   (rows with M_ii <= 0 untouched)

which has unit diagonal wherever the original diagonal was positive.  A
congruence with positive D preserves the inertia of a Hermitian matrix, so
B is positive semidefinite exactly when M is; the balancing changes only the
conditioning of the decision, not the decision itself in exact arithmetic.
The verdict fields (min_eigenvalue, scale) refer to the balanced matrix,
the one actually tested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure
from .matrices import BootstrapMatrix


@dataclass(frozen=True)
class FeasibilityVerdict:
    """Outcome of one positivity test.

    Attributes
    ----------
    min_eigenvalue : float
        Smallest eigenvalue of the balanced matrix.
    scale : float
        max(1, max |entry|) of the balanced matrix.  Close to 1 whenever the
        matrix is anywhere near positive semidefinite.
    feasible : bool
        True when min_eigenvalue >= -tol * scale.
    depth : int
        Depth K of the matrix the verdict describes.
    """

    min_eigenvalue: float
    scale: float
    feasible: bool
    depth: int


def min_eigenvalue(entries: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian matrix, as a plain float.

    Raises NumericalFailure instead of returning garbage when the
    eigensolver fails or produces non-finite output, never letting a failed
    factorization masquerade as an infeasible point.
    """
    try:
        eigs = np.linalg.eigvalsh(entries)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue solve failed: {exc}") from exc
    low = float(eigs[0])
    if not np.isfinite(low):
        raise NumericalFailure("eigenvalue solve returned a non-finite value")
    return low


def _balance(entries: np.ndarray) -> np.ndarray:
    """Two-sided diagonal scaling toward unit diagonal.

    Only rows whose diagonal entry is strictly positive are rescaled; a zero
    or negative diagonal already certifies indefiniteness and the row is
    left alone so the eigensolver can report it.  Any positive diagonal
    congruence preserves inertia, so the feasibility decision is unchanged.
    """
    diag = np.real(np.diag(entries)).copy()
    d = np.sqrt(np.where(diag > 0.0, diag, 1.0))
    return entries / np.outer(d, d)


def is_feasible(matrix: BootstrapMatrix, tol: float = 1e-9) -> FeasibilityVerdict:
    """Test a bootstrap matrix for positive semidefiniteness.

    Parameters
    ----------
    matrix : BootstrapMatrix
        Hermitian matrix to test.
    tol : float
        Non-negative relative tolerance.  The matrix passes when the
        smallest eigenvalue of its balanced congruence is >= -tol * scale,
        with scale = max(1, max |balanced entry|).

    Raises
    ------
    ValueError
        If tol is negative.
    NumericalFailure
        If the entries are not all finite, or the eigensolver fails.
    """
    if tol < 0.0:
        raise ValueError(f"tolerance must be non-negative, got {tol}")
    if not np.all(np.isfinite(matrix.entries)):
        raise NumericalFailure(
            f"{matrix.kind.value} matrix at depth {matrix.depth} contains "
            "non-finite entries"
        )
    balanced = _balance(matrix.entries)
    low = min_eigenvalue(balanced)
    scale = max(1.0, float(np.max(np.abs(balanced))))
    return FeasibilityVerdict(
        min_eigenvalue=low,
        scale=scale,
        feasible=low >= -tol * scale,
        depth=matrix.depth,
    )
