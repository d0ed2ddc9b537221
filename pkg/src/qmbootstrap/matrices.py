"""Positivity matrices built from moment tables.

For any set of trial operators O_i, the Gram matrix <O_i^dag O_j> of a true
state is positive semidefinite. Each MatrixKind fixes a trial basis whose Gram
entries are expressible through a moment table:

  HankelX      x^m, m <= K                entry <x^{m+n}>
  HankelExp    e^{m x}                    entry <e^{(m+n) x}>
  ToeplitzTrig e^{i m theta}              entry <e^{i (n-m) theta}>
  MixedXExp    e^{m x} x^n (flattened)    entry <e^{(m1+m2) x} x^{n1+n2}>
  KronXP       x^m p^n (flattened)        entry <p^{n1} x^{m1+m2} p^{n2}>
  KronExpP     e^{m x} p^n (flattened)    entry <p^{n1} e^{(m1+m2) x} p^{n2}>
  KronTrigP    e^{i m theta} p^n          entry <p^{n1} e^{i (m2-m1) theta} p^{n2}>

The two-operator entries are normal-ordered through the ordering module, then
read out of the table. Assembly ends with one Hermitian symmetrization
(M + M^dag) / 2; for a consistent table the pre-symmetrization asymmetry is
already at rounding level.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import BadParameter, IncompleteTable
from .ordering import canonicalize_p_x_p, translate_p_through_exp

if TYPE_CHECKING:  # import cycle: recursion needs potentials needs MatrixKind
    from .recursion import MomentTable


class MatrixKind(enum.Enum):
    HANKEL_X = "HankelX"
    HANKEL_EXP = "HankelExp"
    TOEPLITZ_TRIG = "ToeplitzTrig"
    MIXED_X_EXP = "MixedXExp"
    KRON_X_P = "KronXP"
    KRON_EXP_P = "KronExpP"
    KRON_TRIG_P = "KronTrigP"


ONE_OP_KINDS = (MatrixKind.HANKEL_X, MatrixKind.HANKEL_EXP, MatrixKind.TOEPLITZ_TRIG)
TWO_OP_KINDS = (
    MatrixKind.MIXED_X_EXP,
    MatrixKind.KRON_X_P,
    MatrixKind.KRON_EXP_P,
    MatrixKind.KRON_TRIG_P,
)


@dataclass
class BootstrapMatrix:
    kind: MatrixKind
    depth: int
    entries: np.ndarray  # dense complex Hermitian


def matrix_dimension(kind: MatrixKind, depth: int) -> int:
    return depth + 1 if kind in ONE_OP_KINDS else (depth + 1) ** 2


def _symmetrize(kind: MatrixKind, depth: int, entries: np.ndarray) -> BootstrapMatrix:
    entries = 0.5 * (entries + entries.conj().T)
    return BootstrapMatrix(kind=kind, depth=depth, entries=entries)


def build_one_op(table: MomentTable, kind: MatrixKind, depth: int) -> BootstrapMatrix:
    """Single-operator positivity matrix of dimension depth + 1."""
    if kind not in ONE_OP_KINDS:
        raise BadParameter(f"{kind.value} is not a single-operator matrix kind")
    size = depth + 1
    entries = np.zeros((size, size), dtype=complex)
    for row in range(size):
        for col in range(size):
            key = col - row if kind is MatrixKind.TOEPLITZ_TRIG else row + col
            if key not in table.one_var:
                raise IncompleteTable(
                    f"{kind.value} at depth {depth} needs one_var[{key}], absent from the table"
                )
            entries[row, col] = table.one_var[key]
    return _symmetrize(kind, depth, entries)


@functools.lru_cache(maxsize=64)
def _two_op_plan(kind: MatrixKind, depth: int):
    """Per-entry term lists (coeff, table key), independent of the table."""
    size = depth + 1
    plan = []
    for m1 in range(size):
        for n1 in range(size):
            row_terms = []
            for m2 in range(size):
                for n2 in range(size):
                    if kind is MatrixKind.MIXED_X_EXP:
                        terms = ((1.0 + 0.0j, (m1 + m2, n1 + n2)),)
                    elif kind is MatrixKind.KRON_X_P:
                        poly = canonicalize_p_x_p(n1, m1 + m2, n2)
                        terms = tuple((t.coeff, (t.base_power, t.p_power)) for t in poly.terms)
                    else:
                        mu = m2 - m1 if kind is MatrixKind.KRON_TRIG_P else m1 + m2
                        if mu == 0:
                            terms = ((1.0 + 0.0j, (0, n1 + n2)),)
                        else:
                            a = 1j * mu if kind is MatrixKind.KRON_TRIG_P else mu
                            poly = translate_p_through_exp(n1, a)
                            terms = tuple(
                                (t.coeff, (t.base_power, t.p_power + n2)) for t in poly.terms
                            )
                    row_terms.append(terms)
            plan.append(row_terms)
    return plan


def build_two_op(table: MomentTable, kind: MatrixKind, depth: int) -> BootstrapMatrix:
    """Two-operator positivity matrix over the flattened (base, momentum) basis.

    Dimension (depth + 1)^2; the full Kronecker index set is kept, duplicate
    operator products and all. For MixedXExp the second operator is x^n rather
    than p^n and the bases commute, so no ordering pass is needed.
    """
    if kind not in TWO_OP_KINDS:
        raise BadParameter(f"{kind.value} is not a two-operator matrix kind")
    size = (depth + 1) ** 2
    plan = _two_op_plan(kind, depth)
    entries = np.zeros((size, size), dtype=complex)
    for row in range(size):
        row_terms = plan[row]
        for col in range(size):
            total = 0.0 + 0.0j
            for coeff, key in row_terms[col]:
                if key not in table.two_var:
                    raise IncompleteTable(
                        f"{kind.value} at depth {depth} needs two_var[{key}], absent from the "
                        "table (for Coulomb this is the undetermined wedge, not a bug)"
                    )
                total += coeff * table.two_var[key]
            entries[row, col] = total
    return _symmetrize(kind, depth, entries)


def build_matrix(table: MomentTable, kind: MatrixKind, depth: int) -> BootstrapMatrix:
    if kind in ONE_OP_KINDS:
        return build_one_op(table, kind, depth)
    return build_two_op(table, kind, depth)
