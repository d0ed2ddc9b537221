"""Independent finite-difference Schrodinger solver used to cross-check the bootstrap.

Nothing here knows about moment recursions: eigenstates come from a three-point
Laplacian on a uniform grid, and moments are plain quadrature against those
states. Agreement between this module and the recursion tables is the main
evidence that both are right.

Conventions: H = p^2 + V (mass 1/2, hbar 1), so the harmonic well V = x^2 has
spectrum 2n + 1 and the Coulomb tower sits at -N^2 / (4 n^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

import numpy as np
import scipy.linalg

from .errors import BadParameter, DomainTooSmall, NonIntegrableMoment, NumericalFailure
from .ordering import BaseKind
from .potentials import ValidatedPotential, evaluate_potential
from .recursion import MomentTable

# Relative wavefunction amplitude allowed at a truncation boundary before the
# domain is declared too small for the requested level.
BOUNDARY_AMPLITUDE = 1e-8

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass
class OracleSolution:
    eigenvalues: np.ndarray  # ascending, one per requested level
    wavefunctions: np.ndarray  # shape (n_levels, n_nodes), unit L2 norm
    grid: np.ndarray  # interior nodes the wavefunctions live on
    lo: float
    hi: float
    n_points: int
    bc: str  # "line", "radial" or "periodic"
    h: float
    v_edge: float  # potential at the decay edge, for integrability estimates
    angular_l: Optional[int] = None


PotentialLike = Union[ValidatedPotential, Callable[[np.ndarray], np.ndarray]]


def _potential_values(pot: PotentialLike, x: np.ndarray) -> np.ndarray:
    if isinstance(pot, ValidatedPotential):
        return evaluate_potential(pot, x)
    return np.asarray(pot(x), dtype=float)


def _normalize_and_orient(vecs: np.ndarray, h: float) -> np.ndarray:
    """Unit L2 norm per column, sign fixed so the peak is positive."""
    out = np.empty_like(vecs)
    for j in range(vecs.shape[1]):
        v = vecs[:, j]
        v = v / math.sqrt(h * float(np.dot(v, v)))
        peak = int(np.argmax(np.abs(v)))
        if v[peak] < 0:
            v = -v
        out[:, j] = v
    return out


def _tridiagonal_levels(diag: np.ndarray, h: float, n_levels: int):
    n = diag.size
    if not 1 <= n_levels <= n:
        raise BadParameter(f"n_levels = {n_levels} not in [1, {n}]")
    off = np.full(n - 1, -1.0 / h**2)
    try:
        vals, vecs = scipy.linalg.eigh_tridiagonal(
            diag, off, select="i", select_range=(0, n_levels - 1)
        )
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK hiccup
        raise NumericalFailure(f"tridiagonal eigensolve failed: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise NumericalFailure("tridiagonal eigensolve returned non-finite eigenvalues")
    return vals, _normalize_and_orient(vecs, h)


def _check_decay(psi: np.ndarray, where: str, ends: tuple[bool, bool]) -> None:
    peak = float(np.max(np.abs(psi)))
    for is_checked, idx, side in ((ends[0], 0, "inner"), (ends[1], -1, "outer")):
        if is_checked and abs(float(psi[idx])) > BOUNDARY_AMPLITUDE * peak:
            raise DomainTooSmall(
                f"wavefunction amplitude {abs(float(psi[idx])):.2e} at the {side} edge of "
                f"{where} exceeds {BOUNDARY_AMPLITUDE:.0e} of the peak; enlarge the domain"
            )


def solve_1d(pot: PotentialLike, lo: float, hi: float, n_points: int, n_levels: int) -> OracleSolution:
    """Bound states on a line segment with Dirichlet walls at both ends.

    The walls are a truncation of the infinite line, so every requested level
    must have decayed to BOUNDARY_AMPLITUDE (relative) before the edge.
    """
    if not lo < hi:
        raise BadParameter(f"need lo < hi, got [{lo}, {hi}]")
    if n_points < 16:
        raise BadParameter(f"n_points = {n_points} is too coarse")
    h = (hi - lo) / (n_points + 1)
    x = lo + h * np.arange(1, n_points + 1)
    v = _potential_values(pot, x)
    vals, vecs = _tridiagonal_levels(2.0 / h**2 + v, h, n_levels)
    for j in range(n_levels):
        _check_decay(vecs[:, j], f"[{lo}, {hi}]", (True, True))
    return OracleSolution(
        eigenvalues=vals,
        wavefunctions=vecs.T.copy(),
        grid=x,
        lo=lo,
        hi=hi,
        n_points=n_points,
        bc="line",
        h=h,
        v_edge=float(min(v[0], v[-1])),
    )


def solve_radial(
    pot: PotentialLike, r_max: float, n_points: int, n_levels: int, angular_l: Optional[int] = None
) -> OracleSolution:
    """Bound states of the reduced radial equation -u'' + V_eff u = E u.

    u(0) = 0 is exact for bound radial states and is imposed implicitly; the
    innermost node sits at r = r_max / n_points, so singular 1/r and 1/r^2
    pieces of V_eff are only ever evaluated away from the origin. The outer
    wall at r_max is a truncation and gets the decay check.
    """
    if r_max <= 0:
        raise BadParameter(f"r_max must be positive, got {r_max}")
    if n_points < 16:
        raise BadParameter(f"n_points = {n_points} is too coarse")
    if isinstance(pot, ValidatedPotential):
        if pot.domain != "radial":
            raise BadParameter(f"{pot.family.value} is not a radial family")
        angular_l = pot.angular_l
    elif angular_l is None:
        angular_l = 0
    h = r_max / n_points
    r = h * np.arange(1, n_points)
    v = _potential_values(pot, r)
    vals, vecs = _tridiagonal_levels(2.0 / h**2 + v, h, n_levels)
    for j in range(n_levels):
        _check_decay(vecs[:, j], f"[0, {r_max}]", (False, True))
    return OracleSolution(
        eigenvalues=vals,
        wavefunctions=vecs.T.copy(),
        grid=r,
        lo=0.0,
        hi=r_max,
        n_points=n_points,
        bc="radial",
        h=h,
        v_edge=float(v[-1]),
        angular_l=angular_l,
    )


def solve_periodic(pot: PotentialLike, n_points: int, n_levels: int) -> OracleSolution:
    """Bound states on the circle theta in [-pi, pi) with periodic wrap-around.

    Dense symmetric eigensolve; the corner couplings of the periodic Laplacian
    break the tridiagonal structure.
    """
    if n_points < 256:
        raise BadParameter(f"periodic solver needs n_points >= 256, got {n_points}")
    if not 1 <= n_levels <= n_points:
        raise BadParameter(f"n_levels = {n_levels} not in [1, {n_points}]")
    h = 2.0 * math.pi / n_points
    theta = -math.pi + h * np.arange(n_points)
    v = _potential_values(pot, theta)
    mat = np.diag(2.0 / h**2 + v)
    idx = np.arange(n_points - 1)
    mat[idx, idx + 1] = -1.0 / h**2
    mat[idx + 1, idx] = -1.0 / h**2
    mat[0, -1] = -1.0 / h**2
    mat[-1, 0] = -1.0 / h**2
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(f"periodic eigensolve failed: {exc}") from exc
    vals = vals[:n_levels]
    vecs = _normalize_and_orient(vecs[:, :n_levels], h)
    return OracleSolution(
        eigenvalues=vals,
        wavefunctions=vecs.T.copy(),
        grid=theta,
        lo=-math.pi,
        hi=math.pi,
        n_points=n_points,
        bc="periodic",
        h=h,
        v_edge=float(np.max(v)),
    )


def decay_rate(sol: OracleSolution, level: int) -> float:
    """Exponential decay rate kappa of |psi| at the truncation edge.

    Two estimates: sqrt(V(edge) - E) from the potential, and a log-slope fit
    over the outer tail of the computed state. The smaller (stricter) of the
    two is returned; moments <e^{m x} ...> are integrable only for |m| < 2 kappa.
    """
    energy = float(sol.eigenvalues[level])
    kappa_model = math.sqrt(max(0.0, sol.v_edge - energy))
    psi = np.abs(sol.wavefunctions[level])
    n_tail = max(8, sol.grid.size // 8)
    tail = slice(sol.grid.size - n_tail, sol.grid.size)
    mags = psi[tail]
    mask = mags > 1e-250
    if np.count_nonzero(mask) >= 4:
        slope = np.polyfit(sol.grid[tail][mask], np.log(mags[mask]), 1)[0]
        kappa_fit = max(0.0, -float(slope))
    else:
        # tail already at underflow: decay is far faster than anything we need
        kappa_fit = math.inf
    return min(kappa_model, kappa_fit)


def _guard_exp_index(sol: OracleSolution, level: int, m: int) -> None:
    if m == 0 or sol.bc == "periodic":
        return
    if sol.bc == "radial" and m < 0:
        return  # e^{-|m| r} only helps convergence on the half line
    kappa = decay_rate(sol, level)
    if abs(m) >= 2.0 * kappa:
        raise NonIntegrableMoment(
            f"<e^{{{m} x}} ...> diverges: index |{m}| is not below twice the decay "
            f"rate kappa = {kappa:.4f} of level {level}"
        )


def _origin_power(sol: OracleSolution, base_power: int, p_power: int) -> int:
    """Leading power of r of psi* r^base (p^p_power psi) at the origin.

    Bound radial states behave like u ~ r^{l+1}; the k-th derivative keeps
    r^{l+1-k} until the power hits zero and stalls there.
    """
    l = sol.angular_l or 0
    return (l + 1) + base_power + max(l + 1 - p_power, 0)


def _guard_radial(sol: OracleSolution, base_power: int, p_power: int) -> int:
    alpha = _origin_power(sol, base_power, p_power)
    if alpha <= -1:
        raise NonIntegrableMoment(
            f"<r^{base_power} p^{p_power}> diverges at the origin for angular momentum "
            f"l = {sol.angular_l or 0} (integrand ~ r^{alpha})"
        )
    return alpha


def _integrate(sol: OracleSolution, integrand: np.ndarray, origin_power: int = 1) -> complex:
    """Quadrature over the full domain, restoring the boundary values.

    Line: both walls carry psi = 0 exactly. Radial: the outer wall carries 0;
    the origin value is the r -> 0 limit of the integrand, which vanishes when
    origin_power >= 1 and is recovered by linear extrapolation from the first
    two nodes when origin_power == 0. Periodic: uniform samples of a periodic
    integrand, where the rectangle rule is spectrally accurate.
    """
    if sol.bc == "periodic":
        return complex(np.sum(integrand) * sol.h)
    if sol.bc == "radial":
        origin = 0.0 + 0.0j if origin_power >= 1 else 2.0 * integrand[0] - integrand[1]
        padded = np.concatenate(([origin], integrand, [0.0 + 0.0j]))
        return complex(_trapezoid(padded, dx=sol.h))
    padded = np.concatenate(([0.0 + 0.0j], integrand, [0.0 + 0.0j]))
    return complex(_trapezoid(padded, dx=sol.h))


def _base_values(sol: OracleSolution, base_kind: BaseKind, m: int) -> np.ndarray:
    if base_kind is BaseKind.POWER:
        return sol.grid**m if m != 0 else np.ones_like(sol.grid)
    if base_kind is BaseKind.EXP:
        return np.exp(m * sol.grid)
    return np.exp(1j * m * sol.grid)


def moments_from_wavefunction(
    sol: OracleSolution,
    level: int,
    base_kind: BaseKind,
    one_indices: Iterable[int] = (),
    two_indices: Iterable[tuple[int, int]] = (),
    second_index: str = "momentum",
) -> MomentTable:
    """Quadrature moments of one oracle eigenstate, shaped like a recursion table.

    one_indices fills one_var[m] = <base^m>; two_indices fills
    two_var[(m, n)] = <base^m p^n> with p applied as -i d/dx by repeated
    centered differences (one-sided at the edges, O(h^2) throughout).
    With second_index="position" the pairs mean <e^{m x} x^n> instead, the
    mixed pairing used by the Yukawa family; n may then be negative down to
    the integrability floor.
    """
    if second_index not in ("momentum", "position"):
        raise BadParameter(f"second_index must be 'momentum' or 'position', got {second_index!r}")
    if second_index == "position" and base_kind is not BaseKind.EXP:
        raise BadParameter("position second index only pairs with the Exp base")
    psi = sol.wavefunctions[level].astype(complex)
    density = np.conj(psi) * psi

    one_var: dict[int, complex] = {}
    for m in sorted(set(int(m) for m in one_indices)):
        origin_power = 1
        if base_kind is BaseKind.POWER:
            if sol.bc == "radial":
                origin_power = _guard_radial(sol, m, 0)
            elif m < 0:
                raise NonIntegrableMoment(f"negative position power {m} undefined on the full line")
        elif base_kind is BaseKind.EXP:
            _guard_exp_index(sol, level, m)
        one_var[m] = _integrate(sol, density * _base_values(sol, base_kind, m), origin_power)
    one_var[0] = 1.0 + 0.0j

    two_var: dict[tuple[int, int], complex] = {}
    pairs = sorted(set((int(m), int(n)) for (m, n) in two_indices))
    if pairs and second_index == "momentum":
        if any(n < 0 for _, n in pairs):
            raise BadParameter("momentum powers must be nonnegative")
        max_p = max(n for _, n in pairs)
        # p^n psi for all needed n, computed once
        p_psi = [psi]
        for _ in range(max_p):
            p_psi.append(-1j * np.gradient(p_psi[-1], sol.h, edge_order=2))
        for m, n in pairs:
            origin_power = 1
            if base_kind is BaseKind.POWER:
                if sol.bc == "radial":
                    origin_power = _guard_radial(sol, m, n)
                elif m < 0:
                    raise NonIntegrableMoment(f"negative position power {m} undefined on the full line")
            elif base_kind is BaseKind.EXP:
                _guard_exp_index(sol, level, m)
            integrand = np.conj(psi) * _base_values(sol, base_kind, m) * p_psi[n]
            two_var[(m, n)] = _integrate(sol, integrand, origin_power)
    elif pairs:
        for m, n in pairs:
            _guard_exp_index(sol, level, m)
            origin_power = _guard_radial(sol, n, 0) if sol.bc == "radial" else 1
            integrand = density * np.exp(m * sol.grid) * (sol.grid**n if n != 0 else 1.0)
            two_var[(m, n)] = _integrate(sol, integrand, origin_power)
    if pairs:
        two_var[(0, 0)] = 1.0 + 0.0j

    return MomentTable(base_kind=base_kind, one_var=one_var, two_var=two_var)
