"""Potential families and request validation.

A potential request names a family plus numeric parameters. Validation either
rejects it with a specific error or returns a frozen ValidatedPotential that
records which recursion applies, which positivity matrices are available, and
what initial data a scan must supply.

Hamiltonian convention throughout the engine: H = p^2 + V (mass 1/2, hbar 1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BadParameter, NonConfining, NonSmoothPotential
from .matrices import MatrixKind

# Magnitude ceiling for generated moments; a trial point whose moments pass
# this is treated as diverging (Overflow), not infeasible.
MOMENT_CEILING = 1e100


class Family(enum.Enum):
    EVEN_POLYNOMIAL = "EvenPolynomial"
    COULOMB = "Coulomb"
    TODA = "Toda"
    TRIG = "Trig"
    YUKAWA = "Yukawa"
    # Request-only families: validation always rejects these, with a message
    # explaining why no closed recursion exists for them.
    ABS_POWER = "AbsPower"
    PIECEWISE_WELL = "PiecewiseWell"


_NON_CLOSURE = (
    "the moment recursion does not close for {what}: the identities relating "
    "moments pick up boundary terms at the matching point that no finite set "
    "of equations constrains, so no moment table can be generated"
)


@dataclass
class PotentialSpec:
    """Raw user request, before validation.

    coeffs meaning by family:
      EvenPolynomial -- polynomial coefficients (a_0, a_1, ..., a_d) with
                        V(x) = sum a_l x^l; odd entries must be zero
      Coulomb        -- (N,) for V_eff(r) = l(l+1)/r^2 - N/r
      Toda           -- (g,) for V(x) = g cosh x
      Trig           -- (g,) for V(theta) = g cos theta
      Yukawa         -- (a,) for V_eff(r) = l(l+1)/r^2 - a e^{-r}/r
      AbsPower       -- (g, nu) for g|x|^nu (always rejected)
      PiecewiseWell  -- breakpoints/values, shape unchecked (always rejected)
    """

    family: Family
    coeffs: Sequence[float] = ()
    angular_l: Optional[int] = None  # radial families only
    free_initial: Optional[Sequence[str]] = None  # if given, must match the canonical schema


@dataclass(frozen=True)
class ValidatedPotential:
    family: Family
    coeffs: tuple[float, ...]
    angular_l: Optional[int]
    domain: str  # "line", "radial" or "periodic"
    matrix_kinds: tuple[MatrixKind, ...]
    scan_enabled: bool
    recursion_name: str
    free_names: tuple[str, ...] = field(default=())


def _validate_even_polynomial(spec: PotentialSpec) -> ValidatedPotential:
    coeffs = tuple(float(c) for c in spec.coeffs)
    while coeffs and coeffs[-1] == 0.0:
        coeffs = coeffs[:-1]
    if spec.angular_l is not None:
        raise BadParameter("angular_l only applies to radial families (Coulomb, Yukawa)")
    for power in range(1, len(coeffs), 2):
        if coeffs[power] != 0.0:
            raise NonSmoothPotential(
                f"coefficient on x^{power} is nonzero; odd powers are |x|^nu wells in "
                "disguise and " + _NON_CLOSURE.format(what="potentials with an |x| kink at the origin")
            )
    degree = len(coeffs) - 1
    if degree < 2:
        raise NonConfining("potential needs a growing even term; constant or empty V has no bound states")
    if coeffs[-1] <= 0.0:
        raise NonConfining(f"leading coefficient a_{degree} = {coeffs[-1]} must be positive for a confining well")
    free = ("E",) + tuple(f"x{p}" for p in range(2, degree - 1, 2))
    return ValidatedPotential(
        family=Family.EVEN_POLYNOMIAL,
        coeffs=coeffs,
        angular_l=None,
        domain="line",
        matrix_kinds=(MatrixKind.HANKEL_X, MatrixKind.KRON_X_P),
        scan_enabled=True,
        recursion_name="even-polynomial position-moment recursion",
        free_names=free,
    )


def _validate_radial(spec: PotentialSpec) -> ValidatedPotential:
    if len(spec.coeffs) != 1:
        raise BadParameter(f"{spec.family.value} takes exactly one coupling, got {len(spec.coeffs)}")
    strength = float(spec.coeffs[0])
    if strength <= 0.0:
        raise BadParameter(f"{spec.family.value} coupling must be positive, got {strength}")
    l = 0 if spec.angular_l is None else spec.angular_l
    if not isinstance(l, int) or l < 0:
        raise BadParameter(f"angular_l must be a nonnegative integer, got {spec.angular_l!r}")
    if spec.family is Family.COULOMB:
        return ValidatedPotential(
            family=Family.COULOMB,
            coeffs=(strength,),
            angular_l=l,
            domain="radial",
            matrix_kinds=(MatrixKind.HANKEL_X, MatrixKind.KRON_X_P),
            scan_enabled=True,
            recursion_name="Coulomb radial-moment recursion",
            free_names=("E",),
        )
    # Yukawa: the mixed e^{mr} r^n recursion is implemented and checkable
    # against oracle states, but no minimal initial-data set is known that
    # would seed it from scratch, so scanning is disabled.
    return ValidatedPotential(
        family=Family.YUKAWA,
        coeffs=(strength,),
        angular_l=l,
        domain="radial",
        matrix_kinds=(MatrixKind.MIXED_X_EXP,),
        scan_enabled=False,
        recursion_name="Yukawa mixed exponential/position recursion",
        free_names=(),
    )


def _validate_cosh_cos(spec: PotentialSpec) -> ValidatedPotential:
    if len(spec.coeffs) != 1:
        raise BadParameter(f"{spec.family.value} takes exactly one coupling, got {len(spec.coeffs)}")
    g = float(spec.coeffs[0])
    if g == 0.0:
        raise BadParameter("coupling g = 0 degenerates the recursion (every step divides by g)")
    if spec.angular_l is not None:
        raise BadParameter("angular_l only applies to radial families (Coulomb, Yukawa)")
    if spec.family is Family.TODA:
        if g < 0.0:
            raise NonConfining("g cosh x with g < 0 is unbounded below; no bound spectrum")
        return ValidatedPotential(
            family=Family.TODA,
            coeffs=(g,),
            angular_l=None,
            domain="line",
            matrix_kinds=(MatrixKind.HANKEL_EXP, MatrixKind.KRON_EXP_P),
            scan_enabled=True,
            recursion_name="cosh-potential exponential-moment recursion",
            free_names=("E", "ex"),
        )
    return ValidatedPotential(
        family=Family.TRIG,
        coeffs=(g,),
        angular_l=None,
        domain="periodic",
        matrix_kinds=(MatrixKind.TOEPLITZ_TRIG, MatrixKind.KRON_TRIG_P),
        scan_enabled=True,
        recursion_name="cos-potential Fourier-moment recursion",
        free_names=("E", "eitheta"),
    )


def validate_spec(spec: PotentialSpec) -> ValidatedPotential:
    """Check a potential request and freeze it for the engine.

    Raises NonSmoothPotential / NonConfining / BadParameter with messages that
    say what is wrong physically, not just which field failed.
    """
    if spec.family is Family.ABS_POWER:
        nu = spec.coeffs[1] if len(spec.coeffs) > 1 else "nu"
        raise NonSmoothPotential(
            f"|x|^{nu} wells are not smooth at the origin and "
            + _NON_CLOSURE.format(what="|x|^nu potentials")
        )
    if spec.family is Family.PIECEWISE_WELL:
        raise NonSmoothPotential(
            "piecewise potentials are not smooth at the joins and "
            + _NON_CLOSURE.format(what="piecewise-defined potentials")
        )
    if spec.family is Family.EVEN_POLYNOMIAL:
        validated = _validate_even_polynomial(spec)
    elif spec.family in (Family.COULOMB, Family.YUKAWA):
        validated = _validate_radial(spec)
    elif spec.family in (Family.TODA, Family.TRIG):
        validated = _validate_cosh_cos(spec)
    else:
        raise BadParameter(f"unknown family {spec.family!r}")
    if spec.free_initial is not None and tuple(spec.free_initial) != validated.free_names:
        raise BadParameter(
            f"free_initial {tuple(spec.free_initial)} does not match the canonical "
            f"set {validated.free_names} for {validated.family.value}"
        )
    return validated


# Default scan windows per free datum. These are engine heuristics for where
# low-lying bound states of typical couplings sit; configs can override.
def free_initial_schema(pot: ValidatedPotential) -> list[tuple[str, tuple[float, float]]]:
    """Ordered (name, default scan range) pairs for the family's free initial data.

    The first entry is always the trial energy E when the family is scannable.
    An empty list means no minimal initial-data set is known (Yukawa): the
    moment recursion is still checkable against oracle states, but there is
    nothing to scan over.
    """
    if pot.family is Family.EVEN_POLYNOMIAL:
        schema = [("E", (0.1, 10.0))]
        for name in pot.free_names[1:]:
            schema.append((name, (0.05, 2.0)))
        return schema
    if pot.family is Family.COULOMB:
        n_sq = pot.coeffs[0] ** 2
        return [("E", (-n_sq, -0.01 * n_sq))]
    if pot.family is Family.TODA:
        g = pot.coeffs[0]
        return [("E", (0.9 * g, 10.0 * max(1.0, g))), ("ex", (1.0, 5.0))]
    if pot.family is Family.TRIG:
        g = abs(pot.coeffs[0])
        return [("E", (-g, 10.0)), ("eitheta", (-1.0, 1.0))]
    return []


def evaluate_potential(pot: ValidatedPotential, x: np.ndarray) -> np.ndarray:
    """V (or V_eff for radial families) evaluated on a grid."""
    x = np.asarray(x, dtype=float)
    if pot.family is Family.EVEN_POLYNOMIAL:
        # coeffs are (a_0, ..., a_d) with V = sum a_l x^l
        return np.polynomial.polynomial.polyval(x, np.array(pot.coeffs))
    if pot.family is Family.COULOMB:
        n_charge = pot.coeffs[0]
        l = pot.angular_l
        return l * (l + 1) / x**2 - n_charge / x
    if pot.family is Family.YUKAWA:
        a = pot.coeffs[0]
        l = pot.angular_l
        return l * (l + 1) / x**2 - a * np.exp(-x) / x
    if pot.family is Family.TODA:
        return pot.coeffs[0] * np.cosh(x)
    if pot.family is Family.TRIG:
        return pot.coeffs[0] * np.cos(x)
    raise BadParameter(f"cannot evaluate family {pot.family!r}")


def polynomial_degree(pot: ValidatedPotential) -> int:
    if pot.family is not Family.EVEN_POLYNOMIAL:
        raise BadParameter("polynomial_degree only applies to EvenPolynomial")
    return len(pot.coeffs) - 1


def classical_minimum(pot: ValidatedPotential) -> float:
    """Rough lower bound on the spectrum: min over a coarse grid of V."""
    if pot.domain == "periodic":
        grid = np.linspace(-math.pi, math.pi, 2001)
    elif pot.domain == "radial":
        grid = np.linspace(1e-3, 50.0, 20001)
    else:
        grid = np.linspace(-20.0, 20.0, 20001)
    return float(np.min(evaluate_potential(pot, grid)))
