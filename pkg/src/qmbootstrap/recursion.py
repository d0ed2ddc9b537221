"""Moment-table generation from eigenstate identities, and residual checks.

For an eigenstate |psi> of H = p^2 + V, every operator O satisfies
<O H> = E <O> and <[H, O]> = 0. Instantiating these with O drawn from a
family-specific operator basis turns the unknown moments into a recursion:
a handful of free initial data (trial energy plus at most a couple of free
moments) determines the whole table.

The generators here solve those identities for the highest unknown moment;
recursion_residual evaluates the identities as written (LHS - RHS), giving an
independent reading of the same algebra. Tables built by the generators must
zero the residuals to rounding; tables measured from oracle wavefunctions must
zero them to discretization accuracy. That cross-fire is the main correctness
argument for both modules.

Radial families live on the half line, where integrating by parts can strand
boundary terms at r = 0: an identity instance is only used when its operator
kills those terms (Coulomb needs a positive power of r on every instance;
the Yukawa mixed identity needs a positive power of r, i.e. n >= 1). The
excluded instances are not merely unreliable, they are false: the m = 0
Coulomb identity would force <r^-2> = 0, and the (0, 0) Yukawa instance would
equate a sum of strictly positive moments to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BadParameter, MissingInitial, Overflow, UnsupportedFamily
from .ordering import BaseKind
from .potentials import MOMENT_CEILING, Family, ValidatedPotential

# table indices never exceed this; generators that need longer seed rows
# (propagation reaches sideways) extend internally but reject silly requests
MAX_TABLE_INDEX = 200

# deepest positivity matrix the engine supports; mixed tables for depth K use
# exponents up to 2K + 2, which must stay within the exact ordering tables
MAX_DEPTH = 10


@dataclass
class MomentTable:
    """Operator expectation values of one (trial or actual) state.

    one_var[m] is <x^m>, <e^{m x}> or <e^{i m theta}> depending on base_kind.
    two_var[(m, n)] is <base^m p^n> with n >= 0, except for the Yukawa mixed
    pairing where it means <e^{m r} r^n> and n may be negative down to the
    integrability floor.
    """

    base_kind: BaseKind
    one_var: dict[int, complex] = field(default_factory=dict)
    two_var: dict[tuple[int, int], complex] = field(default_factory=dict)


@dataclass
class InitialData:
    """Trial values for the free initial data of a scan point."""

    energy: float
    extra: dict[str, float] = field(default_factory=dict)


def initial_from_values(pot: ValidatedPotential, values: dict[str, float]) -> InitialData:
    """Assemble InitialData from named values, checking the family's schema."""
    missing = [name for name in pot.free_names if name not in values]
    if missing:
        raise MissingInitial(
            f"{pot.family.value} needs initial data {list(pot.free_names)}; missing {missing}"
        )
    unknown = [name for name in values if name not in pot.free_names]
    if unknown:
        raise BadParameter(f"unexpected initial data {unknown}; {pot.family.value} takes {list(pot.free_names)}")
    extra = {name: float(values[name]) for name in pot.free_names if name != "E"}
    return InitialData(energy=float(values["E"]), extra=extra)


def _store(table: dict, key, value: complex) -> None:
    if abs(value) > MOMENT_CEILING:
        raise Overflow(f"moment {key} reached {abs(value):.3e}; trial point diverges")
    table[key] = value


def _poly_coeffs(pot: ValidatedPotential) -> tuple[float, ...]:
    return pot.coeffs


# ---------------------------------------------------------------------------
# one-variable tables


def _one_var_poly(pot: ValidatedPotential, init: InitialData, max_index: int) -> MomentTable:
    coeffs = _poly_coeffs(pot)
    degree = len(coeffs) - 1
    energy = init.energy
    u: dict[int, complex] = {0: 1.0 + 0.0j}
    for k in range(1, max_index + 1, 2):
        u[k] = 0.0 + 0.0j
    for power in range(2, degree - 1, 2):
        u[power] = complex(init.extra[f"x{power}"])
    m = 1
    while m + degree - 1 <= max_index:
        target = m + degree - 1
        rhs = 4.0 * m * energy * u[m - 1]
        if m >= 3:
            rhs += m * (m - 1) * (m - 2) * u[m - 3]
        for power in range(0, degree, 2):
            if coeffs[power] != 0.0:
                rhs -= coeffs[power] * (4 * m + 2 * power) * u[m + power - 1]
        _store(u, target, rhs / (coeffs[degree] * (4 * m + 2 * degree)))
        m += 2
    return MomentTable(base_kind=BaseKind.POWER, one_var=u)


def _one_var_coulomb(pot: ValidatedPotential, init: InitialData, max_index: int) -> MomentTable:
    n_charge = pot.coeffs[0]
    l = pot.angular_l
    energy = init.energy
    if energy == 0.0:
        raise Overflow("E = 0 makes every recursion divisor vanish; no Coulomb table there")
    u: dict[int, complex] = {0: 1.0 + 0.0j}
    # the m = 1 identity has no r^{m-3} term and determines <r^-1> directly
    u[-1] = complex(-2.0 * energy / n_charge)
    for m in range(2, max_index + 2):
        rhs = -2.0 * n_charge * (2 * m - 1) * u[m - 2]
        rhs -= (m - 1) * (m * (m - 2) - 4 * l * (l + 1)) * u[m - 3]
        _store(u, m - 1, rhs / (4.0 * m * energy))
    return MomentTable(base_kind=BaseKind.POWER, one_var=u)


def _one_var_ladder(pot: ValidatedPotential, init: InitialData, max_index: int, cubic_sign: float) -> MomentTable:
    """Shared three-term recursion for the cosh (Toda) and cos families.

    cubic_sign is +1 for e^{m x} bases and -1 for e^{i m theta} bases, the only
    difference between the two recursions.
    """
    g = pot.coeffs[0]
    energy = init.energy
    name = pot.free_names[1]
    u: dict[int, complex] = {0: 1.0 + 0.0j, 1: complex(init.extra[name])}
    for m in range(1, max_index):
        rhs = (4.0 * m * energy + cubic_sign * m**3) * u[m] - g * (2 * m - 1) * u[m - 1]
        _store(u, m + 1, rhs / (g * (2 * m + 1)))
    for m in range(1, max_index + 1):
        u[-m] = u[m]
    return MomentTable(
        base_kind=BaseKind.EXP if cubic_sign > 0 else BaseKind.TRIG_EXP, one_var=u
    )


def gen_one_var(pot: ValidatedPotential, init: InitialData, max_index: int) -> MomentTable:
    """Single-operator moment table <base^m> for m up to max_index.

    Needs the family's free initial data; every further moment follows from
    the eigenstate identities. Moments whose magnitude passes MOMENT_CEILING
    raise Overflow: the trial point is diverging, not infeasible.
    """
    if not 0 <= max_index <= MAX_TABLE_INDEX:
        raise BadParameter(f"max_index = {max_index} not in [0, {MAX_TABLE_INDEX}]")
    if pot.family is Family.EVEN_POLYNOMIAL:
        return _one_var_poly(pot, init, max_index)
    if pot.family is Family.COULOMB:
        return _one_var_coulomb(pot, init, max_index)
    if pot.family is Family.TODA:
        return _one_var_ladder(pot, init, max_index, +1.0)
    if pot.family is Family.TRIG:
        return _one_var_ladder(pot, init, max_index, -1.0)
    raise UnsupportedFamily(
        f"no single-operator recursion is known for {pot.family.value}"
    )


# ---------------------------------------------------------------------------
# two-variable tables


def _two_var_poly(pot: ValidatedPotential, init: InitialData, K: int) -> MomentTable:
    coeffs = _poly_coeffs(pot)
    degree = len(coeffs) - 1
    if degree > 4:
        raise UnsupportedFamily(
            f"mixed <x^m p^n> recursion implemented for polynomial degree <= 4, got {degree}"
        )
    a2 = coeffs[2] if degree >= 2 else 0.0
    a4 = coeffs[4] if degree >= 4 else 0.0
    depth_limit = 2 * K + 2
    # propagation reaches sideways: computing row r needs row r-2 out to
    # column c+4 (quartic) or c+2 (harmonic), so lower rows carry extra columns
    stretch = 2 if a4 != 0.0 else 1

    def extent(row: int) -> int:
        return depth_limit + stretch * (depth_limit - row)

    base = gen_one_var(pot, init, extent(0)).one_var
    u: dict[tuple[int, int], complex] = {(c, 0): base[c] for c in range(0, extent(0) + 1)}
    for r in range(1, depth_limit + 1):
        n = r - 1
        for c in range(0, extent(r) + 1):
            if (c + r) % 2 == 1:
                u[(c, r)] = 0.0 + 0.0j
                continue
            m = c + 1
            rhs = 0.0 + 0.0j
            if m >= 2:
                rhs -= m * (m - 1) * u[(c - 1, r - 1)]
            if n >= 1 and a2 != 0.0:
                rhs += a2 * 2j * n * u[(c + 2, r - 2)]
            if n >= 2 and a2 != 0.0:
                rhs += a2 * n * (n - 1) * u[(c + 1, r - 3)]
            if a4 != 0.0:
                if n >= 1:
                    rhs += a4 * 4j * n * u[(c + 4, r - 2)]
                if n >= 2:
                    rhs += a4 * 6 * n * (n - 1) * u[(c + 3, r - 3)]
                if n >= 3:
                    rhs -= a4 * 4j * n * (n - 1) * (n - 2) * u[(c + 2, r - 4)]
                if n >= 4:
                    rhs -= a4 * n * (n - 1) * (n - 2) * (n - 3) * u[(c + 1, r - 5)]
            _store(u, (c, r), rhs / (2j * m))
    one_var = {c: u[(c, 0)] for c in range(0, extent(0) + 1)}
    return MomentTable(base_kind=BaseKind.POWER, one_var=one_var, two_var=u)


def _two_var_coulomb(pot: ValidatedPotential, init: InitialData, K: int) -> MomentTable:
    n_charge = pot.coeffs[0]
    l = pot.angular_l
    depth_limit = 2 * K + 2
    base = gen_one_var(pot, init, depth_limit).one_var
    u: dict[tuple[int, int], complex] = {(c, 0): base[c] for c in range(-1, depth_limit + 1)}
    # only a wedge of the table is determined: each new momentum row consumes
    # one power of r from the commutator sums, and the seeds stop at <r^-1>
    floor = -2 if l == 0 else -1
    for r in range(1, depth_limit + 1):
        n = r - 1
        for c in range(max(0, r + floor), depth_limit + 1):
            m = c + 1
            rhs = 0.0 + 0.0j
            if m >= 2:
                rhs -= m * (m - 1) * u[(m - 2, n)]
            for t in range(1, n + 1):
                phase = 1j**t
                rhs += n_charge * phase * math.perm(n, t) * u[(m - 1 - t, n - t)]
                if l > 0:
                    rhs -= l * (l + 1) * phase * math.perm(n, t) * (t + 1) * u[(m - 2 - t, n - t)]
            _store(u, (c, r), rhs / (2j * m))
    one_var = {c: u[(c, 0)] for c in range(-1, depth_limit + 1)}
    return MomentTable(base_kind=BaseKind.POWER, one_var=one_var, two_var=u)


def _two_var_ladder(pot: ValidatedPotential, init: InitialData, K: int, trig: bool) -> MomentTable:
    g = pot.coeffs[0]
    energy = init.energy
    depth_limit = 2 * K + 2

    def extent(row: int) -> int:
        return depth_limit + (depth_limit - row)

    base = gen_one_var(pot, init, extent(0)).one_var
    u: dict[tuple[int, int], complex] = {}
    for m in range(-extent(0), extent(0) + 1):
        u[(m, 0)] = base[m]
    for r in range(1, depth_limit + 1):
        n = r - 1
        for m in range(1, extent(r) + 1):
            total = 0.0 + 0.0j
            for low in range(n):
                binom = math.comb(n, low)
                k = n - low
                if trig:
                    total += binom * (u[(m + 1, low)] + (-1.0) ** k * u[(m - 1, low)])
                else:
                    total += binom * ((-1j) ** k * u[(m + 1, low)] + 1j**k * u[(m - 1, low)])
            if trig:
                value = -(m**2 * u[(m, n)] - 0.5 * g * total) / (2.0 * m)
            else:
                value = (-(m**2) * u[(m, n)] - 0.5 * g * total) / (2j * m)
            _store(u, (m, r), value)
        # m = 0 column: <p> vanishes for bound parity eigenstates, and higher
        # pure momentum moments follow from the energy identity at m = 0
        if r == 1:
            u[(0, 1)] = 0.0 + 0.0j
        else:
            _store(
                u,
                (0, r),
                energy * u[(0, r - 2)] - 0.5 * g * (u[(1, r - 2)] + u[(-1, r - 2)]),
            )
        for m in range(1, extent(r) + 1):
            u[(-m, r)] = (-1.0) ** r * u[(m, r)]
    one_var = {m: u[(m, 0)] for m in range(-extent(0), extent(0) + 1)}
    return MomentTable(
        base_kind=BaseKind.TRIG_EXP if trig else BaseKind.EXP, one_var=one_var, two_var=u
    )


def gen_two_var(pot: ValidatedPotential, init: InitialData, K: int) -> MomentTable:
    """Mixed moment table <base^m p^n> deep enough for depth-K two-operator matrices.

    Populated for indices up to 2K + 2 (further sideways where propagation
    needs it). For Coulomb only the wedge with enough powers of r is
    determined; two-operator matrices beyond K = 1 will find entries missing,
    which is a property of the recursion, not of this implementation.
    """
    if not 0 <= K <= MAX_DEPTH:
        raise BadParameter(f"depth K = {K} not in [0, {MAX_DEPTH}]")
    if pot.family is Family.EVEN_POLYNOMIAL:
        return _two_var_poly(pot, init, K)
    if pot.family is Family.COULOMB:
        return _two_var_coulomb(pot, init, K)
    if pot.family is Family.TODA:
        return _two_var_ladder(pot, init, K, trig=False)
    if pot.family is Family.TRIG:
        return _two_var_ladder(pot, init, K, trig=True)
    raise UnsupportedFamily(
        f"no mixed-table recursion with known initial data for {pot.family.value}"
    )


# ---------------------------------------------------------------------------
# residuals


def _terms_total(table: dict, terms) -> complex | None:
    """Sum coeff * table[key], or None when a needed entry is absent."""
    total = 0.0 + 0.0j
    for coeff, key in terms:
        if coeff == 0:
            continue
        if key not in table:
            return None
        total += coeff * table[key]
    return total


def _one_var_residuals(pot: ValidatedPotential, u: dict[int, complex], energy: float) -> dict[str, complex]:
    out: dict[str, complex] = {}
    if not u:
        return out
    lo, hi = min(u), max(u)
    if pot.family is Family.EVEN_POLYNOMIAL:
        coeffs = _poly_coeffs(pot)
        for m in range(1, hi + 2):
            terms = [(4.0 * m * energy, m - 1), (m * (m - 1) * (m - 2), m - 3)]
            for power, a in enumerate(coeffs):
                terms.append((-a * (4 * m + 2 * power), m + power - 1))
            value = _terms_total(u, terms)
            if value is not None:
                out[f"one_var m={m}"] = value
    elif pot.family is Family.COULOMB:
        n_charge = pot.coeffs[0]
        l = pot.angular_l
        for m in range(1, hi + 2):
            terms = [
                (4.0 * m * energy, m - 1),
                (2.0 * n_charge * (2 * m - 1), m - 2),
                ((m - 1) * (m * (m - 2) - 4 * l * (l + 1)), m - 3),
            ]
            value = _terms_total(u, terms)
            if value is not None:
                out[f"one_var m={m}"] = value
    elif pot.family in (Family.TODA, Family.TRIG):
        g = pot.coeffs[0]
        sign = 1.0 if pot.family is Family.TODA else -1.0
        for m in range(lo, hi + 1):
            terms = [
                (-g * (2 * m - 1), m - 1),
                (4.0 * m * energy + sign * m**3, m),
                (-g * (2 * m + 1), m + 1),
            ]
            value = _terms_total(u, terms)
            if value is not None:
                out[f"one_var m={m}"] = value
    return out


def _poly_two_var_residuals(pot, table, energy):
    coeffs = _poly_coeffs(pot)
    degree = len(coeffs) - 1
    if degree > 4:
        return {}
    a0 = coeffs[0]
    a2 = coeffs[2] if degree >= 2 else 0.0
    a4 = coeffs[4] if degree >= 4 else 0.0
    u = table.two_var
    out = {}
    max_m = max(k[0] for k in u)
    max_n = max(k[1] for k in u)
    for m in range(0, max_m + 1):
        for n in range(0, max_n + 1):
            energy_terms = [
                (energy - a0, (m, n)),
                (m * (m - 1), (m - 2, n)),
                (2j * m, (m - 1, n + 1)),
                (-1.0, (m, n + 2)),
                (-a2, (m + 2, n)),
                (-a4, (m + 4, n)),
            ]
            value = _terms_total(u, energy_terms)
            if value is not None:
                out[f"energy m={m} n={n}"] = value
            comm_terms = [
                (-m * (m - 1), (m - 2, n)),
                (-2j * m, (m - 1, n + 1)),
                (a2 * 2j * n, (m + 1, n - 1)),
                (a2 * n * (n - 1), (m, n - 2)),
                (a4 * 4j * n, (m + 3, n - 1)),
                (a4 * 6 * n * (n - 1), (m + 2, n - 2)),
                (-a4 * 4j * n * (n - 1) * (n - 2), (m + 1, n - 3)),
                (-a4 * n * (n - 1) * (n - 2) * (n - 3), (m, n - 4)),
            ]
            value = _terms_total(u, comm_terms)
            if value is not None:
                out[f"commutator m={m} n={n}"] = value
    return out


def _coulomb_two_var_residuals(pot, table, energy):
    n_charge = pot.coeffs[0]
    l = pot.angular_l
    u = table.two_var
    out = {}
    max_m = max(k[0] for k in u)
    max_n = max(k[1] for k in u)
    for m in range(1, max_m + 1):  # m = 0 instances strand boundary terms at r = 0
        for n in range(0, max_n + 1):
            energy_terms = [
                (energy, (m, n)),
                (-(l * (l + 1) - m * (m - 1)), (m - 2, n)),
                (n_charge, (m - 1, n)),
                (2j * m, (m - 1, n + 1)),
                (-1.0, (m, n + 2)),
            ]
            value = _terms_total(u, energy_terms)
            if value is not None:
                out[f"energy m={m} n={n}"] = value
            comm_terms = [(-m * (m - 1), (m - 2, n)), (-2j * m, (m - 1, n + 1))]
            for t in range(1, n + 1):
                phase = 1j**t
                comm_terms.append((n_charge * phase * math.perm(n, t), (m - 1 - t, n - t)))
                comm_terms.append((-l * (l + 1) * phase * math.perm(n, t) * (t + 1), (m - 2 - t, n - t)))
            value = _terms_total(u, comm_terms)
            if value is not None:
                out[f"commutator m={m} n={n}"] = value
    return out


def _ladder_two_var_residuals(pot, table, energy):
    g = pot.coeffs[0]
    trig = pot.family is Family.TRIG
    u = table.two_var
    out = {}
    max_m = max(abs(k[0]) for k in u)
    max_n = max(k[1] for k in u)
    for m in range(-max_m, max_m + 1):
        for n in range(0, max_n + 1):
            if trig:
                energy_terms = [
                    (energy - m**2, (m, n)),
                    (-1.0, (m, n + 2)),
                    (-2.0 * m, (m, n + 1)),
                    (-0.5 * g, (m + 1, n)),
                    (-0.5 * g, (m - 1, n)),
                ]
            else:
                energy_terms = [
                    (energy + m**2, (m, n)),
                    (-1.0, (m, n + 2)),
                    (2j * m, (m, n + 1)),
                    (-0.5 * g, (m + 1, n)),
                    (-0.5 * g, (m - 1, n)),
                ]
            value = _terms_total(u, energy_terms)
            if value is not None:
                out[f"energy m={m} n={n}"] = value
            if trig:
                comm_terms = [(2.0 * m, (m, n + 1)), (m**2, (m, n)), (0.5 * g, (m + 1, n)), (0.5 * g, (m - 1, n))]
                for low in range(n + 1):
                    binom = math.comb(n, low)
                    k = n - low
                    comm_terms.append((-0.5 * g * binom, (m + 1, low)))
                    comm_terms.append((-0.5 * g * binom * (-1.0) ** k, (m - 1, low)))
            else:
                comm_terms = [(-2j * m, (m, n + 1)), (-(m**2), (m, n)), (0.5 * g, (m + 1, n)), (0.5 * g, (m - 1, n))]
                for low in range(n + 1):
                    binom = math.comb(n, low)
                    k = n - low
                    comm_terms.append((-0.5 * g * binom * (-1j) ** k, (m + 1, low)))
                    comm_terms.append((-0.5 * g * binom * 1j**k, (m - 1, low)))
            value = _terms_total(u, comm_terms)
            if value is not None:
                out[f"commutator m={m} n={n}"] = value
    return out


def _yukawa_residuals(pot, table, energy):
    a = pot.coeffs[0]
    l = pot.angular_l
    u = table.two_var
    out = {}
    if not u:
        return out
    max_m = max(k[0] for k in u)
    min_m = min(k[0] for k in u)
    max_n = max(k[1] for k in u)
    for m in range(min_m, max_m + 1):
        for n in range(1, max_n + 1):  # n = 0 instances strand boundary terms at r = 0
            terms = [
                (-(m**3 + 4.0 * m * energy), (m, n)),
                (-(3.0 * m**2 * n + 4.0 * n * energy), (m, n - 1)),
                (4.0 * l * (l + 1) * m - 3.0 * m * n * (n - 1), (m, n - 2)),
                (4.0 * l * (l + 1) * (n - 1) - n * (n - 1) * (n - 2), (m, n - 3)),
                (-2.0 * a * (2 * m - 1), (m - 1, n - 1)),
                (-2.0 * a * (2 * n - 1), (m - 1, n - 2)),
            ]
            value = _terms_total(u, terms)
            if value is not None:
                out[f"mixed m={m} n={n}"] = value
    return out


def recursion_residual(pot: ValidatedPotential, table: MomentTable, energy: float) -> dict[str, complex]:
    """LHS - RHS of every instantiable eigenstate identity on this table.

    Instances whose stencil reaches outside the table are skipped (callers can
    diff against the requested range to report them). Instances that are
    invalid on the half line (boundary anomalies, see module docstring) are
    never evaluated.
    """
    out = _one_var_residuals(pot, table.one_var, energy)
    if table.two_var:
        if pot.family is Family.EVEN_POLYNOMIAL:
            out.update(_poly_two_var_residuals(pot, table, energy))
        elif pot.family is Family.COULOMB:
            out.update(_coulomb_two_var_residuals(pot, table, energy))
        elif pot.family in (Family.TODA, Family.TRIG):
            out.update(_ladder_two_var_residuals(pot, table, energy))
        elif pot.family is Family.YUKAWA:
            out.update(_yukawa_residuals(pot, table, energy))
    return out
