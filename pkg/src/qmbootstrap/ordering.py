"""Normal ordering of products of momentum with position powers or exponentials.

Everything here is exact operator algebra: commuting p^n through x^m, e^{ax}
or e^{i m theta} into the canonical base-then-momentum order. Coefficients are
Gaussian integers until emission, so no rounding happens inside an expansion;
the complex values appear only in the returned terms.

Canonical form: every operator is a sum of terms coeff * base^b * p^q with all
base factors to the left of all momentum factors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import BadParameter

# Expansion exponents are bounded by what matrix assembly can request
# (2K + 2 at the maximum supported depth K = 10). Python integers cannot
# overflow, but the ceiling keeps coefficient magnitudes in a range where the
# final conversion to float is accurate and catches runaway requests early.
MAX_EXPONENT = 22


class BaseKind(enum.Enum):
    POWER = "Power"  # base x^b, b may be negative for radial families
    EXP = "Exp"  # base e^{bx}
    TRIG_EXP = "TrigExp"  # base e^{i b theta}


@dataclass(frozen=True)
class CanonicalTerm:
    coeff: complex
    base_power: int
    p_power: int


@dataclass(frozen=True)
class OperatorPolynomial:
    base_kind: BaseKind
    terms: tuple[CanonicalTerm, ...]


# phase tables for i^k and (-i)^k as Gaussian integers (re, im)
_I_POW = ((1, 0), (0, 1), (-1, 0), (0, -1))
_NEG_I_POW = ((1, 0), (0, -1), (-1, 0), (0, 1))


def _check_exponent(value: int, what: str) -> None:
    if value > MAX_EXPONENT:
        raise BadParameter(
            f"{what} = {value} exceeds the supported ceiling {MAX_EXPONENT} "
            "(2K+2 at the maximum depth K=10)"
        )


def _emit(base_kind: BaseKind, raw: dict[tuple[int, int], tuple[int, int]]) -> OperatorPolynomial:
    """Merge exact Gaussian-integer terms, drop zeros, emit sorted complex terms."""
    terms = []
    for (b, q) in sorted(raw):
        re, im = raw[(b, q)]
        if re == 0 and im == 0:
            continue
        terms.append(CanonicalTerm(coeff=complex(re, im), base_power=b, p_power=q))
    return OperatorPolynomial(base_kind=base_kind, terms=tuple(terms))


def _accumulate(raw, key, re, im):
    old = raw.get(key, (0, 0))
    raw[key] = (old[0] + re, old[1] + im)


def commutator_pn_xm(n: int, m: int) -> OperatorPolynomial:
    """[p^n, x^m] in canonical order.

    Expansion: sum over l from max(0, n-m) to n-1 of
    (-i)^{n-l} * n! m! / (l! (n-l)! (m-n+l)!) * x^{m-n+l} p^l.
    The lower limit max(0, n-m) drops the terms whose x power would go
    negative; they never arise in the product rule derivation.
    """
    if n < 0 or m < 0:
        raise BadParameter(f"powers must be nonnegative, got n={n}, m={m}")
    _check_exponent(n, "momentum power n")
    _check_exponent(m, "position power m")
    raw: dict[tuple[int, int], tuple[int, int]] = {}
    for l in range(max(0, n - m), n):
        k = n - l
        magnitude = math.comb(n, l) * math.perm(m, k)
        ph_re, ph_im = _NEG_I_POW[k % 4]
        _accumulate(raw, (m - n + l, l), ph_re * magnitude, ph_im * magnitude)
    return _emit(BaseKind.POWER, raw)


def canonicalize_p_x_p(a: int, m: int, c: int) -> OperatorPolynomial:
    """p^a x^m p^c rewritten in canonical base-then-momentum order.

    Equals x^m p^{a+c} plus the commutator correction [p^a, x^m] p^c.
    """
    if a < 0 or m < 0 or c < 0:
        raise BadParameter(f"powers must be nonnegative, got a={a}, m={m}, c={c}")
    _check_exponent(a + c, "total momentum power a+c")
    _check_exponent(m, "position power m")
    raw: dict[tuple[int, int], tuple[int, int]] = {(m, a + c): (1, 0)}
    for l in range(max(0, a - m), a):
        k = a - l
        magnitude = math.comb(a, l) * math.perm(m, k)
        ph_re, ph_im = _NEG_I_POW[k % 4]
        _accumulate(raw, (m - a + l, l + c), ph_re * magnitude, ph_im * magnitude)
    return _emit(BaseKind.POWER, raw)


def translate_p_through_exp(n: int, a: complex) -> OperatorPolynomial:
    """p^n e^{a x} rewritten as e^{a x} (p - i a)^n.

    a must be a nonzero integer multiple of 1 (Exp base, e^{ax}) or of i
    (TrigExp base, e^{i m theta}); the integer becomes the base power of every
    emitted term. For a = i m the binomial coefficients (-i a)^{n-l} = m^{n-l}
    are real, which is why trig moment tables close over real arithmetic.
    """
    if n < 0:
        raise BadParameter(f"momentum power must be nonnegative, got n={n}")
    _check_exponent(n, "momentum power n")
    a = complex(a)
    if a == 0:
        raise BadParameter("exponent a must be nonzero (a = 0 is just p^n)")
    if a.imag == 0.0 and float(a.real).is_integer():
        base_kind = BaseKind.EXP
        mu = int(a.real)
        # -i a = -i mu: phase -i with integer magnitude mu
        step_re, step_im = 0, -mu
    elif a.real == 0.0 and float(a.imag).is_integer():
        base_kind = BaseKind.TRIG_EXP
        mu = int(a.imag)
        # -i a = -i (i mu) = mu: purely real step
        step_re, step_im = mu, 0
    else:
        raise BadParameter(f"exponent a = {a} must be an integer multiple of 1 or i")
    _check_exponent(abs(mu), "exponential index")
    raw: dict[tuple[int, int], tuple[int, int]] = {}
    for l in range(n + 1):
        k = n - l
        # (step)^k exactly, as a Gaussian integer
        ph_re, ph_im = 1, 0
        for _ in range(k):
            ph_re, ph_im = ph_re * step_re - ph_im * step_im, ph_re * step_im + ph_im * step_re
        binom = math.comb(n, l)
        _accumulate(raw, (mu, l), ph_re * binom, ph_im * binom)
    return _emit(base_kind, raw)
