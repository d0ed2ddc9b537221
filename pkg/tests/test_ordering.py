"""Ordering expansions against independent matrix-truncation evaluation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmbootstrap.errors import BadParameter
from qmbootstrap.ordering import (
    MAX_EXPONENT,
    BaseKind,
    canonicalize_p_x_p,
    commutator_pn_xm,
    translate_p_through_exp,
)

from _oracles import (
    central_block,
    exp_poly_matrix,
    fourier_shift_p,
    low_block,
    oscillator_xp,
    poly_matrix,
    trig_poly_matrix,
)

SIZE = 80
KEEP = 24  # exact leading block: degree stays far below SIZE - KEEP


@pytest.fixture(scope="module")
def xp():
    return oscillator_xp(SIZE)


def _relative_gap(direct: np.ndarray, expanded: np.ndarray, keep: int) -> float:
    """Largest block deviation relative to the block magnitude.

    High powers produce entries around 1e9, so float64 can only certify
    relative agreement; for O(1) operators this is the plain absolute gap.
    """
    gap = np.max(np.abs(low_block(direct - expanded, keep)))
    return gap / max(1.0, np.max(np.abs(low_block(direct, keep))))


def test_power_triples_match_matrix_oracle(xp):
    """p^a x^m p^c expansion agrees with explicit matrices for a,m,c <= 4."""
    x, p = xp
    for a in range(5):
        for m in range(5):
            for c in range(5):
                direct = (
                    np.linalg.matrix_power(p, a)
                    @ np.linalg.matrix_power(x, m)
                    @ np.linalg.matrix_power(p, c)
                )
                expanded = poly_matrix(canonicalize_p_x_p(a, m, c), x, p)
                err = _relative_gap(direct, expanded, KEEP)
                assert err < 1e-9, f"(a,m,c)=({a},{m},{c}) err={err:.2e}"


def test_commutator_matches_matrix_oracle(xp):
    x, p = xp
    for n in range(5):
        for m in range(5):
            direct = (
                np.linalg.matrix_power(p, n) @ np.linalg.matrix_power(x, m)
                - np.linalg.matrix_power(x, m) @ np.linalg.matrix_power(p, n)
            )
            expanded = poly_matrix(commutator_pn_xm(n, m), x, p)
            err = _relative_gap(direct, expanded, KEEP)
            assert err < 1e-9, f"(n,m)=({n},{m}) err={err:.2e}"


def test_exp_translation_matches_matrix_oracle(xp):
    """p^n e^{m x} = e^{m x} (p - i m)^n on the oscillator truncation."""
    import scipy.linalg

    x, p = xp
    for m in (-3, -2, -1, 1, 2, 3):
        exp_mx = scipy.linalg.expm(m * x)
        for n in range(5):
            direct = np.linalg.matrix_power(p, n) @ exp_mx
            expanded = exp_poly_matrix(translate_p_through_exp(n, m), x, p)
            err = _relative_gap(direct, expanded, KEEP)
            assert err < 1e-9, f"Exp (m,n)=({m},{n}) err={err:.2e}"


def test_trig_translation_matches_matrix_oracle():
    """p^n e^{i m theta} = e^{i m theta} (p + m)^n in the Fourier truncation."""
    cutoff = 12
    shift, p = fourier_shift_p(cutoff)
    for m in (-3, -2, -1, 1, 2, 3):
        base = (
            np.linalg.matrix_power(shift, m)
            if m >= 0
            else np.linalg.matrix_power(shift.conj().T, -m)
        )
        for n in range(5):
            direct = np.linalg.matrix_power(p, n) @ base
            expanded = trig_poly_matrix(translate_p_through_exp(n, 1j * m), shift, p)
            err = np.max(np.abs(central_block(direct - expanded, 4)))
            assert err < 1e-9, f"TrigExp (m,n)=({m},{n}) err={err:.2e}"


def test_trig_translation_coefficients_are_real():
    # closure of trig tables over real arithmetic rests on this
    for m in (-3, -1, 2):
        for n in range(5):
            poly = translate_p_through_exp(n, 1j * m)
            assert all(term.coeff.imag == 0 for term in poly.terms)
            assert all(term.base_power == m for term in poly.terms)


def test_exp_translation_binomial_structure():
    poly = translate_p_through_exp(2, 1)
    # (p - i)^2 = p^2 - 2 i p - 1
    by_q = {t.p_power: t.coeff for t in poly.terms}
    assert by_q[2] == 1
    assert by_q[1] == -2j
    assert by_q[0] == -1


def test_identity_cases_are_trivial():
    assert commutator_pn_xm(0, 3).terms == ()
    assert commutator_pn_xm(3, 0).terms == ()
    poly = canonicalize_p_x_p(0, 2, 1)
    assert len(poly.terms) == 1
    assert poly.terms[0] == poly.terms[0].__class__(coeff=1.0 + 0j, base_power=2, p_power=1)


@given(n=st.integers(0, 6), m=st.integers(0, 6))
@settings(max_examples=60, deadline=None)
def test_commutator_canonical_term_count(n, m):
    """[p^n, x^m] has min(n, m) terms, one per contraction order."""
    poly = commutator_pn_xm(n, m)
    assert len(poly.terms) == min(n, m)


@given(a=st.integers(0, 4), m=st.integers(0, 4), c=st.integers(0, 4))
@settings(max_examples=40, deadline=None)
def test_canonicalize_adjoint_symmetry(a, m, c, xp):
    """Evaluated expansions of (a,m,c) and (c,m,a) are mutually adjoint.

    The canonical coefficient lists themselves are not conjugate term by
    term (reordering the adjoint reintroduces commutators), so the check
    has to go through an operator representation.
    """
    x, p = xp
    left = poly_matrix(canonicalize_p_x_p(a, m, c), x, p)
    right = poly_matrix(canonicalize_p_x_p(c, m, a), x, p)
    assert _relative_gap(left, right.conj().T, KEEP) < 1e-9


@given(n=st.integers(0, 6), mu=st.integers(-6, 6).filter(lambda v: v != 0))
@settings(max_examples=60, deadline=None)
def test_translate_term_count_and_leading(n, mu):
    poly = translate_p_through_exp(n, mu)
    assert len(poly.terms) == n + 1
    lead = max(poly.terms, key=lambda t: t.p_power)
    assert lead.p_power == n and lead.coeff == 1


def test_exponent_ceiling_rejected():
    with pytest.raises(BadParameter):
        commutator_pn_xm(MAX_EXPONENT + 1, 2)
    with pytest.raises(BadParameter):
        translate_p_through_exp(2, MAX_EXPONENT + 1)
    with pytest.raises(BadParameter):
        canonicalize_p_x_p(12, 2, 11)


def test_nonsense_exponent_rejected():
    with pytest.raises(BadParameter):
        translate_p_through_exp(2, 0.5)
    with pytest.raises(BadParameter):
        translate_p_through_exp(2, 0)
    with pytest.raises(BadParameter):
        commutator_pn_xm(-1, 2)


def test_base_kind_tagging():
    assert canonicalize_p_x_p(1, 1, 0).base_kind is BaseKind.POWER
    assert translate_p_through_exp(1, 2).base_kind is BaseKind.EXP
    assert translate_p_through_exp(1, 2j).base_kind is BaseKind.TRIG_EXP
