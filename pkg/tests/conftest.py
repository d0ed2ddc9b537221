import numpy as np
import pytest

import qmbootstrap as qb


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def harmonic():
    """V = x^2, spectrum 2n + 1."""
    return qb.validate_spec(qb.PotentialSpec(family=qb.Family.EVEN_POLYNOMIAL, coeffs=(0.0, 0.0, 1.0)))


@pytest.fixture(scope="session")
def quartic():
    """V = x^2 + x^4."""
    return qb.validate_spec(
        qb.PotentialSpec(family=qb.Family.EVEN_POLYNOMIAL, coeffs=(0.0, 0.0, 1.0, 0.0, 1.0))
    )


@pytest.fixture(scope="session")
def hydrogen():
    """Coulomb N = 1, l = 0, levels -1/(4 n^2)."""
    return qb.validate_spec(qb.PotentialSpec(family=qb.Family.COULOMB, coeffs=(1.0,), angular_l=0))


@pytest.fixture(scope="session")
def toda():
    return qb.validate_spec(qb.PotentialSpec(family=qb.Family.TODA, coeffs=(1.0,)))


@pytest.fixture(scope="session")
def trig():
    return qb.validate_spec(qb.PotentialSpec(family=qb.Family.TRIG, coeffs=(1.0,)))


@pytest.fixture(scope="session")
def yukawa():
    return qb.validate_spec(qb.PotentialSpec(family=qb.Family.YUKAWA, coeffs=(4.0,), angular_l=0))
