import numpy as np
import pytest

from carleman.coeffmap import RealPolynomial, p_to_q
from carleman.liouville import OperatorCoefficients
from carleman.profile import ChangeOfVariables, WeightProfile
from carleman.scattering import PotentialSpec, scattering_matrix, solve_lippmann_schwinger


@pytest.fixture(scope="session")
def cosh_profile():
    return WeightProfile("cosh")


@pytest.fixture(scope="session")
def cov2(cosh_profile):
    return ChangeOfVariables(cosh_profile, 2)


@pytest.fixture(scope="session")
def cov3(cosh_profile):
    return ChangeOfVariables(cosh_profile, 3)


@pytest.fixture(scope="session")
def q_x2():
    return p_to_q(RealPolynomial([0.0, 0.0, 1.0]))


@pytest.fixture(scope="session")
def q_x2m1():
    return p_to_q(RealPolynomial([-1.0, 0.0, 1.0]))


@pytest.fixture(scope="session")
def q_x3():
    return p_to_q(RealPolynomial([0.0, 0.0, 0.0, 1.0]))


@pytest.fixture(scope="session")
def op2(q_x2, cov2):
    return OperatorCoefficients(q_x2, cov2)


@pytest.fixture(scope="session")
def pot2(op2):
    return PotentialSpec.from_operator(op2)


@pytest.fixture(scope="session")
def op2m1(q_x2m1, cov2):
    return OperatorCoefficients(q_x2m1, cov2)


@pytest.fixture(scope="session")
def pot2m1(op2m1):
    return PotentialSpec.from_operator(op2m1)


@pytest.fixture(scope="session")
def op3(q_x3, cov3):
    return OperatorCoefficients(q_x3, cov3)


@pytest.fixture(scope="session")
def pot3(op3):
    return PotentialSpec.from_operator(op3)


@pytest.fixture(scope="session")
def field2(pot2):
    """n=2 cosh eigenfunction at k = 1, X = 1e4."""
    return solve_lippmann_schwinger(pot2, 1.0, X=1.0e4)


@pytest.fixture(scope="session")
def smatrix2(pot2):
    return scattering_matrix(pot2, 1.0, X=1.0e4)


@pytest.fixture(scope="session")
def smatrix2m1(pot2m1):
    return scattering_matrix(pot2m1, 1.0, X=1.0e4)


@pytest.fixture(scope="session")
def entries2m1(smatrix2m1):
    S = smatrix2m1.S
    return {"s11": S[0, 0], "s12": S[0, 1], "s21": S[1, 0], "s22": S[1, 1]}


@pytest.fixture(scope="session")
def field2m1(pot2m1):
    return solve_lippmann_schwinger(pot2m1, 1.0, X=1.0e4)


@pytest.fixture(scope="session")
def field3(pot3):
    return solve_lippmann_schwinger(pot3, 1.0, X=1.0e4)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
