import numpy as np
import pytest

import specqual as sq

EX4_GRID = np.geomspace(1e-7, 0.15, 448)


@pytest.fixture(scope="session")
def tikhonov():
    return sq.get_filter("tikhonov")


@pytest.fixture(scope="session")
def tsvd():
    return sq.get_filter("tsvd")


@pytest.fixture(scope="session")
def ex3():
    return sq.get_filter("ex3_exp")


@pytest.fixture(scope="session")
def ex4():
    return sq.get_filter("ex4_log")


@pytest.fixture(scope="session")
def ex7():
    return sq.get_filter("ex7_piecewise")


@pytest.fixture(scope="session")
def ex8():
    return sq.get_filter("ex8_osc", k=1.0)


@pytest.fixture(scope="session")
def ex9():
    return sq.get_filter("ex9_osc")


@pytest.fixture(scope="session")
def ex10():
    return sq.get_filter("ex10_osc")


@pytest.fixture(scope="session")
def landweber():
    return sq.get_filter("landweber")


@pytest.fixture(scope="session")
def showalter():
    return sq.get_filter("showalter")


@pytest.fixture(scope="session")
def rho_alpha():
    return sq.order_fn("alpha")


@pytest.fixture(scope="session")
def rho_sqrt_alpha():
    return sq.order_fn("alpha^0.5")


@pytest.fixture(scope="session")
def rho_exp():
    return sq.order_fn("exp(-1/alpha)")


@pytest.fixture(scope="session")
def rho_exp_sqrt():
    return sq.order_fn("exp(-1/sqrt(alpha))")


@pytest.fixture(scope="session")
def rho_log():
    return sq.order_fn("-1/ln(alpha)", EX4_GRID)


@pytest.fixture(scope="session")
def rho_log_sqrt():
    return sq.order_fn("(-ln(alpha))^(-0.5)", EX4_GRID)


@pytest.fixture(scope="session")
def s_lambda():
    return sq.source_fn("lambda")


@pytest.fixture(scope="session")
def s_sqrt():
    return sq.source_fn("lambda^0.5")


@pytest.fixture(scope="session")
def s_ratio():
    return sq.source_fn("lambda/(1+lambda)")
