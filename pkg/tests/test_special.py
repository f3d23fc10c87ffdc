import math

import mpmath
import pytest

from bayesgeom.errors import DomainError
from bayesgeom.numerics import log_beta, log_binom, log_gamma


def test_log_gamma_known_values():
    assert log_gamma(1.0) == 0.0
    assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), abs=1e-15)
    # 9! = 362880
    assert log_gamma(10.0) == pytest.approx(math.log(362880.0), rel=1e-15)


def test_log_gamma_relative_error_against_mpmath():
    mpmath.mp.dps = 40
    for x in [1e-3, 0.02, 0.5, 1.0, 1.7, 10.0, 123.456, 1e4, 1e6]:
        truth = float(mpmath.loggamma(x))
        got = log_gamma(x)
        if truth == 0.0:
            assert got == 0.0
        else:
            assert abs(got - truth) / abs(truth) <= 1e-13


@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5])
def test_log_gamma_domain(bad):
    with pytest.raises(DomainError):
        log_gamma(bad)


def test_log_beta_known_values():
    assert log_beta(1, 1) == 0.0
    # B(2,8) = 1/72 exactly
    assert log_beta(2, 8) == pytest.approx(math.log(1 / 72), rel=1e-14)
    assert log_beta(0.5, 0.5) == pytest.approx(math.log(math.pi), rel=1e-15)


def test_log_beta_symmetry_is_exact():
    for a, b in [(0.7, 11.3), (2.5, 40.0), (1e-2, 3.0), (123.4, 0.56)]:
        assert log_beta(a, b) == log_beta(b, a)


def test_log_beta_domain():
    with pytest.raises(DomainError):
        log_beta(0.0, 1.0)
    with pytest.raises(DomainError):
        log_beta(1.0, -2.0)


def test_log_binom():
    assert log_binom(0, 0) == 0.0
    assert log_binom(10, 2) == pytest.approx(math.log(45), rel=1e-14)
    assert log_binom(20, 10) == pytest.approx(math.log(184756), rel=1e-13)
    with pytest.raises(DomainError):
        log_binom(5, 6)
