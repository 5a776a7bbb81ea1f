import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
from curvmass.specfun import (
    DomainError,
    bracket_constant,
    hyp2f1,
    hyper_params,
    log_gamma_signed,
    mu_constant_ratio,
    polarization_constant,
    psi_bracket,
    upsilon_pair,
    upsilon_second,
)

ps = st.floats(1.05, 2.95)


def test_parameters_at_two():
    hp = hyper_params(2.0)
    assert hp.a_p == pytest.approx(frozen.A_P2, rel=1e-15)
    assert hp.b_p == pytest.approx(frozen.B_P2, rel=1e-15)
    assert hp.c_p == 2.0


def test_upsilon_against_oracle():
    ups, dups = upsilon_pair(2.0, 0.5)
    assert ups == pytest.approx(frozen.UPSILON_P2_HALF, rel=1e-14)
    assert dups == pytest.approx(frozen.UPSILON_PRIME_P2_HALF, rel=1e-14)


@pytest.mark.parametrize("p,k,c", [
    (1.5, frozen.K_P1_5, frozen.C_B1_5),
    (2.0, frozen.K_P2, frozen.C_B2),
    (2.5, frozen.K_P2_5, frozen.C_B2_5),
])
def test_gamma_constants(p, k, c):
    assert polarization_constant(p) == pytest.approx(k, rel=1e-13)
    assert bracket_constant(p) == pytest.approx(c, rel=1e-13)
    assert mu_constant_ratio(p) == pytest.approx(k / c, rel=1e-13)


@given(ps)
def test_polarization_constant_is_twice_upsilon_at_one(p):
    assert polarization_constant(p) == pytest.approx(2.0 * upsilon_pair(p, 1.0)[0], rel=1e-12)


@given(ps)
def test_upsilon_initial_data(p):
    ups, dups = upsilon_pair(p, 0.0)
    assert ups == 1.0
    assert dups == pytest.approx(-(5 - p) / (4 * p), rel=1e-15)


@given(ps, st.floats(0.01, 0.99))
def test_upsilon_solves_hypergeometric_equation(p, x):
    hp = hyper_params(p)
    a, b, c = hp.a_p, hp.b_p, hp.c_p
    ups, dups = upsilon_pair(p, x)
    d2 = upsilon_second(p, x)
    residual = x * (1 - x) * d2 + (c - (a + b + 1) * x) * dups - a * b * ups
    assert abs(residual) <= 1e-10 * max(1.0, abs(a * b * ups))


@given(ps, st.floats(0.5, 0.999))
def test_bracket_both_branches_agree(p, x):
    ups, dups = upsilon_pair(p, x)
    direct = ups + 2 * (p - 1) / (5 - p) * x * dups
    assert psi_bracket(p, x) == pytest.approx(direct, rel=1e-8, abs=1e-12)


@pytest.mark.parametrize("p", [1.2, 2.0, 2.8])
def test_bracket_vanishes_like_sqrt_gap(p):
    a, b, c = (mpmath.mpf(v) for v in (hyper_params(p).a_p, hyper_params(p).b_p, hyper_params(p).c_p))
    # leading coefficient of the sqrt(1-x) term, from the connection formula
    lead = -4 * (p - 1) / (5 - p) * mpmath.sqrt(mpmath.pi) * mpmath.gamma(c) / (mpmath.gamma(a) * mpmath.gamma(b))
    y = 1e-24
    assert psi_bracket(p, 1 - y, gap=y) / math.sqrt(y) == pytest.approx(float(lead), rel=1e-9)


def test_hyp2f1_elementary():
    # 2F1(1,1;2;x) = -log(1-x)/x
    for x in (0.1, 0.5, 0.9, 0.99):
        assert hyp2f1(1.0, 1.0, 2.0, x) == pytest.approx(-math.log1p(-x) / x, rel=1e-13)


def test_log_gamma_signed_negative_argument():
    value, sign = log_gamma_signed(-0.5)
    assert sign == -1
    assert math.exp(value) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-14)


def test_domain_errors():
    with pytest.raises(DomainError):
        hyper_params(1.0)
    with pytest.raises(DomainError):
        upsilon_pair(2.0, 1.5)
