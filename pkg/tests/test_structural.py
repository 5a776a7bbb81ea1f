import functools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
from curvmass.geometry import ModelParams
from curvmass.specfun import DomainError
from curvmass.structural import (
    asymptotic_constants,
    coefficients,
    coefficients_closed_form,
    coefficients_ode,
    kappa,
    p_limit_profiles,
    phi_psi,
    phi_psi_rhs,
    riccati_equilibria,
    structural_rhs,
)

ORACLE_POINTS = [
    (3.0, 1.5, 0.0, frozen.ALPHA_L3_P1_5_T0, frozen.MU_L3_P1_5_T0, frozen.EXP_LAMBDA_L3_P1_5_T0),
    (0.3, 2.5, 1.0, frozen.ALPHA_L0_3_P2_5_T1, frozen.MU_L0_3_P2_5_T1, frozen.EXP_LAMBDA_L0_3_P2_5_T1),
    (3.0, 2.0, -2.0, frozen.ALPHA_L3_P2_TM2, frozen.MU_L3_P2_TM2, frozen.EXP_LAMBDA_L3_P2_TM2),
]


@pytest.mark.parametrize("Lambda,p,t,alpha,mu,exp_lambda", ORACLE_POINTS)
def test_closed_form_against_oracle(Lambda, p, t, alpha, mu, exp_lambda):
    st_ = coefficients_closed_form(ModelParams(Lambda, p)).state(t)
    assert st_.alpha == pytest.approx(alpha, rel=1e-12)
    assert st_.mu == pytest.approx(mu, rel=1e-12)
    assert st_.exp_lambda == pytest.approx(exp_lambda, rel=1e-12)


@pytest.mark.parametrize("Lambda,p,t,alpha,mu,exp_lambda", ORACLE_POINTS)
def test_ode_route_against_oracle(Lambda, p, t, alpha, mu, exp_lambda):
    st_ = coefficients_ode(ModelParams(Lambda, p), -20.0, 2.0).state(t)
    assert st_.mu == pytest.approx(mu, rel=1e-9)
    assert st_.exp_lambda == pytest.approx(exp_lambda, rel=1e-9)


def test_flat_p2_exact():
    sc = coefficients(ModelParams(0.0, 2.0))
    assert kappa(2.0) == pytest.approx(-math.log(8 * math.pi), rel=1e-15)
    for t in (-5.0, 0.0, 7.0):
        assert sc.mu(t) == 1.0
        assert sc.exp_lambda(t) == pytest.approx(math.exp(t) / (8 * math.pi), rel=1e-14)


def test_riccati_equilibria():
    assert riccati_equilibria(2.0, 1.0) == pytest.approx((1.0, 3.0), rel=1e-15)


@given(st.floats(1.1, 2.9), st.floats(0.0, 1.0))
def test_equilibria_zero_the_mu_equation(p, alpha):
    try:
        roots = riccati_equilibria(p, alpha)
    except DomainError:
        return
    for mu in roots:
        assert structural_rhs(p, alpha, mu)[0] == pytest.approx(0.0, abs=1e-9 * (1 + mu * mu))


@functools.lru_cache(maxsize=None)
def production(Lambda, p):
    return coefficients(ModelParams(Lambda, p), t_end=10.0)


@given(st.sampled_from([0.3, 3.0, -3.0]), st.sampled_from([1.3, 2.0, 2.7]), st.floats(-6.0, 6.0))
def test_coefficients_solve_the_structural_system(Lambda, p, t):
    sc = production(Lambda, p)
    h = 1e-4
    plus, minus, mid = sc.state(t + h), sc.state(t - h), sc.state(t)
    dmu, dlam = structural_rhs(p, mid.alpha, mid.mu)
    assert (plus.mu - minus.mu) / (2 * h) == pytest.approx(dmu, abs=1e-6)
    assert (plus.lam - minus.lam) / (2 * h) == pytest.approx(dlam, abs=1e-6)


@pytest.mark.parametrize("Lambda", [0.3, 3.0, -3.0])
@pytest.mark.parametrize("p", [1.2, 2.0, 2.8])
def test_early_levels_follow_the_flat_data(Lambda, p):
    # corrections decay like e^(t/(p-1)) and r^2 = e^(2t/(3-p)); push both below 1e-12
    t = -28.0 * max(p - 1, (3 - p) / 2)
    st_ = coefficients(ModelParams(Lambda, p), t_end=0.0).state(t)
    assert st_.alpha == pytest.approx(1 / (3 - p), rel=1e-9)
    assert st_.mu == pytest.approx(1 / (3 - p), rel=1e-9)
    assert st_.lam == pytest.approx(t / (3 - p) + kappa(p), abs=1e-9)


@pytest.mark.parametrize("Lambda,p", [(3.0, 2.0), (0.3, 1.5), (1.0, 2.5)])
def test_asymptotic_constants(Lambda, p):
    params = ModelParams(Lambda, p)
    c_lambda, c_mu = asymptotic_constants(params)
    st_ = coefficients(params).state(30.0)
    scale = math.exp(30.0 / (p - 1))
    assert scale * st_.exp_lambda == pytest.approx(c_lambda, rel=1e-6)
    assert scale * st_.mu == pytest.approx(c_mu, rel=1e-6)


@given(st.sampled_from([1.3, 2.0, 2.7]), st.floats(0.05, 0.9))
def test_phi_psi_solve_their_linear_system(p, frac):
    params = ModelParams(3.0, p)
    r, h = frac, 1e-6
    (a1, b1), (a0, b0) = phi_psi(params, r + h), phi_psi(params, r - h)
    d_phi, d_psi = phi_psi_rhs(p, 3.0, r, *phi_psi(params, r))
    assert (a1 - a0) / (2 * h) == pytest.approx(d_phi, rel=1e-6, abs=1e-8)
    assert (b1 - b0) / (2 * h) == pytest.approx(d_psi, rel=1e-6, abs=1e-8)


def test_ode_route_guards():
    with pytest.raises(DomainError):
        coefficients_ode(ModelParams(3.0, 2.0), t_start=-10.0)
    with pytest.raises(DomainError):
        coefficients_closed_form(ModelParams(-1.0, 2.0))
    sc = coefficients_ode(ModelParams(3.0, 2.0), -20.0, 5.0)
    with pytest.raises(DomainError):
        sc.state(6.0)


def test_p_limit_targets():
    rows = p_limit_profiles(0.3, 1.0, [1.3, 1.1])
    for row in rows:
        assert row.exp_lambda_target == pytest.approx(math.exp(0.5) / (16 * math.pi))
        assert row.mu_exp_lambda_target == pytest.approx(math.exp(0.5) / (32 * math.pi))
    # the gap to the limit at t = 3 > T_Lambda shrinks as p decreases
    far = p_limit_profiles(0.3, 3.0, [1.3, 1.2, 1.1, 1.05])
    values = [row.exp_lambda for row in far]
    assert values == sorted(values, reverse=True)
