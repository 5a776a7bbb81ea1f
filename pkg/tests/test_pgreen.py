import functools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import frozen
from curvmass.geometry import (
    ProfileError,
    constant_curvature,
    de_sitter,
    model_profile,
    perturbed,
    schwarzschild_de_sitter_capped,
)
from curvmass.pgreen import GreenError, RadialGreen, flux

PROFILES = {
    "de-sitter": lambda: de_sitter(3.0),
    "flat": lambda: model_profile(0.0),
    "hyperbolic": lambda: model_profile(-3.0),
    "cc-wall": lambda: constant_curvature(1.3, cap=0.8),
    "perturbed": lambda: perturbed(3.0, 0.3),
}


@functools.lru_cache(maxsize=None)
def green(name, p):
    return RadialGreen(PROFILES[name](), p)


def test_de_sitter_u_against_quadrature_oracle():
    assert RadialGreen(de_sitter(3.0), 1.5).u(0.3) == pytest.approx(frozen.U_L3_P1_5_R0_3, rel=1e-13)
    assert RadialGreen(de_sitter(0.3), 2.5).u(1.0) == pytest.approx(frozen.U_L0_3_P2_5_R1, rel=1e-13)


@pytest.mark.parametrize("r", [1e-4, 0.01, 0.3, 0.9, 0.999999])
def test_p2_de_sitter_closed_form(r):
    assert RadialGreen(de_sitter(3.0), 2.0).u(r) == pytest.approx(math.sqrt(1 - r * r) / r, rel=1e-13)


@pytest.mark.parametrize("r", [1e-3, 0.5, 3.0, 50.0])
def test_p2_hyperbolic_closed_form(r):
    exact = 1.0 / (r * (math.sqrt(1 + r * r) + r))
    assert RadialGreen(model_profile(-3.0), 2.0).u(r) == pytest.approx(exact, rel=1e-12)


@given(st.sampled_from([1.2, 1.5, 2.0, 2.5, 2.8]), st.floats(1e-3, 1e3))
def test_flat_power_law(p, r):
    beta = (3 - p) / (p - 1)
    assert green("flat", p).u(r) * beta * r**beta == pytest.approx(1.0, rel=1e-12)


def test_flat_p2_level_radius():
    # u = 1/r gives w = log r, the normalisation fixed by the flux identity
    assert green("flat", 2.0).radius_of_level(3.0) == pytest.approx(math.exp(3.0), rel=1e-13)
    w, grad = green("flat", 2.0).w_and_grad(2.0)
    assert (w, grad) == pytest.approx((math.log(2.0), 0.5), rel=1e-13)


@given(st.sampled_from(sorted(PROFILES)), st.sampled_from([1.2, 1.5, 2.0, 2.5, 2.8]), st.floats(-15, 15))
def test_flux_is_conserved(name, p, t):
    assert flux(green(name, p), t) == pytest.approx(4 * math.pi * (p - 1) ** (p - 1), rel=1e-10)


@given(st.sampled_from(sorted(PROFILES)), st.sampled_from([1.3, 2.0, 2.7]), st.floats(-15, 15))
def test_level_point_carries_its_level(name, p, t):
    pt = green(name, p).level_point(t)
    assert -(p - 1) * pt.log_u == pytest.approx(t, abs=1e-12)


@given(st.sampled_from(sorted(PROFILES)), st.sampled_from([1.3, 2.0, 2.7]), st.floats(-15, 15))
def test_level_round_trip(name, p, t):
    # once r(t) rounds to within a few ulps of the wall, w(fl(r)) no longer determines t
    g = green(name, p)
    pt = g.level_point(t)
    if math.isfinite(g.r_max) and pt.gap < 1e-6 * g.r_max:
        return
    w, _ = g.w_and_grad(pt.r)
    assert w == pytest.approx(t, abs=1e-10)


@given(st.sampled_from(sorted(PROFILES)), st.sampled_from([1.3, 2.0, 2.7]), st.floats(1e-3, 0.999))
def test_radius_round_trip(name, p, frac):
    g = green(name, p)
    r = frac * (g.r_max if math.isfinite(g.r_max) else 20.0)
    w, _ = g.w_and_grad(r)
    assert g.radius_of_level(w) == pytest.approx(r, rel=1e-12)


@given(st.sampled_from(sorted(PROFILES)), st.sampled_from([1.3, 2.0, 2.7]),
       st.floats(0.01, 0.95), st.floats(0.01, 0.95))
def test_u_decreases_outward(name, p, f1, f2):
    g = green(name, p)
    scale = g.r_max if math.isfinite(g.r_max) else 10.0
    r1, r2 = sorted((f1 * scale, f2 * scale))
    if r2 - r1 > 1e-9 * scale:
        assert g.u(r1) > g.u(r2)


@pytest.mark.parametrize("name", ["de-sitter", "perturbed", "cc-wall"])
def test_gradient_matches_finite_difference(name):
    g = green(name, 1.7)
    r, h = 0.4, 1e-6
    w_plus, _ = g.w_and_grad(r + h)
    w_minus, _ = g.w_and_grad(r - h)
    _, grad = g.w_and_grad(r)
    slope = (w_plus - w_minus) / (2 * h) * math.sqrt(float(g.profile.phi(r)))
    assert slope == pytest.approx(grad, rel=1e-7)


def test_grad_norm_u_is_profile_independent():
    for name in PROFILES:
        assert green(name, 2.5).grad_norm_u(0.5) == pytest.approx(0.5 ** (-2 / 1.5), rel=1e-15)
    assert green("de-sitter", 2.0).grad_norm_u(0.5) == 4.0


def test_extreme_level_is_rejected():
    with pytest.raises(GreenError):
        green("de-sitter", 1.05).level_point(200.0)
    with pytest.raises(GreenError):
        green("de-sitter", 2.0).level_point(math.nan)


def test_profile_without_pole_is_rejected():
    with pytest.raises(ProfileError, match="no smooth pole"):
        RadialGreen(schwarzschild_de_sitter_capped(3.0, 0.1), 2.0)


def test_u_accepts_arrays():
    g = green("de-sitter", 2.0)
    r = np.array([[0.2, 0.4], [0.6, 0.8]])
    np.testing.assert_allclose(g.u(r), np.sqrt(1 - r * r) / r, rtol=1e-13)
