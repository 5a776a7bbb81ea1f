"""Acceptance suite: twelve checks producing a machine-readable report.

Every check returns a measured value, the target it is compared against
and a tolerance. Checks never abort the suite; an exception inside one is
recorded as a failure with the message in ``desc``.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from decimal import Decimal, localcontext
from typing import Callable

import numpy as np

from .geometry import (
    ModelParams,
    constant_curvature,
    de_sitter,
    dec_margin,
    model_profile,
    perturbed,
    schwarzschild_de_sitter_capped,
    sds_horizon_radii,
    tabulated,
)
from .mass import (
    clifford_torus_hawking_mass,
    hawking_mass,
    mass_profile,
    one_harmonic_mass_of_profile,
    polarized_mass,
    sphere_hawking_mass,
)
from .pgreen import RadialGreen, flux
from .specfun import (
    bracket_constant,
    polarization_constant,
    upsilon_pair,
    upsilon_second,
)
from .structural import (
    asymptotic_constants,
    coefficients_closed_form,
    coefficients_ode,
    kappa,
    p_limit_profiles,
)

DEC_SLACK = 1e-9


class UnknownCheckError(KeyError):
    pass


@dataclass
class CheckResult:
    id: str
    desc: str
    anchor: str
    value: float
    target: float
    tol: float
    passed: bool
    ms: float

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return {k: d[k] for k in ("id", "desc", "anchor", "value", "target", "tol", "pass", "ms")}


@dataclass
class Outcome:
    value: float
    target: float
    passed: bool
    note: str = ""


@dataclass
class VerificationReport:
    checks: list[CheckResult]

    @property
    def n_pass(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def n_fail(self) -> int:
        return len(self.checks) - self.n_pass

    @property
    def all_passed(self) -> bool:
        return self.n_fail == 0

    def as_dict(self) -> dict:
        return {"checks": [c.as_dict() for c in self.checks],
                "summary": {"pass": self.n_pass, "fail": self.n_fail}}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2)


# ------------------------------------------------------------------ profiles

def dec_profiles(Lambda: float = 3.0) -> dict:
    """Profiles with ``R >= 2 Lambda`` everywhere, all with a pole at the centre."""
    cc = constant_curvature((2.0 * Lambda + 0.6) / 6.0)
    r = np.linspace(0.0, cc.r_max, 60)
    ph = cc.phi(r)
    ph[-1] = 0.0
    radius = math.sqrt(3.0 / Lambda)
    return {
        "constant-curvature-equator": cc,
        "constant-curvature-wall": constant_curvature((2.0 * Lambda + 1.8) / 6.0, cap=0.8 * radius),
        "stronger-curvature-equator": constant_curvature((2.0 * Lambda + 3.0) / 6.0),
        "perturbed-negative-wall": perturbed(Lambda, -0.3, "quadratic", cap=0.7 * radius),
        "tabulated-constant-curvature": tabulated(r, ph),
    }


def dec_violating_profile(Lambda: float = 3.0):
    return perturbed(Lambda, 0.3, "quadratic")


# ------------------------------------------------------------------- checks

def _check_upsilon(tol: float) -> Outcome:
    worst = 0.0
    for p in (1.1, 1.5, 2.0, 2.5, 2.9):
        for x in np.linspace(0.01, 0.99, 99):
            ups, dups = upsilon_pair(p, float(x))
            d2 = upsilon_second(p, float(x))
            residual = (x * d2 - (-p / (p - 1.0) + (p + 1.0) / (2.0 * (p - 1.0)) * x) * dups / (1.0 - x)
                        + (5.0 - p) / (4.0 * (p - 1.0)) * ups / (1.0 - x))
            worst = max(worst, abs(residual))
    start_ok = True
    gauss_worst = 0.0
    for p in (1.1, 1.5, 2.0, 2.5, 2.9):
        ups0, dups0 = upsilon_pair(p, 0.0)
        start_ok &= abs(ups0 - 1.0) <= 1e-12 and abs(dups0 + (5.0 - p) / (4.0 * p)) <= 1e-12
        ups1, dups1 = upsilon_pair(p, 1.0)
        gauss_worst = max(gauss_worst, abs(ups1 + 2.0 * (p - 1.0) / (5.0 - p) * dups1))
    return Outcome(worst, 0.0, worst <= tol and start_ok and gauss_worst <= 1e-10,
                   f"gauss combination {gauss_worst:.3e}")


def _strictly_approaching(ratios) -> bool:
    gaps = [abs(r - 1.0) for r in ratios]
    return all(b < a for a, b in zip(gaps, gaps[1:]))


def _check_gamma_ratios(tol: float) -> Outcome:
    ps = (1.2, 1.1, 1.05, 1.02)
    k_ratios = [polarization_constant(p) / (p - 1.0) for p in ps]
    c_ratios = [bracket_constant(p) / (0.75 * math.sqrt(math.pi) * (p - 1.0) ** 1.5) for p in ps]
    at_105 = max(abs(k_ratios[2] - 1.0), abs(c_ratios[2] - 1.0))
    ok = (at_105 <= tol and _strictly_approaching(k_ratios) and _strictly_approaching(c_ratios))
    note = "K ratios " + ", ".join(f"{v:.4f}" for v in k_ratios) + "; C ratios " + ", ".join(
        f"{v:.4f}" for v in c_ratios)
    return Outcome(at_105, 0.0, ok, note)


def _check_routes(tol: float) -> Outcome:
    ts = np.linspace(-10.0, 10.0, 41)
    worst = 0.0
    for Lambda in (0.3, 3.0):
        for p in (1.2, 1.5, 2.0, 2.5):
            params = ModelParams(Lambda, p)
            cf = coefficients_closed_form(params)
            od = coefficients_ode(params, -20.0, 10.0)
            for t in ts:
                a, b = cf.state(float(t)), od.state(float(t))
                worst = max(worst, abs(a.mu - b.mu), abs(a.lam - b.lam))
    exact_worst = 0.0
    for p in (1.2, 1.5, 2.0, 2.5):
        params = ModelParams(0.0, p)
        exact = coefficients_closed_form(params)
        od = coefficients_ode(params, -20.0, 10.0)
        for t in ts:
            a, b = exact.state(float(t)), od.state(float(t))
            exact_worst = max(exact_worst, abs(a.mu - 1.0 / (3.0 - p)), abs(b.mu - a.mu), abs(b.lam - a.lam))
    two = coefficients_closed_form(ModelParams(0.0, 2.0))
    for t in ts:
        exact_worst = max(exact_worst, abs(two.exp_lambda(float(t)) / (math.exp(t) / (8.0 * math.pi)) - 1.0))
    exact_worst = max(exact_worst, abs(kappa(2.0) + math.log(8.0 * math.pi)))
    return Outcome(worst, 0.0, worst <= tol and exact_worst <= 1e-9, f"Lambda=0 exact {exact_worst:.3e}")


def _check_de_sitter(tol: float) -> Outcome:
    Lambda = 3.0
    profile = de_sitter(Lambda)
    worst = 0.0
    polar_worst = 0.0
    for p in (1.3, 2.0, 2.7):
        params = ModelParams(Lambda, p)
        mp = mass_profile(profile, params, np.linspace(-12.0, 12.0, 25))
        worst = max(worst, float(np.max(np.abs(mp.masses))))
        br = polarized_mass(profile, params)
        polar_worst = max(polar_worst, abs(br.total),
                          abs(br.bulk + params.R_Lambda / 4.0 * br.K_p))
    return Outcome(worst, 0.0, worst <= tol and polar_worst <= 2e-5, f"polarized {polar_worst:.3e}")


def _check_sds(tol: float) -> Outcome:
    worst = 0.0
    horizon_worst = 0.0
    for Lambda, m in ((3.0, 0.05), (3.0, 0.1), (1.0, 0.3)):
        lo, hi = sds_horizon_radii(Lambda, m)
        for R in (lo, hi):
            horizon_worst = max(horizon_worst, abs(1.0 - Lambda * R * R / 3.0 - 2.0 * m / R))
        result = one_harmonic_mass_of_profile(schwarzschild_de_sitter_capped(Lambda, m), Lambda)
        worst = max(worst, abs(result.value - m), abs(result.quadrature - m))
    return Outcome(worst, 0.0, worst <= tol and horizon_worst <= 1e-12, f"horizon phi {horizon_worst:.3e}")


def _check_small_sphere(tol: float) -> Outcome:
    Lambda = 3.0
    profile = constant_curvature((2.0 * Lambda + 0.6) / 6.0)
    target = 0.6 / (16.0 * math.pi)
    worst = 0.0
    for p in (1.5, 2.0):
        green = RadialGreen(profile, p)
        ts = [-(p - 1.0) * green.log_u(f * profile.r_max) for f in (1e-3, 3e-3, 1e-2)]
        mp = mass_profile(profile, ModelParams(Lambda, p), ts)
        for row in mp.rows:
            quotient = row.mass / (4.0 * math.pi / 3.0 * row.r**3)
            worst = max(worst, abs(quotient / target - 1.0))
    return Outcome(worst, 0.0, worst <= tol)


def _identity_ratio(mp) -> float:
    return max(abs(r.dmdt_num - r.dmdt_formula) / max(1e-6, 1e-4 * abs(r.dmdt_formula)) for r in mp.rows)


def _check_monotonicity(tol: float) -> Outcome:
    Lambda = 3.0
    grid = np.linspace(-12.0, 12.0, 25)
    worst_drop = 0.0
    identity = 0.0
    dec_ok = True
    for profile in dec_profiles(Lambda).values():
        dec_ok &= dec_margin(profile, Lambda) >= -DEC_SLACK
        for p in (1.2, 1.5, 2.0, 2.5, 2.8):
            mp = mass_profile(profile, ModelParams(Lambda, p), grid)
            worst_drop = max(worst_drop, float(np.max(-np.diff(mp.masses))))
            identity = max(identity, _identity_ratio(mp))
    violating = dec_violating_profile(Lambda)
    dec_ok &= dec_margin(violating, Lambda) < 0.0
    for p in (1.5, 2.5):
        identity = max(identity, _identity_ratio(mass_profile(violating, ModelParams(Lambda, p), grid)))
    return Outcome(worst_drop, 0.0, worst_drop <= tol and identity <= 1.0 and dec_ok,
                   f"identity error / tolerance {identity:.3e}")


def _check_asymptotics(tol: float) -> Outcome:
    worst = 0.0
    t = 30.0
    for Lambda, p in ((3.0, 2.0), (0.3, 1.5)):
        params = ModelParams(Lambda, p)
        c_lambda, c_mu = asymptotic_constants(params)
        st = coefficients_closed_form(params).state(t)
        worst = max(worst, abs(math.exp(t / (p - 1.0) + st.lam) / c_lambda - 1.0),
                    abs(math.exp(t / (p - 1.0)) * st.mu / c_mu - 1.0))
    return Outcome(worst, 0.0, worst <= tol)


def _strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def _check_p_trends(tol: float) -> Outcome:
    ps = (1.3, 1.2, 1.1, 1.05)
    below = p_limit_profiles(0.3, 1.0, ps)
    el_gaps = [abs(r.exp_lambda - r.exp_lambda_target) for r in below]
    mel_gaps = [abs(r.mu_exp_lambda - r.mu_exp_lambda_target) for r in below]
    above = p_limit_profiles(0.3, 3.0, ps)
    el_above = [r.exp_lambda for r in above]
    mel_above = [r.mu_exp_lambda for r in above]
    ok = (_strictly_decreasing(el_gaps) and _strictly_decreasing(mel_gaps)
          and _strictly_decreasing(el_above) and _strictly_decreasing(mel_above))
    note = "e^lambda gaps " + ", ".join(f"{g:.3e}" for g in el_gaps)
    return Outcome(el_gaps[-1], 0.0, ok, note)


def _clifford_oracle(Lambda: float) -> float:
    """Clifford-torus Hawking mass in 40-digit decimal arithmetic."""
    with localcontext() as ctx:
        ctx.prec = 45
        pi = _decimal_pi()
        lam = Decimal(repr(Lambda))
        value = (Decimal(3) * pi / (Decimal(8) * lam)).sqrt() * (1 - pi / 2)
        return float(value)


def _decimal_pi() -> Decimal:
    """Pi to the current decimal precision (series from the ``decimal`` module documentation)."""
    with localcontext() as ctx:
        ctx.prec += 2
        three = Decimal(3)
        lasts, t, s, n, na, d, da = 0, three, 3, 1, 0, 0, 24
        while s != lasts:
            lasts = s
            n, na = n + na, na + 8
            d, da = d + da, da + 32
            t = (t * n) / d
            s += t
    return +s


def _check_hawking(tol: float) -> Outcome:
    worst = 0.0
    for Lambda in (3.0, 1.0, 0.3):
        worst = max(worst, abs(clifford_torus_hawking_mass(Lambda) - _clifford_oracle(Lambda)))
        profile = de_sitter(Lambda)
        radius = math.sqrt(3.0 / Lambda)
        for f in (0.01, 0.2, 0.5, 0.9, 0.999):
            worst = max(worst, abs(sphere_hawking_mass(profile, Lambda, f * radius)))
        worst = max(worst, abs(hawking_mass(12.0 * math.pi / Lambda, 0.0, Lambda)))
    return Outcome(worst, 0.0, worst <= tol)


def _flux_profiles() -> dict:
    profiles = {"de-sitter": de_sitter(3.0), "model-negative": model_profile(-3.0),
                "flat": model_profile(0.0), "dec-violating": dec_violating_profile(3.0)}
    profiles.update(dec_profiles(3.0))
    return profiles


def _check_flux(tol: float) -> Outcome:
    worst = 0.0
    for profile in _flux_profiles().values():
        for p in (1.2, 1.5, 2.0, 2.5, 2.8):
            green = RadialGreen(profile, p)
            target = 4.0 * math.pi * (p - 1.0) ** (p - 1.0)
            for t in np.linspace(-20.0, 20.0, 21):
                worst = max(worst, abs(flux(green, float(t)) / target - 1.0))
    return Outcome(worst, 0.0, worst <= tol)


def _check_finiteness(tol: float) -> Outcome:
    Lambda = 3.0
    profiles = {"de-sitter": de_sitter(Lambda), "dec-violating": dec_violating_profile(Lambda)}
    profiles.update(dec_profiles(Lambda))
    worst = 0.0
    for profile in profiles.values():
        for p in (1.3, 2.0, 2.7):
            fb = polarized_mass(profile, ModelParams(Lambda, p)).finiteness
            worst = max(worst, fb.area_integral / fb.bound)
    return Outcome(worst, 1.0, worst <= 1.0 + tol)


@dataclass(frozen=True)
class CheckDefinition:
    id: str
    desc: str
    anchor: str
    tol: float
    run: Callable[[float], Outcome]


CHECKS: tuple[CheckDefinition, ...] = (
    CheckDefinition("upsilon-ode-residual",
              "hypergeometric ODE residual of upsilon on x in [0.01,0.99], p in {1.1,1.5,2,2.5,2.9}; "
              "initial values; bracket vanishing at x=1 by Gauss summation",
              "upsilon second-order ODE; Gauss summation at x=1", 1e-8, _check_upsilon),
    CheckDefinition("gamma-ratio-asymptotics",
              "K_p/(p-1) and C_b/((3 sqrt(pi)/4)(p-1)^(3/2)) within 0.2 of 1 at p=1.05 and approaching 1 "
              "monotonically along p in {1.2,1.1,1.05,1.02}",
              "p->1 expansions of the Gamma-ratio constants", 0.2, _check_gamma_ratios),
    CheckDefinition("route-agreement",
              "closed form vs ODE: max |d mu|, |d lambda| on t in [-10,10] for Lambda in {0.3,3}, "
              "p in {1.2,1.5,2,2.5}; Lambda=0 exact formulas to 1e-9",
              "structural ODE system; hypergeometric Phi, Psi", 1e-6, _check_routes),
    CheckDefinition("de-sitter-rigidity",
              "de Sitter: max |m(t)| on t in [-12,12], p in {1.3,2,2.7}; polarized total and "
              "bulk + R_Lambda K_p/4 within 2e-5",
              "vanishing of the polarized mass on the model", 1e-6, _check_de_sitter),
    CheckDefinition("sds-one-harmonic",
              "Schwarzschild-de Sitter 1-harmonic mass equals m for (3,0.05), (3,0.1), (1,0.3); "
              "horizon residuals within 1e-12",
              "1-harmonic mass of Schwarzschild-de Sitter", 1e-9, _check_sds),
    CheckDefinition("small-sphere-limit",
              "m(t)/((4 pi/3) r^3) against (R-2 Lambda)/(16 pi) = 0.6/(16 pi) for r <= 1e-2 R_max, p in {1.5,2}",
              "small sphere limit", 1e-2, _check_small_sphere),
    CheckDefinition("monotonicity-derivative-identity",
              "largest drop of m(t) on five DEC profiles, p in {1.2,1.5,2,2.5,2.8}; numeric dm/dt "
              "against the radial derivative formula, also on a DEC-violating profile",
              "monotonicity formula and its derivative", 1e-8, _check_monotonicity),
    CheckDefinition("asymptotic-constants",
              "relative error at t=30 of e^(t/(p-1)) e^lambda and e^(t/(p-1)) mu against their "
              "Gamma-ratio limits for (3,2) and (0.3,1.5)",
              "t -> +inf expansions of mu and lambda", 1e-3, _check_asymptotics),
    CheckDefinition("p-to-one-trends",
              "Lambda=0.3: gaps to e^(t/2)/(16 pi) and e^(t/2)/(32 pi) at t=1 strictly decrease along "
              "p in {1.3,1.2,1.1,1.05}; at t=3 both quantities decrease",
              "p -> 1 pointwise limits of the coefficients", 0.0, _check_p_trends),
    CheckDefinition("hawking-anchors",
              "Clifford torus against a 45-digit decimal oracle; de Sitter spheres and equator at zero",
              "Hawking mass with cosmological constant", 1e-12, _check_hawking),
    CheckDefinition("flux-identity",
              "relative deviation of e^(-t)|grad w|^(p-1) 4 pi r^2 from 4 pi (p-1)^(p-1) over nine "
              "profiles, p in {1.2,1.5,2,2.5,2.8}, t in [-20,20]",
              "conserved p-flux of the level sets", 1e-10, _check_flux),
    CheckDefinition("finiteness-bound",
              "largest ratio of int e^lambda |Sigma| dt to its Hoelder bound over seven Lambda>0 profiles, "
              "p in {1.3,2,2.7}",
              "finiteness of the polarized bulk term", 0.0, _check_finiteness),
)

CHECK_IDS = tuple(c.id for c in CHECKS)


def run_suite(selection="all", tolerances: dict | None = None) -> VerificationReport:
    """Run the selected checks in their fixed order."""
    tolerances = dict(tolerances or {})
    if selection == "all" or selection is None:
        chosen = set(CHECK_IDS)
    else:
        chosen = {selection} if isinstance(selection, str) else set(selection)
    unknown = sorted((chosen | set(tolerances)) - set(CHECK_IDS))
    if unknown:
        raise UnknownCheckError(
            f"unknown check id(s) {', '.join(unknown)}; available: {', '.join(CHECK_IDS)}")
    results = []
    for check in CHECKS:
        if check.id not in chosen:
            continue
        tol = float(tolerances.get(check.id, check.tol))
        start = time.perf_counter()
        try:
            outcome = check.run(tol)
            desc = check.desc + (f" [{outcome.note}]" if outcome.note else "")
            value, target, passed = outcome.value, outcome.target, bool(outcome.passed)
        except Exception as exc:  # a failing check must not stop the suite
            desc = f"{check.desc} [error: {type(exc).__name__}: {exc}]"
            value, target, passed = math.nan, math.nan, False
        ms = (time.perf_counter() - start) * 1000.0
        results.append(CheckResult(check.id, desc, check.anchor, float(value), float(target), tol, passed, ms))
    return VerificationReport(results)
