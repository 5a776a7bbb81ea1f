"""Structural coefficients ``alpha(t)``, ``mu(t)``, ``lambda(t)`` for a pair ``(Lambda, p)``.

The pair ``(mu, lambda)`` solves the semi-decoupled system

    mu'     = k5 alpha^2 - (k5 alpha + 1/(p-1)) mu + k3 mu^2
    lambda' = k5 alpha - 1/(p-1) - k3 mu

with ``k5 = (5-p)/(p-1)`` and ``k3 = (3-p)/(p-1)``, selected by
``mu -> 1/(3-p)`` and ``lambda - t/(3-p) -> kappa`` as ``t -> -inf``.
``alpha`` comes from the model Green's function.

Three routes are offered:

* ``lambda_zero_exact`` for ``Lambda = 0``, where everything is explicit;
* ``closed_form`` for ``Lambda > 0``, through the hypergeometric functions
  ``Phi`` and ``Psi`` of the model radius (``e^lambda = alpha Psi`` and
  ``mu = alpha Phi / Psi``);
* ``ode``, integrating the system from deep in the asymptotic regime. It is
  the only route for ``Lambda < 0`` and an independent check otherwise.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import ModelParams, model_profile
from .numerics import OdePath, StepUnderflowError, solve_ivp
from .pgreen import LevelPoint, RadialGreen
from .specfun import (
    DomainError,
    bracket_constant,
    mu_constant_ratio,
    psi_bracket,
    upsilon_pair,
)

ROUTES = ("closed_form", "ode", "lambda_zero_exact")
ODE_RTOL = 1e-11
ODE_ATOL = 1e-13
_ALPHA_START_TOL = 1e-12
# mu hugs 1/(3-p) at the start; overshoot below this is integrator noise
_CORRIDOR_SLACK = 1e-9
_NEG_SERIES_FRACTION = 0.9
_EIGHT_PI = 8.0 * math.pi


class StructuralError(RuntimeError):
    """The structural coefficients could not be produced."""


def kappa(p: float) -> float:
    """Constant selecting ``lambda`` at ``t -> -inf``."""
    ratio = (p - 1.0) / (3.0 - p)
    return ratio * math.log(ratio) - math.log(_EIGHT_PI * (3.0 - p))


@functools.lru_cache(maxsize=64)
def model_green(Lambda: float, p: float) -> RadialGreen:
    """Cached Green's function of the model ``phi = 1 - Lambda r^2/3``."""
    return RadialGreen(model_profile(Lambda), p)


def _log_alpha(point: LevelPoint, p: float) -> float:
    beta = (3.0 - p) / (p - 1.0)
    return point.log_u + 0.5 * math.log(point.phi) + beta * point.log_r - math.log(p - 1.0)


def alpha_model(params: ModelParams, t: float) -> float:
    """``alpha(t) = u sqrt(phi) r^((3-p)/(p-1)) / (p-1)`` on the model level ``t``."""
    if params.Lambda == 0.0:
        return 1.0 / (3.0 - params.p)
    point = model_green(params.Lambda, params.p).level_point(t)
    return math.exp(_log_alpha(point, params.p))


def riccati_equilibria(p: float, alpha: float) -> tuple[float, float]:
    """Zeros ``mu_- <= mu_+`` of the right-hand side of the ``mu`` equation."""
    radicand = 1.0 + 2.0 * (5.0 - p) * alpha - (7.0 - 3.0 * p) * (5.0 - p) * alpha**2
    if radicand < 0.0:
        raise DomainError(f"equilibria are complex for p={p!r}, alpha={alpha!r}")
    root = math.sqrt(radicand)
    base = 1.0 + (5.0 - p) * alpha
    return (base - root) / (2.0 * (3.0 - p)), (base + root) / (2.0 * (3.0 - p))


def structural_rhs(p: float, alpha: float, mu: float) -> tuple[float, float]:
    """``(mu', lambda')`` of the structural system."""
    k5 = (5.0 - p) / (p - 1.0)
    k3 = (3.0 - p) / (p - 1.0)
    dmu = k5 * alpha**2 - (k5 * alpha + 1.0 / (p - 1.0)) * mu + k3 * mu**2
    dlam = k5 * alpha - 1.0 / (p - 1.0) - k3 * mu
    return dmu, dlam


# --------------------------------------------------------------------------- Phi, Psi

def _phi_psi_series(p: float, Lambda: float, r: float, gap: float | None = None) -> tuple[float, float]:
    x = Lambda * r * r / 3.0
    y = 1.0 - x if gap is None else gap
    ups, _ = upsilon_pair(p, x) if x < 1.0 else upsilon_pair(p, 1.0)
    pref = r / (_EIGHT_PI * y)
    return pref * ups, pref * psi_bracket(p, x, gap=y)


def phi_psi_rhs(p: float, Lambda: float, r: float, phi_cap: float, psi_cap: float) -> tuple[float, float]:
    """Right-hand side of the linear system solved by ``(Phi, Psi)`` in ``r``."""
    x = Lambda * r * r / 3.0
    s = x / (1.0 - x)
    k3 = (3.0 - p) / (p - 1.0)
    d_phi = 2.0 * (s - k3) * phi_cap / r + (5.0 - p) / (p - 1.0) * psi_cap / r
    d_psi = -k3 * phi_cap / r + (s + 2.0 / (p - 1.0)) * psi_cap / r
    return d_phi, d_psi


@functools.lru_cache(maxsize=32)
def _negative_lambda_path(p: float, Lambda: float) -> tuple[float, OdePath]:
    r0 = _NEG_SERIES_FRACTION * math.sqrt(3.0 / abs(Lambda))
    start = np.array(_phi_psi_series(p, Lambda, r0))
    # Phi and Psi grow like a power of r, so integrate in log r
    def rhs(s, y):
        r = math.exp(s)
        d = phi_psi_rhs(p, Lambda, r, y[0], y[1])
        return np.array([r * d[0], r * d[1]])

    path = solve_ivp(rhs, math.log(r0), start, math.log(r0) + 40.0, rel_tol=1e-12, abs_tol=0.0)
    return r0, path


def phi_psi(params: ModelParams, r: float, gap: float | None = None) -> tuple[float, float]:
    """``(Phi(r), Psi(r))``. ``gap`` optionally carries ``1 - Lambda r^2/3``."""
    p, Lambda = params.p, params.Lambda
    if not r > 0.0:
        raise DomainError(f"r must be positive, got {r!r}")
    if Lambda == 0.0:
        return r / _EIGHT_PI, r / _EIGHT_PI
    if Lambda > 0.0:
        y = 1.0 - Lambda * r * r / 3.0 if gap is None else gap
        if not y > 0.0:
            raise DomainError(f"r={r!r} at or beyond the equator R_Lambda={params.R_Lambda!r}")
        return _phi_psi_series(p, Lambda, r, gap)
    r0, path = _negative_lambda_path(p, Lambda)
    if r <= r0:
        return _phi_psi_series(p, Lambda, r)
    s = math.log(r)
    if s > path.t_nodes[-1]:
        raise DomainError(f"r={r!r} beyond the tabulated range for Lambda<0")
    y = path(s)
    return float(y[0]), float(y[1])


# ------------------------------------------------------------------- coefficients

@dataclass(frozen=True)
class CoefficientState:
    t: float
    alpha: float
    mu: float
    lam: float

    @property
    def exp_lambda(self) -> float:
        return math.exp(self.lam)


@dataclass
class StructuralCoefficients:
    """Evaluators for ``alpha``, ``mu``, ``lambda`` on one route."""

    params: ModelParams
    route: str
    _path: OdePath | None = field(default=None, repr=False)
    t_start: float | None = None
    t_end: float | None = None

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")

    @property
    def p(self) -> float:
        return self.params.p

    def alpha(self, t: float) -> float:
        return alpha_model(self.params, t)

    def state(self, t: float) -> CoefficientState:
        p = self.p
        if self.route == "lambda_zero_exact":
            a = 1.0 / (3.0 - p)
            return CoefficientState(t, a, a, t / (3.0 - p) + kappa(p))
        if self.route == "ode":
            if t < self.t_start:
                # alpha has settled to 1e-12 here, so the asymptotic data is exact to that level
                return CoefficientState(t, alpha_model(self.params, t), 1.0 / (3.0 - p), t / (3.0 - p) + kappa(p))
            if t > self.t_end:
                raise DomainError(f"t={t!r} beyond the integrated range, which ends at {self.t_end}")
            mu, lam = self._path(t)
            return CoefficientState(t, alpha_model(self.params, t), float(mu), float(lam))
        point = model_green(self.params.Lambda, p).level_point(t)
        log_a = _log_alpha(point, p)
        phi_cap, psi_cap = _phi_psi_series(p, self.params.Lambda, point.r, gap=point.phi)
        return CoefficientState(t, math.exp(log_a), math.exp(log_a) * phi_cap / psi_cap, log_a + math.log(psi_cap))

    def mu(self, t: float) -> float:
        return self.state(t).mu

    def lam(self, t: float) -> float:
        return self.state(t).lam

    def exp_lambda(self, t: float) -> float:
        return math.exp(self.lam(t))

    def phi_cap(self, r: float) -> float:
        return self._phi_psi_at(r)[0]

    def psi_cap(self, r: float) -> float:
        return self._phi_psi_at(r)[1]

    def _phi_psi_at(self, r: float) -> tuple[float, float]:
        if self.route != "ode":
            return phi_psi(self.params, r)
        # Phi = mu e^lambda / alpha^2 and Psi = e^lambda / alpha at t = w(r)
        w, _ = model_green(self.params.Lambda, self.p).w_and_grad(r)
        st = self.state(w)
        return st.mu * st.exp_lambda / st.alpha**2, st.exp_lambda / st.alpha


def coefficients_closed_form(params: ModelParams) -> StructuralCoefficients:
    if params.Lambda < 0.0:
        raise DomainError("the closed form needs Lambda >= 0; use coefficients_ode")
    if params.Lambda == 0.0:
        return StructuralCoefficients(params, "lambda_zero_exact")
    model_green(params.Lambda, params.p)
    return StructuralCoefficients(params, "closed_form")


def coefficients(params: ModelParams, t_end: float = 40.0) -> StructuralCoefficients:
    """Production route for any sign of ``Lambda``."""
    if params.Lambda >= 0.0:
        return coefficients_closed_form(params)
    return coefficients_ode(params, -20.0, t_end)


def _settled_start(params: ModelParams, t_start: float) -> float:
    """Move ``t_start`` left until ``alpha`` matches its limit ``1/(3-p)``."""
    target = 1.0 / (3.0 - params.p)
    t = t_start
    for _ in range(200):
        if abs(alpha_model(params, t) - target) <= _ALPHA_START_TOL * target:
            return t
        t -= 5.0
    raise StructuralError(f"alpha did not settle to 1/(3-p) below t={t_start!r}")


def coefficients_ode(params: ModelParams, t_start: float = -20.0, t_end: float = 20.0) -> StructuralCoefficients:
    """Integrate the structural system forward from the asymptotic data at ``t_start``."""
    if t_start > -15.0:
        raise DomainError(f"t_start must be at most -15, got {t_start!r}")
    if t_end <= t_start:
        raise DomainError("t_end must exceed t_start")
    p = params.p
    t0 = _settled_start(params, t_start)
    mu0 = 1.0 / (3.0 - p)
    lam0 = t0 / (3.0 - p) + kappa(p)

    def rhs(t, y):
        return np.array(structural_rhs(p, alpha_model(params, t), y[0]))

    try:
        path = solve_ivp(rhs, t0, np.array([mu0, lam0]), t_end, rel_tol=ODE_RTOL, abs_tol=ODE_ATOL)
    except StepUnderflowError as exc:
        raise StructuralError(
            f"structural ODE blew up near t={exc.last_t:.6g}; try a smaller t_start") from exc
    if params.Lambda < 0.0:
        mus = path.y_nodes[:, 0]
        if np.any(mus <= 0.0) or np.any(mus > mu0 * (1.0 + _CORRIDOR_SLACK)):
            raise StructuralError(
                "mu left the corridor (0, 1/(3-p)); start-up error too large, try a smaller t_start")
    return StructuralCoefficients(params, "ode", _path=path, t_start=t0, t_end=t_end)


# ------------------------------------------------------------------ t -> +inf data

def asymptotic_constants(params: ModelParams) -> tuple[float, float]:
    """Limits of ``e^(t/(p-1)) e^lambda`` and ``e^(t/(p-1)) mu`` as ``t -> +inf`` (``Lambda > 0``)."""
    if not params.Lambda > 0.0:
        raise DomainError("asymptotic constants need Lambda > 0")
    p, R = params.p, params.R_Lambda
    c_lambda = R ** (2.0 / (p - 1.0)) / (_EIGHT_PI * (p - 1.0)) * bracket_constant(p)
    c_mu = R ** ((3.0 - p) / (p - 1.0)) / (2.0 * (p - 1.0)) * mu_constant_ratio(p)
    return c_lambda, c_mu


@dataclass(frozen=True)
class PLimitRow:
    p: float
    r: float
    exp_lambda: float
    mu_exp_lambda: float
    r_target: float
    exp_lambda_target: float
    mu_exp_lambda_target: float


def p_limit_profiles(Lambda: float, t: float, p_list) -> list[PLimitRow]:
    """Coefficients at a fixed level along ``p -> 1`` beside their limits."""
    if not Lambda > 0.0:
        raise DomainError("p-limit profiles need Lambda > 0")
    T = math.log(3.0 / Lambda)
    if t == T:
        raise DomainError("t must differ from T_Lambda")
    below = t < T
    r_target = math.exp(t / 2.0) if below else math.sqrt(3.0 / Lambda)
    el_target = math.exp(t / 2.0) / (16.0 * math.pi) if below else 0.0
    mel_target = math.exp(t / 2.0) / (32.0 * math.pi) if below else 0.0
    rows = []
    for p in p_list:
        params = ModelParams(Lambda, p)
        st = coefficients_closed_form(params).state(t)
        r = model_green(Lambda, p).radius_of_level(t)
        rows.append(PLimitRow(p, r, st.exp_lambda, st.mu * st.exp_lambda, r_target, el_target, mel_target))
    return rows
