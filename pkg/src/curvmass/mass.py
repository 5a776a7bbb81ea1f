"""Mass functionals on radial profiles with a pole at the centre.

All surface integrals are over centred spheres, where every integrand is
constant, so ``int_S f dsigma = f * 4 pi r^2``. The level sets ``Sigma_t``
are those of the profile's own Green's function, while the weights
``alpha``, ``mu``, ``lambda`` always come from the model with the same
``(Lambda, p)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    ModelParams,
    ProfileError,
    RadialProfile,
    mean_curvature,
    scalar_curvature,
    volume,
)
from .numerics import integrate_adaptive
from .pgreen import LevelPoint, RadialGreen
from .specfun import DomainError, bracket_constant, polarization_constant
from .structural import CoefficientState, StructuralCoefficients, coefficients

FOUR_PI = 4.0 * math.pi
LOWER_TAIL_SPAN = 10.0
UPPER_TAIL_TARGET = 1e-9
_BULK_RTOL = 1e-12
_MAX_UPPER = 400.0

MASS_CSV_COLUMNS = ("t", "r", "area", "H", "grad_w", "mass", "dmdt_num", "dmdt_formula")


class ContractError(ValueError):
    """Inputs that belong to different ``(Lambda, p)`` pairs were combined."""


# ------------------------------------------------------------------ Hawking mass

def hawking_mass(area: float, willmore: float, Lambda: float) -> float:
    """``sqrt(|S|/16 pi) (1 - Lambda |S|/12 pi - W/16 pi)`` with ``W = int H^2``."""
    if not area > 0.0:
        raise DomainError(f"area must be positive, got {area!r}")
    if willmore < 0.0:
        raise DomainError(f"Willmore energy must be nonnegative, got {willmore!r}")
    return math.sqrt(area / (16.0 * math.pi)) * (
        1.0 - Lambda * area / (12.0 * math.pi) - willmore / (16.0 * math.pi))


def sphere_hawking_mass(profile: RadialProfile, Lambda: float, r: float) -> float:
    """Hawking mass of the centred sphere of radius ``r``."""
    phi = float(profile.phi(r))
    return hawking_mass(FOUR_PI * r * r, 16.0 * math.pi * phi, Lambda)


def clifford_torus_hawking_mass(Lambda: float) -> float:
    """Minimal Clifford torus in the round sphere of radius ``sqrt(3/Lambda)``."""
    return hawking_mass(6.0 * math.pi**2 / Lambda, 0.0, Lambda)


def geroch_radial_rate(profile: RadialProfile, Lambda: float, r: float) -> float:
    """Right-hand side of the Geroch identity along centred spheres ``r = r0 e^(t/2)``.

    The gradient and traceless terms vanish on centred spheres, leaving
    ``(1/8 pi) sqrt(|S|/16 pi) int (R - 2 Lambda)/2``.
    """
    area = FOUR_PI * r * r
    curvature = float(scalar_curvature(profile, r))
    return math.sqrt(area / (16.0 * math.pi)) / (8.0 * math.pi) * 0.5 * (curvature - 2.0 * Lambda) * area


def geroch_numeric_rate(profile: RadialProfile, Lambda: float, r: float, h: float = 1e-4) -> float:
    """Central difference of the sphere Hawking mass in ``t`` with ``r = r0 e^(t/2)``."""
    up = sphere_hawking_mass(profile, Lambda, r * math.exp(h / 2.0))
    down = sphere_hawking_mass(profile, Lambda, r * math.exp(-h / 2.0))
    return (up - down) / (2.0 * h)


# ------------------------------------------------------------- monotone quantity

class LevelEvaluator:
    """Joins a profile's Green's function with the model coefficients."""

    def __init__(self, profile: RadialProfile, params: ModelParams,
                 coeffs: StructuralCoefficients | None = None):
        if coeffs is None:
            coeffs = coefficients(params)
        elif (coeffs.params.Lambda, coeffs.params.p) != (params.Lambda, params.p):
            raise ContractError(
                f"coefficients belong to (Lambda, p)={coeffs.params.Lambda, coeffs.params.p}, "
                f"request is {params.Lambda, params.p}")
        self.profile = profile
        self.params = params
        self.coeffs = coeffs
        self.green = RadialGreen(profile, params.p)

    def level(self, t: float) -> tuple[LevelPoint, CoefficientState]:
        return self.green.level_point(t), self.coeffs.state(t)

    def bulk_density(self, t: float) -> float:
        """``e^lambda (4 pi - Lambda |Sigma_t|)``."""
        point = self.green.level_point(t)
        lam = self.coeffs.lam(t)
        return math.exp(lam) * FOUR_PI * (1.0 - self.params.Lambda * point.r**2)

    def bulk_density_vec(self, ts):
        return np.array([self.bulk_density(float(t)) for t in np.ravel(ts)])

    def lower_tail(self, t_min: float) -> float:
        """Leading-order ``int_{-inf}^{t_min}`` of the bulk density.

        ``e^lambda`` grows like ``e^(t/(3-p))`` and the area like ``e^(2t/(3-p))``.
        """
        point = self.green.level_point(t_min)
        p = self.params.p
        e_lam = math.exp(self.coeffs.lam(t_min))
        return e_lam * (3.0 - p) * FOUR_PI * (1.0 - self.params.Lambda * point.r**2 / 3.0)

    def bulk_between(self, a: float, b: float) -> float:
        if a == b:
            return 0.0
        return integrate_adaptive(self.bulk_density_vec, a, b, rel_tol=_BULK_RTOL, abs_floor=1e-300).value

    def boundary_term(self, t: float) -> float:
        """``e^lambda int |grad w| (H - mu |grad w|)`` over ``Sigma_t``."""
        point, st = self.level(t)
        grad_w = point.grad_w(self.params.p)
        h = 2.0 * math.sqrt(max(point.phi, 0.0)) / point.r
        return st.exp_lambda * FOUR_PI * point.r**2 * grad_w * (h - st.mu * grad_w)

    def derivative_formula(self, t: float) -> float:
        """``e^lambda int [(R - 2 Lambda)/2 + (5-p)/(p-1) (H/2 - alpha |grad w|)^2]`` over ``Sigma_t``."""
        point, st = self.level(t)
        p, Lambda = self.params.p, self.params.Lambda
        grad_w = point.grad_w(p)
        h = 2.0 * math.sqrt(max(point.phi, 0.0)) / point.r
        curvature = float(scalar_curvature(self.profile, point.r))
        inner = 0.5 * (curvature - 2.0 * Lambda) + (5.0 - p) / (p - 1.0) * (0.5 * h - st.alpha * grad_w) ** 2
        return st.exp_lambda * FOUR_PI * point.r**2 * inner


@dataclass(frozen=True)
class MassRow:
    t: float
    r: float
    area: float
    H: float
    grad_w: float
    mass: float
    dmdt_num: float
    dmdt_formula: float
    # structurally zero on centred spheres
    tangential_grad_w: float = 0.0
    traceless_second_form: float = 0.0


@dataclass
class MassProfile:
    t_grid: np.ndarray
    rows: list[MassRow]
    params: ModelParams
    profile: RadialProfile
    t_min: float
    lower_tail: float

    @property
    def masses(self) -> np.ndarray:
        return np.array([row.mass for row in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(MASS_CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([f"{getattr(row, c):.17e}" for c in MASS_CSV_COLUMNS])
        return buf.getvalue()


def _fd_step(t_grid: np.ndarray) -> float:
    spacing = float(np.min(np.diff(t_grid))) if len(t_grid) > 1 else 1.0
    return 1e-4 * min(1.0, spacing)


def mass_profile(profile: RadialProfile, params: ModelParams, t_grid,
                 coeffs: StructuralCoefficients | None = None) -> MassProfile:
    """Evaluate ``m(t)``, its finite-difference derivative and the derivative formula on a grid."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0 or np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be a nonempty increasing sequence")
    ev = LevelEvaluator(profile, params, coeffs)
    t_min = float(t_grid[0]) - LOWER_TAIL_SPAN
    tail = ev.lower_tail(t_min)
    h = _fd_step(t_grid)
    bulk = tail
    last = t_min
    rows = []
    for t in t_grid:
        t = float(t)
        bulk += ev.bulk_between(last, t)
        last = t
        point = ev.green.level_point(t)
        grad_w = point.grad_w(params.p)
        mass = bulk - ev.boundary_term(t)
        # m(t+h) - m(t-h): the bulk part is integrated directly over [t-h, t+h]
        dm = ev.bulk_between(t - h, t + h) - (ev.boundary_term(t + h) - ev.boundary_term(t - h))
        rows.append(MassRow(
            t=t, r=point.r, area=FOUR_PI * point.r**2,
            H=2.0 * math.sqrt(max(point.phi, 0.0)) / point.r, grad_w=grad_w, mass=mass,
            dmdt_num=dm / (2.0 * h), dmdt_formula=ev.derivative_formula(t)))
    return MassProfile(t_grid, rows, params, profile, t_min, tail)


def mass_derivative_rhs(profile: RadialProfile, params: ModelParams, t: float,
                        coeffs: StructuralCoefficients | None = None) -> float:
    return LevelEvaluator(profile, params, coeffs).derivative_formula(t)


# ----------------------------------------------------------------- polarized mass

@dataclass(frozen=True)
class Truncation:
    t_min: float
    t_max: float
    lower_tail: float
    upper_tail: float


@dataclass(frozen=True)
class FinitenessBound:
    """``int e^lambda |Sigma|`` against its Hoelder-type upper bound."""

    area_integral: float
    bound: float
    volume: float
    exp_integral: float

    @property
    def holds(self) -> bool:
        return bool(self.area_integral <= self.bound)


@dataclass(frozen=True)
class PolarizedMassBreakdown:
    bulk: float
    boundary_H_term: float
    boundary_grad_term: float
    total: float
    K_p: float
    truncation: Truncation
    finiteness: FinitenessBound = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "bulk": self.bulk,
            "boundary_H_term": self.boundary_H_term,
            "boundary_grad_term": self.boundary_grad_term,
            "total": self.total,
            "K_p": self.K_p,
            "truncation": {
                "t_min": self.truncation.t_min,
                "t_max": self.truncation.t_max,
                "lower_tail": self.truncation.lower_tail,
                "upper_tail": self.truncation.upper_tail,
            },
            "finiteness": {
                "area_integral": self.finiteness.area_integral,
                "bound": self.finiteness.bound,
                "volume": self.finiteness.volume,
                "exp_integral": self.finiteness.exp_integral,
                "holds": self.finiteness.holds,
            },
        }


def _panel_edges(a: float, b: float, width: float = 2.0) -> np.ndarray:
    n = max(1, int(math.ceil((b - a) / width)))
    return np.linspace(a, b, n + 1)


def polarized_mass(profile: RadialProfile, params: ModelParams, t_lo: float = -30.0,
                   coeffs: StructuralCoefficients | None = None) -> PolarizedMassBreakdown:
    """Bulk integral over all levels plus the two boundary terms."""
    if not params.Lambda > 0.0:
        raise DomainError("the polarized mass needs Lambda > 0")
    if not math.isfinite(profile.r_max):
        raise ProfileError("the polarized mass needs a compact profile")
    ev = LevelEvaluator(profile, params, coeffs)
    p, Lambda = params.p, params.Lambda
    r_max = profile.r_max
    boundary_factor = FOUR_PI * (1.0 - Lambda * r_max**2)

    t_max = 10.0
    while math.exp(ev.coeffs.lam(t_max)) * abs(boundary_factor) * (p - 1.0) >= UPPER_TAIL_TARGET:
        t_max += 5.0
        if t_max > _MAX_UPPER:
            raise DomainError("upper truncation did not reach its tolerance")

    # e^lambda decays like e^(-t/(p-1)) at the top
    upper_tail = ev.bulk_density(t_max) * (p - 1.0)
    lower_tail = ev.lower_tail(t_lo)

    def densities(ts):
        out = np.empty((3, np.size(ts)))
        for i, t in enumerate(np.ravel(ts)):
            point = ev.green.level_point(float(t))
            lam = ev.coeffs.lam(float(t))
            area = FOUR_PI * point.r**2
            out[0, i] = math.exp(lam) * (FOUR_PI - Lambda * area)
            out[1, i] = math.exp(lam) * area
            out[2, i] = math.exp(p * lam + t)
        return out

    totals = np.zeros(3)
    edges = _panel_edges(t_lo, t_max)
    for a, b in zip(edges[:-1], edges[1:]):
        totals += integrate_adaptive(densities, a, b, rel_tol=_BULK_RTOL, abs_floor=1e-300).value

    lo_vals = densities(np.array([t_lo]))[:, 0]
    hi_vals = densities(np.array([t_max]))[:, 0]
    area_integral = totals[1] + lo_vals[1] * (3.0 - p) / 3.0 + hi_vals[1] * (p - 1.0)
    exp_integral = totals[2] + lo_vals[2] * (3.0 - p) / 3.0 + hi_vals[2] * (p - 1.0)
    vol = volume(profile)
    bound = (FOUR_PI * (p - 1.0) ** (p - 1.0) * vol ** (p - 1.0) * exp_integral) ** (1.0 / p)

    bulk = totals[0] + lower_tail + upper_tail
    R_L = params.R_Lambda
    two_q = 2.0 / (p - 1.0)
    k_p = polarization_constant(p)
    h_boundary = float(mean_curvature(profile, r_max))
    term_h = (R_L**two_q / (8.0 * math.pi)) * bracket_constant(p) * r_max ** (-two_q) * h_boundary * FOUR_PI * r_max**2
    term_grad = (R_L ** ((5.0 - p) / (p - 1.0)) / (16.0 * math.pi)) * k_p * r_max ** (-2.0 * two_q) * FOUR_PI * r_max**2
    return PolarizedMassBreakdown(
        bulk=bulk,
        boundary_H_term=term_h,
        boundary_grad_term=term_grad,
        total=bulk - term_h + term_grad,
        K_p=k_p,
        truncation=Truncation(t_lo, t_max, lower_tail, upper_tail),
        finiteness=FinitenessBound(area_integral, bound, vol, exp_integral),
    )


# ----------------------------------------------------------------- 1-harmonic mass

@dataclass(frozen=True)
class OneHarmonicMass:
    value: float
    quadrature: float
    T: float
    T_Lambda: float

    @property
    def discrepancy(self) -> float:
        return abs(self.value - self.quadrature)


def one_harmonic_mass(Lambda: float, T_star: float) -> OneHarmonicMass:
    """``int_{-inf}^T e^(tau/2)/(16 pi) (4 pi - Lambda 4 pi e^tau) dtau`` with ``T = min(T_Lambda, T_star)``.

    Returned both in closed form and by quadrature in ``s = e^(tau/2)``.
    """
    if not Lambda > 0.0:
        raise DomainError("the 1-harmonic mass needs Lambda > 0")
    T_L = math.log(3.0 / Lambda)
    T = min(T_L, T_star)
    closed = 0.5 * math.exp(T / 2.0) * -math.expm1(T - T_L)

    def density(s):
        return (FOUR_PI - Lambda * FOUR_PI * s * s) / (8.0 * math.pi)

    quad = integrate_adaptive(density, 0.0, math.exp(T / 2.0), rel_tol=1e-14).value
    return OneHarmonicMass(closed, quad, T, T_L)


def one_harmonic_mass_of_profile(profile: RadialProfile, Lambda: float) -> OneHarmonicMass:
    """1-harmonic mass with the outer boundary of the profile reached at ``T_star = 2 log r_max``."""
    return one_harmonic_mass(Lambda, 2.0 * math.log(profile.r_max))


# ------------------------------------------------------------------ p -> 1 study

FORMAL_LIMIT_CAVEAT = (
    "experimental: the p-level sphere at t is the profile's own level set, not the "
    "radius e^(t/2); the two labelings agree only in the limit p -> 1, so the gap "
    "column mixes level relabeling with genuine convergence")


@dataclass(frozen=True)
class FormalLimitRow:
    p: float
    mass_p: float
    hawking: float
    gap: float


@dataclass(frozen=True)
class FormalLimitTable:
    rows: list[FormalLimitRow]
    caveat: str = FORMAL_LIMIT_CAVEAT


def formal_limit_experiment(profile: RadialProfile, Lambda: float, t: float, p_list) -> FormalLimitTable:
    """Compare ``m^(p)(t)`` with the Hawking mass of ``r = e^(t/2)`` along ``p -> 1``."""
    if not Lambda > 0.0:
        raise DomainError("the formal limit experiment needs Lambda > 0")
    if not t < math.log(3.0 / Lambda):
        raise DomainError("t must lie below T_Lambda")
    radius = math.exp(t / 2.0)
    if radius >= profile.r_max:
        raise DomainError("the sphere r = e^(t/2) lies outside the profile")
    hawking = sphere_hawking_mass(profile, Lambda, radius)
    rows = []
    for p in p_list:
        m = mass_profile(profile, ModelParams(Lambda, p), [t]).rows[0].mass
        rows.append(FormalLimitRow(p, m, hawking, abs(m - hawking)))
    return FormalLimitTable(rows)
