"""Radial p-Green's functions with pole at the centre of a RadialProfile.

``u(r) = int_r^{r_max} rho^(-2/(p-1)) / sqrt(phi(rho)) d rho`` solves the
p-Laplace equation with ``|grad u| = r^(-2/(p-1))``, vanishes on the boundary
and has total flux ``4 pi``. The level variable is ``w = -(p-1) log u``.

The integral is tabulated once on three kinds of panels:

* below ``pole_radius`` a term-by-term integrated series of ``phi^(-1/2)``;
* a middle region in ``y = log rho``;
* an outer region in ``z`` with ``rho = r_max - z**k`` (``k = 2`` at an
  equator, where ``phi`` has a simple zero, ``k = 1`` at a wall), or an
  exponentially decaying tail when ``r_max`` is infinite.

Points near the outer boundary are described by their gap ``r_max - r``
so that levels far out (``t`` large) keep full relative accuracy.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .geometry import ProfileError, RadialProfile
from .numerics import integrate_adaptive, kronrod_rule, refine_panels

_PANEL_RTOL = 1e-14
_SERIES_MAX_POWER = 12
_NEWTON_MAX = 60
_LOG_TINY = -600.0
_LOG_R_FLOOR = -600.0
_SERIES_DELTA_MAX = 0.01
_Y_MAX = 300.0


class GreenError(RuntimeError):
    """Failure while evaluating or inverting a Green's function."""


@dataclass(frozen=True)
class LevelPoint:
    """The sphere ``{w = t}``: radius, gap to the outer boundary, ``u`` and ``phi``."""

    t: float
    r: float
    gap: float
    u: float
    log_u: float
    phi: float
    log_r: float

    def log_grad_w(self, p: float) -> float:
        return math.log(p - 1.0) - 2.0 / (p - 1.0) * self.log_r - self.log_u

    def grad_w(self, p: float) -> float:
        return math.exp(self.log_grad_w(p))


def _series_power(delta: dict[int, float], exponent: float, max_power: int) -> dict[int, float]:
    """Coefficients of ``(1 + delta)**exponent`` for a polynomial ``delta``
    without constant term, truncated above ``max_power``."""
    result = {0: 1.0}
    power_of_delta = {0: 1.0}
    binom = 1.0
    n = 0
    min_pow = min(delta) if delta else max_power + 1
    while (n + 1) * min_pow <= max_power:
        n += 1
        binom *= (exponent - n + 1) / n
        nxt: dict[int, float] = {}
        for i, ci in power_of_delta.items():
            for j, cj in delta.items():
                if i + j <= max_power:
                    nxt[i + j] = nxt.get(i + j, 0.0) + ci * cj
        power_of_delta = nxt
        for k, c in power_of_delta.items():
            result[k] = result.get(k, 0.0) + binom * c
    return result


class RadialGreen:
    """p-Green's function of a pole-regular radial profile."""

    def __init__(self, profile: RadialProfile, p: float):
        if not 1.0 < p < 3.0:
            raise ProfileError(f"p must lie in (1, 3), got {p!r}")
        if not profile.pole_regular:
            raise ProfileError(
                f"{profile.kind} profile has no smooth pole at r = 0; the p-Green route is not available")
        self.profile = profile
        self.p = p
        self.two_q = 2.0 / (p - 1.0)
        self.beta = self.two_q - 1.0
        self.r_max = profile.r_max
        self._build_series()
        self.r_pole = self._pole_radius()
        self._build_panels()

    # ------------------------------------------------------------------ setup

    def _build_series(self):
        delta = {pw: c for pw, c in self.profile.pole_series if c != 0.0}
        coeffs = _series_power(delta, -0.5, _SERIES_MAX_POWER)
        self._series = sorted((pw, c) for pw, c in coeffs.items() if c != 0.0 or pw == 0)

    def _pole_radius(self) -> float:
        """Switch radius to the pole series, pushed outward when ``p`` is so close
        to 1 that ``u`` would overflow at the profile's default radius."""
        r = max(self.profile.pole_radius, math.exp(_LOG_R_FLOOR / self.beta))
        if r == self.profile.pole_radius:
            return r
        delta = abs(sum(c * r**pw for pw, c in self.profile.pole_series))
        if r >= self.profile.series_limit or r >= 0.5 * self.r_max or delta > _SERIES_DELTA_MAX:
            raise GreenError(
                f"p={self.p!r} is too close to 1: u near the pole exceeds double range "
                f"before the pole series takes over")
        return r

    def _f_log(self, y):
        """Integrand in ``y = log rho``."""
        rho = np.exp(y)
        return np.exp((1.0 - self.two_q) * y) / np.sqrt(self.profile.phi(rho))

    def _f_outer(self, z):
        """Integrand in the outer coordinate ``z``."""
        rho = self.r_max - z**self._k
        if self._k == 2:
            return 2.0 * rho ** (-self.two_q) / np.sqrt(self.profile.phi_gap(rho))
        return rho ** (-self.two_q) / np.sqrt(self.profile.phi(rho))

    def _integrate(self, f, lo, hi):
        if lo == hi:
            return 0.0
        if lo > hi:
            return -self._integrate(f, hi, lo)
        return integrate_adaptive(f, lo, hi, rel_tol=_PANEL_RTOL, abs_floor=0.0).value

    def _build_panels(self):
        y_pole = math.log(self.r_pole)
        step = min(0.25, 1.0 / max(self.beta, 1e-12))
        if math.isfinite(self.r_max):
            self._k = 2 if self.profile.boundary_kind == "equator" else 1
            r_split = 0.5 * self.r_max
            y_end = math.log(r_split)
            self._z_split = (self.r_max - r_split) ** (1.0 / self._k)
            n_outer = max(16, int(math.ceil(2.0 * self.two_q * math.log(2.0))))
            nodes, pieces = refine_panels(self._f_outer, np.linspace(0.0, self._z_split, n_outer + 1), _PANEL_RTOL)
            self._z_nodes = list(nodes)
            self._u_outer_nodes = list(np.concatenate([[0.0], np.cumsum(pieces)]))
            u_split = self._u_outer_nodes[-1]
        else:
            self._k = 0
            y_end = math.log(self.profile.length_scale) + 25.0
            self._z_nodes = []
            self._u_outer_nodes = []
            u_split = self._tail(y_end)
        n_mid = max(4, int(math.ceil((y_end - y_pole) / step)))
        nodes, pieces = refine_panels(self._f_log, np.linspace(y_pole, y_end, n_mid + 1), _PANEL_RTOL)
        self._y_nodes = list(nodes)
        # cumulative from the outer end: u at each middle node
        cum = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]]) + u_split
        self._u_mid_nodes = list(cum)
        self._log_u_nodes = [math.log(v) for v in cum]
        self._u_pole = cum[0]
        self._y_end = y_end
        self._u_split = u_split

    def _tail(self, y0: float) -> float:
        """``u`` beyond ``exp(y0)`` on an open profile."""
        rate = self._tail_rate()
        y1 = min(y0 + 45.0 / rate, _Y_MAX)
        if not y0 < y1:
            raise GreenError(f"radius exp({y0!r}) is beyond the representable range")
        # past y1 the integrand decays as a pure exponential
        remainder = float(self._f_log(np.array([y1]))[0]) / rate
        return self._integrate(self._f_log, y0, y1) + remainder

    def _tail_rate(self) -> float:
        """Decay rate in ``log rho`` of the integrand on an open profile."""
        grows = any(c != 0.0 for _, c in self.profile.pole_series)
        return self.two_q if grows else self.beta

    # ------------------------------------------------------------- evaluation

    def _log_u_pole(self, log_r: float) -> float:
        r = math.exp(log_r)
        span = math.log(self.r_pole) - log_r
        # u = r^-beta * S with every piece of S of moderate size
        total = self._u_pole * math.exp(self.beta * log_r)
        for power, coeff in self._series:
            nu = power + 1.0 - self.two_q
            if nu == 0.0:
                total += coeff * r**power * span
            elif abs(nu * span) < 1.0:
                total += coeff * r**power * math.expm1(nu * span) / nu
            else:
                # exponents below stay bounded even when r^power underflows
                total += coeff * (math.exp(power * log_r + nu * span) - math.exp(power * log_r)) / nu
        return -self.beta * log_r + math.log(total)

    def _log_u_mid(self, y: float) -> float:
        k = min(max(bisect.bisect_right(self._y_nodes, y) - 1, 0), len(self._y_nodes) - 2)
        upper = self._y_nodes[k + 1]
        return math.log(self._u_mid_nodes[k + 1] + kronrod_rule(self._f_log, y, upper))

    def _u_outer(self, z: float) -> float:
        k = min(max(bisect.bisect_right(self._z_nodes, z) - 1, 0), len(self._z_nodes) - 2)
        return self._u_outer_nodes[k] + kronrod_rule(self._f_outer, self._z_nodes[k], z)

    def log_u(self, r: float) -> float:
        """``log u(r)`` for ``0 < r < r_max``."""
        if not 0.0 < r:
            raise GreenError(f"r must be positive, got {r!r}")
        if r >= self.r_max:
            if r == self.r_max:
                return -math.inf
            raise GreenError(f"r={r!r} beyond r_max={self.r_max!r}")
        if r < self.r_pole:
            return self._log_u_pole(math.log(r))
        y = math.log(r)
        if y <= self._y_end:
            return self._log_u_mid(y)
        if self._k == 0:
            return math.log(self._tail(y))
        return math.log(self._u_outer((self.r_max - r) ** (1.0 / self._k)))

    def log_u_of_gap(self, gap: float) -> float:
        """``log u`` at ``r = r_max - gap``, accurate for tiny gaps."""
        if not math.isfinite(self.r_max):
            raise GreenError("open profile has no outer boundary")
        if gap <= 0.0:
            return -math.inf
        if gap <= self.r_max - 0.5 * self.r_max:
            return math.log(self._u_outer(gap ** (1.0 / self._k)))
        return self.log_u(self.r_max - gap)

    def u(self, r):
        """``u(r)``; accepts scalars or arrays."""
        if np.ndim(r) == 0:
            return math.exp(self.log_u(float(r)))
        return np.array([math.exp(self.log_u(float(x))) for x in np.ravel(r)]).reshape(np.shape(r))

    def grad_norm_u(self, r):
        """``|grad u| = r^(-2/(p-1))``, independent of the profile."""
        return np.asarray(r, dtype=float) ** (-self.two_q) if np.ndim(r) else float(r) ** (-self.two_q)

    def w_and_grad(self, r: float) -> tuple[float, float]:
        """``w = -(p-1) log u`` and ``|grad w| = (p-1) r^(-2/(p-1)) / u``."""
        lu = self.log_u(r)
        return -(self.p - 1.0) * lu, (self.p - 1.0) * math.exp(-self.two_q * math.log(r) - lu)

    # --------------------------------------------------------------- inversion

    def radius_of_level(self, t: float) -> float:
        """The radius ``r`` with ``w(r) = t``."""
        return self.level_point(t).r

    def level_point(self, t: float) -> LevelPoint:
        """Invert ``w`` at level ``t`` and return the sphere's data."""
        if not math.isfinite(t):
            raise GreenError(f"level must be finite, got {t!r}")
        target = -t / (self.p - 1.0)
        if target < _LOG_TINY:
            raise GreenError(
                f"level t={t!r} lies closer to the outer boundary than double precision resolves")
        if target > self._log_u_nodes[0]:
            y = self._invert_pole(target)
            return self._point_from_log_r(t, y)
        if target >= math.log(self._u_split):
            y = self._invert_mid(target)
            return self._point_from_log_r(t, y)
        if self._k == 0:
            y = self._invert_tail(target)
            return self._point_from_log_r(t, y)
        z = self._invert_outer(target)
        gap = z**self._k
        rho = self.r_max - gap
        phi = gap * float(self.profile.phi_gap(rho)) if self._k == 2 else float(self.profile.phi(rho))
        lu = math.log(self._u_outer(z))
        return LevelPoint(t=t, r=rho, gap=gap, u=math.exp(lu), log_u=lu, phi=phi, log_r=math.log(rho))

    def _point_from_log_r(self, t: float, y: float) -> LevelPoint:
        r = math.exp(y)
        lu = self.log_u(r) if r >= self.r_pole else self._log_u_pole(y)
        gap = self.r_max - r
        return LevelPoint(t=t, r=r, gap=gap, u=math.exp(min(lu, 709.0)), log_u=lu, phi=float(self.profile.phi(r)), log_r=y)

    def _dlogu_dy(self, y: float, lu: float) -> float:
        r = math.exp(y)
        return -math.exp((1.0 - self.two_q) * y - lu) / math.sqrt(float(self.profile.phi(r)))

    def _newton(self, value_fn, slope_fn, target, x0, lo, hi):
        """Safeguarded Newton on a decreasing-or-increasing monotone function."""
        x = min(max(x0, lo), hi)
        f_lo = f_hi = None
        for _ in range(_NEWTON_MAX):
            val = value_fn(x)
            res = val - target
            if res == 0.0:
                return x
            slope = slope_fn(x, val)
            # keep the bracket: the sign of res*slope tells the side
            if res * slope > 0:
                hi, f_hi = x, res
            else:
                lo, f_lo = x, res
            step = -res / slope if slope != 0.0 else 0.0
            x_new = x + step
            if not (lo < x_new < hi) or slope == 0.0:
                x_new = 0.5 * (lo + hi)
            if abs(x_new - x) <= 4.0 * np.finfo(float).eps * max(1.0, abs(x)):
                return x_new
            x = x_new
        raise GreenError(f"level inversion did not converge near {x!r}")

    def _invert_pole(self, target: float) -> float:
        y_pole = math.log(self.r_pole)
        guess = -(target + math.log(self.beta)) / self.beta
        lo = min(guess, y_pole) - 50.0
        return self._newton(self._log_u_pole, self._dlogu_dy, target, min(guess, y_pole), lo, y_pole)

    def _invert_mid(self, target: float) -> float:
        neg = [-v for v in self._log_u_nodes]
        k = min(max(bisect.bisect_left(neg, -target) - 1, 0), len(neg) - 2)
        y0, y1 = self._y_nodes[k], self._y_nodes[k + 1]
        l0, l1 = self._log_u_nodes[k], self._log_u_nodes[k + 1]
        guess = y0 + (target - l0) * (y1 - y0) / (l1 - l0) if l1 != l0 else y0
        return self._newton(self._log_u_mid, self._dlogu_dy, target, guess, y0, y1)

    def _invert_tail(self, target: float) -> float:
        rate = self._tail_rate()
        guess = self._y_end + (math.log(self._u_split) - target) / rate
        if target < math.log(self._tail(_Y_MAX - 1.0)):
            raise GreenError(f"level u=exp({target!r}) lies beyond the representable radius exp({_Y_MAX})")
        return self._newton(lambda y: math.log(self._tail(y)), self._dlogu_dy, target, guess,
                            self._y_end, min(guess + 60.0 / rate, _Y_MAX - 1e-9))

    def _invert_outer(self, target: float) -> float:
        u_target = math.exp(target)
        nodes = self._u_outer_nodes
        k = min(max(bisect.bisect_right(nodes, u_target) - 1, 0), len(nodes) - 2)
        z0, z1 = self._z_nodes[k], self._z_nodes[k + 1]
        if k == 0:
            guess = u_target / float(self._f_outer(np.array([0.0]))[0])
        else:
            guess = z0 + (u_target - nodes[k]) * (z1 - z0) / (nodes[k + 1] - nodes[k])
        lo = z0 if k > 0 else 0.0

        def value(z):
            return math.log(self._u_outer(z)) if z > 0 else -math.inf

        def slope(z, lu):
            return float(self._f_outer(np.array([z]))[0]) / math.exp(lu)

        return self._newton(value, slope, target, max(guess, 1e-300), lo, z1)


def flux(green: RadialGreen, t: float) -> float:
    """``e^(-t) |grad w|^(p-1) |S_t|`` on the level sphere; equals ``4 pi (p-1)^(p-1)``."""
    pt = green.level_point(t)
    p = green.p
    return 4.0 * math.pi * math.exp(-t + (p - 1.0) * pt.log_grad_w(p) + 2.0 * pt.log_r)


def green_u(green: RadialGreen, r: float) -> float:
    return green.u(r)


def grad_norm_u(green: RadialGreen, r: float) -> float:
    return green.grad_norm_u(r)


def w_and_grad(green: RadialGreen, r: float) -> tuple[float, float]:
    return green.w_and_grad(r)


def radius_of_level(green: RadialGreen, t: float) -> float:
    return green.radius_of_level(t)
