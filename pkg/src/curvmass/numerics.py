"""Adaptive quadrature, adaptive Runge-Kutta integration and bracketed root finding.

Everything here is generic: integrands, right-hand sides and target functions
are plain callables, and no result depends on hidden global state.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

DEFAULT_QUAD_RTOL = 1e-10
DEFAULT_ODE_RTOL = 1e-9
ABSOLUTE_FLOOR = 1e-14

SingularEnd = Literal["none", "left_sqrt", "right_sqrt"]


class NumericsError(RuntimeError):
    """Base class for numerical failures."""


class QuadratureError(NumericsError):
    """Adaptive subdivision gave up before meeting the tolerance."""

    def __init__(self, message: str, worst_interval: tuple[float, float], error_estimate: float):
        super().__init__(f"{message}; worst subinterval [{worst_interval[0]!r}, {worst_interval[1]!r}]")
        self.worst_interval = worst_interval
        self.error_estimate = error_estimate


class StepUnderflowError(NumericsError):
    """The step size collapsed, usually because the solution blows up."""

    def __init__(self, message: str, last_t: float, last_state: np.ndarray):
        super().__init__(f"{message} (last reachable t = {last_t!r})")
        self.last_t = last_t
        self.last_state = last_state


class BracketError(NumericsError, ValueError):
    """The supplied interval does not bracket a sign change."""


# ---------------------------------------------------------------------------
# Gauss-Kronrod 21-point rule (10-point Gauss embedded)

_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208643474115,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

# full symmetric node set in [-1, 1] and the matching weights
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_W = np.zeros(21)
for _i, _w in enumerate(_WG):
    # Gauss nodes are the odd-indexed Kronrod abscissae 1, 3, 5, 7, 9
    _GAUSS_W[2 * _i + 1] = _w
    _GAUSS_W[20 - (2 * _i + 1)] = _w

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class IntegrationResult:
    value: float | np.ndarray
    error_estimate: float
    evaluations: int


def _evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x), dtype=float)
    if y.shape[-1:] != x.shape:
        # scalar-only integrand; evaluate point by point
        y = np.array([f(float(xi)) for xi in x], dtype=float)
        if y.ndim == 2:
            y = y.T
    return y


def _gk21_batch(f: Callable, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kronrod values and error estimates on many intervals at once."""
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    fx = _evaluate(f, x.ravel())
    vector = fx.ndim == 2
    fx = fx.reshape((fx.shape[0], lo.size, 21)) if vector else fx.reshape((1, lo.size, 21))
    kron = np.einsum("mij,j->mi", fx, _KRONROD_W) * half
    gauss = np.einsum("mij,j->mi", fx, _GAUSS_W) * half
    mean = kron / np.where(half == 0.0, 1.0, 2.0 * half)
    resasc = np.einsum("mij,j->mi", np.abs(fx - mean[..., None]), _KRONROD_W) * np.abs(half)
    resabs = np.einsum("mij,j->mi", np.abs(fx), _KRONROD_W) * np.abs(half)
    diff = np.abs(kron - gauss)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0.0, resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5), diff)
    trunc = np.max(scaled, axis=0)
    rounding = np.max(50.0 * _EPS * resabs, axis=0)
    return (kron if vector else kron[0]), np.maximum(trunc, rounding), trunc <= rounding


def integrate_adaptive(
    f: Callable,
    a: float,
    b: float,
    rel_tol: float = DEFAULT_QUAD_RTOL,
    singular_end: SingularEnd = "none",
    abs_floor: float = ABSOLUTE_FLOOR,
    max_subdivisions: int = 4000,
) -> IntegrationResult:
    """Integrate ``f`` over ``[a, b]`` by adaptive Gauss-Kronrod subdivision.

    ``f`` should accept a 1-D array of abscissae; it may return an array of
    the same length or a ``(k, n)`` array for a vector-valued integrand (then
    the tolerance applies componentwise through the max norm). An inverse
    square-root singularity at one endpoint is removed by writing the
    distance to that endpoint as ``s**2``.
    """
    if not a < b:
        raise ValueError(f"need a < b, got a={a!r}, b={b!r}")
    if singular_end == "right_sqrt":
        def g(s, _f=f, _b=b):
            return 2.0 * s * _evaluate(_f, _b - s * s)
        lo0, hi0 = 0.0, math.sqrt(b - a)
    elif singular_end == "left_sqrt":
        def g(s, _f=f, _a=a):
            return 2.0 * s * _evaluate(_f, _a + s * s)
        lo0, hi0 = 0.0, math.sqrt(b - a)
    elif singular_end == "none":
        g, lo0, hi0 = f, float(a), float(b)
    else:
        raise ValueError(f"unknown singular_end {singular_end!r}")

    lo = np.array([lo0])
    hi = np.array([hi0])
    values, errs, limited = _gk21_batch(g, lo, hi)
    evaluations = 21
    vector = np.ndim(values) == 2
    while True:
        total = values.sum(axis=-1)
        total_err = float(errs.sum())
        target = max(rel_tol * float(np.max(np.abs(total))), abs_floor)
        # intervals already at the rounding level gain nothing from splitting
        if total_err <= target or bool(np.all(limited)):
            return IntegrationResult(total if vector else float(total), total_err, evaluations)
        if lo.size >= max_subdivisions:
            worst = int(np.argmax(errs))
            raise QuadratureError(
                f"no convergence after {lo.size} subintervals (error {total_err:.3e} > {target:.3e})",
                (float(lo[worst]), float(hi[worst])),
                total_err,
            )
        # split every interval carrying more than its fair share of the budget
        order = np.argsort(errs)[::-1]
        share = target / lo.size
        order = order[~limited[order]]
        chosen = order[errs[order] > 0.5 * share]
        if chosen.size == 0:
            chosen = order[:1]
        chosen = chosen[: max(1, max_subdivisions - lo.size)]
        mid = 0.5 * (lo[chosen] + hi[chosen])
        if np.any(mid <= lo[chosen]) or np.any(mid >= hi[chosen]):
            worst = int(chosen[0])
            raise QuadratureError("subinterval too small to split", (float(lo[worst]), float(hi[worst])), total_err)
        new_lo = np.concatenate([lo[chosen], mid])
        new_hi = np.concatenate([mid, hi[chosen]])
        new_vals, new_errs, new_limited = _gk21_batch(g, new_lo, new_hi)
        evaluations += 21 * new_lo.size
        keep = np.ones(lo.size, dtype=bool)
        keep[chosen] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        values = np.concatenate([values[..., keep], new_vals], axis=-1)
        errs = np.concatenate([errs[keep], new_errs])
        limited = np.concatenate([limited[keep], new_limited])


def refine_panels(f: Callable, nodes, rel_tol: float = 1e-14, max_panels: int = 20000):
    """Bisect panels until a single 21-point Kronrod rule resolves each one.

    Returns the refined node array and the per-panel integrals. A panel
    passes when its error estimate is below ``rel_tol`` times its own
    integral or when it is limited by rounding.
    """
    nodes = np.asarray(nodes, dtype=float)
    while True:
        lo, hi = nodes[:-1], nodes[1:]
        values, errs, limited = _gk21_batch(f, lo, hi)
        bad = (errs > rel_tol * np.abs(values)) & ~limited
        if not np.any(bad):
            return nodes, values
        if nodes.size + int(bad.sum()) > max_panels:
            worst = int(np.argmax(np.where(bad, errs, 0.0)))
            raise QuadratureError("panel refinement exceeded its budget",
                                  (float(lo[worst]), float(hi[worst])), float(errs[worst]))
        mids = 0.5 * (lo[bad] + hi[bad])
        nodes = np.sort(np.concatenate([nodes, mids]))


def kronrod_rule(f: Callable, lo: float, hi: float) -> float:
    """One 21-point Kronrod evaluation on ``[lo, hi]``, for subintervals of resolved panels."""
    if lo == hi:
        return 0.0
    half = 0.5 * (hi - lo)
    return float(np.dot(f(0.5 * (lo + hi) + half * _NODES), _KRONROD_W) * half)


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) with continuous extension

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4
# interpolation polynomial coefficients (theta, theta^2, theta^3, theta^4)
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


@dataclass
class OdePath:
    """Accepted nodes of an integration plus dense evaluation between them."""

    t: list[float] = field(default_factory=list)
    y: list[np.ndarray] = field(default_factory=list)
    _slopes: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def direction(self) -> float:
        return 1.0 if self.t[-1] >= self.t[0] else -1.0

    @property
    def t_nodes(self) -> np.ndarray:
        return np.array(self.t)

    @property
    def y_nodes(self) -> np.ndarray:
        return np.array(self.y)

    def __call__(self, t: float) -> np.ndarray:
        ts = self.t
        sgn = self.direction
        lo, hi = (ts[0], ts[-1]) if sgn > 0 else (ts[-1], ts[0])
        span = abs(ts[-1] - ts[0])
        if not (lo - 1e-12 * max(1.0, span) <= t <= hi + 1e-12 * max(1.0, span)):
            raise ValueError(f"t={t!r} outside the integrated range [{lo!r}, {hi!r}]")
        keys = ts if sgn > 0 else [-s for s in ts]
        k = bisect.bisect_right(keys, sgn * t) - 1
        k = min(max(k, 0), len(ts) - 2)
        h = ts[k + 1] - ts[k]
        theta = (t - ts[k]) / h
        powers = np.array([theta, theta**2, theta**3, theta**4])
        return self.y[k] + h * (_P @ powers) @ self._slopes[k]


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def solve_ivp(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence[float] | np.ndarray,
    t1: float,
    rel_tol: float = DEFAULT_ODE_RTOL,
    abs_tol: float = 1e-12,
    max_steps: int = 200000,
    first_step: float | None = None,
) -> OdePath:
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t1`` with Dormand-Prince 5(4)."""
    if t0 == t1:
        raise ValueError("t0 and t1 must differ")
    y = np.array(y0, dtype=float).reshape(-1)
    sgn = 1.0 if t1 > t0 else -1.0
    t = float(t0)
    fy = np.asarray(f(t, y), dtype=float)
    path = OdePath(t=[t], y=[y.copy()])

    if first_step is None:
        scale = abs_tol + rel_tol * np.abs(y)
        d0 = _rms(y / scale)
        d1 = _rms(fy / scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        y_trial = y + sgn * h0 * fy
        d2 = _rms((np.asarray(f(t + sgn * h0, y_trial)) - fy) / scale) / h0
        h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** 0.2
        h = min(100 * h0, h1, abs(t1 - t0))
    else:
        h = min(abs(first_step), abs(t1 - t0))

    steps = 0
    while sgn * (t1 - t) > 0:
        if steps >= max_steps:
            raise StepUnderflowError("step budget exhausted", t, y)
        min_step = 16 * _EPS * max(1.0, abs(t))
        if h < min_step:
            raise StepUnderflowError("step size underflow", t, y)
        h = min(h, abs(t1 - t))
        hs = sgn * h
        k = np.empty((7, y.size))
        k[0] = fy
        for i in range(1, 7):
            yi = y + hs * np.dot(_A[i], k[:i])
            k[i] = f(t + _C[i] * hs, yi)
        y_new = y + hs * (_B5[:6] @ k[:6])
        err_vec = hs * (_E @ k)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        if not np.all(np.isfinite(y_new)) or not np.all(np.isfinite(err_vec)):
            h *= 0.2
            continue
        err = _rms(err_vec / scale)
        steps += 1
        if err <= 1.0:
            t_new = t1 if abs(t1 - (t + hs)) <= 4 * _EPS * max(1.0, abs(t1)) else t + hs
            path._slopes.append(k.copy())
            t, y, fy = t_new, y_new, k[6]
            path.t.append(t)
            path.y.append(y.copy())
            factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.2)
            h *= factor
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
    return path


# ---------------------------------------------------------------------------
# Brent's method

def find_root_bracketed(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-14,
    max_iter: int = 200,
) -> float:
    """Root of ``f`` inside ``[lo, hi]`` by bisection with secant and inverse
    quadratic steps (Brent). Returns once the bracket is narrower than ``tol``
    (plus a few ulps) or ``f`` vanishes exactly."""
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise BracketError(f"no sign change on [{a!r}, {b!r}]: f={fa!r}, {fb!r}")
    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if math.copysign(1.0, fb) == math.copysign(1.0, fc):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * tol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or fb == 0.0:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                pp = 2.0 * xm * s
                qq = 1.0 - s
            else:
                qa = fa / fc
                r = fb / fc
                pp = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0))
                qq = (qa - 1.0) * (r - 1.0) * (s - 1.0)
            if pp > 0.0:
                qq = -qq
            pp = abs(pp)
            if 2.0 * pp < min(3.0 * xm * qq - abs(tol1 * qq), abs(e * qq)):
                e, d = d, pp / qq
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)
    raise NumericsError(f"root finder did not converge in {max_iter} iterations")
