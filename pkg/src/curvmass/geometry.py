"""Rotationally symmetric metrics ``dr^2/phi(r) + r^2 g_round`` and their
curvature, horizons and energy-condition margin."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from .numerics import find_root_bracketed
from .specfun import HyperParams, hyper_params

ProfileKind = Literal["de_sitter", "schwarzschild_de_sitter_capped", "constant_curvature", "perturbed", "tabulated"]
BoundaryKind = Literal["equator", "wall", "open"]

POLE_FRACTION = 1e-3


class ProfileError(ValueError):
    """Invalid profile description."""


ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RadialProfile:
    """Warped-product profile ``phi`` on ``[r_min, r_max]``.

    ``pole_series`` lists ``(power, coefficient)`` pairs with
    ``phi(r) = 1 + sum coefficient * r**power``, exact for
    ``r < series_limit`` and used below ``pole_radius``; it is empty for
    profiles without a smooth pole. ``gap_fn`` returns
    ``phi(r) / (r_max - r)`` for equator boundaries so that the simple zero
    can be handled without cancellation.
    """

    kind: ProfileKind
    r_max: float
    boundary_kind: BoundaryKind
    phi_fn: ArrayFn = field(repr=False)
    dphi_fn: ArrayFn = field(repr=False)
    gap_fn: ArrayFn | None = field(default=None, repr=False)
    pole_series: tuple[tuple[int, float], ...] = ()
    pole_radius: float = 0.0
    series_limit: float = 0.0
    r_min: float = 0.0
    length_scale: float = 1.0
    description: dict = field(default_factory=dict, compare=False)

    @property
    def pole_regular(self) -> bool:
        return bool(self.pole_series) and self.r_min == 0.0

    def phi(self, r):
        return self.phi_fn(np.asarray(r, dtype=float))

    def dphi(self, r):
        return self.dphi_fn(np.asarray(r, dtype=float))

    def phi_gap(self, r):
        if self.gap_fn is None:
            raise ProfileError(f"{self.kind} profile has no equator boundary")
        return self.gap_fn(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class ModelParams:
    """Cosmological constant and exponent, with the derived model constants."""

    Lambda: float
    p: float

    def __post_init__(self):
        if not 1.0 < self.p < 3.0:
            raise ProfileError(f"p must lie in (1, 3), got {self.p!r}")
        if not math.isfinite(self.Lambda):
            raise ProfileError("Lambda must be finite")

    @property
    def R_Lambda(self) -> float:
        return math.sqrt(3.0 / self.Lambda) if self.Lambda > 0 else math.inf

    @property
    def T_Lambda(self) -> float:
        return math.log(3.0 / self.Lambda) if self.Lambda > 0 else math.inf

    @property
    def hyper(self) -> HyperParams:
        return hyper_params(self.p)


# ---------------------------------------------------------------------------
# constructors

def de_sitter(Lambda: float) -> RadialProfile:
    """Round hemisphere ``phi = 1 - Lambda r^2 / 3`` up to its equator."""
    if not Lambda > 0:
        raise ProfileError(f"de Sitter needs Lambda > 0, got {Lambda!r}")
    return model_profile(Lambda)


def model_profile(Lambda: float) -> RadialProfile:
    """Constant-curvature model with ``R = 2 Lambda`` for any sign of Lambda.

    For ``Lambda <= 0`` the profile is complete and open (``r_max = inf``).
    """
    k = Lambda / 3.0
    if Lambda > 0:
        radius = math.sqrt(3.0 / Lambda)
        return RadialProfile(
            kind="de_sitter",
            r_max=radius,
            boundary_kind="equator",
            phi_fn=lambda r: 1.0 - k * r * r,
            dphi_fn=lambda r: -2.0 * k * r,
            gap_fn=lambda r: k * (radius + r),
            pole_series=((2, -k),),
            pole_radius=POLE_FRACTION * radius,
            series_limit=radius,
            length_scale=radius,
            description={"kind": "de_sitter", "Lambda": Lambda},
        )
    scale = math.sqrt(3.0 / abs(Lambda)) if Lambda < 0 else 1.0
    return RadialProfile(
        kind="de_sitter",
        r_max=math.inf,
        boundary_kind="open",
        phi_fn=lambda r: 1.0 - k * r * r,
        dphi_fn=lambda r: -2.0 * k * r,
        pole_series=((2, -k),) if Lambda != 0 else ((2, 0.0),),
        pole_radius=POLE_FRACTION * scale,
        series_limit=math.inf,
        length_scale=scale,
        description={"kind": "model", "Lambda": Lambda},
    )


def constant_curvature(a: float, cap: float | None = None) -> RadialProfile:
    """``phi = 1 - a r^2`` (scalar curvature ``6a``) on ``[0, min(1/sqrt(a), cap)]``."""
    if a > 0:
        equator = 1.0 / math.sqrt(a)
        radius = equator if cap is None else min(cap, equator)
    else:
        if cap is None:
            raise ProfileError("constant_curvature with a <= 0 needs a finite cap radius")
        radius = equator = cap
    if not radius > 0:
        raise ProfileError("cap radius must be positive")
    on_equator = a > 0 and radius == equator
    return RadialProfile(
        kind="constant_curvature",
        r_max=radius,
        boundary_kind="equator" if on_equator else "wall",
        phi_fn=lambda r: 1.0 - a * r * r,
        dphi_fn=lambda r: -2.0 * a * r,
        gap_fn=(lambda r: a * (radius + r)) if on_equator else None,
        pole_series=((2, -a),),
        pole_radius=POLE_FRACTION * radius,
        series_limit=radius,
        length_scale=radius,
        description={"kind": "constant_curvature", "a": a, "cap": cap},
    )


@dataclass(frozen=True)
class Shape:
    """Perturbation shape in the variable ``x = Lambda r^2 / 3``: ``s(x)``,
    ``ds/dx`` and the polynomial coefficients of ``s`` in ``x``."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    slope: Callable[[np.ndarray], np.ndarray]
    poly: tuple[float, ...]


SHAPES = {
    "quadratic": Shape("quadratic", lambda x: x, lambda x: np.ones_like(x), (0.0, 1.0)),
    "bump": Shape("bump", lambda x: x * (1.0 - x), lambda x: 1.0 - 2.0 * x, (0.0, 1.0, -1.0)),
}


def perturbed(Lambda: float, epsilon: float, shape: str = "quadratic", cap: float | None = None) -> RadialProfile:
    """``phi = (1 - Lambda r^2/3)(1 + epsilon * s)`` with ``s`` vanishing at the pole."""
    if not Lambda > 0:
        raise ProfileError("perturbed profiles need Lambda > 0")
    if shape not in SHAPES:
        raise ProfileError(f"unknown shape {shape!r}; available: {sorted(SHAPES)}")
    sh = SHAPES[shape]
    k = Lambda / 3.0
    equator = math.sqrt(3.0 / Lambda)
    radius = equator if cap is None else min(cap, equator)
    on_equator = radius == equator
    xs = np.linspace(0.0, k * radius * radius, 2001)
    if np.any(1.0 + epsilon * sh.value(xs) <= 0.0):
        raise ProfileError("1 + epsilon * shape must stay positive")

    def phi(r):
        x = k * r * r
        return (1.0 - x) * (1.0 + epsilon * sh.value(x))

    def dphi(r):
        x = k * r * r
        dx = 2.0 * k * r
        return dx * (-(1.0 + epsilon * sh.value(x)) + (1.0 - x) * epsilon * sh.slope(x))

    def gap(r):
        return k * (equator + r) * (1.0 + epsilon * sh.value(k * r * r))

    # phi - 1 as a polynomial in x: -x + epsilon (1 - x) s(x)
    coeffs = np.zeros(len(sh.poly) + 2)
    coeffs[1] -= 1.0
    for n, c in enumerate(sh.poly):
        coeffs[n] += epsilon * c
        coeffs[n + 1] -= epsilon * c
    series = tuple((2 * n, float(c) * k**n) for n, c in enumerate(coeffs) if n > 0 and c != 0.0)
    return RadialProfile(
        kind="perturbed",
        r_max=radius,
        boundary_kind="equator" if on_equator else "wall",
        phi_fn=phi,
        dphi_fn=dphi,
        gap_fn=gap if on_equator else None,
        pole_series=series or ((2, 0.0),),
        pole_radius=POLE_FRACTION * radius,
        series_limit=radius,
        length_scale=radius,
        description={"kind": "perturbed", "Lambda": Lambda, "epsilon": epsilon, "shape": shape, "cap": cap},
    )


def tabulated(r_samples, phi_samples) -> RadialProfile:
    """Cubic spline through samples; ``phi'(0) = 0`` is imposed at the pole.

    A final sample with ``phi = 0`` marks an equator, otherwise the last
    radius is a wall.
    """
    from scipy.interpolate import CubicSpline

    r = np.asarray(r_samples, dtype=float)
    ph = np.asarray(phi_samples, dtype=float)
    if r.ndim != 1 or r.shape != ph.shape or r.size < 4:
        raise ProfileError("need at least four (r, phi) samples")
    if r[0] != 0.0 or ph[0] != 1.0:
        raise ProfileError("first sample must be (0, 1)")
    if np.any(np.diff(r) <= 0.0):
        raise ProfileError("r samples must be strictly increasing")
    if np.any(ph[1:-1] <= 0.0) or ph[-1] < 0.0:
        raise ProfileError("phi must be positive in the interior")
    spline = CubicSpline(r, ph, bc_type=((1, 0.0), "not-a-knot"))
    radius = float(r[-1])
    fine = np.linspace(0.0, radius, 20 * r.size)[1:-1]
    if np.any(spline(fine) <= 0.0):
        raise ProfileError("spline interpolant of phi is not positive in the interior")
    on_equator = ph[-1] == 0.0
    d1 = spline.derivative(1)
    if on_equator and not d1(radius) < 0.0:
        raise ProfileError("equator sample needs phi'(r_max) < 0")
    last_knot = float(r[-2])
    d2 = spline.derivative(2)
    d3 = spline.derivative(3)
    slope_end, curv_end, jerk_end = float(d1(radius)), float(d2(radius)), float(d3(radius))

    def gap(x):
        x = np.asarray(x, dtype=float)
        g = radius - x
        # the last cubic piece expanded around the zero at r_max
        near = -slope_end + 0.5 * curv_end * g - jerk_end / 6.0 * g * g
        with np.errstate(divide="ignore", invalid="ignore"):
            far = spline(x) / g
        return np.where(x >= last_knot, near, far)

    series = ((2, float(spline.c[1, 0])), (3, float(spline.c[0, 0])))
    return RadialProfile(
        kind="tabulated",
        r_max=radius,
        boundary_kind="equator" if on_equator else "wall",
        phi_fn=lambda x: spline(x),
        dphi_fn=lambda x: d1(x),
        gap_fn=gap if on_equator else None,
        pole_series=series,
        pole_radius=min(POLE_FRACTION * radius, float(r[1])),
        series_limit=float(r[1]),
        length_scale=radius,
        description={"kind": "tabulated", "samples": int(r.size)},
    )


def read_profile_csv(path: str | Path) -> RadialProfile:
    """Load a tabulated profile from a CSV file with header ``r,phi``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["r", "phi"]:
            raise ProfileError(f"{path}: header must be 'r,phi'")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise ProfileError(f"{path}:{lineno}: expected two columns")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError as exc:
                raise ProfileError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ProfileError(f"{path}: no samples")
    arr = np.array(rows)
    return tabulated(arr[:, 0], arr[:, 1])


def sds_horizon_radii(Lambda: float, m: float) -> tuple[float, float]:
    """The two positive roots of ``r - Lambda r^3 / 3 - 2m``."""
    if not Lambda > 0:
        raise ProfileError("horizons need Lambda > 0")
    extremal = 1.0 / (3.0 * math.sqrt(Lambda))
    if not 0.0 < m < extremal:
        raise ProfileError(f"mass must lie in (0, {extremal!r}) (extremal mass) to have two horizons, got {m!r}")
    k = Lambda / 3.0

    def poly(r):
        return r - k * r**3 - 2.0 * m

    def polish(r):
        # one Newton step removes the last ulps of the bracket residue
        return r - poly(r) / (1.0 - 3.0 * k * r * r)

    turning = 1.0 / math.sqrt(Lambda)
    inner = polish(find_root_bracketed(poly, 0.0, turning, tol=1e-16))
    outer = polish(find_root_bracketed(poly, turning, math.sqrt(3.0 / Lambda), tol=1e-16))
    return inner, outer


def schwarzschild_de_sitter_capped(Lambda: float, m: float) -> RadialProfile:
    """Schwarzschild-de Sitter between its horizons, with a hemispherical cap
    of radius ``R-`` glued at the inner horizon (recorded as metadata only).

    Only the one-harmonic mass accepts this profile: the glued metric is
    merely Lipschitz at the junction.
    """
    inner, outer = sds_horizon_radii(Lambda, m)
    k = Lambda / 3.0
    return RadialProfile(
        kind="schwarzschild_de_sitter_capped",
        r_max=outer,
        boundary_kind="equator",
        phi_fn=lambda r: 1.0 - k * r * r - 2.0 * m / r,
        dphi_fn=lambda r: -2.0 * k * r + 2.0 * m / (r * r),
        gap_fn=lambda r: k * (r - inner) * (r + inner + outer) / r,
        r_min=inner,
        length_scale=outer,
        description={"kind": "schwarzschild_de_sitter_capped", "Lambda": Lambda, "m": m,
                     "R_minus": inner, "R_plus": outer},
    )


def make_profile(description: dict) -> RadialProfile:
    """Build a profile from a description such as ``{"kind": "de_sitter", "Lambda": 3}``."""
    description = dict(description)
    kind = description.pop("kind", None)
    builders = {
        "de_sitter": lambda s: de_sitter(float(s["Lambda"])),
        "schwarzschild_de_sitter_capped": lambda s: schwarzschild_de_sitter_capped(float(s["Lambda"]), float(s["m"])),
        "constant_curvature": lambda s: constant_curvature(float(s["a"]), _opt_float(s.get("cap"))),
        "perturbed": lambda s: perturbed(float(s["Lambda"]), float(s["epsilon"]), s.get("shape", "quadratic"),
                                         _opt_float(s.get("cap"))),
        "tabulated": lambda s: read_profile_csv(s["path"]) if "path" in s else tabulated(s["r"], s["phi"]),
    }
    if kind not in builders:
        raise ProfileError(f"unknown profile kind {kind!r}; available: {sorted(builders)}")
    try:
        return builders[kind](description)
    except KeyError as exc:
        raise ProfileError(f"{kind} profile is missing parameter {exc.args[0]!r}") from None


def _opt_float(value) -> float | None:
    return None if value is None else float(value)


# ---------------------------------------------------------------------------
# curvature

def _pole_limit_curvature(profile: RadialProfile, r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r)
    for power, coeff in profile.pole_series:
        out += -2.0 * (power + 1) * coeff * r ** (power - 2)
    return out


def scalar_curvature(profile: RadialProfile, r):
    """Scalar curvature ``2(1 - phi - r phi') / r^2`` of the warped product.

    Near a smooth pole the pole series is used, which removes the ``1/r^2``
    cancellation; at ``r = 0`` this gives the limit ``-6 phi''(0)/2``.
    """
    r = np.asarray(r, dtype=float)
    near = profile.pole_regular & (r < profile.pole_radius)
    with np.errstate(divide="ignore", invalid="ignore"):
        generic = 2.0 * (1.0 - profile.phi(r) - r * profile.dphi(r)) / (r * r)
    if profile.pole_regular:
        result = np.where(near, _pole_limit_curvature(profile, r), generic)
    else:
        result = generic
    return float(result) if result.ndim == 0 else result


def mean_curvature(profile: RadialProfile, r):
    """Mean curvature ``2 sqrt(phi)/r`` of the centred sphere of radius ``r``."""
    r = np.asarray(r, dtype=float)
    ph = np.where(r >= profile.r_max, 0.0, profile.phi(r)) if profile.boundary_kind == "equator" else profile.phi(r)
    result = 2.0 * np.sqrt(np.maximum(ph, 0.0)) / r
    return float(result) if result.ndim == 0 else result


def dec_margin(profile: RadialProfile, Lambda: float, samples: int = 401) -> float:
    """Minimum of ``R - 2 Lambda`` over an even grid of the profile's radii."""
    if samples < 2:
        raise ValueError("need at least two samples")
    upper = profile.r_max if math.isfinite(profile.r_max) else 10.0 * profile.length_scale
    grid = np.linspace(profile.r_min, upper, samples)
    if not profile.pole_regular:
        grid = grid[grid > 0.0]
    return float(np.min(scalar_curvature(profile, grid) - 2.0 * Lambda))


def volume(profile: RadialProfile) -> float:
    """Riemannian volume ``int 4 pi r^2 / sqrt(phi) dr`` of the profile."""
    from .numerics import integrate_adaptive

    if not math.isfinite(profile.r_max):
        raise ProfileError("open profiles have infinite volume")
    if profile.boundary_kind == "equator":
        radius = profile.r_max

        def integrand(s):
            r = radius - s * s
            return 2.0 * 4.0 * math.pi * r * r / np.sqrt(profile.phi_gap(r))

        res = integrate_adaptive(integrand, 0.0, math.sqrt(radius - profile.r_min), rel_tol=1e-12)
        return res.value
    res = integrate_adaptive(lambda r: 4.0 * math.pi * r * r / np.sqrt(profile.phi(r)),
                             profile.r_min, profile.r_max, rel_tol=1e-12)
    return res.value
