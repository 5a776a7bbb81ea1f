"""Gamma-function ratios, the Gauss hypergeometric function and the function
``upsilon(x) = 2F1(a_p, b_p, c_p; x)`` together with its derivatives.

Gamma ratios are always formed in the log domain with explicit sign
tracking, because ``c_p = p/(p-1)`` grows without bound as ``p -> 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

SERIES_SWITCH = 0.75
_SERIES_RTOL = 1e-17
_MAX_TERMS = 200000
_SQRT_PI = math.sqrt(math.pi)


class DomainError(ValueError):
    """Argument outside the supported domain."""


class PoleError(DomainError):
    """Gamma function evaluated at a nonpositive integer."""


class SeriesError(ArithmeticError):
    """A power series did not converge within its term budget."""


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def log_gamma(x: float) -> float:
    """Natural log of Gamma for ``x > 0``."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x!r}")
    if x < 0.0:
        raise DomainError("negative argument: use log_gamma_signed")
    return math.lgamma(x)


def log_gamma_signed(x: float) -> tuple[float, int]:
    """Return ``(log|Gamma(x)|, sign Gamma(x))`` for any non-pole real ``x``."""
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x!r}")
    if x > 0.0:
        return math.lgamma(x), 1
    # Gamma alternates sign between consecutive negative integers
    sign = -1 if math.floor(x) % 2 else 1
    return math.lgamma(x), sign


def log_gamma_ratio(numerator: Iterable[float], denominator: Iterable[float]) -> tuple[float, int]:
    """``log|prod Gamma(num) / prod Gamma(den)|`` and the sign of the ratio.

    A denominator argument at a pole makes the ratio vanish, reported as
    ``(-inf, 0)``.
    """
    total, sign = 0.0, 1
    for x in denominator:
        if _is_nonpositive_integer(x):
            return -math.inf, 0
        lg, s = log_gamma_signed(x)
        total -= lg
        sign *= s
    for x in numerator:
        lg, s = log_gamma_signed(x)
        total += lg
        sign *= s
    return total, sign


def gamma_ratio(numerator: Iterable[float], denominator: Iterable[float]) -> float:
    log_value, sign = log_gamma_ratio(numerator, denominator)
    return 0.0 if sign == 0 else sign * math.exp(log_value)


@dataclass(frozen=True)
class HyperParams:
    p: float
    a_p: float
    b_p: float
    c_p: float


def hyper_params(p: float) -> HyperParams:
    """Hypergeometric parameters attached to the exponent ``p`` in ``(1, 3]``."""
    if not 1.0 < p <= 3.0:
        raise DomainError(f"p must lie in (1, 3], got {p!r}")
    root = math.sqrt(4.0 + 12.0 * (p - 1.0) - 3.0 * (p - 1.0) ** 2)
    denom = 4.0 * (p - 1.0)
    a = (3.0 - p + root) / denom
    # b = (3 - p - root)/denom rewritten to avoid cancellation near p = 1
    b = -(5.0 - p) / (4.0 * (p - 1.0)) / a
    return HyperParams(p=p, a_p=a, b_p=b, c_p=p / (p - 1.0))


def _series(a: float, b: float, c: float, x: float) -> float:
    """Direct power series of 2F1 with incremental Pochhammer ratios."""
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 undefined for c = {c!r}")
    total = 1.0
    term = 1.0
    for k in range(_MAX_TERMS):
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        term *= ratio
        total += term
        if term == 0.0:
            return total
        if abs(ratio) < 1.0:
            tail = abs(term) * abs(ratio) / (1.0 - abs(ratio))
            if tail <= _SERIES_RTOL * abs(total) and k > 2:
                return total
    raise SeriesError(f"2F1({a}, {b}; {c}; {x}) series did not converge in {_MAX_TERMS} terms")


def _connection(a: float, b: float, c: float, x: float) -> tuple[float, float]:
    """Value through the ``x -> 1 - x`` connection formula and the size of its
    two pieces (used to detect cancellation)."""
    y = 1.0 - x
    s = c - a - b
    la, sa = log_gamma_ratio([c, s], [c - a, c - b])
    lb, sb = log_gamma_ratio([c, -s], [a, b])
    first = 0.0 if sa == 0 else sa * math.exp(la) * _series(a, b, 1.0 - s, y)
    second = 0.0 if sb == 0 else sb * math.exp(lb) * y**s * _series(c - a, c - b, s + 1.0, y)
    return first + second, abs(first) + abs(second)


def hyp2f1(a: float, b: float, c: float, x: float) -> float:
    """Gauss hypergeometric function for real ``x`` with ``-1 < x < 1``.

    Above ``SERIES_SWITCH`` the connection formula to ``1 - x`` is used,
    unless ``c - a - b`` is an integer or the two pieces cancel badly, in
    which case the direct series is summed instead.
    """
    if _is_nonpositive_integer(c):
        raise PoleError(f"2F1 undefined for c = {c!r}")
    if not -1.0 < x < 1.0:
        raise DomainError(f"x must lie in (-1, 1), got {x!r}")
    if x == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if x <= SERIES_SWITCH:
        return _series(a, b, c, x)
    s = c - a - b
    if abs(s - round(s)) > 1e-9:
        value, size = _connection(a, b, c, x)
        if size <= 1e3 * abs(value) or x > 0.995:
            return value
    return _series(a, b, c, x)


def gauss_at_one(a: float, b: float, c: float) -> float:
    """Gauss summation ``2F1(a, b; c; 1) = G(c)G(c-a-b)/(G(c-a)G(c-b))``."""
    if c - a - b <= 0.0:
        raise DomainError(f"2F1 diverges at x = 1 when c - a - b = {c - a - b!r} <= 0")
    return gamma_ratio([c, c - a - b], [c - a, c - b])


def upsilon_pair(p: float, x: float) -> tuple[float, float]:
    """``(upsilon(x), upsilon'(x))`` for ``-1 < x <= 1``."""
    hp = hyper_params(p)
    a, b, c = hp.a_p, hp.b_p, hp.c_p
    slope = -(5.0 - p) / (4.0 * p)
    if x == 1.0:
        return gauss_at_one(a, b, c), slope * gauss_at_one(a + 1.0, b + 1.0, c + 1.0)
    if not -1.0 < x < 1.0:
        raise DomainError(f"x must lie in (-1, 1], got {x!r}")
    return hyp2f1(a, b, c, x), slope * hyp2f1(a + 1.0, b + 1.0, c + 1.0, x)


def upsilon_second(p: float, x: float) -> float:
    """Second derivative of ``upsilon`` for ``-1 < x < 1``."""
    hp = hyper_params(p)
    a, b, c = hp.a_p, hp.b_p, hp.c_p
    coeff = -(5.0 - p) / (4.0 * p) * (a + 1.0) * (b + 1.0) / (c + 1.0)
    return coeff * hyp2f1(a + 2.0, b + 2.0, c + 2.0, x)


def _bracket_regular_series(a: float, b: float, y: float) -> float:
    """``F(a, b; -1/2; y) - (1 - y) F(a+1, b+1; 1/2; y)`` summed jointly so the
    leading terms cancel exactly."""
    total = 0.0
    t0 = 1.0
    t1 = 1.0
    for k in range(_MAX_TERMS):
        r0 = (a + k) * (b + k) / ((-0.5 + k) * (k + 1.0)) * y
        r1 = (a + 1.0 + k) * (b + 1.0 + k) / ((0.5 + k) * (k + 1.0)) * y
        prev1 = t1
        t0 *= r0
        t1 *= r1
        term = t0 - t1 + y * prev1
        total += term
        ratio = max(abs(r0), abs(r1))
        if ratio < 1.0 and k > 2:
            tail = (abs(t0) + 2.0 * abs(t1)) * ratio / (1.0 - ratio)
            if tail <= _SERIES_RTOL * abs(total) or (t0 == 0.0 and t1 == 0.0):
                return total
    raise SeriesError("bracket series did not converge")


def psi_bracket(p: float, x: float, gap: float | None = None) -> float:
    """``upsilon(x) + 2 (p-1)/(5-p) x upsilon'(x)``, which vanishes like
    ``sqrt(1-x)`` at ``x = 1``; evaluated without cancellation near 1.

    ``gap`` may carry ``1 - x`` to full relative precision when ``x`` is
    too close to 1 to represent it.
    """
    y = 1.0 - x if gap is None else gap
    if y == 0.0:
        return 0.0
    if x <= SERIES_SWITCH:
        ups, dups = upsilon_pair(p, x)
        return ups + 2.0 * (p - 1.0) / (5.0 - p) * x * dups
    if not y > 0.0:
        raise DomainError(f"x must be at most 1, got {x!r}")
    hp = hyper_params(p)
    a, b, c = hp.a_p, hp.b_p, hp.c_p
    x = 1.0 - y
    l_reg, s_reg = log_gamma_ratio([c], [a + 1.5, b + 1.5])
    regular = s_reg * math.exp(l_reg) * 0.5 * _SQRT_PI * _bracket_regular_series(a, b, y)
    l_sing, s_sing = log_gamma_ratio([c], [a, b])
    inner = (4.0 / 3.0) * y * hyp2f1(b + 1.5, a + 1.5, 2.5, y) - 4.0 * (p - 1.0) / (5.0 - p) * x * hyp2f1(
        b + 1.5, a + 1.5, 1.5, y
    )
    singular = s_sing * math.exp(l_sing) * _SQRT_PI * math.sqrt(y) * inner
    return regular + singular


def polarization_constant(p: float) -> float:
    """``K_p = G(1/2) G(c_p) / (G(a_p + 3/2) G(b_p + 3/2))``, equal to ``2 upsilon(1)``."""
    hp = hyper_params(p)
    return gamma_ratio([0.5, hp.c_p], [hp.a_p + 1.5, hp.b_p + 1.5])


def bracket_constant(p: float) -> float:
    """``G(1/2) G(c_p) / (G(a_p + 1) G(b_p + 1))``: limit of the bracket over ``sqrt(1-x)``."""
    hp = hyper_params(p)
    return gamma_ratio([0.5, hp.c_p], [hp.a_p + 1.0, hp.b_p + 1.0])


def mu_constant_ratio(p: float) -> float:
    """``G(a_p + 1) G(b_p + 1) / (G(a_p + 3/2) G(b_p + 3/2))``."""
    hp = hyper_params(p)
    return gamma_ratio([hp.a_p + 1.0, hp.b_p + 1.0], [hp.a_p + 1.5, hp.b_p + 1.5])
