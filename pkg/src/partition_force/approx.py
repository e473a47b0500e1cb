"""Closed-form regime approximations of the fugacity and the net force.

High temperature (``t >> N``) uses the ``N/t`` expansion and its Pade
regularization. Low temperature uses expansions in ``exp(-b/2)`` (fermions)
or ``exp(-b)`` (bosons). The medium-temperature forms come from turning
the level sums into integrals. :func:`interpolate` and
:func:`fit_interpolation` blend a low and a high regime curve into one.

The closed forms take plain ``(N, t)`` numbers rather than
:class:`~partition_force.statmech.EnsembleParams` so that ``t = 0`` limits
can be evaluated directly.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from partition_force.errors import DomainError, FitError, PoleError, RegimeWarning
from partition_force.spectrum import fermion_zero_t_force
from partition_force.statmech import ForceEstimate, Statistics

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
PI = math.pi


@dataclass(frozen=True)
class HighTSeries:
    """Coefficients of ``df ~ sqrt(N) sqrt(N/t) [1 + eta c1 x + c2 x^2 + eta c3 x^3]``, ``x = N/t``."""

    c1: float = (SQRT2 - 1.0) / 2.0
    c2: float = (1.0 - 3.0 * SQRT2 + 2.0 * SQRT3) / 6.0
    c3: float = (11.0 + 7.0 * SQRT2 - 12.0 * SQRT3) / 24.0

    def bracket(self, x, eta: int, terms: int = 4):
        coeffs = (1.0, eta * self.c1, self.c2, eta * self.c3)[:terms]
        return sum(c * x**n for n, c in enumerate(coeffs))


HIGH_T = HighTSeries()
PADE_POLE = HIGH_T.c1  # boson Pade pole at t/N = (sqrt2 - 1)/2

# Sommerfeld-type coefficients for the medium-temperature fermion force.
_SOMMERFELD_A = PI**2 / 24.0
_SOMMERFELD_SERIES_B = 7.0 * PI**4 / 384.0
_SOMMERFELD_PADE_B = 23.0 * PI**4 / 1152.0

_FERMION_LOW_T_COEFFS = (1.0, -1.0, 4.0, -1.0, 6.0)  # powers exp(-n b/2), n = 1..5
_BOSON_LOW_T_COEFFS = (0.5, 9.0 / 8.0, 19.0 / 16.0)  # powers exp(-n b), n = 1..3

# Coefficient of t in the boson medium-T force before simplification (~1.032).
BOSON_MED_T_LINEAR = -0.4 - math.log(0.8) + 0.2 + 4.0 / math.sqrt(5.0 * PI)


class BosonMediumForm(enum.Enum):
    """Variants of the boson medium-temperature force.

    ``SIMPLIFIED``: ``N + t - t ln t + sqrt(4t/5)``, the published final form.

    ``UNSIMPLIFIED``: keeps the ~1.032 coefficient of ``t`` and the ``-sqrt2``.

    ``PREFACTORED``: ``N + 4t/sqrt(5 pi) - t ln t - 2 sqrt(2t/pi)``. This
    carries the ``2/sqrt(pi b)`` prefactor through the truncated integral
    term. It is the curve whose common tangent with the three-term high-T
    series touches at (7.338, 88.46) and (26.12, 45.66) for N = 100.
    """

    SIMPLIFIED = "simplified"
    UNSIMPLIFIED = "unsimplified"
    PREFACTORED = "prefactored"


class InterpVariable(enum.Enum):
    T_OVER_N = "t_over_N"
    T = "t"


@dataclass(frozen=True)
class InterpolationSpec:
    """Crossover point and sharpness of a two-curve blend.

    ``p_raw`` is the unrounded exponent from the tangent condition, ``p``
    the value actually used. ``tangent`` holds the boson common-tangent
    diagnostics ``((t1, g1), (t2, g2), slope)``.
    """

    x_star: float
    p: float
    variable: InterpVariable
    p_raw: float | None = None
    tangent: tuple | None = None

    def __post_init__(self):
        if not (self.x_star > 0 and self.p > 0):
            raise DomainError(f"need x_star > 0 and p > 0, got {self.x_star}, {self.p}")


def _check_nt(N, t, allow_zero=False):
    if not N > 0:
        raise DomainError(f"N must be positive, got {N!r}")
    if t < 0 or (t == 0 and not allow_zero) or not math.isfinite(t):
        raise DomainError(f"invalid temperature {t!r}")


def _stats(stats) -> Statistics:
    return stats if isinstance(stats, Statistics) else Statistics(stats)


# --- high temperature -------------------------------------------------------


def high_t_alpha(N: float, t: float, stats: Statistics, refined: bool = False) -> float:
    """High-temperature fugacity ``exp(-at) ~ eta (1 - exp(-eta N/t))``.

    With ``refined`` the ``1 - exp(-b l) ~ b l`` step is replaced by the
    symmetric ``2 sinh(b l/2) ~ b l``, which shifts ``at`` by ``-b/2`` and
    multiplies the result by ``exp(-b/2)``.
    """
    _check_nt(N, t)
    eta = _stats(stats).eta
    if t < N:
        warnings.warn(f"high-T fugacity used at t/N = {t / N:.3g} < 1", RegimeWarning, stacklevel=2)
    value = -math.expm1(-N / t) if eta == 1 else math.expm1(N / t)
    if refined:
        value *= math.exp(-0.5 / t)
    return value


def high_t_force(N: float, t: float, stats: Statistics, terms: int = 4) -> ForceEstimate:
    """High-temperature series truncated to ``terms`` bracket terms (1..4)."""
    _check_nt(N, t)
    if terms not in (1, 2, 3, 4):
        raise DomainError(f"terms must be 1..4, got {terms!r}")
    eta = _stats(stats).eta
    x = N / t
    value = math.sqrt(N) * math.sqrt(x) * HIGH_T.bracket(x, eta, terms)
    return ForceEstimate(value, f"highT-{terms}")


def pade_ratio(x, eta: int):
    """``1/(1 - eta c1 x)`` with ``x = N/t``; accepts complex arguments.

    This is the Pade form divided by its leading ``sqrt(N) sqrt(N/t)``.
    """
    return 1.0 / (1.0 - eta * PADE_POLE * x)


def high_t_force_pade(N: float, t: float, stats: Statistics) -> ForceEstimate:
    """Pade-regularized high-T force ``sqrt(N) sqrt(t/N) / (t/N - eta c1)``.

    Re-expanding it in ``N/t`` gives the coefficients ``c1, c1^2, c1^3``
    (about 0.207, 0.0429, 0.00888) with the same sign pattern as the series.

    Raises:
        PoleError: bosons at ``t/N <= (sqrt2 - 1)/2``.
    """
    _check_nt(N, t)
    eta = _stats(stats).eta
    y = t / N
    if eta == 1 and y <= PADE_POLE:
        raise PoleError(f"boson Pade form diverges for t/N <= {PADE_POLE:.6f} (got {y:.6g})")
    return ForceEstimate(math.sqrt(N) * math.sqrt(y) / (y - eta * PADE_POLE), "pade")


def series_coefficients(func: Callable[[complex], complex], n: int, radius: float = 0.5, points: int = 256):
    """Taylor coefficients of ``func`` about 0 from a discrete Cauchy integral.

    ``func`` must be analytic on the disc of the given radius. The result is
    accurate to roughly ``(radius/R)^points`` where ``R`` is the distance to
    the nearest singularity.
    """
    theta = 2.0 * PI * np.arange(points) / points
    z = radius * np.exp(1j * theta)
    values = np.array([func(zi) for zi in z])
    coeffs = np.fft.fft(values) / points
    return np.real(coeffs[:n] / radius ** np.arange(n))


# --- low temperature --------------------------------------------------------


def low_t_fermion_force(N: int, t: float, exp_terms: int = 5) -> ForceEstimate:
    """Fermion force near ``t = 0`` as a series in ``exp(-b/2)``.

    ``df(0) - [q - q^2 + 4 q^3 - q^4 + 6 q^5] / (2 sqrt(pi) N^(3/2))`` with
    ``q = exp(-1/(2t))``, truncated after ``exp_terms`` powers. ``t = 0``
    returns ``df(0)`` exactly.
    """
    _check_nt(N, t, allow_zero=True)
    if exp_terms not in range(1, 6):
        raise DomainError(f"exp_terms must be 1..5, got {exp_terms!r}")
    if t > 2.0:
        warnings.warn(f"low-T fermion expansion used at t = {t:.3g} > 2", RegimeWarning, stacklevel=2)
    base = fermion_zero_t_force(N)
    if t == 0:
        return ForceEstimate(base, f"lowT-{exp_terms}")
    q = math.exp(-0.5 / t)
    corr = sum(c * q ** (n + 1) for n, c in enumerate(_FERMION_LOW_T_COEFFS[:exp_terms]))
    return ForceEstimate(base - corr / (2.0 * math.sqrt(PI) * N**1.5), f"lowT-{exp_terms}")


def low_t_boson_force(N: float, t: float, exp_terms: int = 3) -> ForceEstimate:
    """Boson force ``N - q/2 - 9q^2/8 - 19q^3/16``, ``q = exp(-1/t)``."""
    _check_nt(N, t, allow_zero=True)
    if exp_terms not in (1, 2, 3):
        raise DomainError(f"exp_terms must be 1..3, got {exp_terms!r}")
    if t >= 1.0:
        warnings.warn(f"low-T boson expansion used at t = {t:.3g} >= 1", RegimeWarning, stacklevel=2)
    if t == 0:
        return ForceEstimate(float(N), f"lowT-{exp_terms}")
    q = math.exp(-1.0 / t)
    corr = sum(c * q ** (n + 1) for n, c in enumerate(_BOSON_LOW_T_COEFFS[:exp_terms]))
    return ForceEstimate(N - corr, f"lowT-{exp_terms}")


# --- medium temperature -----------------------------------------------------


def med_t_fermion_alpha_tilde(N: float, t: float) -> float:
    """``alpha_tilde`` from the trapezoid-corrected inversion (log-safe)."""
    _check_nt(N, t)
    u = (N + 0.5 * math.expm1(-N / t)) / t
    return -(u + math.log(-math.expm1(-u)))


def med_t_fermion_alpha(N: float, t: float) -> float:
    """Fermion fugacity ``exp((N - N_0/2)/t) - 1`` with ``N_0 = 1 - exp(-N/t)``.

    Overflows to ``inf`` when ``(N - 1/2)/t`` exceeds ~709; use
    :func:`med_t_fermion_alpha_tilde` there.
    """
    _check_nt(N, t)
    u = (N + 0.5 * math.expm1(-N / t)) / t
    try:
        return math.expm1(u)
    except OverflowError:
        return math.inf


def med_t_fermion_force(N: float, t: float) -> ForceEstimate:
    """``sqrt(N) (2/sqrt(pi)) / (1 + (pi^2/24) y^2 + (23 pi^4/1152) y^4)``, ``y = t/N``."""
    _check_nt(N, t, allow_zero=True)
    y2 = (t / N) ** 2
    value = math.sqrt(N) * (2.0 / math.sqrt(PI)) / (1.0 + _SOMMERFELD_A * y2 + _SOMMERFELD_PADE_B * y2 * y2)
    return ForceEstimate(value, "medT")


def med_t_fermion_force_from_alpha(alpha_tilde: float, t: float, pade: bool = True) -> float:
    """Degenerate-limit force ``(2/sqrt(pi b)) int_0^inf dz / (exp(at + z^2) + 1)``.

    ``pade=False`` gives the asymptotic series
    ``sqrt(-at) [1 - (pi^2/24)/at^2 - (7 pi^4/384)/at^4]``; the default Pade
    form divides by ``1 + (pi^2/24)/at^2 + (23 pi^4/1152)/at^4`` instead and
    stays finite as ``at -> 0^-``.
    """
    if not alpha_tilde < 0:
        raise DomainError(f"degenerate expansion needs alpha_tilde < 0, got {alpha_tilde!r}")
    if not t > 0:
        raise DomainError(f"invalid temperature {t!r}")
    inv2 = 1.0 / alpha_tilde**2
    pref = 2.0 * math.sqrt(t / PI) * math.sqrt(-alpha_tilde)
    if pade:
        return pref / (1.0 + _SOMMERFELD_A * inv2 + _SOMMERFELD_PADE_B * inv2 * inv2)
    return pref * (1.0 - _SOMMERFELD_A * inv2 - _SOMMERFELD_SERIES_B * inv2 * inv2)


def med_t_boson_n0(N: float, t: float) -> float:
    """Condensate estimate ``N - (2/5) t - t ln(4t/5)``.

    Emits :class:`RegimeWarning` when the estimate is not positive.
    """
    _check_nt(N, t, allow_zero=True)
    value = float(N) if t == 0 else N - 0.4 * t - t * math.log(0.8 * t)
    if value <= 0:
        warnings.warn(f"condensate estimate {value:.4g} <= 0 at t = {t:.4g}", RegimeWarning, stacklevel=2)
    return value


def med_t_boson_force(
    N: float, t: float, form: BosonMediumForm = BosonMediumForm.SIMPLIFIED
) -> ForceEstimate:
    """Boson medium-temperature force; see :class:`BosonMediumForm`.

    ``SIMPLIFIED`` and ``PREFACTORED`` return ``N`` at ``t = 0``. A value
    above ``N`` breaks the ``df <= N`` bound and raises a :class:`RegimeWarning`.
    """
    _check_nt(N, t, allow_zero=True)
    if t == 0:
        value = float(N) if form is not BosonMediumForm.UNSIMPLIFIED else N - SQRT2
    else:
        tlnt = t * math.log(t)
        if form is BosonMediumForm.SIMPLIFIED:
            value = N + t - tlnt + math.sqrt(0.8 * t)
        elif form is BosonMediumForm.UNSIMPLIFIED:
            value = N + BOSON_MED_T_LINEAR * t - tlnt + math.sqrt(0.8 * t) - SQRT2
        else:
            value = med_t_boson_force_raw(N, t)
    if value > N:
        warnings.warn(f"medium-T boson force {value:.6g} exceeds N = {N}", RegimeWarning, stacklevel=2)
    return ForceEstimate(value, f"medT-{form.value}")


# --- interpolation ----------------------------------------------------------


def interpolate(g1: Callable[[float], float], g2: Callable[[float], float], spec: InterpolationSpec, x: float) -> float:
    """``(g1 + (x/x*)^p g2) / (1 + (x/x*)^p)``, evaluated without overflow.

    Only the curve(s) with nonzero weight are called, so ``g2`` may be
    singular where its weight underflows (and vice versa).
    """
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x!r}")
    if x == 0:
        return g1(x)
    logr = spec.p * math.log(x / spec.x_star)
    if logr > 745.0:
        return g2(x)
    if logr < -745.0:
        return g1(x)
    w2 = 1.0 / (1.0 + math.exp(-logr))
    w1 = 1.0 / (1.0 + math.exp(logr))
    return w1 * g1(x) + w2 * g2(x)


def fermion_curves():
    """Low (medium-T Pade) and high (high-T Pade) fermion curves of ``x = t/N``, scaled by ``1/sqrt(N)``."""

    def g1(x):
        x2 = x * x
        return (2.0 / math.sqrt(PI)) / (1.0 + _SOMMERFELD_A * x2 + _SOMMERFELD_PADE_B * x2 * x2)

    def g2(x):
        return math.sqrt(x) / (x + PADE_POLE)

    return g1, g2


def boson_curves(N: float):
    """Low (prefactored medium-T form) and high (three-term series) boson curves of ``t``."""

    def g1(t):
        return med_t_boson_force_raw(N, t)

    def g2(t):
        x = N / t
        return math.sqrt(N) * math.sqrt(x) * HIGH_T.bracket(x, 1, 3)

    return g1, g2


def med_t_boson_force_raw(N: float, t: float) -> float:
    """Prefactored boson curve without regime checks, for fitting."""
    if t == 0:
        return float(N)
    return N + 4.0 * t / math.sqrt(5.0 * PI) - t * math.log(t) - 2.0 * math.sqrt(2.0 * t / PI)


def _derivative(f, x, h=None):
    h = h or 1e-5 * max(1.0, abs(x))
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _common_tangent(g1, g2, x_star):
    """Line tangent to concave ``g1`` (left) and convex ``g2`` (right).

    For a trial slope ``s`` the touch points solve ``g1'(t1) = s`` and
    ``g2'(t2) = s``; ``s`` itself is fixed by requiring one line through both.
    """
    d1 = lambda t: _derivative(g1, t)
    d2 = lambda t: _derivative(g2, t)

    def touch(d, s, lo, hi):
        return brentq(lambda t: d(t) - s, lo, hi, xtol=1e-13)

    lo1, hi1 = x_star * 1e-3, x_star
    lo2, hi2 = x_star, x_star * 1e2

    def gap(s):
        t1 = touch(d1, s, lo1, hi1)
        t2 = touch(d2, s, lo2, hi2)
        return g1(t1) + s * (t2 - t1) - g2(t2)

    s_lo = max(d1(hi1), d2(lo2))
    s_hi = min(d1(lo1), d2(hi2))
    if not s_lo < s_hi:
        raise FitError("no common tangent slope range around the interpolation point")
    # Shrink slightly off the window ends where a touch point would sit on the boundary.
    span = s_hi - s_lo
    s = brentq(gap, s_lo + 1e-9 * span, s_hi - 1e-9 * span, xtol=1e-13)
    t1 = touch(d1, s, lo1, hi1)
    t2 = touch(d2, s, lo2, hi2)
    return (t1, g1(t1)), (t2, g2(t2)), s


def fit_interpolation(stats: Statistics, N: float) -> InterpolationSpec:
    """Crossover point and exponent for the regime interpolation.

    Fermions: ``x* = t/N`` where the medium-T and high-T Pade curves cross
    (0.237845 for any ``N``), with ``p = 5``.

    Bosons: ``x* = t`` minimizing ``|g1 - g2|`` between the prefactored
    medium-T curve and the three-term high-T series. ``p`` makes the blend's
    slope at ``x*`` equal the slope of the common tangent, then is rounded
    to an integer.
    """
    stats = _stats(stats)
    if not N >= 2:
        raise DomainError(f"N must be >= 2, got {N!r}")
    if stats.eta == -1:
        g1, g2 = fermion_curves()
        diff = lambda x: g1(x) - g2(x)
        grid = np.geomspace(1e-3, 1e3, 241)
        vals = np.array([diff(x) for x in grid])
        sign_change = np.nonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:]))[0]
        if sign_change.size == 0:
            raise FitError("fermion curves do not cross in t/N in [1e-3, 1e3]")
        i = sign_change[0]
        x_star = brentq(diff, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
        return InterpolationSpec(x_star, 5.0, InterpVariable.T_OVER_N, p_raw=5.0)

    g1, g2 = boson_curves(N)
    gap = lambda t: abs(g1(t) - g2(t))
    grid = np.geomspace(1.0, 1e3, 601)
    vals = np.array([gap(t) for t in grid])
    i = int(np.argmin(vals))
    if i == 0 or i == grid.size - 1:
        raise FitError("no interior minimum of |g1 - g2| for t in [1, 1e3]")
    res = minimize_scalar(gap, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", tol=1e-12)
    x_star = float(res.x)
    if not grid[0] <= x_star <= grid[-1]:
        raise FitError(f"golden-section search left the window: t = {x_star}")
    touch1, touch2, slope = _common_tangent(g1, g2, x_star)
    dg2 = _derivative(g2, x_star)
    p_raw = 4.0 * x_star * (slope - dg2) / (g2(x_star) - g1(x_star))
    if not p_raw > 0:
        raise FitError(f"tangent condition gives a nonpositive exponent {p_raw:.4g}")
    return InterpolationSpec(
        x_star, float(max(1, round(p_raw))), InterpVariable.T, p_raw=p_raw, tangent=(touch1, touch2, slope)
    )


def interpolated_force(N: float, t: float, stats: Statistics, spec: InterpolationSpec | None = None) -> ForceEstimate:
    """Whole-range force from the fitted blend of the low and high curves."""
    stats = _stats(stats)
    _check_nt(N, t, allow_zero=True)
    if spec is None:
        spec = fit_interpolation(stats, N)
    if stats.eta == -1:
        g1, g2 = fermion_curves()
        value = math.sqrt(N) * interpolate(g1, g2, spec, t / N)
    else:
        g1, g2 = boson_curves(N)
        value = interpolate(g1, g2, spec, t)
    return ForceEstimate(value, "interp")
