"""Exact net force from Bose-Einstein / Fermi-Dirac occupations of the half-line levels.

Both sides of the wall share the occupations ``N_k = 1/(exp(at + b k) - eta)``,
where ``at`` (alpha-tilde) absorbs the boundary-condition offset. It is fixed
by ``sum_k N_k = N``, and the net force is ``sum_k N_k * delta_f_level(k)``.

Two summation orders are available:

* ``DIRECT`` sums over levels. It works for any ``at`` and is stopped by a
  geometric majorant of the remaining tail.
* ``RESUMMED`` expands each occupation geometrically and sums over the
  winding index ``l`` first, which gives ``eta sum_l (eta z)^l / D(b l)``
  with ``z = exp(-at)``. ``D`` is ``1 - exp(-x)`` for the particle number
  and its square root for the force. Only valid for ``at > 0``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from partition_force.errors import ConvergenceError, DomainError
from partition_force.spectrum import (
    BoundaryCondition,
    delta_f_table,
    fermion_zero_t_force,
    level_energy,
)

SOLVER_RTOL = 1e-10
SERIES_RTOL = 1e-13
K_MAX = 10**8
_FIRST_CHUNK = 1024
_AUTO_RESUM_ABOVE = math.log(2.0)
_MAX_EXPANSIONS = 200


class Statistics(enum.IntEnum):
    BOSE = 1
    FERMI = -1

    @property
    def eta(self) -> int:
        return int(self)

    @classmethod
    def parse(cls, name: str) -> "Statistics":
        key = name.strip().lower()
        if key in ("bose", "boson", "bosons", "+1", "1"):
            return cls.BOSE
        if key in ("fermi", "fermion", "fermions", "-1"):
            return cls.FERMI
        raise DomainError(f"unknown statistics {name!r}")


class SumMode(enum.Enum):
    DIRECT = "direct"
    RESUMMED = "resummed"
    AUTO = "auto"


@dataclass(frozen=True)
class EnsembleParams:
    """Particle number per side and rescaled inverse temperature ``b = 1/t``."""

    N: int
    b: float

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise DomainError(f"N must be a positive integer, got {self.N!r}")
        if not (self.b > 0 and math.isfinite(self.b)):
            raise DomainError(f"b must be positive and finite, got {self.b!r}")

    @classmethod
    def from_temperature(cls, N: int, t: float) -> "EnsembleParams":
        if not (t > 0 and math.isfinite(t)):
            raise DomainError(f"temperature must be positive and finite, got {t!r}")
        return cls(N, 1.0 / t)

    @property
    def t(self) -> float:
        return 1.0 / self.b


@dataclass(frozen=True)
class FugacityResult:
    alpha_tilde: float
    residual: float
    iterations: int
    bracket: tuple[float, float]

    @property
    def fugacity(self) -> float:
        """``exp(-alpha_tilde)``; may overflow to ``inf`` for cold fermions."""
        try:
            return math.exp(-self.alpha_tilde)
        except OverflowError:
            return math.inf

    def alpha(self, bc: BoundaryCondition, params: EnsembleParams) -> float:
        """Chemical constant of one side, ``alpha_tilde - b sigma``."""
        return self.alpha_tilde - params.b * bc.sigma


@dataclass(frozen=True)
class ForceEstimate:
    """Dimensionless net force tagged with the method that produced it."""

    value: float
    method: str
    tail_bound: float | None = None

    def __float__(self):
        return float(self.value)


class SeriesSum(NamedTuple):
    value: float
    tail_bound: float
    terms: int


def _occupations(y: np.ndarray, eta: int) -> np.ndarray:
    with np.errstate(over="ignore"):
        if eta == 1:
            return 1.0 / np.expm1(y)
        return expit(-y)


def occupation(k, alpha_tilde: float, params: EnsembleParams, stats: Statistics):
    """Mean occupation of level ``k`` (scalar or array of indices)."""
    if stats.eta == 1 and not alpha_tilde > 0:
        raise DomainError(f"bosons need alpha_tilde > 0, got {alpha_tilde!r}")
    k_arr = np.asarray(k, dtype=np.float64)
    if np.any(k_arr < 0):
        raise DomainError("level index must be nonnegative")
    out = _occupations(alpha_tilde + params.b * k_arr, stats.eta)
    return float(out) if out.ndim == 0 else out


def _direct_tail_bound(y_end: float, b: float, eta: int) -> float:
    # N_k <= exp(-y_k) / (1 - [boson] exp(-y_K)) for k >= K; delta_f_k <= 1.
    if y_end <= 0:
        return math.inf
    lead = math.exp(-y_end)
    if eta == 1:
        lead /= -math.expm1(-y_end)
    return lead / -math.expm1(-b)


def _direct_sum(alpha_tilde, params, stats, weighted, rtol):
    b, eta = params.b, stats.eta
    total = 0.0
    start = 0
    chunk = _FIRST_CHUNK
    weight_next = 1.0
    while True:
        if start >= K_MAX:
            raise ConvergenceError(f"direct sum did not converge within {K_MAX} levels")
        n = min(chunk, K_MAX - start)
        k = np.arange(start, start + n, dtype=np.float64)
        terms = _occupations(alpha_tilde + b * k, eta)
        if weighted:
            w = delta_f_table(n + 1, start, first=weight_next)
            weight_next = w[-1]
            terms = terms * w[:-1]
        total += float(np.sum(terms))
        start += n
        bound = _direct_tail_bound(alpha_tilde + b * start, b, eta)
        if bound <= rtol * abs(total):
            return SeriesSum(total, bound, start)
        chunk *= 2


def _resummed_sum(alpha_tilde, params, stats, power, rtol):
    if not alpha_tilde > 0:
        raise DomainError(f"resummed series needs alpha_tilde > 0, got {alpha_tilde!r}")
    b, eta = params.b, stats.eta
    one_minus_z = -math.expm1(-alpha_tilde)
    total = 0.0
    start = 1
    chunk = _FIRST_CHUNK
    while True:
        if start >= K_MAX:
            raise ConvergenceError(f"resummed series did not converge within {K_MAX} terms")
        l = np.arange(start, start + chunk, dtype=np.float64)
        denom = -np.expm1(-b * l)
        if power != 1.0:
            denom = denom**power
        signs = 1.0 if eta == 1 else np.where(l % 2 == 1, -1.0, 1.0)
        total += float(np.sum(signs * np.exp(-alpha_tilde * l) / denom))
        start += chunk
        # |(eta z)^l| / D(b l) <= z^l / D(b L) for l >= L, summed geometrically.
        d_next = (-math.expm1(-b * start)) ** power
        bound = math.exp(-alpha_tilde * start) / (one_minus_z * d_next)
        if bound <= rtol * abs(total):
            return SeriesSum(eta * total, bound, start - 1)
        chunk *= 2


def _pick_mode(mode: SumMode, alpha_tilde: float) -> SumMode:
    if mode is SumMode.AUTO:
        return SumMode.RESUMMED if alpha_tilde > _AUTO_RESUM_ABOVE else SumMode.DIRECT
    return mode


def total_number(
    alpha_tilde: float,
    params: EnsembleParams,
    stats: Statistics,
    mode: SumMode = SumMode.AUTO,
    rtol: float = SERIES_RTOL,
) -> SeriesSum:
    """Sum of all occupations, with an upper bound on the truncated tail."""
    if stats.eta == 1 and not alpha_tilde > 0:
        raise DomainError(f"bosons need alpha_tilde > 0, got {alpha_tilde!r}")
    if _pick_mode(mode, alpha_tilde) is SumMode.RESUMMED:
        return _resummed_sum(alpha_tilde, params, stats, 1.0, rtol)
    return _direct_sum(alpha_tilde, params, stats, False, rtol)


def net_force(
    alpha_tilde: float,
    params: EnsembleParams,
    stats: Statistics,
    mode: SumMode = SumMode.AUTO,
    rtol: float = SERIES_RTOL,
) -> ForceEstimate:
    """Net force ``sum_k N_k delta_f_k`` at a given ``alpha_tilde``."""
    if stats.eta == 1 and not alpha_tilde > 0:
        raise DomainError(f"bosons need alpha_tilde > 0, got {alpha_tilde!r}")
    chosen = _pick_mode(mode, alpha_tilde)
    if chosen is SumMode.RESUMMED:
        s = _resummed_sum(alpha_tilde, params, stats, 0.5, rtol)
    else:
        s = _direct_sum(alpha_tilde, params, stats, True, rtol)
    return ForceEstimate(s.value, f"exact-{chosen.value}", s.tail_bound)


def _initial_guess(params: EnsembleParams, stats: Statistics) -> float:
    N, t = params.N, params.t
    if stats.eta == 1:
        # ln(1 + 1/N) is a strict lower bound (N_0 < N); the high-T value is
        # an underestimate as well, so the larger of the two is closest.
        return max(math.log1p(1.0 / N), -math.log(-math.expm1(-N / t)))
    # Trapezoid-corrected inversion, accurate to ~1e-5 at every temperature.
    u = (N + 0.5 * math.expm1(-N / t)) / t
    return -(u + math.log(-math.expm1(-u)))


def solve_fugacity(
    params: EnsembleParams, stats: Statistics, tol: float = SOLVER_RTOL
) -> FugacityResult:
    """Find ``alpha_tilde`` such that the occupations add up to ``N``.

    The map ``alpha_tilde -> sum N_k`` is strictly decreasing. Bosons are
    searched in ``log(alpha_tilde)`` so the iterate can never leave
    ``(0, inf)``; fermions search the real line. A regime guess is expanded
    geometrically until it brackets the root, then Brent's method finishes.
    """
    N = params.N
    boson = stats.eta == 1
    to_alpha = math.exp if boson else (lambda v: v)
    calls = 0

    def excess(v):
        nonlocal calls
        calls += 1
        return total_number(to_alpha(v), params, stats).value - N

    guess = _initial_guess(params, stats)
    v0 = math.log(guess) if boson else guess
    f0 = excess(v0)
    if f0 == 0.0:
        return FugacityResult(guess, 0.0, calls, (guess, guess))
    # Positive excess means too many particles: move towards larger alpha.
    direction = 1.0 if f0 > 0 else -1.0
    step = 0.1 if boson else min(1.0, params.b)
    lo_v, f_lo = v0, f0
    for _ in range(_MAX_EXPANSIONS):
        hi_v = lo_v + direction * step
        f_hi = excess(hi_v)
        if f_hi == 0.0 or (f_hi > 0) != (f0 > 0):
            break
        lo_v, f_lo = hi_v, f_hi
        step *= 2.0
    else:
        raise ConvergenceError("could not bracket the fugacity root")

    a, b_ = sorted((lo_v, hi_v))
    if f_hi == 0.0:
        root_v = hi_v
    else:
        root_v, info = brentq(
            excess, a, b_, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500, full_output=True
        )
    alpha = to_alpha(root_v)
    residual = abs(total_number(alpha, params, stats).value - N) / N
    if residual > tol:
        raise ConvergenceError(f"number constraint residual {residual:.3e} exceeds {tol:.1e}")
    return FugacityResult(alpha, residual, calls, (to_alpha(a), to_alpha(b_)))


def exact_force(
    params: EnsembleParams, stats: Statistics, mode: SumMode = SumMode.AUTO
) -> ForceEstimate:
    """Solve the number constraint and evaluate the net force there."""
    fug = solve_fugacity(params, stats)
    return net_force(fug.alpha_tilde, params, stats, mode)


def zero_temperature_force(N: int, stats: Statistics) -> float:
    """``t -> 0`` limit: all bosons in level 0, or the lowest ``N`` levels filled."""
    if stats.eta == 1:
        if int(N) != N or N < 1:
            raise DomainError(f"N must be a positive integer, got {N!r}")
        return float(N)
    return fermion_zero_t_force(N)


def force_bounds(alpha_tilde: float, params: EnsembleParams, stats: Statistics):
    """Upper bounds ``(N, (N + N_0)/2)`` on the net force.

    The first follows from ``delta_f_k <= 1``, the second from
    ``delta_f_0 = 1`` and ``delta_f_k <= 1/2`` for ``k >= 1``.
    """
    n0 = occupation(0, alpha_tilde, params, stats)
    return float(params.N), 0.5 * (params.N + n0)


def average_energy_difference(params: EnsembleParams) -> float:
    """``E_Dir - E_Neu`` averaged over the ensemble, in units of ``E``.

    Every level is shifted by the same ``sigma`` gap, so the result is
    ``N/2`` at any temperature and for either statistics.
    """
    gap = level_energy(BoundaryCondition.DIRICHLET, 0) - level_energy(BoundaryCondition.NEUMANN, 0)
    return params.N * gap
