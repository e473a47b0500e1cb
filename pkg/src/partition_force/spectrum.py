"""Half-line harmonic oscillator spectra and per-level wall force coefficients.

A wall at the centre of the trap splits the oscillator into two half lines.
The Dirichlet side keeps the odd whole-line states, the Neumann side the even
ones, so in units of the energy scale ``E = 2*hbar*omega`` the levels are
``e_k = k + sigma`` with ``sigma = 3/4`` (Dirichlet) or ``1/4`` (Neumann).

The dimensionless force difference contributed by level ``k`` is the central
binomial ratio ``(2k)! / (2^(2k) (k!)^2)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from partition_force.errors import DomainError, OverflowDomain

# Beyond this index the scalar coefficient switches to its asymptotic series,
# whose truncation error there is below 1e-22 relative.
_ASYMPTOTIC_FROM = 1 << 16

# Coefficients of Gamma(k + 1/2) / (sqrt(pi) Gamma(k + 1)) * sqrt(pi k) in 1/k.
_ASYMPTOTIC_COEFFS = (1.0, -1.0 / 8, 1.0 / 128, 5.0 / 1024, -21.0 / 32768)


class BoundaryCondition(enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @property
    def sigma(self) -> float:
        """Offset of the ground level in units of ``E``."""
        return 0.75 if self is BoundaryCondition.DIRICHLET else 0.25


class ApproxForm(enum.Enum):
    """Large-k approximants of the per-level force coefficient."""

    STIRLING0 = "stirling0"
    STIRLING1 = "stirling1"
    REARRANGED = "rearranged"


@dataclass(frozen=True)
class PhysicalScales:
    """Trap length ``a`` and energy scale ``energy`` (= 2 hbar omega).

    Every core routine works in dimensionless units; these only convert at
    the edges.
    """

    a: float = 1.0
    energy: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.energy > 0):
            raise DomainError(f"scales must be positive, got a={self.a}, energy={self.energy}")

    @property
    def force_unit(self) -> float:
        """Multiplier turning a dimensionless force into ``energy / length``."""
        return self.energy / (2.0 * math.sqrt(math.pi) * self.a)

    def force(self, delta_f: float) -> float:
        return delta_f * self.force_unit

    def energy_of(self, e: float) -> float:
        return e * self.energy


def _check_level(k) -> int:
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise DomainError(f"level index must be a nonnegative integer, got {k!r}")
    return int(k)


def level_energy(bc: BoundaryCondition, k: int) -> float:
    """Dimensionless energy ``k + sigma`` of level ``k`` under ``bc``."""
    return _check_level(k) + bc.sigma


def hermite_at_zero(l: int, log: bool = False):
    """Value of the physicists' Hermite polynomial ``H_l`` at the origin.

    For even ``l = 2k`` this is ``(-1)^k (2k)!/k!``, built with the recurrence
    ``H_{2k}(0) = -2(2k-1) H_{2k-2}(0)`` so no factorial is formed.

    Args:
        l: Even nonnegative degree.
        log: If true, return ``(sign, log|H_l(0)|)`` instead of the value.
            Needed once the magnitude leaves the double range (``k`` > ~110).

    Raises:
        DomainError: ``l`` is odd or negative.
        OverflowDomain: The value overflows and ``log`` was not requested.
    """
    l = _check_level(l)
    if l % 2:
        raise DomainError(f"H_l(0) is only tabulated for even l, got {l}")
    k = l // 2
    sign = -1 if k % 2 else 1
    if log:
        return sign, math.lgamma(2 * k + 1) - math.lgamma(k + 1)
    value = 1.0
    for j in range(1, k + 1):
        value *= -2.0 * (2 * j - 1)
    if math.isinf(value):
        raise OverflowDomain(f"|H_{l}(0)| exceeds the double range; use log=True")
    return value


def hermite_derivative_at_zero(l: int) -> float:
    """``H_l'(0)`` for odd ``l = 2k+1``, i.e. ``2 (2k+1) H_{2k}(0)``."""
    l = _check_level(l)
    if l % 2 == 0:
        raise DomainError(f"H_l'(0) is only tabulated for odd l, got {l}")
    return 2.0 * l * hermite_at_zero(l - 1)


def delta_f_level(k: int) -> float:
    """Per-level dimensionless force difference ``(2k)! / (2^(2k) (k!)^2)``.

    Evaluated by the running product ``x_{j+1} = x_j (2j+1)/(2j+2)``, ``x_0 = 1``.
    Indices past 65536 use the asymptotic expansion of the same ratio, which
    is exact to double precision there.
    """
    k = _check_level(k)
    if k >= _ASYMPTOTIC_FROM:
        inv = 1.0 / k
        series = 0.0
        for c in reversed(_ASYMPTOTIC_COEFFS):
            series = series * inv + c
        return series / math.sqrt(math.pi * k)
    value = 1.0
    for j in range(k):
        value *= (2 * j + 1) / (2 * j + 2)
    return value


def delta_f_table(n: int, start: int = 0, first: float | None = None) -> np.ndarray:
    """Array of ``delta_f_level(k)`` for ``k = start .. start+n-1``.

    ``first`` may carry the already known value at ``start`` so that
    chunked summations continue the same running product.
    """
    if n <= 0:
        return np.empty(0)
    if first is None:
        first = delta_f_level(start)
    j = np.arange(start, start + n - 1, dtype=np.float64)
    out = np.empty(n)
    out[0] = first
    out[1:] = first * np.cumprod((2.0 * j + 1.0) / (2.0 * j + 2.0))
    return out


def delta_f_level_approx(k: int, form: ApproxForm) -> float:
    """Stirling-type approximants of :func:`delta_f_level`.

    ``STIRLING0`` is ``1/sqrt(pi k)``, ``STIRLING1`` adds the ``1 - 1/(8k)``
    correction, ``REARRANGED`` is ``1/sqrt(pi (k + 1/4))`` and also covers k=0.
    """
    k = _check_level(k)
    if form is ApproxForm.REARRANGED:
        return 1.0 / math.sqrt(math.pi * (k + 0.25))
    if k == 0:
        raise DomainError(f"{form.value} approximant is undefined at k=0")
    lead = 1.0 / math.sqrt(math.pi * k)
    if form is ApproxForm.STIRLING0:
        return lead
    return lead * (1.0 - 1.0 / (8 * k))


def fermion_zero_t_force(N: int) -> float:
    """Net force of ``N`` fermions per side at zero temperature.

    The lowest ``N`` levels are filled, and the partial sum of the level
    coefficients telescopes to ``2N (2N)! / (2^(2N) (N!)^2)``.
    """
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise DomainError(f"particle number must be a positive integer, got {N!r}")
    return 2.0 * N * delta_f_level(int(N))
