"""Shooting eigensolver for the half-line oscillator with a displaced wall.

This module checks the per-level force coefficients without relying on the
perturbative derivation. For each boundary condition we compute the level
``E_k(dx)`` with the wall moved to ``x = dx`` and central-difference it in
``dx``. The Dirichlet slope minus the Neumann slope, in units of
``E / (2 sqrt(pi) a)``, must reproduce ``delta_f_level(k)``.

Internally everything is in oscillator units: ``xi = x/a`` and
``eps = E/(hbar omega) = 2 e``, so the equation reads
``psi'' = (xi^2 - 2 eps) psi``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import ode
from scipy.optimize import brentq

from partition_force.errors import BracketError, DomainError, StiffnessError, VerificationFailure
from partition_force.spectrum import (
    BoundaryCondition,
    delta_f_level,
    hermite_at_zero,
    hermite_derivative_at_zero,
    level_energy,
)

SLOPE_UNIT = 2.0 * math.sqrt(math.pi)  # dimensionless force = slope * 2 sqrt(pi) a / E
MAX_OFFSET = 0.1
TAIL_MARGIN = 8.0


@dataclass(frozen=True)
class ShootingProblem:
    bc: BoundaryCondition
    wall_offset: float = 0.0
    k: int = 0
    xi_max: float | None = None
    rtol: float = 1e-12
    atol: float = 1e-14
    eig_rtol: float = 1e-10

    def __post_init__(self):
        if abs(self.wall_offset) > MAX_OFFSET:
            raise DomainError(f"|wall_offset| must be <= {MAX_OFFSET}, got {self.wall_offset}")
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"level index must be a nonnegative integer, got {self.k!r}")
        if self.xi_max is not None and self.xi_max < self.min_span:
            raise DomainError(f"xi_max must be >= {self.min_span:.3f}, got {self.xi_max}")

    @property
    def eps_guess(self) -> float:
        return 2.0 * level_energy(self.bc, self.k)

    @property
    def min_span(self) -> float:
        return math.sqrt(2.0 * (self.eps_guess + 1.0)) + TAIL_MARGIN

    @property
    def span(self) -> float:
        return self.xi_max if self.xi_max is not None else self.min_span


@dataclass(frozen=True)
class ShootingResult:
    eigenvalue: float  # units of E, i.e. comparable to k + sigma
    residual: float  # |psi(xi_max)| relative to its size at the bracket ends
    bracket_width: float
    evaluations: int = 0


def _integrate(problem: ShootingProblem, eps: float):
    """Outward integration from the wall; returns ``(psi(xi_max), nodes)``."""
    x0 = problem.wall_offset
    y0 = [0.0, 1.0] if problem.bc is BoundaryCondition.DIRICHLET else [1.0, 0.0]
    two_eps = 2.0 * eps

    def rhs(x, y):
        return [y[1], (x * x - two_eps) * y[0]]

    solver = ode(rhs).set_integrator(
        "dop853", rtol=problem.rtol, atol=problem.atol, nsteps=200_000
    )
    state = {"prev": y0[0], "nodes": 0}

    def solout(x, y):
        if state["prev"] != 0.0 and y[0] * state["prev"] < 0.0:
            state["nodes"] += 1
        if y[0] != 0.0:
            state["prev"] = y[0]

    solver.set_solout(solout)
    solver.set_initial_value(y0, x0)
    solver.integrate(problem.span)
    if not solver.successful():
        raise StiffnessError(
            f"step control failed at eps={eps!r} ({problem.bc.value}, k={problem.k}, code {solver.get_return_code()})"
        )
    return float(solver.y[0]), state["nodes"]


def shoot_eigenvalue(problem: ShootingProblem) -> ShootingResult:
    """Level ``k`` of the displaced-wall problem by outward shooting.

    Between consecutive eigenvalues the outward solution picks up one more
    node and its divergent tail flips sign, so ``psi(xi_max)`` changes sign
    exactly at each eigenvalue. The scan looks for the sign change whose
    lower end has ``k`` nodes, and Brent's method (bisection-safeguarded)
    then refines it to ``eig_rtol``.

    Raises:
        BracketError: no suitable sign change in ``eps_guess +/- 1``.
        StiffnessError: integrator failure.
    """
    k = problem.k
    center = problem.eps_guess
    # Levels are 2 apart in eps; a 0.1 wall shift moves them by well under 1.
    grid = center + np.linspace(-0.95, 0.95, 10)
    calls = 0
    samples = []
    for eps in grid:
        samples.append(_integrate(problem, eps))
        calls += 1
    lo = hi = None
    for i in range(len(grid) - 1):
        (s0, n0), (s1, _) = samples[i], samples[i + 1]
        if n0 == k and s0 * s1 < 0:
            lo, hi = grid[i], grid[i + 1]
            break
    if lo is None:
        raise BracketError(
            f"no sign change for level {k} ({problem.bc.value}, dx={problem.wall_offset}) "
            f"in eps [{grid[0]:.3f}, {grid[-1]:.3f}]"
        )

    def shoot(eps):
        nonlocal calls
        calls += 1
        return _integrate(problem, eps)[0]

    s_lo, s_hi = shoot(lo), shoot(hi)
    root = brentq(shoot, lo, hi, xtol=problem.eig_rtol * center * 1e-2, rtol=problem.eig_rtol * 1e-2)
    scale = max(abs(s_lo), abs(s_hi))
    residual = abs(shoot(root)) / scale
    return ShootingResult(root / 2.0, residual, hi - lo, calls)


def level_energy_shifted(bc: BoundaryCondition, k: int, wall_offset: float, **kwargs) -> float:
    return shoot_eigenvalue(ShootingProblem(bc, wall_offset, k, **kwargs)).eigenvalue


def per_level_slope(bc: BoundaryCondition, k: int, delta: float = 1e-3) -> float:
    """``dE_k/d(dx)`` by central differences, scaled by ``2 sqrt(pi) a / E``."""
    if not 1e-5 <= delta <= 1e-2:
        raise DomainError(f"delta must lie in [1e-5, 1e-2], got {delta!r}")
    up = level_energy_shifted(bc, k, delta)
    down = level_energy_shifted(bc, k, -delta)
    return SLOPE_UNIT * (up - down) / (2.0 * delta)


def perturbative_slope(bc: BoundaryCondition, k: int) -> float:
    """First-order slope from the unperturbed eigenfunction at the wall.

    Dirichlet: ``(hbar^2/2m) phi'(0)^2``; Neumann: ``E_k phi(0)^2``, with
    ``phi`` the normalized half-line state. In the scaling of
    :func:`per_level_slope` these become ``H_l'(0)^2 / (2^l l!)`` with
    ``l = 2k+1`` and ``4 e_k H_l(0)^2 / (2^l l!)`` with ``l = 2k``.
    """
    if bc is BoundaryCondition.DIRICHLET:
        l = 2 * k + 1
        h = hermite_derivative_at_zero(l)
        return h * h / (2.0**l * math.factorial(l))
    l = 2 * k
    h = hermite_at_zero(l)
    return 4.0 * level_energy(bc, k) * h * h / (2.0**l * math.factorial(l))


@dataclass
class VerificationReport:
    delta: float
    tol: float
    rows: list = field(default_factory=list)  # (k, slope_dir, slope_neu, measured, expected, error)

    @property
    def failures(self):
        return [row[0] for row in self.rows if not row[5] <= self.tol]

    @property
    def passed(self) -> bool:
        return not self.failures

    def table(self) -> str:
        lines = [
            f"# delta={self.delta:g} tol={self.tol:g}",
            "k,slope_dirichlet,slope_neumann,measured_delta_f,expected_delta_f,abs_error,status",
        ]
        for k, sd, sn, m, e, err in self.rows:
            status = "pass" if err <= self.tol else "FAIL"
            lines.append(f"{k},{sd:.12g},{sn:.12g},{m:.12g},{e:.12g},{err:.3e},{status}")
        return "\n".join(lines) + "\n"


def _thread_count():
    raw = os.environ.get("PARTITION_FORCE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def verify_delta_f(k_range=range(6), delta: float = 1e-3, tol: float = 1e-3, raise_on_failure: bool = True) -> VerificationReport:
    """Compare finite-differenced shooting slopes with the level coefficients.

    For every ``k`` the Dirichlet minus Neumann slope must match
    ``delta_f_level(k)`` within ``tol``.

    Raises:
        VerificationFailure: listing the failing ``k`` (if ``raise_on_failure``).
    """
    ks = list(k_range)
    if any(k < 0 or k > 20 for k in ks):
        raise DomainError("k_range must lie within [0, 20]")

    def one(k):
        sd = per_level_slope(BoundaryCondition.DIRICHLET, k, delta)
        sn = per_level_slope(BoundaryCondition.NEUMANN, k, delta)
        expected = delta_f_level(k)
        return (k, sd, sn, sd - sn, expected, abs(sd - sn - expected))

    with ThreadPoolExecutor(max_workers=_thread_count()) as pool:
        rows = list(pool.map(one, ks))
    report = VerificationReport(delta, tol, rows)
    if raise_on_failure and not report.passed:
        raise VerificationFailure(
            f"level force mismatch above tol={tol:g} for k in {report.failures}", report.failures
        )
    return report
