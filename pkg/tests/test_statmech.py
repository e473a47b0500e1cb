import math

import numpy as np
import pytest
from scipy.special import expit
from hypothesis import given, settings
from hypothesis import strategies as st

from partition_force.errors import DomainError
from partition_force.spectrum import BoundaryCondition, delta_f_level, fermion_zero_t_force
from partition_force.statmech import (
    EnsembleParams,
    Statistics,
    SumMode,
    average_energy_difference,
    exact_force,
    force_bounds,
    net_force,
    occupation,
    solve_fugacity,
    total_number,
    zero_temperature_force,
)

BOSE, FERMI = Statistics.BOSE, Statistics.FERMI

temperatures = st.floats(0.05, 2e4)
particles = st.integers(1, 400)
both = st.sampled_from([BOSE, FERMI])


def brute_force_alpha(N, b, eta, terms=500):
    """Plain bisection on a fixed 500-term truncation; an independent oracle."""

    def count(a):
        k = np.arange(terms)
        with np.errstate(over="ignore"):
            return float(np.sum(1.0 / (np.exp(a + b * k) - eta)))

    lo, hi = -50.0, 50.0
    if eta == 1:
        lo = 1e-12
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if count(mid) > N:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_statistics_parse():
    assert Statistics.parse("Bose") is BOSE
    assert Statistics.parse("fermi") is FERMI
    assert BOSE.eta == 1 and FERMI.eta == -1
    with pytest.raises(DomainError):
        Statistics.parse("anyon")


@pytest.mark.parametrize("N,b", [(0, 1.0), (2.5, 1.0), (1, 0.0), (1, math.inf), (1, -1.0)])
def test_params_validate(N, b):
    with pytest.raises(DomainError):
        EnsembleParams(N, b)


def test_params_from_temperature():
    p = EnsembleParams.from_temperature(100, 4.0)
    assert p.b == 0.25 and p.t == 4.0
    with pytest.raises(DomainError):
        EnsembleParams.from_temperature(100, 0.0)


def test_occupation_examples():
    p = EnsembleParams(100, 3.0)
    assert occupation(0, math.log(2.0), p, BOSE) == pytest.approx(1.0, rel=1e-15)
    assert occupation(0, 0.0, p, FERMI) == 0.5
    assert occupation(0, math.log1p(1 / 100), p, BOSE) == pytest.approx(100.0, rel=1e-12)


def test_total_number_examples():
    N = 100
    s = total_number(math.log1p(1 / N), EnsembleParams(N, 50.0), BOSE)
    assert abs(s.value - 100) < 1e-10
    s = total_number(-20.0 * (10 - 0.5), EnsembleParams(10, 20.0), FERMI)
    assert abs(s.value - 10) < 1e-6


def test_boson_needs_positive_alpha():
    with pytest.raises(DomainError):
        total_number(0.0, EnsembleParams(10, 1.0), BOSE)
    with pytest.raises(DomainError):
        net_force(-1.0, EnsembleParams(10, 1.0), BOSE)


def test_solve_examples():
    fug = solve_fugacity(EnsembleParams(100, 50.0), BOSE)
    assert fug.alpha_tilde == pytest.approx(math.log(1.01), rel=1e-6)
    fug = solve_fugacity(EnsembleParams.from_temperature(100, 1000.0), FERMI)
    assert fug.fugacity == pytest.approx(math.expm1(0.1), rel=1e-2)


@pytest.mark.parametrize("eta,stats", [(-1, FERMI), (1, BOSE)])
@pytest.mark.parametrize("N,b", [(2, 1.0), (5, 0.3), (3, 2.0)])
def test_solver_against_brute_force(eta, stats, N, b):
    expected = brute_force_alpha(N, b, eta)
    assert solve_fugacity(EnsembleParams(N, b), stats).alpha_tilde == pytest.approx(expected, abs=1e-10)


def test_zero_temperature_limits():
    assert exact_force(EnsembleParams(100, 50.0), BOSE).value == pytest.approx(100.0, abs=1e-8)
    assert exact_force(EnsembleParams(100, 50.0), FERMI).value == pytest.approx(fermion_zero_t_force(100), abs=1e-6)
    assert zero_temperature_force(100, BOSE) == 100.0
    assert zero_temperature_force(100, FERMI) == fermion_zero_t_force(100)


def test_high_temperature_fermion_matches_three_term_series():
    N, t = 100, 1000.0
    x = N / t
    c1 = (math.sqrt(2) - 1) / 2
    c2 = (1 - 3 * math.sqrt(2) + 2 * math.sqrt(3)) / 6
    series = N / math.sqrt(t) * (1 - c1 * x + c2 * x * x)
    assert exact_force(EnsembleParams.from_temperature(N, t), FERMI).value == pytest.approx(series, rel=5e-3)


def test_bounds_examples():
    p = EnsembleParams(100, 50.0)
    fb = solve_fugacity(p, BOSE)
    assert force_bounds(fb.alpha_tilde, p, BOSE) == pytest.approx((100.0, 100.0), rel=1e-9)
    ff = solve_fugacity(p, FERMI)
    assert force_bounds(ff.alpha_tilde, p, FERMI) == pytest.approx((100.0, 50.5), rel=1e-12)
    p = EnsembleParams.from_temperature(100, 1000.0)
    ff = solve_fugacity(p, FERMI)
    value = net_force(ff.alpha_tilde, p, FERMI).value
    assert value == pytest.approx(3.1, abs=0.01)
    assert value <= force_bounds(ff.alpha_tilde, p, FERMI)[1] <= 50.2


@pytest.mark.parametrize("N", [1, 100])
def test_average_energy_difference(N):
    values = {average_energy_difference(EnsembleParams.from_temperature(N, t)) for t in (0.1, 1.0, 10.0)}
    assert values == {N / 2}


def test_direct_resummed_boson_example():
    p = EnsembleParams(100, 0.01)
    fug = solve_fugacity(p, BOSE)
    d = net_force(fug.alpha_tilde, p, BOSE, SumMode.DIRECT).value
    r = net_force(fug.alpha_tilde, p, BOSE, SumMode.RESUMMED).value
    assert d == pytest.approx(r, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(particles, temperatures, both)
def test_constraint_residual(N, t, stats):
    p = EnsembleParams.from_temperature(N, t)
    fug = solve_fugacity(p, stats)
    assert fug.residual <= 1e-10
    assert abs(total_number(fug.alpha_tilde, p, stats).value - N) / N <= 1e-10
    if stats is BOSE:
        assert fug.alpha_tilde > 0


@settings(max_examples=40, deadline=None)
@given(particles, temperatures, both)
def test_direct_and_resummed_agree(N, t, stats):
    p = EnsembleParams.from_temperature(N, t)
    alpha = solve_fugacity(p, stats).alpha_tilde
    if alpha <= 0:
        return
    for fn in (total_number, net_force):
        d = fn(alpha, p, stats, SumMode.DIRECT)
        r = fn(alpha, p, stats, SumMode.RESUMMED)
        dv, rv = float(d.value), float(r.value)
        assert abs(dv - rv) <= max(1e-8 * abs(dv), d.tail_bound + r.tail_bound + 4e-15 * abs(dv))


@settings(max_examples=40, deadline=None)
@given(particles, temperatures, both)
def test_force_within_bounds(N, t, stats):
    p = EnsembleParams.from_temperature(N, t)
    alpha = solve_fugacity(p, stats).alpha_tilde
    value = net_force(alpha, p, stats).value
    bound_n, bound_n0 = force_bounds(alpha, p, stats)
    slack = 1e-12 * N
    assert 0 < value <= bound_n + slack
    assert value <= bound_n0 + slack


@settings(max_examples=30, deadline=None)
@given(particles, temperatures, both)
def test_occupations_strictly_ordered(N, t, stats):
    p = EnsembleParams.from_temperature(N, t)
    alpha = solve_fugacity(p, stats).alpha_tilde
    k = np.arange(0, 60)
    occ = occupation(k, alpha, p, stats)
    assert np.all(np.diff(occ) <= 0)
    if stats is FERMI:
        # filled levels round to 1.0; their hole occupation stays resolvable
        holes = expit(alpha + p.b * k)
        resolved = holes[(holes > 0) & (holes < 1)]
        assert np.all(np.diff(resolved) > 0)
    else:
        nonzero = occ[occ > 0]
        assert np.all(np.diff(nonzero) < 0)


@pytest.mark.parametrize("stats", [BOSE, FERMI])
def test_force_nonincreasing_in_temperature(stats):
    N = 100
    ts = np.geomspace(0.01, 1e4 * N, 120)
    values = [exact_force(EnsembleParams.from_temperature(N, t), stats).value for t in ts]
    steps = np.diff(values)
    # float noise allowance only where the force is flat at its t = 0 plateau
    assert np.all(steps <= 1e-12 * np.abs(values[:-1]))


def test_single_level_force_matches_coefficient():
    """With one particle deep in the ground state the force is delta_f_0."""
    p = EnsembleParams(1, 60.0)
    for stats in (BOSE, FERMI):
        assert exact_force(p, stats).value == pytest.approx(delta_f_level(0), abs=1e-12)


def test_side_alphas_differ_by_sigma_gap():
    p = EnsembleParams(10, 2.0)
    fug = solve_fugacity(p, FERMI)
    gap = fug.alpha(BoundaryCondition.DIRICHLET, p) - fug.alpha(BoundaryCondition.NEUMANN, p)
    assert gap == pytest.approx(-0.5 * p.b)
