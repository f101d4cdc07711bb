import math

import numpy as np
import pytest

from spindicke.model import ModelParams, apply_symmetry_T, derive_couplings
from spindicke.semiclassical import (DEFAULT_SEED, AdiabaticState, FullState,
                                     adiabatic_rhs, full_rhs, hamiltonian_energy,
                                     integrate_semiclassical, spin_expectations,
                                     total_population)

FIG6A = ModelParams(omega=10.0, omega0=0.0, q=-1.0, lambda_plus=0.5,
                    lambda_minus=1.0, kappa=0.0)


def rand_full_state(rng):
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    return FullState(*z)


# ---------------------------------------------------------------------------
# right-hand sides

def test_adiabatic_pure_condensate_ray():
    p = ModelParams.from_effective_couplings(0.6, 1.1, omega0=0.3, q=-0.4)
    d = derive_couplings(p)
    x = 0.8 + 0.1j
    rhs = adiabatic_rhs(AdiabaticState(0, 0, x), p)
    assert rhs.beta_plus == 0 and rhs.beta_minus == 0
    assert abs(rhs.beta_zero - 1j * (d.Lambda_plus + d.Lambda_minus) * x) < 1e-15


def test_adiabatic_kappa_zero_reduction():
    # independent transcription of the undamped atom-only equations
    def reduced(bp, bm, b0, Lp, Lm, q, w0):
        L, R = Lp + Lm, math.sqrt(Lp * Lm)
        n0 = abs(b0) ** 2
        dbp = (1j * (Lm - q - w0) * bp + 1j * R * bm
               + 1j * L * (bp * n0 + np.conj(bm) * b0**2)
               + 2j * R * (bm * n0 + np.conj(bp) * b0**2))
        dbm = (1j * (Lp - q + w0) * bm + 1j * R * bp
               + 1j * L * (bm * n0 + np.conj(bp) * b0**2)
               + 2j * R * (bp * n0 + np.conj(bm) * b0**2))
        db0 = (1j * L * (2 * bp * bm * np.conj(b0) + (abs(bp) ** 2 + abs(bm) ** 2) * b0 + b0)
               + 2j * R * ((bp**2 + bm**2) * np.conj(b0)
                           + (bp * np.conj(bm) + np.conj(bp) * bm) * b0))
        return dbp, dbm, db0

    rng = np.random.default_rng(0)
    p = ModelParams.from_effective_couplings(0.6, 1.1, omega0=0.3, q=-0.4)
    d = derive_couplings(p)
    for _ in range(30):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        got = adiabatic_rhs(AdiabaticState(*z), p)
        want = reduced(*z, d.Lambda_plus, d.Lambda_minus, p.q, p.omega0)
        assert abs(got.beta_plus - want[0]) < 1e-14
        assert abs(got.beta_minus - want[1]) < 1e-14
        assert abs(got.beta_zero - want[2]) < 1e-14


def test_adiabatic_rhs_exchange_consistency():
    rng = np.random.default_rng(1)
    p = ModelParams(1.2, 0.5, -0.7, 0.9, 1.4, 0.6)
    tp = apply_symmetry_T(p)
    for _ in range(20):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        d1 = adiabatic_rhs(AdiabaticState(z[0], z[1], z[2]), p)
        d2 = adiabatic_rhs(AdiabaticState(z[1], z[0], z[2]), tp)
        assert d2.beta_plus == d1.beta_minus
        assert d2.beta_minus == d1.beta_plus
        assert d2.beta_zero == d1.beta_zero


def test_full_normal_phase_fixed_point():
    p = ModelParams(2.0, 0.0, 1.0, 0.0, 1.0, 2.0)
    rhs = full_rhs(FullState(0, 0, 0, math.sqrt(0.998)), p)
    assert rhs.alpha == 0 and rhs.beta_plus == 0
    assert rhs.beta_minus == 0 and rhs.beta_zero == 0


def test_full_cavity_drive_from_seeded_atoms():
    p = ModelParams(1.0, 0.0, 0.0, 0.4, 0.9, 0.0)
    s = FullState(0, math.sqrt(0.001), math.sqrt(0.001), math.sqrt(0.998))
    rhs = full_rhs(s, p)
    expected = -4j * (p.lambda_plus + p.lambda_minus) * math.sqrt(0.000998)
    assert abs(rhs.alpha - expected) < 1e-15


def test_full_rhs_conserves_population_pointwise():
    rng = np.random.default_rng(2)
    p = ModelParams(1.7, -0.4, 0.9, 1.2, 0.8, 0.9)
    for _ in range(50):
        s = rand_full_state(rng)
        d = full_rhs(s, p)
        flux = (np.conj(s.beta_plus) * d.beta_plus
                + np.conj(s.beta_minus) * d.beta_minus
                + np.conj(s.beta_zero) * d.beta_zero).real
        scale = max(1.0, abs(s.as_array()).max() ** 2 * 4 * (p.lambda_plus + p.lambda_minus))
        assert abs(flux) < 1e-13 * scale


def test_full_rhs_exchange_consistency():
    rng = np.random.default_rng(3)
    p = ModelParams(1.2, 0.5, -0.7, 0.9, 1.4, 0.6)
    tp = apply_symmetry_T(p)
    for _ in range(20):
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        d1 = full_rhs(FullState(*z), p)
        d2 = full_rhs(FullState(z[0], z[2], z[1], z[3]), tp)
        assert d2.alpha == d1.alpha
        assert d2.beta_plus == d1.beta_minus
        assert d2.beta_minus == d1.beta_plus
        assert d2.beta_zero == d1.beta_zero


# ---------------------------------------------------------------------------
# observables

def test_total_population_values():
    assert math.isclose(total_population(FullState(*DEFAULT_SEED)), 1.0,
                        rel_tol=1e-12)
    assert total_population(FullState(3.0, 0, 0, 0)) == 0.0


def test_spin_expectation_values():
    s = spin_expectations(FullState(0, 0, 0, 1.0))
    assert (s.s_x, s.s_y, s.s_z, s.s_len2) == (0, 0, 0, 0)
    s = spin_expectations(FullState(0, math.sqrt(0.5), 0, math.sqrt(0.5)))
    assert math.isclose(s.s_x, math.sqrt(2) * 0.5, rel_tol=1e-12)
    assert s.s_y == 0
    assert math.isclose(s.s_z, 0.5, rel_tol=1e-12)


def test_energy_zero_state():
    assert hamiltonian_energy(FullState(0, 0, 0, 0), FIG6A) == 0.0


def test_energy_conserved_without_damping():
    # omega t = 200 at omega = 10
    traj = integrate_semiclassical("full", None, FIG6A, 1e-3, 20.0,
                                   adaptive=False, sample_every=50)
    e = traj.energy(FIG6A)
    assert np.abs(e - e[0]).max() / abs(e[0]) < 1e-6


def test_energy_decays_in_damped_normal_phase():
    p = ModelParams(2.0, 0.0, 1.0, 0.0, 1.0, 2.0)
    traj = integrate_semiclassical("full", None, p, 1e-3, 40.0,
                                   adaptive=False, sample_every=100)
    e = traj.energy(p)
    gaps = [abs(e[i] - e[-1]) for i in (np.searchsorted(traj.times, (5.0, 15.0, 30.0)))]
    assert gaps[0] > gaps[1] > gaps[2]


# ---------------------------------------------------------------------------
# trajectories

def test_full_dispersive_small_and_large_amplitude():
    small = integrate_semiclassical("full", None, FIG6A, 1e-3, 30.0,
                                    adaptive=False, sample_every=10)
    _, npl_s, _, _ = small.populations()
    assert npl_s.max() < 0.02

    p_div = ModelParams(10.0, 0.0, 1.0, 0.5, 1.0, 0.0)
    big = integrate_semiclassical("full", None, p_div, 1e-3, 30.0,
                                  adaptive=False, sample_every=10)
    ncav, npl_b, _, nze = big.populations()
    assert npl_b.max() > 0.1
    # each deep m=0 depletion comes with a photon burst
    t_burst = big.times[np.argmax(ncav)]
    t_deplete = big.times[np.argmin(nze)]
    assert abs(t_burst - t_deplete) < 1.0


def test_adiabatic_oscillation_small_amplitude():
    p = ModelParams.from_effective_couplings(0.5, 1.0, q=-1.0)
    traj = integrate_semiclassical("adiabatic", None, p, 1e-3, 30.0,
                                   adaptive=False, sample_every=10)
    _, npl, _, _ = traj.populations()
    assert traj.status == "ok"
    assert npl.max() < 0.05
    assert npl.min() >= 0.001 - 1e-9


def test_full_population_conserved_under_damping():
    p = ModelParams(2.0, 1.0, 2.0, 1.0, 1.0, 2.0)
    traj = integrate_semiclassical("full", None, p, 1e-3, 20.0,
                                   adaptive=False, sample_every=100)
    assert traj.population_drift() < 1e-8 * 20.0


def test_adiabatic_damping_breaks_population_conservation():
    p = ModelParams.from_effective_couplings(0.5, 1.0, kappa=0.5, omega0=0.5, q=-1.0)
    traj = integrate_semiclassical("adiabatic", None, p, 1e-3, 1.0,
                                   adaptive=False, sample_every=100)
    assert traj.population_drift() > 1e-6


def test_adiabatic_blowup_reports_diverged():
    p = ModelParams.from_effective_couplings(0.5, 1.0, kappa=0.5, omega0=0.5, q=-1.0)
    traj = integrate_semiclassical("adiabatic", None, p, 1e-3, 1e4,
                                   adaptive=False, sample_every=1000)
    assert traj.status == "diverged"
    assert traj.times[-1] < 1e4


def test_trajectory_exchange_equivariance():
    rng = np.random.default_rng(4)
    p = ModelParams(1.5, 0.8, -0.5, 1.1, 0.6, 0.4)
    tp = apply_symmetry_T(p)
    z = rng.normal(size=4) * 0.3 + 1j * rng.normal(size=4) * 0.3
    a = integrate_semiclassical("full", z, p, 1e-3, 5.0, adaptive=False,
                                sample_every=50)
    b = integrate_semiclassical("full", [z[0], z[2], z[1], z[3]], tp, 1e-3, 5.0,
                                adaptive=False, sample_every=50)
    assert np.array_equal(a.beta_plus, b.beta_minus)
    assert np.array_equal(a.beta_minus, b.beta_plus)
    assert np.array_equal(a.alpha, b.alpha)


def test_adaptive_halving_converges_on_smooth_run():
    traj = integrate_semiclassical("full", None, FIG6A, 1e-2, 2.0, adaptive=True)
    assert traj.converged
    assert traj.dt < 1e-2 or traj.converged


def test_input_validation():
    with pytest.raises(ValueError):
        integrate_semiclassical("cavityless", None, FIG6A, 1e-3, 1.0)
    with pytest.raises(ValueError):
        integrate_semiclassical("full", [0, 0, 0], FIG6A, 1e-3, 1.0)
    with pytest.raises(ValueError):
        integrate_semiclassical("full", None, FIG6A, -1e-3, 1.0)
