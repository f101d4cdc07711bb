"""Nonlinear semiclassical dynamics: cavity-eliminated and full cavity+atom systems.

Working convention: the total atomic population |b+|^2 + |b-|^2 + |b0|^2 is 1
(seeds in all reference runs sum to 1) and the thermodynamic-limit scale factor
is absorbed into the couplings.  The full system conserves that population
exactly for any kappa; the cavity-eliminated system does not once kappa > 0,
which is an artefact of folding cavity loss into atom-only dynamics.

Both right-hand sides are written so that exchanging the + and - roles
(together with the parameter map of apply_symmetry_T) reproduces the same
floating-point arithmetic, making trajectories exactly equivariant under that
symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import integrate
from .model import ModelParams, derive_couplings

__all__ = [
    "DEFAULT_SEED",
    "AdiabaticState",
    "FullState",
    "SpinExpectation",
    "SemiclassicalTrajectory",
    "adiabatic_rhs",
    "full_rhs",
    "integrate_semiclassical",
    "total_population",
    "spin_expectations",
    "hamiltonian_energy",
]

# (alpha, beta_plus, beta_minus, beta_zero): empty cavity, small symmetric seeds
DEFAULT_SEED = (0j, math.sqrt(0.001) + 0j, math.sqrt(0.001) + 0j, math.sqrt(0.998) + 0j)

# |amplitude| beyond this halts integration: reachable only through blow-up of
# the cavity-eliminated system (or integrator failure), never the full one.
AMPLITUDE_GUARD = 1e6


@dataclass(frozen=True)
class AdiabaticState:
    """Atomic amplitudes of the cavity-eliminated system."""

    beta_plus: complex
    beta_minus: complex
    beta_zero: complex
    t: float = 0.0

    @classmethod
    def default_seed(cls) -> "AdiabaticState":
        return cls(*DEFAULT_SEED[1:])

    def as_array(self):
        return np.array([self.beta_plus, self.beta_minus, self.beta_zero], complex)


@dataclass(frozen=True)
class FullState:
    """Cavity amplitude plus atomic amplitudes of the full system."""

    alpha: complex
    beta_plus: complex
    beta_minus: complex
    beta_zero: complex
    t: float = 0.0

    @classmethod
    def default_seed(cls) -> "FullState":
        return cls(*DEFAULT_SEED)

    def as_array(self):
        return np.array([self.alpha, self.beta_plus, self.beta_minus, self.beta_zero],
                        complex)


@dataclass(frozen=True)
class SpinExpectation:
    s_x: float
    s_y: float
    s_z: float
    s_len2: float


# ---------------------------------------------------------------------------
# right-hand sides (vectorized over leading axes; last axis = components)

def _adiabatic_rhs_raw(Lp, Lm, Gp, Gm, w0, q):
    # effective couplings may be arrays (one value per batched trajectory)
    L = Lp + Lm
    R = np.sqrt(Lp * Lm)
    Rg = np.sqrt(Gp * Gm)
    lin_p = 1j * Lm - 1j * (q + w0) - Gm
    lin_m = 1j * Lp - 1j * (q - w0) - Gp
    cross = 1j * R - Rg
    cub_p = 1j * L + (Gp - Gm)
    cub_m = 1j * L + (Gm - Gp)

    def rhs(t, y):
        bp, bm, b0 = y[..., 0], y[..., 1], y[..., 2]
        b0c = b0.conjugate()
        n0 = (b0 * b0c).real
        b0sq = b0 * b0
        dbp = (lin_p * bp + cross * bm
               + cub_p * (bp * n0 + bm.conjugate() * b0sq)
               + 2j * R * (bm * n0 + bp.conjugate() * b0sq))
        dbm = (lin_m * bm + cross * bp
               + cub_m * (bm * n0 + bp.conjugate() * b0sq)
               + 2j * R * (bp * n0 + bm.conjugate() * b0sq))
        db0 = (1j * L * ((2 * bp) * bm * b0c + ((bp * bp.conjugate()).real
                                                + (bm * bm.conjugate()).real) * b0 + b0)
               + 2j * R * ((bp * bp + bm * bm) * b0c
                           + (bp * bm.conjugate() + bp.conjugate() * bm) * b0)
               + (Gm - Gp) * ((bp * bp.conjugate()).real
                              - (bm * bm.conjugate()).real) * b0
               + (Gp + Gm) * b0)
        return np.stack([dbp, dbm, db0], axis=-1)

    return rhs


def _adiabatic_rhs_fn(params: ModelParams):
    d = derive_couplings(params)
    return _adiabatic_rhs_raw(d.Lambda_plus, d.Lambda_minus, d.Gamma_plus,
                              d.Gamma_minus, params.omega0, params.q)


def _full_rhs_raw(lp, lm, omega, omega0, q, kappa):
    # lp/lm may be arrays (one value per batched trajectory)
    c_alpha = -(kappa + 1j * omega)
    c_bp = -1j * (q + omega0)
    c_bm = -1j * (q - omega0)

    def rhs(t, y):
        a, bp, bm, b0 = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
        ac = a.conjugate()
        b0c = b0.conjugate()
        cm = bp * b0c + bm.conjugate() * b0
        cp = bp.conjugate() * b0 + bm * b0c
        da = c_alpha * a - 2j * (lm * cm + lp * cp)
        dbp = c_bp * bp - 2j * (lm * a + lp * ac) * b0
        dbm = c_bm * bm - 2j * (lp * a + lm * ac) * b0
        db0 = -2j * (lm * (a * bm + ac * bp) + lp * (a * bp + ac * bm))
        return np.stack([da, dbp, dbm, db0], axis=-1)

    return rhs


def _full_rhs_fn(params: ModelParams):
    return _full_rhs_raw(params.lambda_plus, params.lambda_minus, params.omega,
                         params.omega0, params.q, params.kappa)


def adiabatic_rhs(state: AdiabaticState, params: ModelParams) -> AdiabaticState:
    """Time derivative of the cavity-eliminated amplitudes."""
    d = _adiabatic_rhs_fn(params)(state.t, state.as_array())
    return AdiabaticState(*d, t=state.t)


def full_rhs(state: FullState, params: ModelParams) -> FullState:
    """Time derivative of the cavity+atom amplitudes."""
    d = _full_rhs_fn(params)(state.t, state.as_array())
    return FullState(*d, t=state.t)


# ---------------------------------------------------------------------------
# observables

def _atomic_amplitudes(state):
    return state.beta_plus, state.beta_minus, state.beta_zero


def total_population(state) -> float:
    """|b+|^2 + |b-|^2 + |b0|^2; the cavity amplitude is excluded."""
    bp, bm, b0 = _atomic_amplitudes(state)
    return abs(bp) ** 2 + abs(bm) ** 2 + abs(b0) ** 2


def _spin_arrays(bp, bm, b0):
    s_z = (bp * np.conj(bp)).real - (bm * np.conj(bm)).real
    s_plus = np.sqrt(2) * (np.conj(bp) * b0 + np.conj(b0) * bm)
    s_x, s_y = s_plus.real, s_plus.imag
    return s_x, s_y, s_z, s_x**2 + s_y**2 + s_z**2


def spin_expectations(state) -> SpinExpectation:
    """Collective spin components; s_len2 is conserved only when q = 0."""
    s_x, s_y, s_z, s_len2 = _spin_arrays(*_atomic_amplitudes(state))
    return SpinExpectation(float(s_x), float(s_y), float(s_z), float(s_len2))


def _energy_arrays(params, a, bp, bm, b0):
    cpl = np.conj(bp) * b0 + bm * np.conj(b0)
    return (params.omega * (a * np.conj(a)).real
            + (params.q + params.omega0) * (bp * np.conj(bp)).real
            + (params.q - params.omega0) * (bm * np.conj(bm)).real
            + 4 * params.lambda_minus * (a * cpl).real
            + 4 * params.lambda_plus * (a * np.conj(cpl)).real)


def hamiltonian_energy(state: FullState, params: ModelParams) -> float:
    """Conserved energy of the kappa = 0 full flow; a decay diagnostic otherwise.

    E = omega |a|^2 + (q + w0) n+ + (q - w0) n- + 4 l- Re(a C) + 4 l+ Re(a C*),
    with C = b+* b0 + b- b0*.  Matches the coupling convention of full_rhs, so
    dE/dt = 0 exactly along undamped trajectories.
    """
    return float(_energy_arrays(params, state.alpha, state.beta_plus,
                                state.beta_minus, state.beta_zero))


# ---------------------------------------------------------------------------
# integration

@dataclass(frozen=True)
class SemiclassicalTrajectory:
    """Sampled trajectory of either semiclassical system.

    alpha is None for the cavity-eliminated system.  Population and spin
    series are exposed as vectorized diagnostics.
    """

    system: str
    times: np.ndarray
    alpha: np.ndarray | None
    beta_plus: np.ndarray
    beta_minus: np.ndarray
    beta_zero: np.ndarray
    status: str
    dt: float
    converged: bool

    def state(self, i):
        t = float(self.times[i])
        if self.system == "full":
            return FullState(self.alpha[i], self.beta_plus[i], self.beta_minus[i],
                             self.beta_zero[i], t)
        return AdiabaticState(self.beta_plus[i], self.beta_minus[i],
                              self.beta_zero[i], t)

    def populations(self):
        """(n_cavity or None, n_plus, n_minus, n_zero) series."""
        ncav = None if self.alpha is None else np.abs(self.alpha) ** 2
        return (ncav, np.abs(self.beta_plus) ** 2, np.abs(self.beta_minus) ** 2,
                np.abs(self.beta_zero) ** 2)

    def total_population(self):
        _, npl, nmi, nze = self.populations()
        return npl + nmi + nze

    def population_drift(self) -> float:
        n = self.total_population()
        return float(np.abs(n - n[0]).max())

    def spin_expectations(self):
        """(s_x, s_y, s_z, s_len2) series."""
        return _spin_arrays(self.beta_plus, self.beta_minus, self.beta_zero)

    def energy(self, params: ModelParams):
        if self.alpha is None:
            raise ValueError("energy diagnostic is defined for the full system only")
        return _energy_arrays(params, self.alpha, self.beta_plus, self.beta_minus,
                              self.beta_zero)


def _seed_array(system, initial):
    if initial is None:
        initial = DEFAULT_SEED if system == "full" else DEFAULT_SEED[1:]
    if isinstance(initial, (FullState, AdiabaticState)):
        initial = initial.as_array()
    y0 = np.asarray(initial, dtype=complex)
    want = 4 if system == "full" else 3
    if y0.shape != (want,):
        raise ValueError(f"{system} system needs {want} seed amplitudes, got shape {y0.shape}")
    return y0


def integrate_semiclassical(system, initial, params: ModelParams, dt, t_end, *,
                            adaptive=True, sample_every=1, rel_tol=1e-6,
                            max_halvings=4) -> SemiclassicalTrajectory:
    """RK4 trajectory of the "adiabatic" or "full" system.

    initial may be a state object, a component sequence, or None for the
    default seed.  Halts with status "diverged" when any amplitude magnitude
    passes AMPLITUDE_GUARD.
    """
    if system not in ("adiabatic", "full"):
        raise ValueError(f"system must be 'adiabatic' or 'full', got {system!r}")
    y0 = _seed_array(system, initial)
    rhs = _full_rhs_fn(params) if system == "full" else _adiabatic_rhs_fn(params)
    if adaptive:
        res = integrate.rk4_adaptive(rhs, y0, dt, t_end, sample_every=sample_every,
                                     guard=AMPLITUDE_GUARD, rel_tol=rel_tol,
                                     max_halvings=max_halvings)
    else:
        res = integrate.rk4_fixed(rhs, y0, dt, max(1, round(t_end / dt)),
                                  sample_every=sample_every, guard=AMPLITUDE_GUARD)
    if system == "full":
        a, bp, bm, b0 = (res.states[:, i] for i in range(4))
    else:
        a = None
        bp, bm, b0 = (res.states[:, i] for i in range(3))
    return SemiclassicalTrajectory(system, res.times, a, bp, bm, b0,
                                   res.status, res.dt, res.converged)
