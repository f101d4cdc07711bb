"""Long-time phase classification of full-model trajectories and (l+, l-) maps.

A trajectory's phase is read off the late-time cavity population: mean and
half-range (max minus min over two) inside an analysis window.  Zero mean is
the normal phase, finite mean with zero amplitude is steady superradiance,
both finite is oscillatory superradiance.  Chaos cannot be told apart from
oscillation by those two numbers, so a twin-trajectory divergence rate is
reported as a separate, optional score and never folded into the label.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import integrate, semiclassical
from .model import ModelParams

__all__ = [
    "DEFAULT_EPS_MEAN",
    "DEFAULT_EPS_AMP",
    "PhaseLabel",
    "WindowStats",
    "PhaseGrid",
    "WindowError",
    "window_stats",
    "classify_phase",
    "phase_sweep",
    "chaos_score",
]

# Decayed normal-phase signals sit far below these while superradiant means are
# order 1e-1; the amplitude threshold additionally clears the slow ring-down
# that steady superradiant cells still show inside the analysis window.
DEFAULT_EPS_MEAN = 1e-4
DEFAULT_EPS_AMP = 1e-3

MIN_WINDOW_SAMPLES = 10

# Window sampling stride in steps: decimate by ~10 but stay incommensurate with
# any oscillation locked to the step grid, so a half-period resonance cannot
# alias the amplitude to zero.
_STRIDE_STEPS = 10 + 1 / 3


class WindowError(ValueError):
    """Analysis window empty, out of range, or too sparsely sampled."""


class PhaseLabel(Enum):
    NORMAL = "normal"
    SUPERRADIANT = "superradiant"
    OSCILLATORY = "oscillatory"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class WindowStats:
    mean: float
    amplitude: float
    window: tuple


def window_stats(times, values, t_start, t_end) -> WindowStats:
    """Mean and half-range of a sampled series restricted to [t_start, t_end]."""
    times = np.asarray(times, float)
    values = np.asarray(values, float)
    if t_end <= t_start:
        raise WindowError(f"empty window [{t_start}, {t_end}]")
    if times.size == 0 or t_start < times[0] or t_end > times[-1]:
        raise WindowError(f"window [{t_start}, {t_end}] outside sampled range")
    sel = (times >= t_start) & (times <= t_end)
    n = int(sel.sum())
    if n < MIN_WINDOW_SAMPLES:
        raise WindowError(f"only {n} samples in window, need >= {MIN_WINDOW_SAMPLES}")
    v = values[sel]
    return WindowStats(float(v.mean()), float((v.max() - v.min()) / 2),
                       (float(t_start), float(t_end)))


def classify_phase(stats: WindowStats, eps_mean=DEFAULT_EPS_MEAN,
                   eps_amp=DEFAULT_EPS_AMP) -> PhaseLabel:
    """Thresholded phase call; UNRESOLVED is reserved for failed integrations."""
    if eps_mean <= 0 or eps_amp <= 0:
        raise ValueError("thresholds must be positive")
    if not (math.isfinite(stats.mean) and math.isfinite(stats.amplitude)):
        return PhaseLabel.UNRESOLVED
    if stats.mean < eps_mean:
        return PhaseLabel.NORMAL
    if stats.amplitude < eps_amp:
        return PhaseLabel.SUPERRADIANT
    return PhaseLabel.OSCILLATORY


def _window_step_indices(dt, t_start, t_end):
    base = t_start / dt
    count = int(math.floor((t_end - t_start) / (dt * _STRIDE_STEPS))) + 1
    idx = np.unique(np.rint(base + np.arange(count) * _STRIDE_STEPS).astype(int))
    if idx.size < MIN_WINDOW_SAMPLES:
        raise WindowError(
            f"window [{t_start}, {t_end}] at dt={dt} yields {idx.size} samples, "
            f"need >= {MIN_WINDOW_SAMPLES}")
    return idx


@dataclass(frozen=True)
class PhaseGrid:
    """Per-cell window statistics and labels over a (lambda+, lambda-) grid.

    Arrays are indexed [i_lambda_plus, j_lambda_minus], row-major.
    """

    lambda_plus_axis: np.ndarray
    lambda_minus_axis: np.ndarray
    mean: np.ndarray
    amplitude: np.ndarray
    labels: np.ndarray            # dtype object, PhaseLabel entries
    chaos: np.ndarray | None
    window: tuple
    eps_mean: float
    eps_amp: float

    def stats(self, i, j) -> WindowStats:
        return WindowStats(float(self.mean[i, j]), float(self.amplitude[i, j]),
                           self.window)

    def label(self, i, j) -> PhaseLabel:
        return self.labels[i, j]


def phase_sweep(params_template: ModelParams, lambda_plus_axis, lambda_minus_axis, *,
                window, dt=1e-3, seed=None, eps_mean=DEFAULT_EPS_MEAN,
                eps_amp=DEFAULT_EPS_AMP, with_chaos=False,
                perturbation_size=1e-8, workers=None) -> PhaseGrid:
    """Classify the full model over a coupling grid.

    Every cell integrates the same seed with the template's omega, omega0, q,
    kappa and the cell's couplings, then takes window statistics of the cavity
    population.  Cells evolve in lockstep as one vectorized batch (optionally
    chunked over threads); each cell's arithmetic is independent of the others
    and of the chunking, so the output is deterministic.  Cells whose
    integration produced non-finite samples are labeled UNRESOLVED; nothing
    aborts the sweep.
    """
    lp_axis = np.asarray(lambda_plus_axis, float)
    lm_axis = np.asarray(lambda_minus_axis, float)
    if lp_axis.size == 0 or lm_axis.size == 0:
        raise ValueError("axes must be nonempty")
    t_start, t_end = window
    idx = _window_step_indices(dt, t_start, t_end)
    n_steps = int(idx[-1])

    lp = np.repeat(lp_axis, lm_axis.size)
    lm = np.tile(lm_axis, lp_axis.size)
    ncells = lp.size
    y0 = np.broadcast_to(semiclassical._seed_array("full", seed), (ncells, 4)).copy()
    rhs = semiclassical._full_rhs_raw(lp, lm, params_template.omega,
                                      params_template.omega0, params_template.q,
                                      params_template.kappa)

    def run(sl):
        sub = semiclassical._full_rhs_raw(lp[sl], lm[sl], params_template.omega,
                                          params_template.omega0, params_template.q,
                                          params_template.kappa)
        _, _, series = integrate.rk4_collect(sub, y0[sl], dt, n_steps, idx,
                                             lambda y: np.abs(y[..., 0]) ** 2)
        return series

    nworkers = 1 if workers is None else max(1, int(workers))
    if nworkers <= 1 or ncells == 1:
        _, _, series = integrate.rk4_collect(rhs, y0, dt, n_steps, idx,
                                             lambda y: np.abs(y[..., 0]) ** 2)
    else:
        bounds = np.linspace(0, ncells, min(nworkers, ncells) + 1).astype(int)
        slices = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        with ThreadPoolExecutor(max_workers=len(slices)) as pool:
            parts = list(pool.map(run, slices))
        series = np.concatenate(parts, axis=1)

    finite = np.all(np.isfinite(series), axis=0)
    with np.errstate(invalid="ignore"):
        means = series.mean(axis=0)
        amps = (series.max(axis=0) - series.min(axis=0)) / 2

    chaos = None
    if with_chaos:
        chaos = _chaos_scores(lp, lm, params_template, y0, perturbation_size, dt,
                              t_end=t_end)

    labels = np.empty(ncells, dtype=object)
    for k in range(ncells):
        if not finite[k] or (chaos is not None and not np.isfinite(chaos[k])):
            labels[k] = PhaseLabel.UNRESOLVED
            means[k] = np.nan
            amps[k] = np.nan
        else:
            labels[k] = classify_phase(WindowStats(means[k], amps[k], window),
                                       eps_mean, eps_amp)

    shape = (lp_axis.size, lm_axis.size)
    return PhaseGrid(lp_axis, lm_axis, means.reshape(shape), amps.reshape(shape),
                     labels.reshape(shape),
                     None if chaos is None else chaos.reshape(shape),
                     (float(t_start), float(t_end)), eps_mean, eps_amp)


def _chaos_scores(lp, lm, params, y0, perturbation_size, dt, *, t_end,
                  renorm_interval=1.0, discard=None):
    """Twin-trajectory log-divergence rates for a batch of coupling cells."""
    if perturbation_size <= 0:
        raise ValueError("perturbation_size must be > 0")
    if discard is None:
        discard = min(20.0, t_end / 4)
    rhs = semiclassical._full_rhs_raw(lp, lm, params.omega, params.omega0,
                                      params.q, params.kappa)
    ncells = lp.size if np.ndim(lp) else 1
    ref = np.array(y0, complex).reshape(ncells, 4)
    twin = ref.copy()
    twin[:, 1] += perturbation_size
    state = np.stack([ref, twin])          # (2, ncells, 4)
    m = max(1, round(renorm_interval / dt))
    n_chunks = max(1, round(t_end / (m * dt)))
    acc = np.zeros(ncells)
    t_acc = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for chunk in range(n_chunks):
            for i in range(m):
                state = integrate._step(rhs, 0.0, state, dt)
            diff = state[1] - state[0]
            d = np.linalg.norm(diff.view(float).reshape(ncells, -1), axis=1)
            d = np.where(d == 0, 1e-300, d)
            if (chunk + 1) * m * dt > discard:
                acc += np.log(d / perturbation_size)
                t_acc += m * dt
            state = np.stack([state[0], state[0] + diff * (perturbation_size / d)[:, None]])
    scores = acc / t_acc
    bad = ~np.all(np.isfinite(state[0].view(float).reshape(ncells, -1)), axis=1)
    scores[bad] = np.nan
    return scores


def chaos_score(params: ModelParams, seed=None, perturbation_size=1e-8,
                t_end=150.0, *, dt=1e-3, renorm_interval=1.0, discard=None) -> float:
    """Finite-time exponential separation rate of two full-model trajectories.

    The twin starts offset by perturbation_size in beta_plus and is pulled back
    to that distance every renorm_interval; the mean log stretch per unit time
    (after an initial discard) is returned.  Positive values flag
    chaotic-candidate dynamics; contracting or neutral dynamics give <= 0.
    Returns NaN when the integration diverges.
    """
    y0 = semiclassical._seed_array("full", seed)
    scores = _chaos_scores(np.array([params.lambda_plus]),
                           np.array([params.lambda_minus]), params,
                           y0[None, :], perturbation_size, dt, t_end=t_end,
                           renorm_interval=renorm_interval, discard=discard)
    return float(scores[0])
