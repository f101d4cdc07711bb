"""Classical fixed-step RK4 for complex-valued ODE systems.

States are complex ndarrays whose last axis indexes components; any leading
axes are independent trajectories advanced in lockstep.  The right-hand side
must be vectorized over those leading axes.  Fixed stepping keeps results
bit-reproducible: the same inputs always produce the same floating-point
trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RKResult", "STATUS_OK", "STATUS_DIVERGED", "rk4_fixed", "rk4_collect",
           "rk4_adaptive"]

STATUS_OK = "ok"
STATUS_DIVERGED = "diverged"


@dataclass(frozen=True)
class RKResult:
    times: np.ndarray        # (n_samples,)
    states: np.ndarray       # (n_samples, ...) complex
    status: str
    dt: float
    converged: bool = True   # False only when adaptive halving ran out of budget


def _step(rhs, t, y, dt):
    k1 = rhs(t, y)
    k2 = rhs(t + dt / 2, y + (dt / 2) * k1)
    k3 = rhs(t + dt / 2, y + (dt / 2) * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_fixed(rhs, y0, dt, n_steps, *, sample_every=1, guard=None) -> RKResult:
    """Integrate n_steps of size dt, storing every sample_every-th state.

    The initial state and (when it does not fall on the stride) the final
    state are always stored.  With a guard, integration halts with status
    "diverged" as soon as a stored sample exceeds it in magnitude or turns
    non-finite; the offending sample is kept so the blow-up is visible.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    y = np.array(y0, dtype=complex)
    sample_idx = list(range(0, n_steps + 1, sample_every))
    if sample_idx[-1] != n_steps:
        sample_idx.append(n_steps)
    sample_idx = np.asarray(sample_idx)
    states = np.empty((len(sample_idx),) + y.shape, dtype=complex)
    states[0] = y
    stored = 1
    status = STATUS_OK
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n_steps + 1):
            y = _step(rhs, (i - 1) * dt, y, dt)
            if i == sample_idx[stored]:
                states[stored] = y
                stored += 1
                if guard is not None:
                    a = np.abs(y)
                    if not np.all(np.isfinite(a)) or a.max() > guard:
                        status = STATUS_DIVERGED
                        break
    times = sample_idx[:stored] * dt
    return RKResult(times, states[:stored], status, dt)


def rk4_collect(rhs, y0, dt, n_steps, collect_at, extract):
    """Integrate while recording extract(y) at the given step indices only.

    Memory-light variant for long runs where only a derived scalar series in a
    late window is needed.  Returns (final_state, times, collected) with
    collected stacked along axis 0.
    """
    y = np.array(y0, dtype=complex)
    collect_at = np.asarray(sorted(set(int(i) for i in collect_at)))
    if collect_at.size and (collect_at[0] < 0 or collect_at[-1] > n_steps):
        raise ValueError("collect_at indices outside [0, n_steps]")
    out = []
    pos = 0
    with np.errstate(over="ignore", invalid="ignore"):
        if pos < collect_at.size and collect_at[0] == 0:
            out.append(extract(y))
            pos += 1
        for i in range(1, n_steps + 1):
            y = _step(rhs, (i - 1) * dt, y, dt)
            if pos < collect_at.size and i == collect_at[pos]:
                out.append(extract(y))
                pos += 1
    collected = np.stack(out) if out else np.empty((0,))
    return y, collect_at * dt, collected


def rk4_adaptive(rhs, y0, dt, t_end, *, sample_every=1, guard=None,
                 rel_tol=1e-6, max_halvings=4) -> RKResult:
    """Fixed-step RK4 with automatic step halving.

    Runs at dt, then repeatedly at half the step, until two successive runs
    agree on the final state within rel_tol (relative, scaled by 1 + max
    magnitude), up to max_halvings.  Stored sample times stay on the original
    dt grid across refinements.  The finest run is returned; `converged` is
    False when the budget was exhausted without agreement.
    """
    n_steps = max(1, round(t_end / dt))
    prev = rk4_fixed(rhs, y0, dt, n_steps, sample_every=sample_every, guard=guard)
    for _ in range(max_halvings):
        n_steps *= 2
        dt /= 2
        sample_every *= 2
        cur = rk4_fixed(rhs, y0, dt, n_steps, sample_every=sample_every, guard=guard)
        if cur.status == STATUS_DIVERGED and prev.status == STATUS_DIVERGED:
            return RKResult(cur.times, cur.states, cur.status, cur.dt, False)
        if cur.status == prev.status and cur.times.shape == prev.times.shape:
            diff = np.abs(cur.states[-1] - prev.states[-1]).max()
            scale = 1.0 + np.abs(cur.states[-1]).max()
            if diff <= rel_tol * scale:
                return cur
        prev = cur
    return RKResult(prev.times, prev.states, prev.status, prev.dt, False)
