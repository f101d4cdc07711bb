"""First- and second-order operator-moment dynamics of the open system.

The undepleted-mode approximation makes the moment hierarchy close: four
first-order moments (<A>, <A+>, <B>, <B+>) evolve under the open-system
matrix, and ten second-order moments evolve under a linear system with
inhomogeneous terms that encode the averaged quantum fluctuations (so the
vacuum is not stationary).  Populations are the real parts of the two
diagonal second-order moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import integrate
from .model import ModelParams, derive_couplings
from .stability import open_matrix

__all__ = [
    "SECOND_MOMENT_LABELS",
    "FIRST_MOMENT_LABELS",
    "MomentState",
    "MomentTrajectory",
    "PopulationSeries",
    "MomentIntegrityError",
    "moment_rhs",
    "integrate_moments",
    "populations",
    "bec_population_analytic",
]

FIRST_MOMENT_LABELS = ("A", "A_dag", "B", "B_dag")
SECOND_MOMENT_LABELS = (
    "bp_dag_bp", "bm_dag_bm", "bp_sq", "bm_sq", "bp_dag_sq",
    "bm_dag_sq", "bp_bm", "bp_dag_bm_dag", "bp_bm_dag", "bp_dag_bm",
)
# index aliases into the second-order block
_NP, _NM, _PP, _PM, _PDP, _PDM, _U, _UD, _V, _VD = range(10)

# |moment| beyond this halts integration with a "diverged" status
OVERFLOW_GUARD = 1e12

# populations must be real up to this (scaled); a breach signals corruption
POPULATION_IMAG_TOL = 1e-6


class MomentIntegrityError(RuntimeError):
    """A moment that must be real (or a conjugate pair) drifted apart."""


@dataclass(frozen=True)
class MomentState:
    """First- and second-order moments at one time.

    first  : (<A>, <A+>, <B>, <B+>)
    second : ten moments ordered as SECOND_MOMENT_LABELS
    """

    first: np.ndarray
    second: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "first", np.asarray(self.first, dtype=complex))
        object.__setattr__(self, "second", np.asarray(self.second, dtype=complex))
        if self.first.shape != (4,) or self.second.shape != (10,):
            raise ValueError("MomentState needs 4 first- and 10 second-order moments")

    @classmethod
    def vacuum(cls) -> "MomentState":
        return cls(np.zeros(4), np.zeros(10), 0.0)

    def conjugate_defect(self) -> float:
        """Largest scaled violation of the built-in conjugate redundancy."""
        s = self.second
        pairs = ((s[_PDP], s[_PP]), (s[_PDM], s[_PM]), (s[_UD], s[_U]), (s[_VD], s[_V]))
        worst = max(abs(a - np.conj(b)) / (1 + abs(b)) for a, b in pairs)
        for n in (s[_NP], s[_NM]):
            worst = max(worst, abs(n.imag) / (1 + abs(n.real)))
        return worst


def _second_order_system(params: ModelParams):
    """Matrix M and inhomogeneous vector c with d(second)/dt = M second + c."""
    d = derive_couplings(params)
    w0, q = params.omega0, params.q
    L = d.Lambda_plus + d.Lambda_minus
    R = np.sqrt(d.Lambda_plus * d.Lambda_minus)
    G = d.Gamma_plus - d.Gamma_minus
    Gs = d.Gamma_plus + d.Gamma_minus
    Rg = np.sqrt(d.Gamma_plus * d.Gamma_minus)

    M = np.zeros((10, 10), dtype=complex)
    c = np.zeros(10, dtype=complex)

    M[_NP, [_NP, _PP, _PDP, _U, _UD, _V, _VD]] = (
        2 * G, -2j * R, 2j * R, G - 1j * L, G + 1j * L, -2j * R, 2j * R)
    c[_NP] = 2 * d.Gamma_plus

    M[_NM, [_NM, _PM, _PDM, _U, _UD, _V, _VD]] = (
        -2 * G, -2j * R, 2j * R, -G - 1j * L, -G + 1j * L, 2j * R, -2j * R)
    c[_NM] = 2 * d.Gamma_minus

    M[_PP, [_PP, _V, _NP, _U]] = (
        -2j * (q + w0) + 2 * (G + 1j * L), 2 * (G + 1j * L), 4j * R, 4j * R)
    c[_PP] = 2j * R - 2 * Rg

    M[_PM, [_PM, _VD, _NM, _U]] = (
        -2j * (q - w0) + 2 * (-G + 1j * L), 2 * (-G + 1j * L), 4j * R, 4j * R)
    c[_PM] = 2j * R - 2 * Rg

    M[_PDP, [_PDP, _VD, _NP, _UD]] = (
        2j * (q + w0) + 2 * (G - 1j * L), 2 * (G - 1j * L), -4j * R, -4j * R)
    c[_PDP] = -2j * R - 2 * Rg

    M[_PDM, [_PDM, _V, _NM, _UD]] = (
        2j * (q - w0) + 2 * (-G - 1j * L), 2 * (-G - 1j * L), -4j * R, -4j * R)
    c[_PDM] = -2j * R - 2 * Rg

    M[_U, [_U, _NP, _NM, _PP, _PM, _V, _VD]] = (
        -2j * (q - L), 1j * L - G, 1j * L + G, 2j * R, 2j * R, 2j * R, 2j * R)
    c[_U] = -Gs + 1j * L

    M[_UD, [_UD, _NP, _NM, _PDP, _PDM, _V, _VD]] = (
        2j * (q - L), -1j * L - G, -1j * L + G, -2j * R, -2j * R, -2j * R, -2j * R)
    c[_UD] = -Gs - 1j * L

    M[_V, [_V, _PDM, _PP, _NM, _NP, _UD, _U]] = (
        -2j * w0, G + 1j * L, -(G + 1j * L), 2j * R, -2j * R, 2j * R, -2j * R)
    c[_V] = 2 * Rg

    M[_VD, [_VD, _PM, _PDP, _NM, _NP, _U, _UD]] = (
        2j * w0, G - 1j * L, -(G - 1j * L), -2j * R, 2j * R, -2j * R, 2j * R)
    c[_VD] = 2 * Rg

    return M, c


def moment_rhs(state: MomentState, params: ModelParams) -> MomentState:
    """Time derivative of all fourteen moments, returned in MomentState layout."""
    m1 = open_matrix(params)
    m2, c2 = _second_order_system(params)
    return MomentState(m1 @ state.first, m2 @ state.second + c2, state.t)


@dataclass(frozen=True)
class PopulationSeries:
    """<N+> and <N-> along a trajectory."""

    times: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray


@dataclass(frozen=True)
class MomentTrajectory:
    times: np.ndarray
    first: np.ndarray     # (n, 4)
    second: np.ndarray    # (n, 10)
    status: str
    dt: float
    converged: bool

    def state(self, i) -> MomentState:
        return MomentState(self.first[i], self.second[i], float(self.times[i]))

    def populations(self) -> PopulationSeries:
        np_, nm_ = self.second[:, _NP], self.second[:, _NM]
        _check_real(np_)
        _check_real(nm_)
        return PopulationSeries(self.times, np_.real, nm_.real)

    def conjugate_defect(self) -> float:
        return max(self.state(i).conjugate_defect() for i in range(len(self.times)))


def _check_real(values):
    values = np.atleast_1d(values)
    bad = np.abs(values.imag) > POPULATION_IMAG_TOL * (1 + np.abs(values.real))
    if np.any(bad):
        worst = np.abs(values.imag[bad]).max()
        raise MomentIntegrityError(
            f"population moment has imaginary part {worst:.3e}; integrator state corrupt"
        )


def populations(state: MomentState):
    """(<N+>, <N->) as reals; raises MomentIntegrityError on imaginary residue."""
    np_, nm_ = state.second[_NP], state.second[_NM]
    _check_real(np.array([np_, nm_]))
    return float(np_.real), float(nm_.real)


def integrate_moments(initial: MomentState, params: ModelParams, dt, t_end, *,
                      adaptive=True, sample_every=1, rel_tol=1e-6,
                      max_halvings=4) -> MomentTrajectory:
    """RK4 trajectory of the fourteen-moment system.

    With adaptive=True the step is halved (up to max_halvings) until two
    successive refinements agree on the final state to rel_tol; sampled times
    stay on the original dt grid.  Integration halts with status "diverged"
    once any moment magnitude passes OVERFLOW_GUARD.
    """
    m1 = open_matrix(params)
    m2, c2 = _second_order_system(params)
    split = 4

    def rhs(t, y):
        d1 = y[..., :split] @ m1.T
        d2 = y[..., split:] @ m2.T + c2
        return np.concatenate([d1, d2], axis=-1)

    y0 = np.concatenate([initial.first, initial.second])
    if adaptive:
        res = integrate.rk4_adaptive(rhs, y0, dt, t_end, sample_every=sample_every,
                                     guard=OVERFLOW_GUARD, rel_tol=rel_tol,
                                     max_halvings=max_halvings)
    else:
        res = integrate.rk4_fixed(rhs, y0, dt, max(1, round(t_end / dt)),
                                  sample_every=sample_every, guard=OVERFLOW_GUARD)
    return MomentTrajectory(res.times + initial.t, res.states[:, :split],
                            res.states[:, split:], res.status, res.dt, res.converged)


def bec_population_analytic(t, q, Lambda):
    """Closed-form <N+-(t)> of the single-coupling limit, vacuum start.

    Lambda^2/(q(q-2L)) sin^2(sqrt(q(q-2L)) t) outside 0 < q < 2 Lambda, the
    sinh^2 counterpart inside.  q = 0 and q = 2 Lambda are removable
    singularities and rejected; callers wanting those points can use the
    small-q limit Lambda^2 t^2 instead.
    """
    if q == 0 or q == 2 * Lambda:
        raise ValueError(f"q = {q} is a removable singularity; use the Lambda^2 t^2 limit")
    t = np.asarray(t, dtype=float)
    disc = q * (q - 2 * Lambda)
    if disc > 0:
        w = np.sqrt(disc)
        out = Lambda**2 / disc * np.sin(w * t) ** 2
    else:
        w = np.sqrt(-disc)
        out = -(Lambda**2) / disc * np.sinh(w * t) ** 2
    return out if out.ndim else float(out)
