"""Linearized systems, their eigenvalues, and divergence boundaries.

Three first-order linear systems are covered: the 2x2 single-coupling limit,
the 4x4 closed system (no cavity decay), and the 4x4 open system.  Eigenvalues
decide stability: any real part beyond the zero tolerance means exponential
divergence of the linearized operator moments.
"""

from __future__ import annotations

import cmath
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import DerivedCouplings, ModelParams, derive_couplings

__all__ = [
    "EigenReport",
    "BoundarySet",
    "OpenDeterminantRoots",
    "LandscapeGrid",
    "EigensolverError",
    "OSCILLATORY",
    "DIVERGENT",
    "bec_matrix",
    "bec_eigenvalues",
    "closed_matrix",
    "closed_eigenvalues_analytic",
    "closed_determinant",
    "closed_boundaries",
    "open_matrix",
    "open_determinant_roots",
    "eigenvalues_numeric",
    "landscape_sweep",
]

OSCILLATORY = "oscillatory"
DIVERGENT = "divergent"

# Divergent iff some eigenvalue has Re(a) > ZERO_TOL * (1 + |a|); boundary points
# are exact zeros analytically and numerical noise must not flip their label.
ZERO_TOL = 1e-9

# Residual bound accepted from the numeric eigensolver, relative to ||M||.
RESIDUAL_TOL = 1e-9


class EigensolverError(RuntimeError):
    """Numeric eigensolver failed to converge or exceeded its residual bound."""


@dataclass(frozen=True)
class EigenReport:
    """Eigenvalues of one linearized system plus the stability verdict."""

    eigenvalues: np.ndarray
    max_re: float
    label: str


@dataclass(frozen=True)
class BoundarySet:
    """Divergence-region boundary roots of the closed system, in q.

    determinant_roots holds the four roots of the determinant,
    nested_sqrt_roots those of the nested square root; both sorted ascending
    with multiplicity.
    """

    determinant_roots: tuple
    nested_sqrt_roots: tuple

    @property
    def all_roots(self):
        return tuple(sorted(self.determinant_roots + self.nested_sqrt_roots))


@dataclass(frozen=True)
class OpenDeterminantRoots:
    """The four determinant roots of the open system; complex above critical kappa."""

    roots: tuple
    all_real: bool


def _classify(eigenvalues):
    eigenvalues = np.asarray(eigenvalues)
    max_re = float(eigenvalues.real.max())
    divergent = bool(np.any(eigenvalues.real > ZERO_TOL * (1 + np.abs(eigenvalues))))
    return max_re, (DIVERGENT if divergent else OSCILLATORY)


def _report(eigenvalues) -> EigenReport:
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    max_re, label = _classify(eigenvalues)
    return EigenReport(eigenvalues, max_re, label)


# ---------------------------------------------------------------------------
# single-coupling 2x2 limit

def bec_matrix(omega0, q, Lambda) -> np.ndarray:
    """i * [[omega0, q], [q - 2 Lambda, omega0]] acting on (A, B)."""
    return 1j * np.array([[omega0, q], [q - 2 * Lambda, omega0]], dtype=complex)


def bec_eigenvalues(omega0, q, Lambda):
    """(alpha_minus, alpha_plus) = i omega0 -/+ i sqrt(q (q - 2 Lambda)).

    For 0 < q < 2 Lambda exactly one of the pair picks up a positive real part.
    """
    root = 1j * cmath.sqrt(q * (q - 2 * Lambda))
    return 1j * omega0 - root, 1j * omega0 + root


# ---------------------------------------------------------------------------
# closed 4x4 system

def closed_matrix(params: ModelParams) -> np.ndarray:
    """Generator of the closed (A, A+, B, B+) system, i times a real matrix."""
    d = derive_couplings(params)
    w0, q = params.omega0, params.q
    s = d.delta_plus + d.delta_minus
    dd = d.delta_plus - d.delta_minus
    return 1j * np.array(
        [
            [w0, 0, q, 0],
            [0, -w0, 0, -q],
            [q - 4 * s, -4 * dd, w0, 0],
            [4 * dd, -q + 4 * s, 0, -w0],
        ],
        dtype=complex,
    )


def _closed_eig_arrays(omega0, q, delta_plus, delta_minus):
    """Vectorized closed-system eigenvalues; inputs broadcast, output (..., 4).

    Order: [alpha_minus, -alpha_minus, alpha_plus, -alpha_plus], where
    alpha_-/+ carry the positive outer sign and the -/+ inner sign.
    """
    omega0, q = np.asarray(omega0, float), np.asarray(q, float)
    s = delta_plus + delta_minus
    dd = delta_plus - delta_minus
    inner = q * (4 * dd**2 * q + omega0**2 * (q - 4 * s))
    outer = omega0**2 + q * (q - 4 * s)
    root = np.sqrt(inner.astype(complex))
    a_minus = 1j * np.sqrt(outer - 2 * root)
    a_plus = 1j * np.sqrt(outer + 2 * root)
    return np.stack([a_minus, -a_minus, a_plus, -a_plus], axis=-1)


def closed_eigenvalues_analytic(params: ModelParams) -> EigenReport:
    """All four closed-system eigenvalues from the closed-form expression.

    The spectrum is closed under negation, so a nonzero real part anywhere
    implies divergence.  Principal complex square roots are used and all four
    sign combinations emitted, so no branch choice can drop an eigenvalue.
    """
    d = derive_couplings(params)
    eig = _closed_eig_arrays(params.omega0, params.q, d.delta_plus, d.delta_minus)
    return _report(eig)


def closed_determinant(params: ModelParams) -> float:
    """det of closed_matrix: [w0^2 - q(q - 8 D-)] [w0^2 - q(q - 8 D+)]."""
    d = derive_couplings(params)
    w0sq, q = params.omega0**2, params.q
    return (w0sq - q * (q - 8 * d.delta_minus)) * (w0sq - q * (q - 8 * d.delta_plus))


def closed_boundaries(delta_plus, delta_minus, omega0) -> BoundarySet:
    """Boundary q values of the closed system's divergence regions.

    Determinant roots: q = 4 D+- +/- sqrt(16 D+-^2 + omega0^2).  Nested-root
    boundaries: q = 0 and q = 4 (D+ + D-) omega0^2 / (omega0^2 + 4 (D+ - D-)^2);
    the second is dropped when its 0/0 limit is hit (omega0 = 0, D+ = D-).
    """
    det_roots = []
    for d in (delta_plus, delta_minus):
        r = np.sqrt(16 * d**2 + omega0**2)
        det_roots += [4 * d + r, 4 * d - r]
    denom = omega0**2 + 4 * (delta_plus - delta_minus) ** 2
    nested = [0.0]
    if denom != 0:
        nested.append(4 * (delta_plus + delta_minus) * omega0**2 / denom)
    return BoundarySet(tuple(sorted(det_roots)), tuple(sorted(nested)))


# ---------------------------------------------------------------------------
# open 4x4 system

def open_matrix(params: ModelParams) -> np.ndarray:
    """Generator of the first-order open-system moments (<A>, <A+>, <B>, <B+>).

    Dissipation enters only through Gamma_+ - Gamma_-, so balanced coupling
    cancels every real (dissipative) entry.  At kappa = 0 this equals
    closed_matrix exactly.
    """
    d = derive_couplings(params)
    return _open_matrix_from_derived(params.omega0, params.q, d)


def _open_matrix_from_derived(omega0, q, d: DerivedCouplings) -> np.ndarray:
    L = d.Lambda_plus + d.Lambda_minus
    G = d.Gamma_plus - d.Gamma_minus
    R = np.sqrt(d.Lambda_plus * d.Lambda_minus)
    return np.array(
        [
            [1j * omega0, 0, 1j * q, 0],
            [0, -1j * omega0, 0, -1j * q],
            [1j * q + 2 * (G - 1j * L), -4j * R, 1j * omega0, 0],
            [4j * R, -1j * q + 2 * (G + 1j * L), 0, -1j * omega0],
        ],
        dtype=complex,
    )


def open_determinant_roots(params: ModelParams) -> OpenDeterminantRoots:
    """The four q roots of the open determinant.

    q = (L+ + L-)(1 +/- K) +/- sqrt((L+ + L-)^2 (1 +/- K)^2 + omega0^2).
    Real while kappa stays below critical_kappa; complex beyond it, which is
    where the divergence boundaries disappear from the landscape.
    """
    d = derive_couplings(params)
    Ls = d.Lambda_plus + d.Lambda_minus
    w0 = params.omega0
    if Ls == 0:
        roots = (complex(abs(w0)), complex(-abs(w0))) * 2
        return OpenDeterminantRoots(roots, True)
    roots = []
    for sign in (+1, -1):
        a = Ls * (1 + sign * d.K)
        r = cmath.sqrt(a * a + w0**2)
        roots += [a + r, a - r]
    return OpenDeterminantRoots(tuple(roots), d.K.imag == 0.0)


# ---------------------------------------------------------------------------
# numeric eigensolver

def eigenvalues_numeric(matrix) -> EigenReport:
    """Eigenvalues of a small dense complex matrix, with a residual audit.

    Each eigenpair must satisfy ||M v - a v|| <= 1e-9 ||M||; a breach or a
    LAPACK non-convergence raises EigensolverError.
    """
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
        raise ValueError(f"expected a 2x2 or 4x4 matrix, got shape {m.shape}")
    try:
        vals, vecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge: {exc}") from exc
    norm = np.linalg.norm(m, 2)
    resid = np.linalg.norm(m @ vecs - vecs * vals, axis=0)
    if np.any(resid > RESIDUAL_TOL * max(norm, 1e-300)):
        raise EigensolverError(
            f"eigenpair residual {resid.max():.3e} exceeds {RESIDUAL_TOL:.0e} * ||M||"
        )
    return _report(vals)


# ---------------------------------------------------------------------------
# (q, omega0) landscapes

@dataclass(frozen=True)
class LandscapeGrid:
    """Per-cell eigenvalue reports over a (q, omega0) grid, row-major in q."""

    model_kind: str
    q_axis: np.ndarray
    omega0_axis: np.ndarray
    eigenvalues: np.ndarray          # (nq, nw, dim) complex
    max_re: np.ndarray               # (nq, nw) float
    failed: np.ndarray               # (nq, nw) bool
    boundaries: BoundarySet | OpenDeterminantRoots | None = field(default=None)

    def report(self, i, j) -> EigenReport:
        return _report(self.eigenvalues[i, j])

    def label(self, i, j) -> str:
        if self.failed[i, j]:
            return "failed"
        return _classify(self.eigenvalues[i, j])[1]


def _bec_lambda(params: ModelParams) -> float:
    d = derive_couplings(params)
    if params.lambda_plus == 0:
        return d.Lambda_minus
    if params.lambda_minus == 0:
        return d.Lambda_plus
    raise ValueError("the 2x2 model needs a single nonzero coupling")


def _worker_count(workers):
    if workers is not None:
        return max(1, int(workers))
    return max(1, os.cpu_count() or 1)


def landscape_sweep(model_kind, params_template: ModelParams, q_axis, omega0_axis,
                    *, workers=None) -> LandscapeGrid:
    """Eigenvalue landscape over a (q, omega0) grid for one model kind.

    model_kind is "bec", "closed", or "open"; q and omega0 of the template are
    overridden cell by cell.  Cells are independent; chunks of the q axis may
    be evaluated on several threads, writing to pre-assigned slots so output
    is deterministic regardless of scheduling.  A failing cell is flagged in
    `failed` (its eigenvalues become NaN) and never aborts the sweep.
    """
    q_axis = np.asarray(q_axis, dtype=float)
    omega0_axis = np.asarray(omega0_axis, dtype=float)
    if q_axis.size == 0 or omega0_axis.size == 0:
        raise ValueError("axes must be nonempty")
    if not (np.all(np.isfinite(q_axis)) and np.all(np.isfinite(omega0_axis))):
        raise ValueError("axes must be finite")
    nq, nw = q_axis.size, omega0_axis.size
    dim = 2 if model_kind == "bec" else 4
    eig = np.full((nq, nw, dim), np.nan, dtype=complex)
    failed = np.zeros((nq, nw), dtype=bool)

    d = derive_couplings(params_template)
    Q = q_axis[:, None]
    W0 = omega0_axis[None, :]
    boundaries = None

    if model_kind == "bec":
        Lam = _bec_lambda(params_template)
        root = 1j * np.sqrt((Q * (Q - 2 * Lam)).astype(complex))
        eig[:, :, 0] = 1j * W0 - root
        eig[:, :, 1] = 1j * W0 + root
    elif model_kind == "closed":
        eig[:] = _closed_eig_arrays(W0 * np.ones_like(Q), Q * np.ones_like(W0),
                                    d.delta_plus, d.delta_minus)
        boundaries = closed_boundaries(d.delta_plus, d.delta_minus,
                                       params_template.omega0)
    elif model_kind == "open":
        boundaries = open_determinant_roots(params_template)

        def solve_rows(lo, hi):
            for i in range(lo, hi):
                for j in range(nw):
                    m = _open_matrix_from_derived(omega0_axis[j], q_axis[i], d)
                    try:
                        eig[i, j] = np.linalg.eigvals(m)
                    except np.linalg.LinAlgError:
                        failed[i, j] = True

        nworkers = min(_worker_count(workers), nq)
        if nworkers <= 1:
            solve_rows(0, nq)
        else:
            bounds = np.linspace(0, nq, nworkers + 1).astype(int)
            with ThreadPoolExecutor(max_workers=nworkers) as pool:
                futs = [pool.submit(solve_rows, lo, hi)
                        for lo, hi in zip(bounds[:-1], bounds[1:])]
                for f in futs:
                    f.result()
    else:
        raise ValueError(f"unknown model kind {model_kind!r}")

    failed |= ~np.all(np.isfinite(eig.view(float).reshape(nq, nw, -1)), axis=-1)
    with np.errstate(invalid="ignore"):
        max_re = eig.real.max(axis=-1)
    return LandscapeGrid(model_kind, q_axis, omega0_axis, eig, max_re, failed, boundaries)
