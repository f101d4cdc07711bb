"""Model parameters, derived coupling constants, and the +/- exchange symmetry.

All rates (omega, omega0, q, lambda_plus, lambda_minus, kappa) are dimensionless
multiples of one reference rate chosen by the caller; times are in inverse
reference-rate units.  Every function here is pure and every record immutable,
so everything is safe to share between threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

__all__ = [
    "ModelParams",
    "DerivedCouplings",
    "DegenerateModelError",
    "derive_couplings",
    "apply_symmetry_T",
    "critical_kappa",
    "dispersive_adiabatic_params",
]


class DegenerateModelError(ValueError):
    """Raised when a parameter combination makes a derived quantity undefined."""


@dataclass(frozen=True)
class ModelParams:
    """The six physical rates of the model.

    omega        : cavity frequency (> 0 whenever cavity-eliminated quantities
                   are derived, since Lambda/Gamma/Delta divide by omega)
    omega0       : atomic splitting of the m = +/-1 sublevels (may be negative)
    q            : quadratic Zeeman shift (may be negative)
    lambda_plus  : counter-rotating coupling strength, >= 0
    lambda_minus : co-rotating coupling strength, >= 0
    kappa        : cavity field decay rate, >= 0
    """

    omega: float
    omega0: float
    q: float
    lambda_plus: float
    lambda_minus: float
    kappa: float

    def __post_init__(self):
        for name in ("omega", "omega0", "q", "lambda_plus", "lambda_minus", "kappa"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.lambda_plus < 0 or self.lambda_minus < 0:
            raise ValueError("couplings lambda_plus/lambda_minus are magnitudes, must be >= 0")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")

    @classmethod
    def from_deltas(cls, delta_plus, delta_minus, *, omega=1.0, omega0=0.0, q=0.0, kappa=0.0):
        """Construct params realizing given Delta+- = (lambda_+ +/- lambda_-)^2 / (4 omega).

        Requires delta_plus >= delta_minus >= 0 (always true for nonnegative
        couplings); the branch with lambda_plus >= lambda_minus is returned.
        """
        if omega <= 0:
            raise DegenerateModelError("from_deltas needs omega > 0")
        if delta_minus < 0 or delta_plus < delta_minus:
            raise ValueError("need delta_plus >= delta_minus >= 0")
        s = math.sqrt(omega * delta_plus)
        d = math.sqrt(omega * delta_minus)
        return cls(omega, omega0, q, s + d, s - d, kappa)

    @classmethod
    def from_effective_couplings(cls, Lambda_plus, Lambda_minus, *, kappa=0.0,
                                 omega=1.0, omega0=0.0, q=0.0):
        """Construct params realizing given Lambda+- = omega lambda+-^2 / (kappa^2 + omega^2)."""
        if omega <= 0:
            raise DegenerateModelError("from_effective_couplings needs omega > 0")
        if Lambda_plus < 0 or Lambda_minus < 0:
            raise ValueError("Lambda_plus/Lambda_minus must be >= 0")
        scale = (kappa**2 + omega**2) / omega
        return cls(omega, omega0, q, math.sqrt(Lambda_plus * scale),
                   math.sqrt(Lambda_minus * scale), kappa)


@dataclass(frozen=True)
class DerivedCouplings:
    """Constants derived from ModelParams.

    delta_plus/minus   : (lambda_+ +/- lambda_-)^2 / (4 omega)
    Lambda_plus/minus  : omega lambda_+-^2 / (kappa^2 + omega^2)
    Gamma_plus/minus   : kappa lambda_+-^2 / (kappa^2 + omega^2)
    K                  : sqrt(1 - (kappa^2/omega^2 + 1) ((L+ - L-)/(L+ + L-))^2),
                         stored as a complex scalar; NaN when both couplings vanish.
    """

    delta_plus: float
    delta_minus: float
    Lambda_plus: float
    Lambda_minus: float
    Gamma_plus: float
    Gamma_minus: float
    K: complex


def derive_couplings(params: ModelParams) -> DerivedCouplings:
    """Compute all derived constants for one parameter point.

    Raises DegenerateModelError when omega = 0 (every constant divides by it).
    K is flagged undefined (complex NaN) when lambda_plus = lambda_minus = 0.
    """
    if params.omega == 0:
        raise DegenerateModelError("derived couplings are undefined at omega = 0")
    w, k = params.omega, params.kappa
    lp, lm = params.lambda_plus, params.lambda_minus
    dp = (lp + lm) ** 2 / (4 * w)
    dm = (lp - lm) ** 2 / (4 * w)
    denom = k**2 + w**2
    Lp = w * lp**2 / denom
    Lm = w * lm**2 / denom
    Gp = k * lp**2 / denom
    Gm = k * lm**2 / denom
    if Lp + Lm > 0:
        ratio = (Lp - Lm) / (Lp + Lm)
        K = cmath.sqrt(1 - (k**2 / w**2 + 1) * ratio**2)
    else:
        K = complex("nan")
    return DerivedCouplings(dp, dm, Lp, Lm, Gp, Gm, K)


def apply_symmetry_T(params: ModelParams) -> ModelParams:
    """Exchange symmetry: negate omega0 and swap the two couplings.

    An involution; omega, q, and kappa are untouched.  State-side, it swaps the
    roles of the m = +1 and m = -1 sublevels.
    """
    return replace(
        params,
        omega0=-params.omega0,
        lambda_plus=params.lambda_minus,
        lambda_minus=params.lambda_plus,
    )


def critical_kappa(params: ModelParams) -> float:
    """Decay rate above which K (and the open determinant roots) turn complex.

    kappa_c / omega = 2 sqrt(L+ L-) / |L+ - L-|, which reduces to
    2 lambda_+ lambda_- / |lambda_+^2 - lambda_-^2| independent of kappa.
    Returns +inf for balanced coupling (the crossover never happens).
    """
    if params.omega <= 0:
        raise DegenerateModelError("critical_kappa needs omega > 0")
    lp, lm = params.lambda_plus, params.lambda_minus
    if lp == 0 and lm == 0:
        raise DegenerateModelError("critical_kappa undefined with both couplings zero")
    if lp == lm:
        return math.inf
    return params.omega * 2 * lp * lm / abs(lp**2 - lm**2)


def dispersive_adiabatic_params(params: ModelParams) -> ModelParams:
    """Parameters for the cavity-eliminated model that track a given full model.

    Eliminating the cavity amplitude from the full semiclassical equations (as
    implemented, with their factor-2 coupling convention and unit total
    population) yields atom-only equations whose effective couplings are
    Lambda+- = 4 omega lambda+-^2 / (kappa^2 + omega^2), i.e. the couplings of
    `params` doubled.  Use the returned params when comparing the two systems.
    """
    return replace(
        params,
        lambda_plus=2 * params.lambda_plus,
        lambda_minus=2 * params.lambda_minus,
    )
