"""Closed-form convergence-rate theory for over-relaxed ADMM.

Everything here is a pure function of scalar inputs. The central quantities
are the linear rate ``tau_a`` and the constant-controlling quantity ``eta``;
both depend on the problem only through the normalized penalty ``rho0`` and
the combined condition number ``kappa = (L/m) * (sigma_max/sigma_min)**2``.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "UNBOUNDED",
    "ConditioningInfo",
    "NormalizedConstants",
    "AdmmParams",
    "RateCertificate",
    "ComparisonRates",
    "chi",
    "normalize",
    "tau_a",
    "eta",
    "certificate",
    "bound_at",
    "optimal_rho",
    "optimal_params",
    "inf_rate",
    "best_alpha",
    "comparison_rates",
]


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is valid."""


class _Unbounded:
    """Marker for a bound constant that degenerates to infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNBOUNDED"

    def __str__(self):
        return "unbounded"

    def __reduce__(self):
        return (_Unbounded, ())


UNBOUNDED = _Unbounded()


@dataclass(frozen=True)
class ConditioningInfo:
    """Curvature bounds of ``f`` and extreme singular values of ``A``."""

    m: float
    L: float
    sigma_max: float = 1.0
    sigma_min: float = 1.0

    def __post_init__(self):
        if not (0 < self.m <= self.L < math.inf):
            raise DomainError(f"need 0 < m <= L < inf, got m={self.m}, L={self.L}")
        if not (0 < self.sigma_min <= self.sigma_max < math.inf):
            raise DomainError(
                "need 0 < sigma_min <= sigma_max, got "
                f"sigma_min={self.sigma_min}, sigma_max={self.sigma_max}"
            )

    @property
    def kappa_f(self) -> float:
        return self.L / self.m

    @property
    def kappa_A(self) -> float:
        return self.sigma_max / self.sigma_min

    @property
    def kappa(self) -> float:
        return self.kappa_f * self.kappa_A**2


@dataclass(frozen=True)
class NormalizedConstants:
    rho0: float
    kappa: float


@dataclass(frozen=True)
class AdmmParams:
    """One member ``(alpha, rho)`` of the over-relaxed ADMM family."""

    alpha: float
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")


@dataclass(frozen=True)
class RateCertificate:
    """Rate ``tau``, ``eta`` and the multiplicative constant of the bound.

    ``constant`` is either a finite float or :data:`UNBOUNDED` (when
    ``eta == 0``).
    """

    tau: float
    eta: float
    constant: object

    @property
    def bounded(self) -> bool:
        return self.constant is not UNBOUNDED


@dataclass(frozen=True)
class ComparisonRates:
    """Reference rates from neighbouring analyses.

    ``wei_rate`` is only an approximation and is meaningful for
    ``alpha = 1, rho0 = 1`` only (see ``wei_rate_note``).
    """

    dr_rate: float
    wei_rate: float
    first_order_lower: float
    wei_rate_note: str = "approximate, valid for alpha=1, rho0=1 only"


def chi(x):
    """Return ``max(x, 1/x)`` for ``x > 0``; works elementwise on arrays."""
    if not np.all(np.asarray(x) > 0):
        raise DomainError(f"chi requires x > 0, got {x}")
    if np.ndim(x) == 0:
        return max(x, 1.0 / x)
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 1.0 / x)


def normalize(cond: ConditioningInfo, rho: float) -> NormalizedConstants:
    """Normalized penalty ``rho0`` and combined condition number ``kappa``.

    ``rho0 = rho / sqrt(m_hat * L_hat)`` with ``m_hat = m / sigma_max**2``
    and ``L_hat = L / sigma_min**2``.
    """
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    m_hat = cond.m / cond.sigma_max**2
    L_hat = cond.L / cond.sigma_min**2
    return NormalizedConstants(rho0=rho / math.sqrt(m_hat * L_hat), kappa=cond.kappa)


def _check(alpha, rho0, kappa):
    alpha = np.asarray(alpha)
    if not np.all((alpha > 0) & (alpha < 2)):
        raise DomainError(f"rate formulas require 0 < alpha < 2, got alpha={alpha}")
    if not np.all(np.asarray(rho0) > 0):
        raise DomainError(f"rho0 must be positive, got {rho0}")
    if not np.all(np.asarray(kappa) >= 1):
        raise DomainError(f"kappa must be >= 1, got {kappa}")


def tau_a(alpha, rho0, kappa):
    """Linear convergence rate ``1 - alpha / (1 + chi(rho0) sqrt(kappa))``.

    Broadcasts over array arguments.
    """
    _check(alpha, rho0, kappa)
    return 1.0 - alpha / (1.0 + chi(rho0) * np.sqrt(kappa))


def eta(alpha, rho0, kappa):
    _check(alpha, rho0, kappa)
    s = chi(rho0) * np.sqrt(kappa)
    return alpha / (2.0 - alpha) * (s - 1.0) / (s + 1.0)


def certificate(alpha: float, rho0: float, kappa: float, kappa_b: float = 1.0) -> RateCertificate:
    """Bundle rate, ``eta`` and the constant ``kappa_b * sqrt(chi(eta))``.

    When ``eta`` is exactly zero the constant is :data:`UNBOUNDED`.
    """
    if not kappa_b >= 1:
        raise DomainError(f"kappa_b must be >= 1, got {kappa_b}")
    tau = tau_a(alpha, rho0, kappa)
    e = eta(alpha, rho0, kappa)
    constant = UNBOUNDED if e == 0 else kappa_b * math.sqrt(chi(e))
    return RateCertificate(tau=tau, eta=e, constant=constant)


def bound_at(cert: RateCertificate, t: int):
    """Envelope ``constant * tau**t``; propagates :data:`UNBOUNDED`."""
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    if cert.constant is UNBOUNDED:
        return UNBOUNDED
    return cert.constant * cert.tau**t


def optimal_rho(cond: ConditioningInfo) -> float:
    """Penalty ``sqrt(m L) / (sigma_max sigma_min)``, which makes ``rho0 == 1``."""
    return math.sqrt(cond.m * cond.L) / (cond.sigma_max * cond.sigma_min)


def optimal_params(cond: ConditioningInfo, alpha_margin: float = 1e-2, kappa_b: float = 1.0):
    """Asymptotically optimal ``(alpha, rho)`` and its certificate.

    The infimum over ``alpha`` sits on the open boundary ``alpha -> 2``, so the
    caller picks how close to get: ``alpha = 2 - alpha_margin``. The bound
    constant grows without limit as the margin shrinks.

    Returns
    -------
    params : AdmmParams
    cert : RateCertificate
    """
    if not (0 < alpha_margin < 1):
        raise DomainError(f"alpha_margin must lie in (0, 1), got {alpha_margin}")
    params = AdmmParams(alpha=2.0 - alpha_margin, rho=optimal_rho(cond))
    nc = normalize(cond, params.rho)
    return params, certificate(params.alpha, nc.rho0, nc.kappa, kappa_b)


def inf_rate(kappa: float) -> float:
    """Best achievable rate ``1 - 2 / (1 + sqrt(kappa))``."""
    if not kappa >= 1:
        raise DomainError(f"kappa must be >= 1, got {kappa}")
    return 1.0 - 2.0 / (1.0 + math.sqrt(kappa))


def best_alpha(rho0: float, kappa: float, t: int) -> float:
    """Relaxation parameter minimizing the rate envelope at iteration ``t``.

    ``kappa_b`` scales the envelope uniformly and does not move the argmin.
    """
    if t < 1:
        raise DomainError(f"t must be a positive integer, got {t}")
    if not kappa >= 1:
        raise DomainError(f"kappa must be >= 1, got {kappa}")
    s = chi(rho0) * math.sqrt(kappa)
    if t <= s:
        return 1.0 + 1.0 / s
    return 1.0 + (1.0 + math.sqrt(1.0 + 4.0 * t * t - 4.0 * t * s)) / (2.0 * t)


def comparison_rates(alpha: float, kappa_f: float, kappa: float) -> ComparisonRates:
    """Douglas-Rachford rate, the approximate alpha=1 rate, and the
    first-order lower bound, all for the given condition numbers.

    The lower bound uses ``kappa >= 1`` (i.e. ``L/m``-style), not its
    reciprocal.
    """
    if not kappa_f >= 1 or not kappa >= 1:
        raise DomainError(f"condition numbers must be >= 1, got {kappa_f}, {kappa}")
    return ComparisonRates(
        dr_rate=1.0 - alpha / (1.0 + math.sqrt(kappa_f)),
        wei_rate=1.0 - 1.0 / math.sqrt(kappa),
        first_order_lower=1.0 - 2.0 / (1.0 + math.sqrt(kappa)),
    )
