"""Over-relaxed ADMM over an abstract two-block problem.

Solves ``min f(x) + g(z)  s.t.  A x + B z = c`` with the iteration::

    x+ = argmin_x f(x) + rho/2 ||A x + B z - c + u||^2
    z+ = argmin_z g(z) + rho/2 ||alpha A x+ - (1 - alpha) B z + B z' - alpha c + u||^2
    u+ = u + alpha A x+ - (1 - alpha) B z + B z+ - alpha c

``u`` is the scaled dual variable. Distances to a fixed point are measured
on ``phi = [z, u]``.
"""

import abc
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .rate_theory import UNBOUNDED, AdmmParams, RateCertificate

__all__ = [
    "StructuralError",
    "SolverError",
    "EstimationError",
    "ProblemInstance",
    "IterateState",
    "StoppingRule",
    "TraceRecord",
    "RunTrace",
    "default_init",
    "step",
    "run",
    "estimate_rate",
    "tail_burn_in",
    "fixed_point_of",
    "envelope_holds",
]

RATE_FLOOR = 100 * np.finfo(float).eps


class StructuralError(ValueError):
    """Iterate dimensions do not match the problem."""


class SolverError(RuntimeError):
    """A subproblem solver failed to reach its tolerance."""

    def __init__(self, message, grad_norm=None):
        super().__init__(message)
        self.grad_norm = grad_norm


class EstimationError(RuntimeError):
    """Not enough usable data to estimate a rate or a fixed point."""


class ProblemInstance(abc.ABC):
    """Constraint data plus the two argmin subproblems.

    Subclasses set ``A`` (r x p), ``B`` (r x q) and ``c`` (r,) and must not
    mutate any state inside the update methods, so that one instance can be
    shared by concurrent runs.
    """

    A: np.ndarray
    B: np.ndarray
    c: np.ndarray
    conditioning = None

    @property
    def dims(self):
        r, p = self.A.shape
        return p, self.B.shape[1], r

    @abc.abstractmethod
    def x_update(self, z, u, rho):
        """argmin_x f(x) + rho/2 ||A x + B z - c + u||^2"""

    @abc.abstractmethod
    def z_update(self, x, z_prev, u, rho, alpha):
        """argmin_z g(z) + rho/2 ||alpha A x - (1-alpha) B z_prev + B z - alpha c + u||^2"""

    def fixed_point(self, rho):
        """Exact ``(z*, u*)`` if available analytically, else ``None``."""
        return None


@dataclass
class IterateState:
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    t: int = 0

    @property
    def phi(self):
        return np.concatenate([self.z, self.u])


@dataclass(frozen=True)
class StoppingRule:
    """Stop at the first of: ``max_iters`` reached, primal residual below
    ``residual_tol``, distance to the fixed point below ``distance_tol``.

    A zero tolerance disables that test.
    """

    max_iters: int = 1000
    residual_tol: float = 0.0
    distance_tol: float = 0.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.residual_tol < 0 or self.distance_tol < 0:
            raise ValueError("tolerances must be nonnegative")


@dataclass(frozen=True)
class TraceRecord:
    t: int
    distance: float
    residual: float
    state: Optional[IterateState] = None


@dataclass
class RunTrace:
    params: AdmmParams
    records: list = field(default_factory=list)
    reason: str = ""
    initial_distance: float = float("nan")

    def __len__(self):
        return len(self.records)

    @property
    def t(self):
        return np.array([r.t for r in self.records], dtype=int)

    @property
    def distances(self):
        return np.array([r.distance for r in self.records])

    @property
    def residuals(self):
        return np.array([r.residual for r in self.records])

    @property
    def final(self):
        return self.records[-1] if self.records else None


def default_init(problem):
    """``z0`` = unit-norm all-ones vector, ``u0 = 0``, ``x0 = 0``."""
    p, q, r = problem.dims
    return IterateState(
        x=np.zeros(p), z=np.ones(q) / np.sqrt(q), u=np.zeros(r), t=0
    )


def _check_dims(problem, state):
    p, q, r = problem.dims
    if state.x.shape != (p,) or state.z.shape != (q,) or state.u.shape != (r,):
        raise StructuralError(
            f"state shapes x{state.x.shape} z{state.z.shape} u{state.u.shape} "
            f"do not match problem dims (p, q, r) = {(p, q, r)}"
        )


def step(problem, state, params):
    """One iteration of over-relaxed ADMM; returns a new state."""
    _check_dims(problem, state)
    alpha, rho = params.alpha, params.rho
    A, B, c = problem.A, problem.B, problem.c
    x = np.asarray(problem.x_update(state.z, state.u, rho), dtype=float)
    z = np.asarray(problem.z_update(x, state.z, state.u, rho, alpha), dtype=float)
    u = state.u + alpha * (A @ x) - (1 - alpha) * (B @ state.z) + B @ z - alpha * c
    new = IterateState(x=x, z=z, u=u, t=state.t + 1)
    _check_dims(problem, new)
    return new


def run(problem, params, init=None, stop=None, fixed_point=None, keep_iterates=False):
    """Iterate :func:`step` until the stopping rule fires.

    Parameters
    ----------
    problem : ProblemInstance
    params : AdmmParams
    init : IterateState, optional
        Defaults to :func:`default_init`.
    stop : StoppingRule, optional
    fixed_point : tuple of arrays, optional
        ``(z*, u*)``; when given, ``||phi_t - phi*||`` is recorded. Falls
        back to ``problem.fixed_point(rho)``.
    keep_iterates : bool
        Store a copy of every iterate in the trace.

    Returns
    -------
    RunTrace
    """
    stop = stop or StoppingRule()
    state = init if init is not None else default_init(problem)
    _check_dims(problem, state)
    if fixed_point is None:
        fixed_point = problem.fixed_point(params.rho)
    phi_star = None if fixed_point is None else np.concatenate(fixed_point)

    trace = RunTrace(params=params)
    if phi_star is not None:
        trace.initial_distance = float(np.linalg.norm(state.phi - phi_star))

    A, B, c = problem.A, problem.B, problem.c
    reason = "max_iters"
    for _ in range(stop.max_iters):
        state = step(problem, state, params)
        residual = float(np.linalg.norm(A @ state.x + B @ state.z - c))
        distance = (
            float("nan") if phi_star is None
            else float(np.linalg.norm(state.phi - phi_star))
        )
        trace.records.append(
            TraceRecord(state.t, distance, residual, state if keep_iterates else None)
        )
        if residual < stop.residual_tol:
            reason = "residual_tol"
            break
        if phi_star is not None and distance < stop.distance_tol:
            reason = "distance_tol"
            break
    trace.reason = reason
    return trace


def _usable(trace, burn_in, floor):
    t = trace.t[burn_in:]
    d = trace.distances[burn_in:]
    keep = np.isfinite(d) & (d > floor)
    return t[keep], d[keep]


def estimate_rate(trace, burn_in=0, floor=RATE_FLOOR):
    """Fit a linear rate to the distance sequence of ``trace``.

    Least-squares slope ``s`` of ``log distance`` against ``t`` over the
    records after the first ``burn_in``, ignoring distances at or below
    ``floor``. Returns ``exp(s)``; a value above one signals divergence.
    """
    t, d = _usable(trace, burn_in, floor)
    if t.size < 10:
        raise EstimationError(
            f"only {t.size} usable records after burn-in {burn_in}; need at least 10"
        )
    slope = np.polyfit(t.astype(float), np.log(d), 1)[0]
    return float(np.exp(slope))


def tail_burn_in(trace, fraction=0.5, floor=RATE_FLOOR):
    """Burn-in that discards the leading ``fraction`` of usable records,
    keeping at least ten of them when possible."""
    d = trace.distances
    n_usable = int(np.count_nonzero(np.isfinite(d) & (d > floor)))
    return max(0, min(int(fraction * n_usable), n_usable - 10))


def fixed_point_of(problem, params, tol=1e-12, max_iters=200_000, init=None):
    """Fixed point ``(z*, u*)`` of the iteration at ``params``.

    Uses the problem's analytic fixed point when it has one; otherwise runs
    ADMM until successive ``phi`` iterates differ by less than ``tol``. The
    fixed point does not depend on ``alpha``.
    """
    exact = problem.fixed_point(params.rho)
    if exact is not None:
        return exact
    state = init if init is not None else default_init(problem)
    for _ in range(max_iters):
        new = step(problem, state, params)
        gap = np.linalg.norm(new.phi - state.phi)
        state = new
        if gap < tol:
            return state.z.copy(), state.u.copy()
    raise EstimationError(
        f"no fixed point within {max_iters} iterations (last step {gap:.3e})"
    )


def envelope_holds(trace, cert: RateCertificate, rtol=1e-9):
    """Pointwise check of ``||phi_t - phi*|| <= C tau^t ||phi_0 - phi*||``.

    The envelope is taken relative to the initial distance. Returns a
    boolean array, all ``True`` when the constant is unbounded.
    """
    d = trace.distances
    if cert.constant is UNBOUNDED:
        return np.ones(d.shape, dtype=bool)
    env = cert.constant * cert.tau ** trace.t * trace.initial_distance
    return d <= env * (1 + rtol) + RATE_FLOOR
