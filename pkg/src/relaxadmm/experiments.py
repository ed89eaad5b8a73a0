"""Parameter tuning, rate sweeps, the classification sweep and certification.

These are the library entry points behind the command-line front end; each
returns plain records so they can be scripted directly.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rate_theory as rt
from .engine import (
    EstimationError,
    StoppingRule,
    default_init,
    estimate_rate,
    fixed_point_of,
    run,
    tail_burn_in,
)
from .problems import (
    LogisticL1Instance,
    estimate_kappa_f,
    generate_classification_data,
    make_attainability_instance,
    make_random_quadratic,
)

__all__ = [
    "CERTIFY_TOL",
    "SweepConfig",
    "SweepRecord",
    "CertifyResult",
    "simulate_rate",
    "tune",
    "rate_sweep",
    "classify_sweep",
    "certify",
]

CERTIFY_TOL = 1e-3
RATE_PROBLEMS = ("attainability", "random-quadratic")


def simulate_rate(problem, params, max_iters=20_000, rel_tol=1e-12):
    """Run ADMM from the default start and fit the asymptotic rate.

    The run stops once the distance to the fixed point has shrunk by
    ``rel_tol``; the leading half of the usable records is discarded before
    the fit.

    Returns
    -------
    rate : float
    trace : RunTrace
    """
    fp = fixed_point_of(problem, params)
    d0 = float(np.linalg.norm(default_init(problem).phi - np.concatenate(fp)))
    stop = StoppingRule(max_iters=max_iters, distance_tol=rel_tol * d0)
    trace = run(problem, params, stop=stop, fixed_point=fp)
    return estimate_rate(trace, tail_burn_in(trace)), trace


def tune(m, L, sigma_max=1.0, sigma_min=1.0, t=None, alpha_margin=1e-2):
    """Optimal parameters for the given conditioning, as a flat record."""
    cond = rt.ConditioningInfo(m, L, sigma_max, sigma_min)
    params, cert = rt.optimal_params(cond, alpha_margin)
    rec = {
        "m": m, "L": L, "sigma_max": sigma_max, "sigma_min": sigma_min,
        "kappa": cond.kappa,
        "rho": params.rho,
        "alpha": params.alpha,
        "inf_rate": rt.inf_rate(cond.kappa),
        "tau": cert.tau,
        "bound_constant": cert.constant,
        "t": None, "alpha_t": None, "tau_t": None, "bound_t": None,
    }
    if t is not None:
        alpha_t = rt.best_alpha(1.0, cond.kappa, t)
        if alpha_t < 2:
            cert_t = rt.certificate(alpha_t, 1.0, cond.kappa)
            rec.update(t=t, alpha_t=alpha_t, tau_t=cert_t.tau, bound_t=rt.bound_at(cert_t, t))
        else:
            rec.update(t=t, alpha_t=alpha_t)
    return rec


@dataclass
class SweepConfig:
    problem: str = "attainability"
    alphas: list = field(default_factory=lambda: [0.5, 1.0, 1.5, 1.9])
    rho0s: list = field(default_factory=lambda: [0.5, 1.0, 2.0])
    kappas: list = field(default_factory=lambda: list(np.logspace(0, 3, 7)))
    iters: int = 20_000
    seeds: list = field(default_factory=lambda: [0])
    simulate: bool = False
    p: int = 6

    def validate(self):
        if self.problem not in RATE_PROBLEMS:
            raise ValueError(
                f"rate sweeps support {RATE_PROBLEMS}, got {self.problem!r} "
                "(the logistic problem has its own classification sweep)"
            )
        for name in ("alphas", "rho0s", "kappas", "seeds"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"grid {name!r} is empty")
        for a in self.alphas:
            if not 0 < a < 2:
                raise ValueError(
                    f"alpha={a} is outside (0, 2), where the rate formula holds"
                )
        if any(r <= 0 for r in self.rho0s):
            raise ValueError("rho0 values must be positive")
        if any(k < 1 for k in self.kappas):
            raise ValueError("kappa values must be >= 1")
        if self.iters < 1 or self.p < 2:
            raise ValueError("iters must be >= 1 and p >= 2")


@dataclass
class SweepRecord:
    problem: str
    alpha: float
    rho0: float
    kappa: float
    tau_theory: float
    tau_empirical: Optional[float]
    bound_constant: object
    wall_time: float = 0.0

    def sort_key(self):
        return (self.alpha, self.rho0, self.kappa, self.problem)


def _sweep_point(cfg, alpha, rho0, kappa, seed):
    t0 = time.perf_counter()
    cert = rt.certificate(alpha, rho0, kappa)
    emp = None
    if cfg.problem == "attainability":
        pid = "attainability"
    else:
        pid = f"random-quadratic/seed={seed}"
    if cfg.simulate:
        if cfg.problem == "attainability":
            prob = make_attainability_instance(1.0, kappa)
        else:
            prob = make_random_quadratic(cfg.p, seed, 1.0, kappa, 1.0)
        cond = prob.conditioning
        rho = rho0 * math.sqrt(cond.m * cond.L) / (cond.sigma_max * cond.sigma_min)
        try:
            emp, _ = simulate_rate(prob, rt.AdmmParams(alpha, rho), cfg.iters)
        except EstimationError:
            emp = float("nan")
    return SweepRecord(pid, alpha, rho0, kappa, cert.tau, emp, cert.constant,
                       time.perf_counter() - t0)


def rate_sweep(cfg, jobs=1):
    """Theoretical (and optionally simulated) rates over the grid.

    Rows come back sorted by ``(alpha, rho0, kappa)`` whatever order the
    grid points finish in.
    """
    cfg.validate()
    seeds = cfg.seeds if cfg.problem == "random-quadratic" else cfg.seeds[:1]
    points = [(a, r, k, s) for a in cfg.alphas for r in cfg.rho0s
              for k in cfg.kappas for s in seeds]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            rows = list(ex.map(lambda pt: _sweep_point(cfg, *pt), points))
    else:
        rows = [_sweep_point(cfg, *pt) for pt in points]
    return sorted(rows, key=SweepRecord.sort_key)


def classify_sweep(N=400, d=20, sigma=1.0, lam=1.0, rho=None,
                   alphas=(1.0, 1.2, 1.4, 1.6, 1.8), iters=5000, seed=0,
                   dist_tol=1e-10):
    """Fitted ADMM rates on the sparse logistic-regression problem.

    The dataset is generated once and a reference fixed point is computed by
    a long run (tolerance 1e-12 on successive iterates). Each alpha is then
    run from the default start until the distance to the reference drops
    below ``dist_tol`` or ``iters`` is reached, and the tail is fitted.

    ``rho`` defaults to ``sqrt(m_est L_est)`` from :func:`estimate_kappa_f`.

    Returns
    -------
    rows : list of dict
        ``alpha``, ``tau``, ``log_tau``, ``iterations``, sorted by alpha.
    meta : dict
        Curvature estimates, the rate-formula recommendation and reference
        solution statistics.
    """
    data = generate_classification_data(N, d, sigma, seed)
    m_est, L_est, kf = estimate_kappa_f(data)
    _, _, kf_sech = estimate_kappa_f(data, curvature="sech")
    if rho is None:
        rho = math.sqrt(m_est * L_est)
    prob = LogisticL1Instance.from_dataset(data, lam)
    prob.conditioning = rt.ConditioningInfo(m_est, L_est)

    fp = fixed_point_of(prob, rt.AdmmParams(1.0, rho))
    theta = fp[0]
    rho0 = rt.normalize(prob.conditioning, rho).rho0
    meta = {
        "N": N, "d": d, "sigma": sigma, "lambda": lam, "seed": seed, "rho": rho,
        "rho0": rho0,
        "m_est": m_est, "L_est": L_est, "kappa_f_est": kf,
        "kappa_f_est_sech": kf_sech,
        "best_alpha_formula": rt.best_alpha(rho0, kf, iters),
        "best_alpha_formula_t1": rt.best_alpha(rho0, kf, 1),
        "best_alpha_large_kappa_limit": 1.0,
        "theta_l1": float(np.abs(theta).sum()),
        "theta_nnz": int(np.count_nonzero(np.abs(theta) > 1e-9)),
        "objective": prob.objective(theta),
    }

    rows = []
    for alpha in sorted(alphas):
        trace = run(prob, rt.AdmmParams(alpha, rho), fixed_point=fp,
                    stop=StoppingRule(max_iters=iters, distance_tol=dist_tol))
        tau = estimate_rate(trace, tail_burn_in(trace))
        rows.append({"alpha": alpha, "tau": tau, "log_tau": math.log(tau),
                     "iterations": len(trace)})
    return rows, meta


@dataclass(frozen=True)
class CertifyResult:
    status: str  # PASS, FAIL or INCONCLUSIVE
    m: float
    L: float
    alpha: float
    rho0: float
    tau_theory: float
    tau_empirical: Optional[float]
    iterations: int

    @property
    def error(self):
        if self.tau_empirical is None:
            return None
        return abs(self.tau_empirical - self.tau_theory)


def certify(m, L, alpha, rho0, iters=300, tol=CERTIFY_TOL):
    """Check the rate formula against ADMM on the diag(m, L) instance.

    PASS when the fitted rate is within ``tol`` of the formula; INCONCLUSIVE
    when the distances reach the floating-point floor before ten usable
    points remain.
    """
    if not 0 < alpha < 2:
        raise rt.DomainError(f"alpha={alpha} is outside (0, 2)")
    prob = make_attainability_instance(m, L)
    kappa = prob.conditioning.kappa
    tau = rt.tau_a(alpha, rho0, kappa)
    params = rt.AdmmParams(alpha, rho0 * math.sqrt(m * L))
    trace = run(prob, params, stop=StoppingRule(max_iters=iters))
    try:
        emp = estimate_rate(trace, tail_burn_in(trace))
    except EstimationError:
        return CertifyResult("INCONCLUSIVE", m, L, alpha, rho0, tau, None, len(trace))
    status = "PASS" if abs(emp - tau) <= tol else "FAIL"
    return CertifyResult(status, m, L, alpha, rho0, tau, emp, len(trace))
