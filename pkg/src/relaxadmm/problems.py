"""Concrete problem instances.

* Quadratics ``f(x) = x'Qx / 2`` with ``g = 0``, including the diagonal
  two-dimensional instance on which the rate formula is attained.
* L1-ball constrained logistic regression, with a synthetic two-class data
  generator and a Hessian-based curvature estimate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .engine import EstimationError, ProblemInstance, SolverError
from .rate_theory import ConditioningInfo, DomainError

__all__ = [
    "QuadraticInstance",
    "make_attainability_instance",
    "make_random_quadratic",
    "ClassificationDataset",
    "generate_classification_data",
    "project_l1_ball",
    "LogisticL1Instance",
    "estimate_kappa_f",
]


class QuadraticInstance(ProblemInstance):
    """``f(x) = x'Qx / 2``, ``g = 0``, constraint ``A x + B z = c``."""

    def __init__(self, Q, A=None, B=None, c=None):
        Q = np.asarray(Q, dtype=float)
        p = Q.shape[0]
        if Q.shape != (p, p) or not np.allclose(Q, Q.T):
            raise DomainError("Q must be a symmetric square matrix")
        self.Q = Q
        self.A = np.eye(p) if A is None else np.asarray(A, dtype=float)
        r = self.A.shape[0]
        self.B = -np.eye(r) if B is None else np.asarray(B, dtype=float)
        self.c = np.zeros(r) if c is None else np.asarray(c, dtype=float)
        if self.B.shape[0] != r or self.c.shape != (r,):
            raise DomainError("A, B and c must have matching row counts")

        eig = np.linalg.eigvalsh(Q)
        if eig[0] <= 0:
            raise DomainError(f"Q must be positive definite (min eigenvalue {eig[0]})")
        sv = np.linalg.svd(self.A, compute_uv=False)
        self.conditioning = ConditioningInfo(
            m=float(eig[0]), L=float(eig[-1]),
            sigma_max=float(sv[0]), sigma_min=float(sv[-1]),
        )
        self._B_pinv = np.linalg.pinv(self.B)

    def x_update(self, z, u, rho):
        A = self.A
        rhs = rho * A.T @ (self.c - self.B @ z - u)
        return np.linalg.solve(self.Q + rho * A.T @ A, rhs)

    def z_update(self, x, z_prev, u, rho, alpha):
        v = alpha * (self.A @ x) - (1 - alpha) * (self.B @ z_prev) - alpha * self.c + u
        return -self._B_pinv @ v

    def fixed_point(self, rho):
        # KKT with g = 0: Qx + rho A'u = 0, B'u = 0, Ax + Bz = c
        p, q, r = self.dims
        K = np.zeros((p + q + r, p + q + r))
        K[:p, :p] = self.Q
        K[:p, p + q:] = rho * self.A.T
        K[p:p + q, p + q:] = self.B.T
        K[p + q:, :p] = self.A
        K[p + q:, p:p + q] = self.B
        rhs = np.concatenate([np.zeros(p + q), self.c])
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        return sol[p:p + q], sol[p + q:]


def make_attainability_instance(m, L):
    """``Q = diag(m, L)``, ``A = I``, ``B = -I``, ``c = 0``, ``g = 0``."""
    if not (0 < m <= L):
        raise DomainError(f"need 0 < m <= L, got m={m}, L={L}")
    return QuadraticInstance(np.diag([float(m), float(L)]))


def _random_orthogonal(rng, p):
    Z = rng.standard_normal((p, p))
    Qm, R = np.linalg.qr(Z)
    return Qm * np.sign(np.diag(R))


def make_random_quadratic(p, seed, m, L, kappa_A, sigma_max=1.0):
    """Random quadratic with prescribed spectrum endpoints.

    ``Q = U diag(lam) U'`` with ``lam[0] = m``, ``lam[-1] = L`` and the rest
    uniform in between; ``A`` has singular values from ``sigma_max`` down to
    ``sigma_max / kappa_A``; ``B = -I`` and ``c`` is standard normal.
    Deterministic in ``seed``.
    """
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    if not (0 < m <= L) or not kappa_A >= 1:
        raise DomainError("need 0 < m <= L and kappa_A >= 1")
    rng = np.random.default_rng(seed)
    lam = np.sort(np.concatenate([[m, L], rng.uniform(m, L, p - 2)]))
    U = _random_orthogonal(rng, p)
    Q = (U * lam) @ U.T
    Q = 0.5 * (Q + Q.T)
    sig = np.sort(np.concatenate(
        [[sigma_max, sigma_max / kappa_A],
         rng.uniform(sigma_max / kappa_A, sigma_max, p - 2)]
    ))[::-1]
    A = (_random_orthogonal(rng, p) * sig) @ _random_orthogonal(rng, p).T
    c = rng.standard_normal(p)
    inst = QuadraticInstance(Q, A=A, c=c)
    # report the requested values rather than their round-off perturbations
    inst.conditioning = ConditioningInfo(
        m=float(m), L=float(L), sigma_max=float(sigma_max),
        sigma_min=float(sigma_max / kappa_A),
    )
    return inst


@dataclass(frozen=True)
class ClassificationDataset:
    features: np.ndarray
    labels: np.ndarray
    N: int
    d: int
    sigma: float = float("nan")
    seed: int = -1

    def to_csv(self, path):
        """Headerless CSV, one row per sample: label, then the features."""
        rows = np.column_stack([self.labels, self.features])
        np.savetxt(path, rows, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path):
        rows = np.loadtxt(path, delimiter=",", ndmin=2)
        labels, features = rows[:, 0], rows[:, 1:]
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError(f"{path}: labels must be -1 or +1")
        return cls(features=features, labels=labels, N=rows.shape[0], d=features.shape[1])


def generate_classification_data(N, d, sigma=1.0, seed=0):
    """Two gaussian classes separated by 1 along the first ``d/2`` axes.

    The first ``N/2`` samples are labelled +1 and shifted by +1/2 along the
    first ``d/2`` coordinates; the rest are labelled -1 and shifted by -1/2.
    """
    if N <= 0 or d <= 0 or N % 2 or d % 2:
        raise DomainError(f"N and d must be positive and even, got N={N}, d={d}")
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    rng = np.random.default_rng(seed)
    X = sigma * rng.standard_normal((N, d))
    y = np.concatenate([np.ones(N // 2), -np.ones(N // 2)])
    X[:, : d // 2] += 0.5 * y[:, None]
    return ClassificationDataset(features=X, labels=y, N=N, d=d, sigma=float(sigma), seed=seed)


def project_l1_ball(v, lam):
    """Euclidean projection of ``v`` onto ``{z : ||z||_1 <= lam}``.

    Soft-thresholds ``v`` at the threshold found by sorting ``|v|``.
    """
    v = np.asarray(v, dtype=float)
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    a = np.abs(v)
    if a.sum() <= lam:
        return v.copy()
    mu = np.sort(a)[::-1]
    cs = np.cumsum(mu)
    k = np.arange(1, a.size + 1)
    n = np.nonzero(mu - (cs - lam) / k > 0)[0][-1]
    theta = (cs[n] - lam) / (n + 1)
    z = np.sign(v) * np.maximum(a - theta, 0.0)
    # a - theta cancels badly when lam << |v|; pull back onto the ball
    s = np.abs(z).sum()
    if s > lam:
        z *= lam / s
    return z


class LogisticL1Instance(ProblemInstance):
    """Logistic loss ``f`` with an L1-ball indicator ``g``; ``A = I, B = -I, c = 0``.

    The x-update is solved by damped Newton with the exact Hessian.
    """

    def __init__(self, features, labels, lam=1.0, newton_tol=1e-10, newton_max_iters=100):
        X = np.asarray(features, dtype=float)
        y = np.asarray(labels, dtype=float)
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise DomainError("labels must be -1 or +1")
        if not lam > 0:
            raise DomainError(f"lambda must be positive, got {lam}")
        self.X, self.y, self.lam = X, y, float(lam)
        self.newton_tol = newton_tol
        self.newton_max_iters = newton_max_iters
        N, d = X.shape
        self.N = N
        self.A = np.eye(d)
        self.B = -np.eye(d)
        self.c = np.zeros(d)

    @classmethod
    def from_dataset(cls, data, lam=1.0, **kw):
        return cls(data.features, data.labels, lam, **kw)

    def objective(self, theta):
        margins = self.y * (self.X @ theta)
        return float(np.mean(np.logaddexp(0.0, -margins)))

    def gradient(self, theta):
        margins = self.y * (self.X @ theta)
        return -self.X.T @ (self.y * expit(-margins)) / self.N

    def hessian(self, theta):
        s = expit(self.y * (self.X @ theta))
        w = s * (1.0 - s)
        return (self.X.T * w) @ self.X / self.N

    def x_update(self, z, u, rho):
        """argmin_theta f(theta) + rho/2 ||theta - z + u||^2"""
        v = z - u
        theta = v.copy()
        eye = np.eye(theta.size)

        def phi(th):
            return self.objective(th) + 0.5 * rho * np.dot(th - v, th - v)

        gnorm = np.inf
        for _ in range(self.newton_max_iters + 1):
            g = self.gradient(theta) + rho * (theta - v)
            gnorm = np.linalg.norm(g)
            if gnorm <= self.newton_tol:
                return theta
            H = self.hessian(theta) + rho * eye
            d = -np.linalg.solve(H, g)
            slope = g @ d
            f0, s = phi(theta), 1.0
            # near the optimum the decrease is below the objective's rounding
            slack = 16 * np.finfo(float).eps * abs(f0)
            while phi(theta + s * d) > f0 + 1e-4 * s * slope + slack and s > 1e-10:
                s *= 0.5
            theta = theta + s * d
        raise SolverError(
            f"Newton did not converge in {self.newton_max_iters} iterations "
            f"(gradient norm {gnorm:.3e})", grad_norm=gnorm,
        )

    def z_update(self, x, z_prev, u, rho, alpha):
        return project_l1_ball(alpha * x + (1 - alpha) * z_prev + u, self.lam)


def estimate_kappa_f(data, lam=None, curvature="exact"):
    """Curvature bounds of the logistic loss from the feature Gram matrix.

    Parameters
    ----------
    data : ClassificationDataset
    lam : float, optional
        L1 radius. When given, the lower curvature bound is taken over the
        whole ball ``||theta||_1 <= lam`` (each sample's curvature weight is
        evaluated at its worst margin ``lam * max|x_i|``) instead of at
        ``theta = 0``.
    curvature : {"exact", "sech"}
        ``"exact"`` scales the Gram matrix by the true logistic curvature at
        zero margin, 1/4. ``"sech"`` uses the unit factor of the
        ``1/cosh(x'theta/2)`` expression; the ratio is unaffected.

    Returns
    -------
    m_est, L_est, kappa_f_est : float
    """
    X = np.asarray(data.features, dtype=float)
    N, d = X.shape
    if N < d or np.linalg.matrix_rank(X) < d:
        raise EstimationError("feature Gram matrix is singular")
    if curvature == "exact":
        w0 = 0.25
        weight = lambda a: expit(a) * expit(-a)  # noqa: E731
    elif curvature == "sech":
        w0 = 1.0
        weight = lambda a: 1.0 / np.cosh(a / 2)  # noqa: E731
    else:
        raise ValueError(f"unknown curvature {curvature!r}")

    G = X.T @ X / N
    eig = np.linalg.eigvalsh(G)
    L_est = w0 * eig[-1]
    if lam is None:
        m_est = w0 * eig[0]
    else:
        w = weight(lam * np.abs(X).max(axis=1))
        m_est = np.linalg.eigvalsh((X.T * w) @ X / N)[0]
    if m_est <= 0:
        raise EstimationError("curvature lower bound is not positive")
    return float(m_est), float(L_est), float(L_est / m_est)
