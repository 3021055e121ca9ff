"""Smooth convex oracles with exactly known curvature constants.

Every oracle carries its strong-convexity modulus ``mu`` and gradient
Lipschitz constant ``lip``.  Quadratics are stored by their spectrum, which
makes both constants exact; least-squares and logistic constants come from
a cyclic Jacobi eigensolve of the Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidSpecError

__all__ = [
    "SmoothOracle",
    "QuadraticSpec",
    "make_quadratic",
    "make_least_squares",
    "make_logistic",
    "jacobi_eigenvalues",
]

# eigenvalues below this fraction of the largest one are treated as zero
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class SmoothOracle:
    """Value/gradient evaluator for a smooth convex f.

    Attributes
    ----------
    eval, grad : callable
        ``eval(x) -> float`` and ``grad(x) -> ndarray``.
    mu : float
        Strong-convexity modulus (0 for merely convex f).
    lip : float
        Lipschitz constant of the gradient.
    dim : int
        Input dimension.
    eta_pl : float or None
        Polyak-Lojasiewicz constant when it is known in closed form.
    kind : str
        Family name, used in reports.
    """

    eval: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    mu: float
    lip: float
    dim: int
    eta_pl: Optional[float] = None
    kind: str = "custom"
    params: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.lip > 0:
            raise InvalidSpecError(f"lip must be positive, got {self.lip}")
        if self.mu < 0 or self.mu > self.lip:
            raise InvalidSpecError(
                f"need 0 <= mu <= lip, got mu={self.mu}, lip={self.lip}")
        if self.dim < 1:
            raise InvalidSpecError(f"dim must be positive, got {self.dim}")


@dataclass(frozen=True)
class QuadraticSpec:
    """Diagonal quadratic ``0.5 * sum(c_i x_i^2) + <b, x> + offset``."""

    diag_spectrum: np.ndarray
    linear_term: Optional[np.ndarray] = None
    offset: float = 0.0


def make_quadratic(spec: QuadraticSpec) -> SmoothOracle:
    """Build the oracle of a diagonal quadratic.

    ``mu`` and ``lip`` are the smallest and largest spectrum entries, exactly.
    """
    c = np.asarray(spec.diag_spectrum, dtype=float).ravel()
    if c.size == 0:
        raise InvalidSpecError("empty spectrum")
    if not np.all(np.isfinite(c)):
        raise InvalidSpecError("spectrum entries must be finite")
    if np.any(c < 0):
        raise InvalidSpecError(f"negative spectrum entry: {c.min()}")
    if not np.any(c > 0):
        raise InvalidSpecError("at least one spectrum entry must be positive")
    if spec.linear_term is None:
        b = np.zeros_like(c)
    else:
        b = np.asarray(spec.linear_term, dtype=float).ravel()
        if b.shape != c.shape:
            raise InvalidSpecError(
                f"linear term has {b.size} entries, spectrum has {c.size}")
    offset = float(spec.offset)
    c.setflags(write=False)
    b.setflags(write=False)

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * np.dot(c * x, x) + np.dot(b, x) + offset)

    def grad(x):
        return c * np.asarray(x, dtype=float) + b

    return SmoothOracle(value, grad, mu=float(c.min()), lip=float(c.max()),
                        dim=c.size, kind="quadratic",
                        params={"spectrum": c, "linear": b, "offset": offset})


def jacobi_eigenvalues(a, tol=1e-12, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Iterates full sweeps until the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||A||_F)``.  Returns the eigenvalues in ascending order.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise InvalidSpecError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise InvalidSpecError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    threshold = tol * max(1.0, np.linalg.norm(a))

    def off(m):
        return np.sqrt(max(np.sum(m * m) - np.sum(np.diag(m) ** 2), 0.0))

    for _ in range(max_sweeps):
        if off(a) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                h = a[q, q] - a[p, p]
                if abs(h) + 100.0 * abs(apq) == abs(h):
                    # theta**2 would overflow; t ~ 1 / (2 theta)
                    t = apq / h
                else:
                    theta = h / (2.0 * apq)
                    t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                cs = 1.0 / np.hypot(t, 1.0)
                sn = t * cs
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = cs * rp - sn * rq
                a[q, :] = sn * rp + cs * rq
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = cs * cp - sn * cq
                a[:, q] = sn * cp + cs * cq
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


def _gram_constants(a):
    """Return (largest, smallest, smallest nonzero) eigenvalue of A^T A."""
    eig = jacobi_eigenvalues(a.T @ a)
    top = max(float(eig[-1]), 0.0)
    cutoff = RANK_RTOL * top
    nonzero = eig[eig > cutoff]
    bottom = float(eig[0]) if eig[0] > cutoff else 0.0
    eta = float(nonzero[0]) if nonzero.size else None
    return top, bottom, eta


def make_least_squares(a, b) -> SmoothOracle:
    """Oracle for ``0.5 * ||A x - b||^2``.

    ``eta_pl`` is the smallest nonzero eigenvalue of ``A^T A``, which is a
    Polyak-Lojasiewicz constant even when A is rank deficient.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float).ravel()
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidSpecError(f"A must be a nonempty matrix, got shape {a.shape}")
    if b.size != a.shape[0]:
        raise InvalidSpecError(
            f"A has {a.shape[0]} rows but b has {b.size} entries")
    top, bottom, eta = _gram_constants(a)
    # a zero matrix gives a constant f; any positive L is then valid
    lip = top if top > 0 else 1.0
    a.setflags(write=False)
    b.setflags(write=False)

    def value(x):
        r = a @ np.asarray(x, dtype=float) - b
        return float(0.5 * np.dot(r, r))

    def grad(x):
        return a.T @ (a @ np.asarray(x, dtype=float) - b)

    return SmoothOracle(value, grad, mu=bottom, lip=lip, dim=a.shape[1],
                        eta_pl=eta, kind="least_squares",
                        params={"A": a, "b": b})


def _log1pexp(z):
    # log(1 + exp(z)) without overflow for large positive z
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z > 0
    out[pos] = z[pos] + np.log1p(np.exp(-z[pos]))
    out[~pos] = np.log1p(np.exp(z[~pos]))
    return out


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(z, dtype=float)))


def make_logistic(a, labels, l2_reg=0.0) -> SmoothOracle:
    """Oracle for l2-regularized logistic loss with labels in {-1, +1}.

    ``lip = lambda_max(A^T A) / 4 + l2_reg`` and ``mu = l2_reg``.
    """
    a = np.array(a, dtype=float)
    y = np.array(labels, dtype=float).ravel()
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidSpecError(f"A must be a nonempty matrix, got shape {a.shape}")
    if y.size != a.shape[0]:
        raise InvalidSpecError(
            f"A has {a.shape[0]} rows but {y.size} labels were given")
    if not np.all((y == 1.0) | (y == -1.0)):
        raise InvalidSpecError("labels must be -1 or +1")
    if l2_reg < 0:
        raise InvalidSpecError(f"l2_reg must be nonnegative, got {l2_reg}")
    l2_reg = float(l2_reg)
    top, _, _ = _gram_constants(a)
    lip = top / 4.0 + l2_reg
    if lip == 0.0:
        lip = 1.0
    ya = y[:, None] * a
    ya.setflags(write=False)

    def value(x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(_log1pexp(-(ya @ x))) + 0.5 * l2_reg * np.dot(x, x))

    def grad(x):
        x = np.asarray(x, dtype=float)
        return -(ya.T @ _sigmoid(-(ya @ x))) + l2_reg * x

    return SmoothOracle(value, grad, mu=l2_reg, lip=lip, dim=a.shape[1],
                        kind="logistic",
                        params={"A": a, "labels": y, "l2_reg": l2_reg})
