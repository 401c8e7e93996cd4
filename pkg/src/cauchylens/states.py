"""Quasi-free states as characteristic functionals on Weyl elements."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.io
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, svds

from .weyl import SpaceMismatch, SymplecticSpace, WeylElement

TOL_DOMINATION = 1e-10
_DENSE_LIMIT = 800


class DominationError(ValueError):
    """mu fails ``|sigma(x, y)| <= 2 |x|_mu |y|_mu``."""


def domination_margin(space: SymplecticSpace, mu: np.ndarray) -> float:
    """Spectral norm of ``L^-1 (sigma/2) L^-T`` with ``mu = L L^T``.

    A value <= 1 is equivalent to ``|sigma(x,y)| <= 2 |x|_mu |y|_mu``.
    """
    if space.dim == 0:
        return 0.0
    try:
        L = la.cholesky(mu, lower=True)
    except la.LinAlgError as exc:
        raise DominationError("mu is not positive definite") from exc
    half = space.sigma_matrix * 0.5
    if space.dim <= _DENSE_LIMIT:
        X = la.solve_triangular(L, half.toarray(), lower=True)
        X = la.solve_triangular(L, X.T, lower=True).T
        return float(la.svdvals(X)[0])

    def apply(x):
        y = la.solve_triangular(L, x, lower=True, trans="T")
        return la.solve_triangular(L, half @ y, lower=True)

    def apply_t(x):
        y = la.solve_triangular(L, x, lower=True, trans="T")
        return la.solve_triangular(L, half.T @ y, lower=True)

    op = LinearOperator((space.dim, space.dim), matvec=apply, rmatvec=apply_t, dtype=float)
    s = svds(op, k=1, v0=np.ones(space.dim) / np.sqrt(space.dim), tol=1e-14, return_singular_vectors=False)
    return float(s[0])


class QuasiFreeState:
    """``omega(W(v)) = exp(i l.v - v.mu.v / 2)`` on a symplectic label space."""

    def __init__(self, space: SymplecticSpace, mu, one_point=None, check: bool = True, tol: float = TOL_DOMINATION):
        mu = np.asarray(mu.toarray() if sp.issparse(mu) else mu, dtype=float)
        if mu.shape != (space.dim, space.dim):
            raise SpaceMismatch(f"mu of shape {mu.shape} on a space of dimension {space.dim}")
        if not np.allclose(mu, mu.T, rtol=0, atol=1e-14 * max(1.0, np.abs(mu).max(initial=0.0))):
            raise DominationError("mu is not symmetric")
        self.space = space
        self.mu = 0.5 * (mu + mu.T)
        self.one_point = np.zeros(space.dim) if one_point is None else space.check_label(one_point)
        self.margin = domination_margin(space, self.mu) if check else float("nan")
        if check and self.margin > 1.0 + tol:
            raise DominationError(f"domination margin {self.margin:.6f} exceeds 1")

    def characteristic(self, labels) -> np.ndarray:
        """Values on the generators with the given labels (rows)."""
        V = np.atleast_2d(np.asarray(labels, dtype=float))
        quad = np.sum((V @ self.mu) * V, axis=1)
        return np.exp(1j * (V @ self.one_point) - 0.5 * quad)

    def __call__(self, a: WeylElement) -> complex:
        return evaluate(self, a)

    def with_one_point(self, one_point) -> "QuasiFreeState":
        out = object.__new__(QuasiFreeState)
        out.space, out.mu, out.margin = self.space, self.mu, self.margin
        out.one_point = self.space.check_label(one_point)
        return out

    def around(self, offset) -> "QuasiFreeState":
        """Same covariance, one-point functional ``l(v) = sigma(v, offset)``."""
        return self.with_one_point(np.asarray(self.space.sigma_matrix @ self.space.check_label(offset)))

    def restrict(self, blocks: list[str], space: SymplecticSpace) -> "QuasiFreeState":
        """Marginal on the coordinate blocks ``blocks`` (in order), as a state over ``space``."""
        idx = np.concatenate([np.arange(self.space.dim)[self.space.slice(b)] for b in blocks])
        out = object.__new__(QuasiFreeState)
        out.space = space
        out.mu = self.mu[np.ix_(idx, idx)]
        out.one_point = self.one_point[idx]
        out.margin = float("nan")
        if space.dim != idx.size:
            raise SpaceMismatch("restricted blocks do not match the target space")
        return out


def l2_state(space) -> QuasiFreeState:
    """The L2 state: half the coordinate inner product in orthonormal CHH coordinates.

    Accepts a PhaseSpace or a SymplecticSpace whose coordinates are orthonormal.
    """
    space = getattr(space, "space", space)
    return QuasiFreeState(space, 0.5 * np.eye(space.dim))


def evaluate(state: QuasiFreeState, a: WeylElement) -> complex:
    if not a.space.same_as(state.space):
        raise SpaceMismatch("element and state live over different spaces")
    if a.is_zero():
        return 0j
    return complex(np.sum(a.coeffs * state.characteristic(a.labels)))


def gram_matrix(state: QuasiFreeState, labels) -> np.ndarray:
    """``G_jk = omega(W(v_j)^* W(v_k)) = exp(i sigma(v_j, v_k)/2) omega(W(v_k - v_j))``."""
    V = np.atleast_2d(np.asarray(labels, dtype=float))
    n = V.shape[0]
    diff = (V[None, :, :] - V[:, None, :]).reshape(n * n, -1)
    vals = state.characteristic(diff).reshape(n, n)
    phase = np.exp(0.5j * state.space.sigma_batch(V, V))
    return vals * phase


def gram_check(state: QuasiFreeState, labels) -> float:
    """Smallest eigenvalue of the Gram matrix of the given generators."""
    if len(labels) > 200:
        raise ValueError("gram_check accepts at most 200 labels")
    G = gram_matrix(state, labels)
    return float(la.eigvalsh(0.5 * (G + G.conj().T))[0])


def save_mu(state: QuasiFreeState, path: str | Path) -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(state.mu))


def load_mu(path: str | Path) -> np.ndarray:
    mat = scipy.io.mmread(str(path))
    return np.asarray(mat.toarray() if sp.issparse(mat) else mat, dtype=float)
