"""Elliptic boundary-value problems and orthogonal decompositions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .calculus import BoundaryCalculus

TOL_SOLVE = 1e-10
TOL_COMPAT = 1e-9


class SolverFailure(RuntimeError):
    """A linear solve missed its residual tolerance."""


class IncompatibleData(ValueError):
    """Neumann data violate the per-component flux balance."""


def _check(residual: float, scale: float, what: str, tol: float = TOL_SOLVE) -> None:
    if residual > tol * max(scale, 1e-300):
        raise SolverFailure(f"{what}: relative residual {residual / max(scale, 1e-300):.2e}")


def free_vertices(c: BoundaryCalculus) -> np.ndarray:
    """Interior vertices, minus one pinned vertex per component without boundary."""
    def build():
        has_boundary = np.zeros(c.components.count, dtype=bool)
        has_boundary[c.components.vertex_labels[c.boundary_vertices]] = True
        pins = [vs[0] for k, vs in enumerate(c.components.vertex_sets) if not has_boundary[k]]
        return np.setdiff1d(c.interior_vertices, pins)
    return c.cached("free_vertices", build)


def _dirichlet_lu(c: BoundaryCalculus):
    def build():
        idx = free_vertices(c)
        L = c.stiffness
        return splu(L[idx][:, idx].tocsc()) if idx.size else None
    return c.cached("dirichlet_lu", build)


def _neumann_lu(c: BoundaryCalculus):
    def build():
        pins = np.array([vs[0] for vs in c.components.vertex_sets])
        keep = np.setdiff1d(np.arange(c.n_vertices), pins)
        L = c.stiffness
        return keep, splu(L[keep][:, keep].tocsc())
    return c.cached("neumann_lu", build)


def solve_dirichlet(c: BoundaryCalculus, rho, f, tol: float = TOL_SOLVE) -> np.ndarray:
    """phi with ``-dstar d phi = rho`` at interior vertices and ``tr phi = f``.

    On components without boundary one vertex is pinned to zero instead.
    """
    rho = np.asarray(rho, dtype=float)
    f = np.asarray(f, dtype=float)
    phi = np.zeros(c.n_vertices)
    phi[c.boundary_vertices] = f
    idx = free_vertices(c)
    if idx.size == 0:
        return phi
    L = c.stiffness
    rhs = -c.m0[idx] * rho[idx] - L[idx] @ phi
    if np.any(rhs):
        phi[idx] = _dirichlet_lu(c).solve(rhs)
        res = np.linalg.norm(L[idx] @ phi + c.m0[idx] * rho[idx])
        _check(res, np.linalg.norm(rhs), "dirichlet solve", tol)
    return phi


def locally_constant_basis(c: BoundaryCalculus) -> np.ndarray:
    """Indicator vectors of the connected components (columns)."""
    out = np.zeros((c.n_vertices, c.components.count))
    for k, vs in enumerate(c.components.vertex_sets):
        out[vs, k] = 1.0
    return out


def boundary_component_labels(c: BoundaryCalculus) -> np.ndarray:
    """Component label of each boundary vertex."""
    return c.components.vertex_labels[c.boundary_vertices]


def compatibility_defects(c: BoundaryCalculus, rho, f) -> tuple[np.ndarray, float]:
    """Per-component ``<1, f>_B - <1, rho>_M`` and the norm scale used to judge it."""
    rho = np.asarray(rho, dtype=float)
    f = np.asarray(f, dtype=float)
    labels = c.components.vertex_labels
    ncomp = c.components.count
    charge = np.bincount(labels, weights=c.m0 * rho, minlength=ncomp)
    flux = np.bincount(boundary_component_labels(c), weights=c.b0 * f, minlength=ncomp)
    scale = float(np.sum(c.m0 * np.abs(rho)) + np.sum(c.b0 * np.abs(f)))
    return flux - charge, scale


def solve_neumann(c: BoundaryCalculus, rho, f, tol: float = TOL_SOLVE, tol_compat: float = TOL_COMPAT) -> np.ndarray:
    """phi with ``-dstar d phi = rho`` and ``nml d phi = f``, M0-orthogonal to locally constant functions.

    The discrete Gauss law lives on interior vertices, so ``rho`` must vanish
    on the boundary.
    """
    rho = np.asarray(rho, dtype=float)
    f = np.asarray(f, dtype=float)
    scale_b = float(np.sum(c.m0 * np.abs(rho)))
    if c.n_boundary and np.any(np.abs(rho[c.boundary_vertices]) > tol_compat * max(scale_b, 1e-300)):
        raise IncompatibleData("charge density must vanish at boundary vertices")
    defects, scale = compatibility_defects(c, rho, f)
    if np.any(np.abs(defects) > tol_compat * scale):
        raise IncompatibleData(f"flux balance violated by {np.abs(defects).max():.3e}")
    r = -c.m0 * rho
    r[c.boundary_vertices] = c.b0 * f
    return _solve_pinned(c, r, tol)


def _solve_pinned(c: BoundaryCalculus, r: np.ndarray, tol: float) -> np.ndarray:
    """Solve ``L phi = r`` for r in the range of L; return the M0-mean-free solution.

    r is first projected onto the range (per-component zero sum), which only
    removes the rounding-level defect admitted by the compatibility test.
    """
    phi = np.zeros(c.n_vertices)
    if not np.any(r):
        return phi
    labels = c.components.vertex_labels
    counts = np.bincount(labels, minlength=c.components.count)
    r = r - (np.bincount(labels, weights=r, minlength=c.components.count) / counts)[labels]
    keep, lu = _neumann_lu(c)
    phi[keep] = lu.solve(r[keep])
    phi = _remove_means(c, phi)
    res = np.linalg.norm(c.stiffness @ phi - r)
    _check(res, np.linalg.norm(r), "neumann solve", tol)
    return phi


def _remove_means(c: BoundaryCalculus, phi: np.ndarray) -> np.ndarray:
    labels = c.components.vertex_labels
    ncomp = c.components.count
    mass = np.bincount(labels, weights=c.m0, minlength=ncomp)
    mean = np.bincount(labels, weights=c.m0 * phi, minlength=ncomp) / mass
    return phi - mean[labels]


@dataclass(frozen=True)
class HodgeSplit1Form:
    """``A = tangential + d potential`` with tangential coclosed and normal-free."""

    tangential: np.ndarray
    potential: np.ndarray
    reconstruction_residual: float


def split_boundary_function(c: BoundaryCalculus, u) -> tuple[np.ndarray, np.ndarray]:
    """(lg, const_part): B0-projection onto restrictions of locally constant functions.

    One degree of freedom per surface component with boundary, shared by all
    of its boundary circles.
    """
    u = np.asarray(u, dtype=float)
    labels = boundary_component_labels(c)
    ncomp = c.components.count
    length = np.bincount(labels, weights=c.b0, minlength=ncomp)
    total = np.bincount(labels, weights=c.b0 * u, minlength=ncomp)
    mean = np.divide(total, length, out=np.zeros(ncomp), where=length > 0)
    const = mean[labels]
    return u - const, const


def boundary_constant_basis(c: BoundaryCalculus) -> np.ndarray:
    """B0-orthonormal basis (columns) of the locally constant boundary functions."""
    labels = boundary_component_labels(c)
    comps = np.unique(labels)
    out = np.zeros((c.n_boundary, comps.size))
    for k, comp in enumerate(comps):
        mask = labels == comp
        out[mask, k] = 1.0 / np.sqrt(c.b0[mask].sum())
    return out


def _sign_fix(cols: np.ndarray) -> np.ndarray:
    """Make the first significant entry of each column positive."""
    cols = cols.copy()
    for j in range(cols.shape[1]):
        col = cols[:, j]
        big = np.flatnonzero(np.abs(col) > 1e-8 * np.abs(col).max())
        if big.size and col[big[0]] < 0:
            cols[:, j] = -col
    return cols


def lg_basis(c: BoundaryCalculus) -> np.ndarray:
    """B0-orthonormal basis (columns) of LG: boundary functions B0-orthogonal to local constants."""
    def build():
        nb = c.n_boundary
        if nb == 0:
            return np.zeros((0, 0))
        sqb = np.sqrt(c.b0)
        consts = boundary_constant_basis(c) * sqb[:, None]
        q, _ = la.qr(consts, mode="full")
        perp = q[:, consts.shape[1]:]
        return _sign_fix(perp / sqb[:, None])
    return c.cached("lg_basis", build)


def coclosed_representative(c: BoundaryCalculus, A) -> tuple[np.ndarray, np.ndarray]:
    """``A = A_c + d lam`` with ``tr lam = 0`` and ``dstar A_c = 0``; returns (A_c, lam)."""
    A = np.asarray(A, dtype=float)
    lam = np.zeros(c.n_vertices)
    idx = free_vertices(c)
    if idx.size:
        rhs = (c.residual @ A)[idx]
        if np.any(rhs):
            lam[idx] = _dirichlet_lu(c).solve(rhs)
            res = np.linalg.norm((c.stiffness @ lam)[idx] - rhs)
            _check(res, np.linalg.norm(rhs), "coclosed representative")
    return A - c.d[0] @ lam, lam


def tangential_hodge_helmholtz(c: BoundaryCalculus, A) -> HodgeSplit1Form:
    """``A = A_t + d alpha`` with A_t coclosed and normal-free.

    alpha's trace is B0-orthogonal to restrictions of locally constant
    functions; on components without boundary alpha is M0-mean-free.
    """
    A = np.asarray(A, dtype=float)
    alpha = _solve_pinned(c, c.residual @ A, TOL_SOLVE)
    _, const = split_boundary_function(c, alpha[c.boundary_vertices])
    if const.size:
        labels = c.components.vertex_labels
        shift = np.zeros(c.components.count)
        shift[boundary_component_labels(c)] = const
        alpha = alpha - shift[labels]
    tangential = A - c.d[0] @ alpha
    resid = float(np.sqrt(max(_mnorm2(c, tangential + c.d[0] @ alpha - A), 0.0)))
    return HodgeSplit1Form(tangential, alpha, resid)


def _mnorm2(c: BoundaryCalculus, x: np.ndarray) -> float:
    return float(x @ (c.M[1] @ x))


def minimal_coclosed_extension(c: BoundaryCalculus, h) -> np.ndarray:
    """``d phi`` with phi harmonic and ``nml d phi = h``."""
    return c.d[0] @ solve_neumann(c, np.zeros(c.n_vertices), h)


def harmonic_extension(c: BoundaryCalculus, f) -> np.ndarray:
    """Harmonic 0-cochain with boundary values f."""
    return solve_dirichlet(c, np.zeros(c.n_vertices), f)


def harmonic_representative(c: BoundaryCalculus, alpha) -> np.ndarray:
    """The harmonic alpha~ with trace in LG and ``d(alpha - alpha~)`` a pure interior gauge."""
    lg, _ = split_boundary_function(c, np.asarray(alpha, dtype=float)[c.boundary_vertices])
    return harmonic_extension(c, lg)


def constraint_matrix(c: BoundaryCalculus) -> sp.csr_matrix:
    """Stacked ``[dstar; nml]`` on 1-cochains."""
    return sp.vstack([c.dstar[1], c.nml[1]]).tocsr()


def tangential_coclosed_basis(c: BoundaryCalculus, rank_tol: float = 1e-10) -> np.ndarray:
    """M1-orthonormal basis (columns) of ``ker dstar ∩ ker nml``.

    The kernel is extracted by dense SVD of the constraint matrix, then
    M1-orthonormalised through the eigenbasis of its Gram matrix; columns are
    sign-fixed so the first significant entry is positive.
    """
    def build():
        K = constraint_matrix(c).toarray()
        _, s, vt = la.svd(K, full_matrices=True, lapack_driver="gesdd")
        rank = int(np.sum(s > rank_tol * s[0])) if s.size else 0
        null = vt[rank:].T
        gram = null.T @ (c.M[1] @ null)
        w, q = la.eigh(gram)
        if w.size and w.min() <= 0:
            raise SolverFailure("degenerate Gram matrix on the tangential space")
        basis = null @ (q / np.sqrt(w))
        return _sign_fix(basis)
    return c.cached("tangential_basis", build)


def tangential_dimension(c: BoundaryCalculus) -> int:
    """``#edges - rank([dstar; nml])`` by the topological count ``E - V + #components``."""
    return c.n_edges - c.n_vertices + c.components.count
