"""Random inputs for property checks: cochains, Cauchy data and Weyl elements."""

from __future__ import annotations

import numpy as np
import scipy.linalg as la

from . import hodge
from .calculus import BoundaryCalculus
from .phasespace import InitialData, PhaseSpace, edges_away_from_boundary
from .weyl import SymplecticSpace, WeylElement


def random_coclosed(c: BoundaryCalculus, rng: np.random.Generator) -> np.ndarray:
    """A 1-cochain with ``dstar = 0`` at interior vertices (free normal trace)."""
    return hodge.coclosed_representative(c, rng.normal(size=c.n_edges))[0]


def random_homogeneous(c: BoundaryCalculus, rng: np.random.Generator) -> InitialData:
    """Random A and a random coclosed E, rho = 0."""
    return InitialData(rng.normal(size=c.n_edges), random_coclosed(c, rng), np.zeros(c.n_vertices))


def random_closed_surface_data(c: BoundaryCalculus, rng: np.random.Generator) -> InitialData:
    """Homogeneous data on a surface without boundary."""
    E = hodge.tangential_hodge_helmholtz(c, rng.normal(size=c.n_edges)).tangential
    return InitialData(rng.normal(size=c.n_edges), E, np.zeros(c.n_vertices))


def interior_coclosed_basis(c: BoundaryCalculus, edges) -> np.ndarray:
    """Orthonormal basis (columns) of coclosed 1-cochains supported on ``edges``."""
    edges = np.asarray(edges, dtype=np.int64)
    out = np.zeros((c.n_edges, 0))
    if edges.size == 0:
        return out
    block = c.residual[:, edges].toarray()
    null = la.null_space(block, rcond=1e-12)
    out = np.zeros((c.n_edges, null.shape[1]))
    out[edges] = null
    return out


def random_interior_data(c: BoundaryCalculus, rng: np.random.Generator, rings: int = 1, edges=None) -> InitialData:
    """Homogeneous data supported on edges kept away from the boundary."""
    if edges is None:
        edges = edges_away_from_boundary(c, rings)
        basis = c.cached(("interior_coclosed", rings), lambda: interior_coclosed_basis(c, edges))
    else:
        edges = np.asarray(edges, dtype=np.int64)
        basis = interior_coclosed_basis(c, edges)
    A = np.zeros(c.n_edges)
    A[edges] = rng.normal(size=edges.size)
    E = basis @ rng.normal(size=basis.shape[1]) if basis.shape[1] else np.zeros(c.n_edges)
    return InitialData(A, E, np.zeros(c.n_vertices))


def random_lg(ps: PhaseSpace, rng: np.random.Generator) -> np.ndarray:
    """A random boundary function in LG (B0-orthogonal to local constants)."""
    return ps.lg @ rng.normal(size=ps.n_surface)


def random_labels(space: SymplecticSpace, rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return rng.normal(size=(n, space.dim)) * scale


def random_element(space: SymplecticSpace, rng: np.random.Generator, n_terms: int = 3, scale: float = 1.0) -> WeylElement:
    """Finite Weyl combination with complex coefficients."""
    labels = random_labels(space, rng, n_terms, scale)
    coeffs = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
    return WeylElement.from_terms(space, labels, coeffs)
