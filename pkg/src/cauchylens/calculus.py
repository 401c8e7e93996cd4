"""Discrete exterior calculus with an exact Green identity.

Operators on a triangle mesh:

* ``d0`` signed edge/vertex incidence, ``d1`` signed triangle/edge incidence;
* ``M1`` the Whitney (Galerkin) mass on 1-cochains, ``M0`` and ``B0`` lumped
  vertex masses on the surface and on its boundary;
* ``dstar`` and ``nml`` both factor through the residual ``r = d0^T M1 beta``:
  at interior vertices ``dstar beta = r / m``, at boundary vertices
  ``nml beta = r / b`` and ``dstar beta = 0``.

With this split the identity ``<d lam, beta> - <lam, dstar beta> = <tr lam, nml beta>``
telescopes exactly, and the tangential and normal Hodge decompositions have
the dimensions of their continuum counterparts.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .simplicial import Components, Mesh, boundary_mesh, check_volumes, connected_components, edge_lengths, face_cofaces


class DegreeMismatch(ValueError):
    """Cochains of different degree were combined."""


class UnsupportedDegree(ValueError):
    """The operator is not implemented in this degree."""


class MeshMismatch(ValueError):
    """Objects built on different meshes were combined."""


@dataclass(frozen=True)
class Cochain:
    """Coefficients of a degree-k form on the k-simplices of a mesh (or of its boundary)."""

    degree: int
    values: np.ndarray
    boundary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


def incidence(m: Mesh, k: int) -> sp.csr_matrix:
    """Coboundary matrix from k-cochains to (k+1)-cochains (metric free)."""
    if k == 0 and m.dim >= 1:
        edges = m.simplices[1]
        n = edges.shape[0]
        rows = np.repeat(np.arange(n), 2)
        cols = edges.ravel()
        vals = np.tile([-1.0, 1.0], n)
        return sp.csr_matrix((vals, (rows, cols)), shape=(n, m.n_vertices))
    if k == 1 and m.dim == 2:
        slots = face_cofaces(m)
        n = slots.shape[0]
        rows = np.repeat(np.arange(n), 3)
        vals = np.tile([1.0, -1.0, 1.0], n)
        return sp.csr_matrix((vals, (rows, slots.ravel())), shape=(n, m.count(1)))
    raise UnsupportedDegree(f"no coboundary from degree {k} on a dim-{m.dim} mesh")


# Whitney form w_ab = lam_a dlam_b - lam_b dlam_a for the local edges of a sorted triangle,
# listed in the order of ``face_cofaces`` slots (slot 0 = edge 12, slot 1 = edge 02, slot 2 = edge 01).
_LOCAL_EDGES = ((1, 2), (0, 2), (0, 1))
_GRAD = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def whitney_mass(m: Mesh) -> sp.csr_matrix:
    """Galerkin mass matrix of lowest-order Whitney 1-forms."""
    g = m.metric
    area = 0.5 * np.sqrt(np.linalg.det(g))
    ginv = np.linalg.inv(g)
    dots = np.einsum("ai,nij,bj->nab", _GRAD, ginv, _GRAD)
    lam = (np.ones((3, 3)) + np.eye(3)) / 12.0
    local = np.empty((g.shape[0], 3, 3))
    for p, (a, b) in enumerate(_LOCAL_EDGES):
        for q, (c, d) in enumerate(_LOCAL_EDGES):
            local[:, p, q] = area * (
                lam[a, c] * dots[:, b, d]
                - lam[a, d] * dots[:, b, c]
                - lam[b, c] * dots[:, a, d]
                + lam[b, d] * dots[:, a, c]
            )
    slots = face_cofaces(m)
    rows = np.repeat(slots, 3, axis=1).ravel()
    cols = np.tile(slots, (1, 3)).ravel()
    mat = sp.csr_matrix((local.ravel(), (rows, cols)), shape=(m.count(1), m.count(1)))
    return ((mat + mat.T) * 0.5).tocsr()


@dataclass(frozen=True, eq=False)
class BoundaryCalculus:
    """Operator bundle on a surface mesh and its boundary circles.

    ``d``, ``M``, ``tr``, ``B`` are tuples indexed by degree; ``dstar`` and
    ``nml`` are dicts keyed by the degree of their argument (only 1).
    """

    mesh: Mesh
    boundary: Mesh | None
    d: tuple[sp.csr_matrix, ...]
    M: tuple[sp.csr_matrix, ...]
    tr: tuple[sp.csr_matrix, ...]
    B: tuple[sp.csr_matrix, ...]
    dstar: dict[int, sp.csr_matrix]
    nml: dict[int, sp.csr_matrix]
    d_boundary: sp.csr_matrix
    dstar_boundary: sp.csr_matrix
    boundary_vertices: np.ndarray
    interior_vertices: np.ndarray
    boundary_edges: np.ndarray
    components: Components
    areas: np.ndarray
    cache: dict = field(default_factory=dict, repr=False)
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    @property
    def n_vertices(self) -> int:
        return self.mesh.n_vertices

    @property
    def n_edges(self) -> int:
        return self.mesh.count(1)

    @property
    def n_boundary(self) -> int:
        return self.boundary_vertices.size

    @property
    def m0(self) -> np.ndarray:
        return self.M[0].diagonal()

    @property
    def b0(self) -> np.ndarray:
        return self.B[0].diagonal()

    @property
    def residual(self) -> sp.csr_matrix:
        """``d0^T M1``: the weak divergence shared by dstar and nml."""
        return self.cached("residual", lambda: (self.d[0].T @ self.M[1]).tocsr())

    @property
    def stiffness(self) -> sp.csr_matrix:
        """``d0^T M1 d0``, the P1 stiffness matrix."""
        return self.cached("stiffness", lambda: (self.residual @ self.d[0]).tocsr())

    def cached(self, key, build):
        with self.lock:
            if key not in self.cache:
                self.cache[key] = build()
            return self.cache[key]


def build_calculus(m: Mesh) -> BoundaryCalculus:
    """Assemble every operator of the bundle; deterministic in the mesh."""
    if m.dim != 2:
        raise UnsupportedDegree("build_calculus supports surface meshes only")
    check_volumes(m)
    nv, ne = m.n_vertices, m.count(1)
    d0 = incidence(m, 0)
    d1 = incidence(m, 1)
    areas = m.volumes()
    m0 = np.bincount(m.top.ravel(), weights=np.repeat(areas / 3.0, 3), minlength=nv)
    M0 = sp.diags(m0).tocsr()
    M1 = whitney_mass(m)
    M2 = sp.diags(1.0 / areas).tocsr()

    bmesh = boundary_mesh(m)
    bverts = m.boundary_vertices
    bedges = m.boundary_faces
    nb = bverts.size
    interior = np.setdiff1d(np.arange(nv), bverts)
    tr0 = sp.csr_matrix((np.ones(nb), (np.arange(nb), bverts)), shape=(nb, nv))
    tr1 = sp.csr_matrix((np.ones(bedges.size), (np.arange(bedges.size), bedges)), shape=(bedges.size, ne))
    if bmesh is not None:
        lengths = np.sqrt(bmesh.metric[:, 0, 0])
        b0 = np.bincount(bmesh.top.ravel(), weights=np.repeat(lengths / 2.0, 2), minlength=nb)
        db = incidence(bmesh, 0)
        B1 = sp.diags(1.0 / lengths).tocsr()
    else:
        b0 = np.zeros(0)
        db = sp.csr_matrix((0, 0))
        B1 = sp.csr_matrix((0, 0))
    B0 = sp.diags(b0).tocsr()

    residual = (d0.T @ M1).tocsr()
    interior_mask = np.ones(nv)
    interior_mask[bverts] = 0.0
    dstar1 = (sp.diags(interior_mask / m0) @ residual).tocsr()
    nml1 = (sp.diags(1.0 / b0) @ tr0 @ residual).tocsr() if nb else sp.csr_matrix((0, ne))
    dstar_b = (sp.diags(1.0 / b0) @ db.T @ B1).tocsr() if nb else sp.csr_matrix((0, 0))

    calc = BoundaryCalculus(
        mesh=m,
        boundary=bmesh,
        d=(d0, d1),
        M=(M0, M1, M2),
        tr=(tr0, tr1),
        B=(B0, B1),
        dstar={1: dstar1},
        nml={1: nml1},
        d_boundary=db,
        dstar_boundary=dstar_b,
        boundary_vertices=bverts,
        interior_vertices=interior,
        boundary_edges=bedges,
        components=connected_components(m),
        areas=areas,
    )
    calc.cache["residual"] = residual
    return calc


def _vals(x, degree: int | None = None) -> np.ndarray:
    if isinstance(x, Cochain):
        if degree is not None and x.degree != degree:
            raise UnsupportedDegree(f"expected a degree-{degree} cochain, got degree {x.degree}")
        return x.values
    return np.asarray(x, dtype=float)


def inner_product(c: BoundaryCalculus, a: Cochain, b: Cochain) -> float:
    """``a^T M[k] b`` (``B[k]`` for boundary cochains)."""
    if a.degree != b.degree or a.boundary != b.boundary:
        raise DegreeMismatch(f"degrees {a.degree} and {b.degree} differ")
    mats = c.B if a.boundary else c.M
    if a.degree >= len(mats):
        raise UnsupportedDegree(f"no mass matrix in degree {a.degree}")
    return float(a.values @ (mats[a.degree] @ b.values))


def codifferential(c: BoundaryCalculus, b: Cochain) -> Cochain:
    if b.degree not in c.dstar:
        raise UnsupportedDegree(f"codifferential not implemented in degree {b.degree}")
    return Cochain(b.degree - 1, c.dstar[b.degree] @ b.values)


def normal_trace(c: BoundaryCalculus, b: Cochain) -> Cochain:
    if b.degree not in c.nml:
        raise UnsupportedDegree(f"normal trace not implemented in degree {b.degree}")
    return Cochain(b.degree - 1, c.nml[b.degree] @ b.values, boundary=True)


def green_residual(c: BoundaryCalculus, lam: np.ndarray, beta: np.ndarray) -> tuple[float, float]:
    """(|LHS - RHS|, sum of the magnitudes of the three pairings) of the discrete Green identity."""
    grad = (c.d[0] @ lam) @ (c.M[1] @ beta)
    div = lam @ (c.M[0] @ (c.dstar[1] @ beta))
    rhs = (c.tr[0] @ lam) @ (c.B[0] @ (c.nml[1] @ beta))
    return abs(grad - div - rhs), abs(grad) + abs(div) + abs(rhs)


def edge_integrals(m: Mesh, form) -> np.ndarray:
    """Integrate a 1-form given as ``form(points) -> covectors`` along each edge (Simpson rule)."""
    e = m.simplices[1]
    a, b = m.vertices[e[:, 0]], m.vertices[e[:, 1]]
    t = b - a
    total = np.zeros(len(e))
    for s, w in ((0.0, 1 / 6), (0.5, 4 / 6), (1.0, 1 / 6)):
        total += w * np.einsum("ij,ij->i", form(a + s * t), t)
    return total


def export_matrix_market(c: BoundaryCalculus, directory: str | Path) -> list[Path]:
    """Write every operator to ``directory`` as Matrix Market files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    named = {
        "d0": c.d[0], "d1": c.d[1], "M0": c.M[0], "M1": c.M[1], "M2": c.M[2],
        "tr0": c.tr[0], "tr1": c.tr[1], "B0": c.B[0], "B1": c.B[1],
        "dstar1": c.dstar[1], "nml1": c.nml[1], "d_boundary": c.d_boundary,
    }
    paths = []
    for name, mat in named.items():
        path = directory / f"{name}.mtx"
        scipy.io.mmwrite(str(path), sp.coo_matrix(mat))
        paths.append(path)
    return paths
