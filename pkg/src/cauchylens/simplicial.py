"""Oriented simplicial meshes of compact surfaces with boundary.

Simplices are stored with sorted vertex indices. The orientation of each top
simplex (and of each boundary face) is carried as a separate sign relative to
that sorted order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc


class MeshError(ValueError):
    """Base class for mesh input errors."""


class ParseError(MeshError):
    """The file could not be parsed under the declared format."""


class ValidationError(MeshError):
    """The mesh violates a structural invariant."""


class DegenerateSimplex(MeshError):
    """A top simplex has (numerically) zero volume under the metric."""


def _permutation_sign(rows: np.ndarray) -> np.ndarray:
    """Sign of the permutation sorting each row (rows have distinct entries)."""
    n = rows.shape[1]
    inversions = np.zeros(rows.shape[0], dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            inversions += rows[:, i] > rows[:, j]
    return np.where(inversions % 2 == 0, 1, -1).astype(np.int8)


def _edge_grams(top: np.ndarray, vertices: np.ndarray, metric: np.ndarray | None) -> np.ndarray:
    """Gram matrices of the edge vectors (x_k - x_0) of each sorted simplex."""
    base = vertices[top[:, 0]]
    vecs = np.stack([vertices[top[:, k]] - base for k in range(1, top.shape[1])], axis=2)
    if metric is None:
        return np.einsum("nai,naj->nij", vecs, vecs)
    return np.einsum("nai,nab,nbj->nij", vecs, metric, vecs)


@dataclass(frozen=True, eq=False)
class Mesh:
    """A validated oriented simplicial complex.

    ``simplices[k]`` holds the k-simplices as sorted index rows in lexicographic
    order. ``orientation`` gives the sign of each top simplex and
    ``boundary_orientation`` the induced (outward-normal-first) sign of each
    boundary face. ``metric`` holds, per top simplex, the Gram matrix of its
    edge vectors ``x_k - x_0`` (k = 1..dim) under the Riemannian metric.
    """

    dim: int
    vertices: np.ndarray
    simplices: tuple[np.ndarray, ...]
    orientation: np.ndarray
    boundary_faces: np.ndarray
    boundary_orientation: np.ndarray
    metric: np.ndarray
    parent_vertices: np.ndarray | None = None
    _face_cofaces: np.ndarray = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def count(self, k: int) -> int:
        return self.simplices[k].shape[0]

    @property
    def top(self) -> np.ndarray:
        return self.simplices[self.dim]

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** k * self.count(k) for k in range(self.dim + 1))

    @property
    def is_closed(self) -> bool:
        return self.boundary_faces.size == 0

    @property
    def boundary_vertices(self) -> np.ndarray:
        if self.dim == 0 or self.is_closed:
            return np.zeros(0, dtype=np.int64)
        return np.unique(self.simplices[self.dim - 1][self.boundary_faces])

    @property
    def diameter(self) -> float:
        """Bounding-box diagonal, used as the length scale of the mesh."""
        if self.n_vertices == 0:
            return 0.0
        span = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(span))

    def volumes(self) -> np.ndarray:
        """Volumes of the top simplices under the metric."""
        dets = np.linalg.det(self.metric) if self.dim > 0 else np.ones(self.count(0))
        return np.sqrt(np.clip(dets, 0.0, None)) / float(np.prod(np.arange(1, self.dim + 1)))

    def face_index(self, k: int, faces: np.ndarray) -> np.ndarray:
        """Indices of the given sorted k-simplices in ``simplices[k]``."""
        table = self.simplices[k]
        keys = _row_keys(table, self.n_vertices)
        order = np.argsort(keys)
        query = _row_keys(np.sort(np.atleast_2d(faces), axis=1), self.n_vertices)
        pos = np.searchsorted(keys[order], query)
        pos = np.clip(pos, 0, len(order) - 1)
        found = order[pos]
        if np.any(keys[found] != query):
            raise KeyError("face not present in mesh")
        return found


def _row_keys(rows: np.ndarray, n: int) -> np.ndarray:
    keys = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(rows.shape[1]):
        keys = keys * (n + 1) + rows[:, j]
    return keys


def _unique_faces(top: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All codimension-one faces of sorted simplices.

    Returns (faces, face_of_each_slot, incidence_sign_of_each_slot) where slot j
    of a simplex drops vertex j and carries the sign (-1)^j.
    """
    n = top.shape[1]
    slots = [np.delete(top, j, axis=1) for j in range(n)]
    stacked = np.concatenate(slots, axis=0)
    faces, inverse = np.unique(stacked, axis=0, return_inverse=True)
    inverse = inverse.reshape(n, top.shape[0]).T
    signs = np.array([(-1) ** j for j in range(n)], dtype=np.int8)
    return faces, inverse, np.broadcast_to(signs, inverse.shape)


def from_simplices(
    vertices: np.ndarray | Sequence,
    top: np.ndarray | Sequence,
    metric: np.ndarray | None = None,
    dim: int | None = None,
    parent_vertices: np.ndarray | None = None,
    gram: np.ndarray | None = None,
) -> Mesh:
    """Build and validate a mesh from oriented top simplices.

    The orientation of each top simplex is read from the given vertex order.
    ``metric`` holds ambient metric tensors, one (amb, amb) matrix per top
    simplex; None means the flat metric of the coordinates. ``gram`` instead
    supplies the edge Gram matrices directly.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2:
        raise ValidationError("vertices must be a 2D array")
    raw = np.asarray(top, dtype=np.int64)
    if raw.ndim != 2 or raw.shape[0] == 0:
        raise ValidationError("mesh needs at least one top simplex")
    if dim is None:
        dim = raw.shape[1] - 1
    if raw.shape[1] != dim + 1:
        raise ValidationError(f"top simplices must have {dim + 1} vertices")
    if dim not in (1, 2):
        raise ValidationError(f"unsupported mesh dimension {dim}")
    if raw.min() < 0 or raw.max() >= verts.shape[0]:
        raise ValidationError("face references a missing vertex")
    if np.any(np.diff(np.sort(raw, axis=1), axis=1) == 0):
        raise ValidationError("face with repeated vertex")

    used = np.zeros(verts.shape[0], dtype=bool)
    used[raw.ravel()] = True
    if not used.all():
        raise ValidationError(f"dangling vertex {int(np.flatnonzero(~used)[0])} not in any face")

    sign = _permutation_sign(raw)
    sorted_top = np.sort(raw, axis=1)
    order = np.lexsort(sorted_top.T[::-1])
    sorted_top = sorted_top[order]
    sign = sign[order]
    if metric is not None:
        metric = np.asarray(metric, dtype=float)[order]
    if gram is not None:
        gram = np.asarray(gram, dtype=float)[order]
    if np.any(np.all(np.diff(sorted_top, axis=0) == 0, axis=1)):
        raise ValidationError("duplicate top simplex")

    faces, slot_face, slot_sign = _unique_faces(sorted_top)
    signed = slot_sign * sign[:, None]
    n_faces = faces.shape[0]
    counts = np.bincount(slot_face.ravel(), minlength=n_faces)
    if np.any(counts > 2):
        raise ValidationError("non-manifold face shared by more than two top simplices")
    total = np.bincount(slot_face.ravel(), weights=signed.ravel(), minlength=n_faces)
    interior = counts == 2
    if np.any(total[interior] != 0):
        raise ValidationError("inconsistent orientation across an interior face")
    boundary_faces = np.flatnonzero(counts == 1)
    boundary_orientation = total[boundary_faces].astype(np.int8)

    simplices: list[np.ndarray] = [np.arange(verts.shape[0], dtype=np.int64)[:, None]]
    if dim == 2:
        simplices.append(faces)
    simplices.append(sorted_top)

    if dim == 2 and boundary_faces.size:
        bedges = faces[boundary_faces]
        nb = np.bincount(bedges.ravel(), minlength=verts.shape[0])
        tail = np.where(boundary_orientation > 0, bedges[:, 0], bedges[:, 1])
        head = np.where(boundary_orientation > 0, bedges[:, 1], bedges[:, 0])
        flow = np.bincount(head, minlength=verts.shape[0]) - np.bincount(tail, minlength=verts.shape[0])
        if np.any((nb != 0) & (nb != 2)) or np.any(flow != 0):
            raise ValidationError("boundary of the boundary is not empty (pinched boundary vertex)")

    if gram is not None:
        grams = gram
    elif metric is None:
        grams = _edge_grams(sorted_top, verts, None)
    else:
        if metric.shape[1:] != (verts.shape[1], verts.shape[1]):
            raise ValidationError("metric must be one ambient-dimension square matrix per top simplex")
        if not np.allclose(metric, np.swapaxes(metric, 1, 2)):
            raise ValidationError("metric must be symmetric")
        if np.any(np.linalg.eigvalsh(metric) <= 0):
            raise ValidationError("metric must be positive definite")
        grams = _edge_grams(sorted_top, verts, metric)

    return Mesh(
        dim=dim,
        vertices=verts,
        simplices=tuple(simplices),
        orientation=sign,
        boundary_faces=boundary_faces,
        boundary_orientation=boundary_orientation,
        metric=grams,
        parent_vertices=parent_vertices,
        _face_cofaces=slot_face,
    )


def face_cofaces(m: Mesh) -> np.ndarray:
    """(n_top, dim+1) indices of the faces of each top simplex (slot j drops vertex j)."""
    return m._face_cofaces


def check_volumes(m: Mesh) -> None:
    """Raise DegenerateSimplex when some top simplex is too thin."""
    threshold = 1e-12 * m.diameter**m.dim
    vols = m.volumes()
    bad = np.flatnonzero(vols < threshold)
    if bad.size:
        raise DegenerateSimplex(f"top simplex {int(bad[0])} has volume {vols[bad[0]]:.3e}")


def boundary_mesh(m: Mesh) -> Mesh | None:
    """The closed (dim-1)-mesh of boundary faces with induced orientation.

    Returns None for closed meshes. ``parent_vertices`` maps local vertex
    indices to indices of ``m``; local indices follow the parent order, so the
    boundary edge list is the parent's boundary edge list relabelled.
    """
    if m.is_closed:
        return None
    if m.dim != 2:
        raise ValidationError("boundary meshes are only built for surfaces")
    parent = m.boundary_vertices
    local = np.full(m.n_vertices, -1, dtype=np.int64)
    local[parent] = np.arange(parent.size)
    edges = m.simplices[1][m.boundary_faces]
    oriented = np.where(m.boundary_orientation[:, None] > 0, edges, edges[:, ::-1])
    lengths2 = edge_lengths(m)[m.boundary_faces] ** 2
    return from_simplices(
        m.vertices[parent],
        local[oriented],
        gram=lengths2.reshape(-1, 1, 1),
        dim=1,
        parent_vertices=parent,
    )


def edge_lengths(m: Mesh) -> np.ndarray:
    """Metric lengths of all edges, taken from the first incident top simplex."""
    if m.dim == 1:
        return np.sqrt(m.metric[:, 0, 0])
    slots = face_cofaces(m)
    out = np.full(m.count(1), np.nan)
    g = m.metric
    per_slot = np.stack([g[:, 0, 0] + g[:, 1, 1] - 2 * g[:, 0, 1], g[:, 1, 1], g[:, 0, 0]], axis=1)
    for j in (2, 1, 0):
        out[slots[:, j]] = per_slot[:, j]
    return np.sqrt(out)


@dataclass(frozen=True)
class Components:
    """Connected components: a label per top simplex and per-component vertex sets."""

    top_labels: np.ndarray
    vertex_labels: np.ndarray
    vertex_sets: tuple[np.ndarray, ...]

    @property
    def count(self) -> int:
        return len(self.vertex_sets)


def connected_components(m: Mesh) -> Components:
    """Components ordered by their smallest vertex index."""
    n = m.n_vertices
    edges = m.simplices[1] if m.dim >= 1 else np.zeros((0, 2), dtype=np.int64)
    graph = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    _, raw = _cc(graph, directed=False)
    first = {}
    for v in range(n):
        first.setdefault(int(raw[v]), len(first))
    labels = np.array([first[int(r)] for r in raw], dtype=np.int64)
    sets = tuple(np.flatnonzero(labels == c) for c in range(len(first)))
    return Components(labels[m.top[:, 0]], labels, sets)


# ---------------------------------------------------------------- file formats


def load_mesh(path: str | Path, format: str | None = None) -> Mesh:
    """Load a triangle mesh from an OFF or JSON file."""
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).upper()
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    if fmt == "OFF":
        return parse_off(text)
    if fmt == "JSON":
        return parse_json(text)
    raise ParseError(f"unknown mesh format {fmt!r}")


def parse_off(text: str) -> Mesh:
    tokens: list[str] = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise ParseError("missing OFF header")
    try:
        nv, nf = int(tokens[1]), int(tokens[2])
        pos = 4
        verts = np.array(tokens[pos : pos + 3 * nv], dtype=float).reshape(nv, 3)
        pos += 3 * nv
        faces = []
        for _ in range(nf):
            k = int(tokens[pos])
            if k != 3:
                raise ParseError("only triangular faces are supported")
            faces.append([int(t) for t in tokens[pos + 1 : pos + 4]])
            pos += 4
    except (IndexError, ValueError) as exc:
        raise ParseError(f"malformed OFF body: {exc}") from exc
    if len(faces) != nf or verts.shape[0] != nv:
        raise ParseError("truncated OFF file")
    return from_simplices(verts, np.array(faces, dtype=np.int64).reshape(-1, 3))


def parse_json(text: str) -> Mesh:
    try:
        doc = json.loads(text)
        dim = int(doc.get("dim", 2))
        verts = np.asarray(doc["vertices"], dtype=float)
        tris = np.asarray(doc["triangles"], dtype=np.int64)
        metric = doc.get("metric")
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed JSON mesh: {exc}") from exc
    if dim != 2:
        raise ValidationError(f"unsupported mesh dimension {dim}")
    if metric is not None:
        metric = np.asarray(metric, dtype=float)
        if verts.shape[1] != 2:
            raise ValidationError("per-triangle metric requires planar coordinates")
        if metric.shape != (tris.shape[0], 2, 2):
            raise ValidationError("metric must hold one 2x2 matrix per triangle")
    return from_simplices(verts, tris, metric=metric)


def oriented_triangles(m: Mesh) -> np.ndarray:
    """Top simplices in an order realising their orientation."""
    tris = m.top.copy()
    flip = m.orientation < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def to_json(m: Mesh) -> str:
    doc = {"dim": m.dim, "vertices": m.vertices.tolist(), "triangles": oriented_triangles(m).tolist()}
    return json.dumps(doc)


def to_off(m: Mesh) -> str:
    verts = m.vertices
    if verts.shape[1] == 2:
        verts = np.column_stack([verts, np.zeros(len(verts))])
    lines = ["OFF", f"{len(verts)} {m.count(2)} {m.count(1)}"]
    lines += [" ".join(repr(float(x)) for x in row) for row in verts]
    lines += ["3 " + " ".join(str(int(i)) for i in row) for row in oriented_triangles(m)]
    return "\n".join(lines) + "\n"
