"""Built-in analytic mesh families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplicial import Mesh, ValidationError, from_simplices, oriented_triangles


def annulus(r_in: float = 1.0, r_out: float = 2.0, n_radial: int = 8, n_angular: int = 64) -> Mesh:
    """Structured triangulation of {r_in <= r <= r_out} in the plane."""
    if not 0 < r_in < r_out or n_radial < 1 or n_angular < 3:
        raise ValidationError("bad annulus parameters")
    radii = np.linspace(r_in, r_out, n_radial + 1)
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    verts = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
    tris = []
    for i in range(n_radial):
        for j in range(n_angular):
            a, b = i * n_angular + j, (i + 1) * n_angular + j
            c, d = (i + 1) * n_angular + (j + 1) % n_angular, i * n_angular + (j + 1) % n_angular
            tris += [(a, b, c), (a, c, d)]
    return from_simplices(verts, np.array(tris))


def _stitch(inner: list[int], inner_angles: np.ndarray, outer: list[int], outer_angles: np.ndarray) -> list:
    """Triangulate the band between two closed rings by an angular merge walk."""
    tris = []
    ni, no = len(inner), len(outer)
    i = j = 0
    while i < ni or j < no:
        next_in = inner_angles[i + 1] if i < ni else np.inf
        next_out = outer_angles[j + 1] if j < no else np.inf
        if next_out <= next_in:
            tris.append((inner[i % ni], outer[j % no], outer[(j + 1) % no]))
            j += 1
        else:
            tris.append((inner[i % ni], outer[j % no], inner[(i + 1) % ni]))
            i += 1
    return tris


def disk(radius: float = 1.0, n_rings: int = 6, n_first: int = 6) -> Mesh:
    """Disk triangulated by concentric rings with ``n_first * k`` vertices on ring k."""
    if radius <= 0 or n_rings < 1 or n_first < 3:
        raise ValidationError("bad disk parameters")
    verts = [(0.0, 0.0)]
    rings: list[list[int]] = [[0]]
    for k in range(1, n_rings + 1):
        n = n_first * k
        ang = 2 * np.pi * np.arange(n) / n
        r = radius * k / n_rings
        start = len(verts)
        verts += list(zip(r * np.cos(ang), r * np.sin(ang)))
        rings.append(list(range(start, start + n)))
    tris = []
    first = rings[1]
    for j in range(len(first)):
        tris.append((0, first[j], first[(j + 1) % len(first)]))
    for k in range(1, n_rings):
        a, b = rings[k], rings[k + 1]
        ang_a = 2 * np.pi * np.arange(len(a) + 1) / len(a)
        ang_b = 2 * np.pi * np.arange(len(b) + 1) / len(b)
        tris += _stitch(a, ang_a, b, ang_b)
    return from_simplices(np.array(verts), np.array(tris))


def _orient_outward(verts: np.ndarray, tris: np.ndarray, centre_of) -> np.ndarray:
    """Reorder each triangle so that its normal points away from ``centre_of(centroid)``."""
    p = verts[tris]
    normal = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    centroid = p.mean(axis=1)
    out = centroid - centre_of(centroid)
    flip = np.einsum("ij,ij->i", normal, out) < 0
    tris = tris.copy()
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def sphere(subdiv: int = 2, radius: float = 1.0) -> Mesh:
    """Icosphere: a subdivided icosahedron projected to the sphere."""
    phi = (1 + 5**0.5) / 2
    verts = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
             (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
             (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    pts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdiv):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = pts[a] + pts[b]
                pts.append(m / np.linalg.norm(m))
                cache[key] = len(pts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    v = radius * np.array(pts)
    tris = _orient_outward(v, np.array(faces), lambda c: np.zeros_like(c))
    return from_simplices(v, tris)


def cylinder_band(n_axial: int = 8, n_angular: int = 48, radius: float = 1.0, height: float = 1.0) -> Mesh:
    """Flat cylinder S^1 x [0, height] embedded in R^3, with two boundary circles."""
    if n_axial < 1 or n_angular < 3 or radius <= 0 or height <= 0:
        raise ValidationError("bad cylinder parameters")
    z = np.linspace(0.0, height, n_axial + 1)
    theta = 2 * np.pi * np.arange(n_angular) / n_angular
    zz, tt = np.meshgrid(z, theta, indexing="ij")
    verts = np.column_stack([radius * np.cos(tt).ravel(), radius * np.sin(tt).ravel(), zz.ravel()])
    tris = []
    for i in range(n_axial):
        for j in range(n_angular):
            a, b = i * n_angular + j, (i + 1) * n_angular + j
            c, d = (i + 1) * n_angular + (j + 1) % n_angular, i * n_angular + (j + 1) % n_angular
            tris += [(a, b, c), (a, c, d)]
    axis = lambda c: np.column_stack([np.zeros(len(c)), np.zeros(len(c)), c[:, 2]])  # noqa: E731
    return from_simplices(verts, _orient_outward(verts, np.array(tris), axis))


def uv_sphere(n_lat: int = 8, n_lon: int = 24, radius: float = 1.0) -> tuple[np.ndarray, np.ndarray, list[list[int]]]:
    """Latitude-longitude sphere: vertices, outward triangles and the ring index lists."""
    verts = [(0.0, 0.0, radius)]
    rings: list[list[int]] = [[0]]
    lon = 2 * np.pi * np.arange(n_lon) / n_lon
    for k in range(1, n_lat):
        th = np.pi * k / n_lat
        start = len(verts)
        verts += [(radius * np.sin(th) * np.cos(p), radius * np.sin(th) * np.sin(p), radius * np.cos(th)) for p in lon]
        rings.append(list(range(start, start + n_lon)))
    verts.append((0.0, 0.0, -radius))
    rings.append([len(verts) - 1])
    tris = []
    for k in range(n_lat):
        a, b = rings[k], rings[k + 1]
        for j in range(n_lon):
            if len(a) == 1:
                tris.append((a[0], b[j], b[(j + 1) % n_lon]))
            elif len(b) == 1:
                tris.append((a[j], b[0], a[(j + 1) % n_lon]))
            else:
                tris += [(a[j], b[j], b[(j + 1) % n_lon]), (a[j], b[(j + 1) % n_lon], a[(j + 1) % n_lon])]
    v = np.array(verts)
    return v, _orient_outward(v, np.array(tris), lambda c: np.zeros_like(c)), rings


@dataclass(frozen=True)
class SplitSurface:
    """A closed surface cut along a circle into two pieces sharing that circle."""

    whole: Mesh
    sides: tuple[Mesh, Mesh]
    vertex_maps: tuple[np.ndarray, np.ndarray]
    vertex_pairs: np.ndarray


def split_sphere(n_lat: int = 8, n_lon: int = 24, radius: float = 1.0) -> SplitSurface:
    """UV sphere split along the equator into two disks.

    ``vertex_pairs`` lists (side-1 vertex, side-2 vertex) for the shared circle.
    """
    if n_lat < 2 or n_lat % 2 or n_lon < 3:
        raise ValidationError("split_sphere needs an even n_lat >= 2 and n_lon >= 3")
    verts, tris, rings = uv_sphere(n_lat, n_lon, radius)
    whole = from_simplices(verts, tris)
    half = n_lat // 2
    north = {v for ring in rings[: half + 1] for v in ring}
    south = {v for ring in rings[half:] for v in ring}
    sides, maps = [], []
    for keep in (north, south):
        mask = np.array([all(int(v) in keep for v in t) for t in tris])
        glob = np.array(sorted(keep), dtype=np.int64)
        local = {int(g): i for i, g in enumerate(glob)}
        sub = np.vectorize(local.__getitem__)(tris[mask])
        sides.append(from_simplices(verts[glob], sub))
        maps.append(glob)
    equator = rings[half]
    pos1 = {int(g): i for i, g in enumerate(maps[0])}
    pos2 = {int(g): i for i, g in enumerate(maps[1])}
    pairs = np.array([(pos1[g], pos2[g]) for g in equator], dtype=np.int64)
    return SplitSurface(whole, (sides[0], sides[1]), (maps[0], maps[1]), pairs)


def glue_meshes(m1: Mesh, m2: Mesh, vertex_pairs: np.ndarray, reverse_orientation: bool = True) -> tuple[Mesh, np.ndarray, np.ndarray]:
    """Union of two meshes with matched boundary vertices identified.

    Returns (glued mesh, side-1 vertex map, side-2 vertex map) into the glued
    vertex numbering. When ``reverse_orientation`` is False the two sides
    induce the same orientation on the shared circle, so side 2 is flipped.
    """
    pairs = np.asarray(vertex_pairs, dtype=np.int64)
    map1 = np.arange(m1.n_vertices)
    map2 = np.full(m2.n_vertices, -1, dtype=np.int64)
    map2[pairs[:, 1]] = pairs[:, 0]
    fresh = np.flatnonzero(map2 < 0)
    map2[fresh] = m1.n_vertices + np.arange(fresh.size)
    verts = np.concatenate([m1.vertices, m2.vertices[fresh]], axis=0)
    t1 = oriented_triangles(m1)
    t2 = oriented_triangles(m2)
    if not reverse_orientation:
        t2 = t2[:, [0, 2, 1]]
    tris = np.concatenate([map1[t1], map2[t2]], axis=0)
    return from_simplices(verts, tris), map1, map2


def disjoint_union(*meshes: Mesh) -> Mesh:
    """Disjoint union of planar or embedded meshes (coordinates kept as given)."""
    verts, tris, offset = [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(oriented_triangles(m) + offset)
        offset += m.n_vertices
    return from_simplices(np.concatenate(verts), np.concatenate(tris))


BUILTINS = {
    "annulus": annulus,
    "disk": disk,
    "sphere": sphere,
    "cylinder_band": cylinder_band,
}


def from_spec(spec: str) -> Mesh:
    """Build a mesh from ``name`` or ``name:key=value,key=value``."""
    name, _, params = spec.partition(":")
    if name not in BUILTINS:
        raise ValidationError(f"unknown builtin mesh {name!r}")
    kwargs = {}
    for item in filter(None, params.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"bad builtin parameter {item!r}")
        kwargs[key.strip()] = int(value) if value.strip().lstrip("-").isdigit() else float(value)
    try:
        return BUILTINS[name](**kwargs)
    except TypeError as exc:
        raise ValidationError(str(exc)) from exc
