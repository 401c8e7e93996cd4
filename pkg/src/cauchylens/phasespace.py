"""Cauchy-data phase space: symplectic form, CHH decomposition, gauge directions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg as la

from . import hodge
from .calculus import BoundaryCalculus, MeshMismatch
from .simplicial import connected_components
from .weyl import SymplecticSpace

TOL_GAUSS = 1e-9


class GaussViolation(ValueError):
    """Electric data do not satisfy ``-dstar E = rho``."""


class InvalidCut(ValueError):
    """A flux cut does not separate the boundary as required."""


def _arr(x, n: int | None = None) -> np.ndarray:
    out = np.asarray(x, dtype=float)
    if n is not None and out.shape != (n,):
        raise MeshMismatch(f"expected a vector of length {n}, got shape {out.shape}")
    return out


@dataclass(frozen=True)
class InitialData:
    """Cauchy data (A, E) with charge density rho on the vertices."""

    A: np.ndarray
    E: np.ndarray
    rho: np.ndarray

    @classmethod
    def homogeneous(cls, c: BoundaryCalculus, A=None, E=None) -> "InitialData":
        ne = c.n_edges
        A = np.zeros(ne) if A is None else _arr(A, ne)
        E = np.zeros(ne) if E is None else _arr(E, ne)
        return cls(A, E, np.zeros(c.n_vertices))

    def __add__(self, other: "InitialData") -> "InitialData":
        return InitialData(self.A + other.A, self.E + other.E, self.rho + other.rho)

    def __sub__(self, other: "InitialData") -> "InitialData":
        return InitialData(self.A - other.A, self.E - other.E, self.rho - other.rho)

    def __mul__(self, s: float) -> "InitialData":
        return InitialData(s * self.A, s * self.E, s * self.rho)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"A": self.A.tolist(), "E": self.E.tolist(), "rho": self.rho.tolist()}

    @classmethod
    def from_json(cls, doc: dict, c: BoundaryCalculus) -> "InitialData":
        A = _arr(doc["A"], c.n_edges)
        E = _arr(doc["E"], c.n_edges)
        rho = _arr(doc["rho"], c.n_vertices) if doc.get("rho") is not None else np.zeros(c.n_vertices)
        return cls(A, E, rho)


@dataclass(frozen=True)
class CHHCoords:
    """Closed-loop pair (F, H) of tangential coclosed 1-cochains and surface pair (f, h) in LG."""

    F: np.ndarray
    H: np.ndarray
    f: np.ndarray
    h: np.ndarray

    def __add__(self, o: "CHHCoords") -> "CHHCoords":
        return CHHCoords(self.F + o.F, self.H + o.H, self.f + o.f, self.h + o.h)

    def __sub__(self, o: "CHHCoords") -> "CHHCoords":
        return CHHCoords(self.F - o.F, self.H - o.H, self.f - o.f, self.h - o.h)

    def __mul__(self, s: float) -> "CHHCoords":
        return CHHCoords(s * self.F, s * self.H, s * self.f, s * self.h)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {k: getattr(self, k).tolist() for k in ("F", "H", "f", "h")}

    @classmethod
    def from_json(cls, doc: dict) -> "CHHCoords":
        return cls(*(np.asarray(doc[k], dtype=float) for k in ("F", "H", "f", "h")))


@dataclass(frozen=True)
class GaugeParameter:
    """A boundary function in LG, parametrising a large gauge direction."""

    lam: np.ndarray

    @classmethod
    def checked(cls, c: BoundaryCalculus, lam, tol: float = 1e-9) -> "GaugeParameter":
        lam = _arr(lam, c.n_boundary)
        _, const = hodge.split_boundary_function(c, lam)
        if np.abs(const).max(initial=0.0) > tol * max(1.0, np.abs(lam).max(initial=0.0)):
            raise ValueError("gauge parameter has a locally constant component")
        return cls(lam)


def _lam(x) -> np.ndarray:
    return x.lam if isinstance(x, GaugeParameter) else np.asarray(x, dtype=float)


# ---------------------------------------------------------------- symplectic form


def sigma(c: BoundaryCalculus, d1: InitialData, d2: InitialData) -> float:
    """``<A1, E2>_M1 - <A2, E1>_M1``."""
    ne = c.n_edges
    if d1.A.shape != (ne,) or d2.A.shape != (ne,):
        raise MeshMismatch("data built on a different mesh")
    M1 = c.M[1]
    return float(d1.A @ (M1 @ d2.E) - d2.A @ (M1 @ d1.E))


def gauss_defect(c: BoundaryCalculus, data: InitialData) -> tuple[float, float]:
    """Mass-weighted residual of ``-dstar E = rho`` and its scale."""
    res = c.m0 * (c.dstar[1] @ data.E + data.rho)
    absE = abs(c.d[0]).T @ (abs(c.M[1]) @ np.abs(data.E))
    scale = float(np.sum(c.m0 * np.abs(data.rho)) + np.sum(absE))
    return float(np.sum(np.abs(res))), scale


def check_gauss(c: BoundaryCalculus, data: InitialData, tol: float = TOL_GAUSS) -> None:
    defect, scale = gauss_defect(c, data)
    if defect > tol * scale + 1e-300:
        raise GaussViolation(f"Gauss constraint violated: defect {defect:.3e} (scale {scale:.3e})")


def charge_flux(c: BoundaryCalculus, rho) -> np.ndarray:
    """f^rho: per component, total charge over boundary length, on the boundary vertices."""
    rho = np.asarray(rho, dtype=float)
    ncomp = c.components.count
    charge = np.bincount(c.components.vertex_labels, weights=c.m0 * rho, minlength=ncomp)
    blabels = hodge.boundary_component_labels(c)
    length = np.bincount(blabels, weights=c.b0, minlength=ncomp)
    per = np.divide(charge, length, out=np.zeros(ncomp), where=length > 0)
    return per[blabels]


def chh_decompose(c: BoundaryCalculus, data: InitialData) -> CHHCoords:
    """The affine CHH map on data satisfying the Gauss constraint."""
    check_gauss(c, data)
    A_c, _ = hodge.coclosed_representative(c, data.A)
    split_a = hodge.tangential_hodge_helmholtz(c, A_c)
    split_e = hodge.tangential_hodge_helmholtz(c, data.E)
    f = split_a.potential[c.boundary_vertices]
    h = c.nml[1] @ data.E - charge_flux(c, data.rho)
    return CHHCoords(split_a.tangential, split_e.tangential, f, h)


def chh_reconstruct(c: BoundaryCalculus, coords: CHHCoords, rho=None) -> InitialData:
    """Inverse of chh_decompose for the given charge density."""
    rho = np.zeros(c.n_vertices) if rho is None else _arr(rho, c.n_vertices)
    alpha = hodge.harmonic_extension(c, coords.f)
    eps = hodge.solve_neumann(c, rho, coords.h + charge_flux(c, rho))
    return InitialData(coords.F + c.d[0] @ alpha, coords.H + c.d[0] @ eps, rho)


def sigma_cs(c: BoundaryCalculus, a: CHHCoords, b: CHHCoords) -> float:
    """Sum of the closed-loop and surface symplectic forms."""
    M1, B0 = c.M[1], c.B[0]
    closed = a.F @ (M1 @ b.H) - b.F @ (M1 @ a.H)
    surface = a.f @ (B0 @ b.h) - b.f @ (B0 @ a.h)
    return float(closed + surface)


def gauge_generator(c: BoundaryCalculus, lam) -> InitialData:
    """``(d Lam, 0)`` with Lam the harmonic extension of lam."""
    Lam = hodge.harmonic_extension(c, _lam(lam))
    return InitialData.homogeneous(c, A=c.d[0] @ Lam)


# ---------------------------------------------------------------- radical


def coclosed_space_basis(c: BoundaryCalculus) -> np.ndarray:
    """Orthonormal basis (columns) of ``ker dstar`` on 1-cochains."""
    def build():
        rows = c.residual[c.interior_vertices].toarray()
        if rows.shape[0] == 0:
            return np.eye(c.n_edges)
        return la.null_space(rows, rcond=1e-12)
    return c.cached("coclosed_space", build)


def radical_basis(c: BoundaryCalculus, rank_tol: float = 1e-9) -> list[InitialData]:
    """Null space of sigma on ``Omega^1 ⊕ ker dstar``.

    sigma is block anti-diagonal in (A, E) with blocks ``Q^T M1`` and
    ``-Q^T M1`` (Q a basis of ker dstar), so its kernel is
    ``ker(Q^T M1) ⊕ ker(M1 Q)``; both are computed by SVD.
    """
    Q = coclosed_space_basis(c)
    M1Q = np.asarray(c.M[1] @ Q)
    a_null = la.null_space(M1Q.T, rcond=rank_tol)
    e_null = la.null_space(M1Q, rcond=rank_tol)
    out = [InitialData.homogeneous(c, A=a) for a in a_null.T]
    out += [InitialData.homogeneous(c, E=Q @ e) for e in e_null.T]
    return out


# ---------------------------------------------------------------- flux observables


def boundary_circles(c: BoundaryCalculus) -> list[np.ndarray]:
    """Boundary vertex positions (indices into the boundary vertex list) of each circle."""
    if c.boundary is None:
        return []
    return list(connected_components(c.boundary).vertex_sets)


def flux_observable(c: BoundaryCalculus, circles: Iterable[int] | None = None, region=None) -> tuple[InitialData, np.ndarray]:
    """``(d Lam, 0)`` for a 0/1 step profile Lam; returns (data, Lam).

    Either ``circles`` (indices of boundary circles where Lam = 1, a step
    right at the boundary) or ``region`` (vertices where Lam = 1) is given.
    The cut must give Lam a constant value on each boundary circle and must
    separate the boundary of some component.
    """
    circ = boundary_circles(c)
    Lam = np.zeros(c.n_vertices)
    if circles is not None:
        for k in circles:
            if not 0 <= k < len(circ):
                raise InvalidCut(f"no boundary circle {k}")
            Lam[c.boundary_vertices[circ[k]]] = 1.0
    elif region is not None:
        Lam[np.asarray(list(region), dtype=np.int64)] = 1.0
    else:
        raise InvalidCut("give circles or region")
    trace = Lam[c.boundary_vertices]
    for ring in circ:
        if np.ptp(trace[ring]) != 0:
            raise InvalidCut("step profile is not constant on a boundary circle")
    labels = hodge.boundary_component_labels(c)
    if not any(np.ptp(trace[labels == k]) > 0 for k in np.unique(labels)):
        raise InvalidCut("cut does not separate any boundary circles")
    return InitialData.homogeneous(c, A=c.d[0] @ Lam), Lam


# ---------------------------------------------------------------- localisation


def support_of(data: InitialData, rel: float = 1e-12) -> frozenset[int]:
    """Edges carrying a non-negligible coefficient of A or E."""
    mag = np.maximum(np.abs(data.A), np.abs(data.E))
    top = mag.max(initial=0.0)
    if top == 0.0:
        return frozenset()
    return frozenset(np.flatnonzero(mag >= rel * top).tolist())


def is_localised_in(data: InitialData, region: Iterable[int]) -> bool:
    return support_of(data) <= frozenset(region)


def triangle_ring(c: BoundaryCalculus, edges: Iterable[int]) -> frozenset[int]:
    """Edges sharing a triangle with any of the given edges (including themselves)."""
    edges = np.fromiter(edges, dtype=np.int64)
    if edges.size == 0:
        return frozenset()
    slots = c.mesh._face_cofaces
    mark = np.zeros(c.n_edges, dtype=bool)
    mark[edges] = True
    hit = mark[slots].any(axis=1)
    return frozenset(np.unique(slots[hit]).tolist())


def edges_away_from_boundary(c: BoundaryCalculus, rings: int = 1) -> np.ndarray:
    """Edges none of whose triangles touches a boundary vertex, after growing the boundary by ``rings``."""
    near = np.zeros(c.n_vertices, dtype=bool)
    near[c.boundary_vertices] = True
    tris = c.mesh.top
    for _ in range(rings):
        near[tris[near[tris].any(axis=1)].ravel()] = True
    slots = c.mesh._face_cofaces
    bad = np.zeros(c.n_edges, dtype=bool)
    bad[slots[near[tris].any(axis=1)].ravel()] = True
    return np.flatnonzero(~bad)


# ---------------------------------------------------------------- coordinates


class PhaseSpace:
    """Orthonormal coordinates on the reduced phase space of one surface.

    Labels are ``[F, H, f, h]`` coefficient vectors in an M1-orthonormal basis
    of the tangential coclosed space and a B0-orthonormal basis of LG, so that
    the CHH symplectic form is the canonical Darboux matrix.
    """

    def __init__(self, c: BoundaryCalculus, lg: np.ndarray | None = None, name: str = ""):
        self.calculus = c
        self.tangential = hodge.tangential_coclosed_basis(c)
        self.lg = hodge.lg_basis(c) if lg is None else np.asarray(lg, dtype=float)
        self.n_closed = self.tangential.shape[1]
        self.n_surface = self.lg.shape[1]
        self.space = SymplecticSpace.darboux([("F", "H", self.n_closed), ("f", "h", self.n_surface)], name=name)

    @property
    def dim(self) -> int:
        return self.space.dim

    def to_vector(self, x: CHHCoords) -> np.ndarray:
        c = self.calculus
        T, U = self.tangential, self.lg
        return np.concatenate([
            T.T @ (c.M[1] @ x.F), T.T @ (c.M[1] @ x.H),
            U.T @ (c.B[0] @ x.f), U.T @ (c.B[0] @ x.h),
        ])

    def from_vector(self, v) -> CHHCoords:
        v = self.space.check_label(v)
        s = self.space.slice
        T, U = self.tangential, self.lg
        return CHHCoords(T @ v[s("F")], T @ v[s("H")], U @ v[s("f")], U @ v[s("h")])

    def label(self, data: InitialData) -> np.ndarray:
        return self.to_vector(chh_decompose(self.calculus, data))

    def data(self, v, rho=None) -> InitialData:
        return chh_reconstruct(self.calculus, self.from_vector(v), rho)

    def surface_coords(self, u) -> np.ndarray:
        """LG coordinates of a boundary function."""
        return self.lg.T @ (self.calculus.B[0] @ np.asarray(u, dtype=float))

    def gauge_label(self, lam) -> np.ndarray:
        """Label of ``G(lam)``: (0, 0, lam, 0)."""
        v = self.space.zero()
        v[self.space.slice("f")] = self.surface_coords(_lam(lam))
        return v

    def gauge_functionals(self) -> np.ndarray:
        """Rows ``sigma(., G(e_i))`` for the LG basis e_i."""
        v = np.zeros((self.n_surface, self.dim))
        v[:, self.space.slice("f")] = np.eye(self.n_surface)
        return np.asarray(self.space.sigma_matrix @ v.T).T if self.n_surface else v


@dataclass(frozen=True)
class Background:
    """A background configuration; its offset is the label of its CHH image."""

    data: InitialData

    def offset(self, ps: PhaseSpace) -> np.ndarray:
        return ps.label(self.data)
