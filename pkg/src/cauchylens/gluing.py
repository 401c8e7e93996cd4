"""Gluing two surfaces along a shared boundary circle.

Label layouts (all Darboux, surface coordinates in side 1's LG basis):

* ``big``    ``[F1, H1, f1, h1, F2, H2, f2, h2]``, the algebra of both sides
* ``left``   ``[F1, H1, f, h, F2, H2]``, side 1 with side 2's closed sector
* ``right``  ``[F1, H1, F2, H2, f, h]``, side 1's closed sector with side 2
* ``glued``  ``[F1, H1, f, h, F2, H2]``, the glued algebra

Side 2 uses the LG basis of side 1 transported through the vertex match, so
the outward normals being opposite makes ``h2 = -h1`` for data coming from
the closed surface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import hodge
from .calculus import BoundaryCalculus, build_calculus
from .generators import SplitSurface, glue_meshes
from .phasespace import GaussViolation, InitialData, InvalidCut, PhaseSpace, check_gauss
from .simplicial import Mesh, MeshError, load_mesh
from .states import QuasiFreeState
from .weyl import (
    LabelPredicate,
    SpaceMismatch,
    SymplecticMap,
    SymplecticSpace,
    WeylElement,
    weyl_map,
)

TOL_DIAG = 1e-9


class NotDiagonalInvariant(ValueError):
    """A label of the two-sided algebra is not fixed by diagonal large gauge transformations."""


def _edge_map(side: Mesh, whole: Mesh, vmap: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Global edge index and orientation sign of each side edge."""
    e = vmap[side.simplices[1]]
    sign = np.where(e[:, 0] < e[:, 1], 1.0, -1.0)
    return whole.face_index(1, e), sign


def _perm_matrix(target: SymplecticSpace, source: SymplecticSpace, moves) -> sp.csr_matrix:
    """Block-move matrix: ``moves`` lists (target block, source block, sign)."""
    rows, cols, vals = [], [], []
    ti, si = np.arange(target.dim), np.arange(source.dim)
    for tb, sb, s in moves:
        r, c = ti[target.slice(tb)], si[source.slice(sb)]
        if r.size != c.size:
            raise SpaceMismatch(f"block {sb} does not fit {tb}")
        rows.append(r)
        cols.append(c)
        vals.append(np.full(r.size, float(s)))
    if not rows:
        return sp.csr_matrix((target.dim, source.dim))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(target.dim, source.dim)
    )


class GluingSetup:
    """Two sides, their phase spaces, the glued surface and the label maps between them."""

    def __init__(self, mesh1: Mesh, mesh2: Mesh, vertex_pairs, whole: Mesh | None = None, vertex_maps=None):
        pairs = np.asarray(vertex_pairs, dtype=np.int64)
        self.c1, self.c2 = build_calculus(mesh1), build_calculus(mesh2)
        pos1 = {int(v): i for i, v in enumerate(self.c1.boundary_vertices)}
        pos2 = {int(v): i for i, v in enumerate(self.c2.boundary_vertices)}
        try:
            p1 = np.array([pos1[int(a)] for a in pairs[:, 0]])
            p2 = np.array([pos2[int(b)] for b in pairs[:, 1]])
        except KeyError as exc:
            raise InvalidCut(f"matched vertex {exc} is not a boundary vertex") from exc
        if len(set(p1)) != self.c1.n_boundary or len(set(p2)) != self.c2.n_boundary:
            raise InvalidCut("the match must pair every boundary vertex of both sides")
        if not np.allclose(self.c1.b0[p1], self.c2.b0[p2], rtol=1e-10, atol=0):
            raise InvalidCut("matched boundary circles have different edge lengths")
        self.ps1 = PhaseSpace(self.c1, name="1")
        U1 = self.ps1.lg
        U2 = np.zeros_like(U1)
        U2[p2] = U1[p1]
        gram = U2.T @ (self.c2.B[0] @ U2)
        const = hodge.boundary_constant_basis(self.c2).T @ (self.c2.B[0] @ U2)
        if not np.allclose(gram, np.eye(U2.shape[1]), atol=1e-10) or np.abs(const).max(initial=0.0) > 1e-10:
            raise InvalidCut("transported LG basis is not an LG basis of side 2")
        self.ps2 = PhaseSpace(self.c2, lg=U2, name="2")
        self.n_surface = U1.shape[1]
        n1, n2, nS = self.ps1.n_closed, self.ps2.n_closed, self.n_surface

        if whole is None:
            try:
                whole, m1, m2 = glue_meshes(mesh1, mesh2, pairs, reverse_orientation=True)
            except MeshError:
                whole, m1, m2 = glue_meshes(mesh1, mesh2, pairs, reverse_orientation=False)
            vertex_maps = (m1, m2)
        self.whole = whole
        self.cg: BoundaryCalculus = build_calculus(whole)
        self.edge_maps = tuple(_edge_map(m, whole, np.asarray(vm)) for m, vm in zip((mesh1, mesh2), vertex_maps))

        D = SymplecticSpace.darboux
        self.side1, self.side2 = self.ps1.space, self.ps2.space
        self.closed1 = D([("F1", "H1", n1)], name="closed1")
        self.closed2 = D([("F2", "H2", n2)], name="closed2")
        self.big = D([("F1", "H1", n1), ("f1", "h1", nS), ("F2", "H2", n2), ("f2", "h2", nS)], name="big")
        self.left = D([("F1", "H1", n1), ("f", "h", nS), ("F2", "H2", n2)], name="left")
        self.right = D([("F1", "H1", n1), ("F2", "H2", n2), ("f", "h", nS)], name="right")
        self.glued = D([("F1", "H1", n1), ("f", "h", nS), ("F2", "H2", n2)], name="glued")

        same = [("F1", "F1", 1), ("H1", "H1", 1), ("F2", "F2", 1), ("H2", "H2", 1)]
        self.xi21 = SymplecticMap.build(
            _perm_matrix(self.right, self.left, same + [("f", "f", -1), ("h", "h", -1)]), self.left, self.right
        )
        self.xi12 = SymplecticMap.build(
            _perm_matrix(self.left, self.right, same + [("f", "f", -1), ("h", "h", -1)]), self.right, self.left
        )
        self.psi_bc = SymplecticMap.build(
            _perm_matrix(self.glued, self.left, same + [("f", "f", 1), ("h", "h", 1)]), self.left, self.glued
        )
        self.psi_cb = SymplecticMap.build(
            _perm_matrix(self.glued, self.right, same + [("f", "f", -1), ("h", "h", -1)]), self.right, self.glued
        )
        self.embed_left = SymplecticMap.build(
            _perm_matrix(self.big, self.left, same + [("f1", "f", 1), ("h1", "h", 1), ("h2", "h", -1)]),
            self.left, self.big,
        )
        self.embed_right = SymplecticMap.build(
            _perm_matrix(self.big, self.right, same + [("f2", "f", 1), ("h2", "h", 1), ("h1", "h", -1)]),
            self.right, self.big,
        )
        G = np.zeros((nS, self.big.dim))
        G[:, self.big.slice("f1")] = np.eye(nS)
        G[:, self.big.slice("f2")] = np.eye(nS)
        self.diag_functionals = np.asarray(self.big.sigma_matrix @ G.T).T if nS else G
        self.diagonal = LabelPredicate(self.big, self.diag_functionals, tol=TOL_DIAG)

    # ---------------------------------------------------------------- construction
    @classmethod
    def from_split(cls, split: SplitSurface) -> "GluingSetup":
        return cls(split.sides[0], split.sides[1], split.vertex_pairs, whole=split.whole, vertex_maps=split.vertex_maps)

    @classmethod
    def from_files(cls, mesh1: str | Path, mesh2: str | Path, match: str | Path) -> "GluingSetup":
        """Two mesh files and a JSON match ``{"vertex_pairs": [[v1, v2], ...], "reverse_orientation": true}``.

        The orientation flag only affects how the closed surface is assembled;
        the calculus does not depend on triangle orientation.
        """
        doc = json.loads(Path(match).read_text())
        if "vertex_pairs" not in doc:
            raise InvalidCut("match file needs a 'vertex_pairs' list")
        m1, m2 = load_mesh(mesh1), load_mesh(mesh2)
        pairs = np.asarray(doc["vertex_pairs"], dtype=np.int64).reshape(-1, 2)
        whole, g1, g2 = glue_meshes(m1, m2, pairs, reverse_orientation=bool(doc.get("reverse_orientation", True)))
        return cls(m1, m2, pairs, whole=whole, vertex_maps=(g1, g2))

    # ---------------------------------------------------------------- label maps
    def big_label(self, v1, v2) -> np.ndarray:
        return np.concatenate([self.side1.check_label(v1), self.side2.check_label(v2)])

    def won_label(self, v) -> np.ndarray:
        """``(v1, f1, h1, v2, f2, h2) -> (v1, f1 - f2, h1, v2)`` on diagonal-invariant labels."""
        v = self.big.check_label(v)
        if not self.diagonal(v):
            raise NotDiagonalInvariant(f"label defect {self.diagonal.defect(v):.2e}")
        b = self.big.slice
        out = self.glued.zero()
        g = self.glued.slice
        for blk in ("F1", "H1", "F2", "H2"):
            out[g(blk)] = v[b(blk)]
        out[g("f")] = v[b("f1")] - v[b("f2")]
        out[g("h")] = v[b("h1")]
        return out

    def won(self, a: WeylElement) -> WeylElement:
        """Normal form on the glued algebra.

        Each term is multiplied by the diagonal generator ``W(0, (-f2, 0), 0, (-f2, 0))``,
        which is identified with 1, and the Weyl phase of that product is kept.
        """
        if not a.space.same_as(self.big):
            raise SpaceMismatch("won expects an element over the two-sided space")
        if a.is_zero():
            return WeylElement(self.glued)
        V = a.labels
        labels, phases = [], []
        for v in V:
            labels.append(self.won_label(v))
            u = self.big.zero()
            f2 = v[self.big.slice("f2")]
            u[self.big.slice("f1")] = -f2
            u[self.big.slice("f2")] = -f2
            phases.append(np.exp(-0.5j * self.big.sigma(v, u)))
        return WeylElement.from_terms(self.glued, np.array(labels), a.coeffs * np.array(phases))

    def xi_21(self, a: WeylElement) -> WeylElement:
        return weyl_map(self.xi21, a)

    def xi_12(self, a: WeylElement) -> WeylElement:
        return weyl_map(self.xi12, a)

    def psi_bullet_circle(self, a: WeylElement) -> WeylElement:
        return weyl_map(self.psi_bc, a)

    def psi_circle_bullet(self, a: WeylElement) -> WeylElement:
        return weyl_map(self.psi_cb, a)

    # ---------------------------------------------------------------- global data
    def restrict(self, data: InitialData, side: int) -> InitialData:
        idx, sign = self.edge_maps[side - 1]
        c = (self.c1, self.c2)[side - 1]
        return InitialData(sign * data.A[idx], sign * data.E[idx], np.zeros(c.n_vertices))

    def embed_global(self, data: InitialData, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
        """(two-sided label, glued label) of homogeneous data on the closed surface."""
        cg = self.cg
        if np.any(data.rho):
            raise GaussViolation("gluing embeds homogeneous data only")
        check_gauss(cg, data, tol)
        A_c = hodge.tangential_hodge_helmholtz(cg, data.A).tangential
        whole = InitialData(A_c, data.E, data.rho)
        v1 = self.ps1.label(self.restrict(whole, 1))
        v2 = self.ps2.label(self.restrict(whole, 2))
        big = self.big_label(v1, v2)
        return big, self.won_label(big)

    def sigma_global(self, d1: InitialData, d2: InitialData) -> float:
        M = self.cg.M[1]
        return float(d1.A @ (M @ d2.E) - d2.A @ (M @ d1.E))


# -------------------------------------------------------------------- states


@dataclass
class GluedState:
    """A convex combination of quasi-free states on the glued label space."""

    components: list[tuple[float, QuasiFreeState]]
    mode: str

    @property
    def space(self) -> SymplecticSpace:
        return self.components[0][1].space

    def characteristic(self, labels) -> np.ndarray:
        return sum(w * s.characteristic(labels) for w, s in self.components)

    def __call__(self, a: WeylElement) -> complex:
        if not a.space.same_as(self.space):
            raise SpaceMismatch("element is not over the glued space")
        if a.is_zero():
            return 0j
        return complex(np.sum(a.coeffs * self.characteristic(a.labels)))


def _block_state(space: SymplecticSpace, parts) -> QuasiFreeState:
    """Product quasi-free state; ``parts`` lists (target blocks, state, source blocks, sign)."""
    mu = np.zeros((space.dim, space.dim))
    ell = np.zeros(space.dim)
    for tblocks, st, sblocks, sign in parts:
        t = np.concatenate([np.arange(space.dim)[space.slice(b)] for b in tblocks])
        s = np.concatenate([np.arange(st.space.dim)[st.space.slice(b)] for b in sblocks])
        mu[np.ix_(t, t)] = st.mu[np.ix_(s, s)]
        ell[t] = sign * st.one_point[s]
    return QuasiFreeState(space, mu, ell, check=False)


def glue_states(setup: GluingSetup, w1: QuasiFreeState, w2: QuasiFreeState, mode: str = "one_two") -> GluedState:
    """Glued state ``omega_1(2)``, ``omega_2(1)`` or their equal-weight mixture."""
    if not w1.space.same_as(setup.side1) or not w2.space.same_as(setup.side2):
        raise SpaceMismatch("states must live over the two side spaces")
    g = setup.glued
    one_two = _block_state(g, [
        (["F1", "H1", "f", "h"], w1, ["F", "H", "f", "h"], 1),
        (["F2", "H2"], w2, ["F", "H"], 1),
    ])
    two_one = _block_state(g, [
        (["F1", "H1"], w1, ["F", "H"], 1),
        (["F2", "H2"], w2, ["F", "H"], 1),
        (["f", "h"], w2, ["f", "h"], -1),
    ])
    if mode == "one_two":
        comps = [(1.0, one_two)]
    elif mode == "two_one":
        comps = [(1.0, two_one)]
    elif mode == "mix":
        comps = [(0.5, one_two), (0.5, two_one)]
    else:
        raise ValueError(f"unknown gluing mode {mode!r}")
    return GluedState(comps, mode)


def surface_marginal(w: QuasiFreeState) -> tuple[np.ndarray, np.ndarray]:
    """(mu, one-point) of a side state restricted to its surface sector."""
    s = np.concatenate([np.arange(w.space.dim)[w.space.slice(b)] for b in ("f", "h")])
    return w.mu[np.ix_(s, s)], w.one_point[s]


def compatibility_defect(w1: QuasiFreeState, w2: QuasiFreeState, labels=None) -> float:
    """Largest ``|omega_1^S(s) - omega_2^S(-s)|``.

    With no labels the comparison is exact on covariances and one-point
    functionals; otherwise it is sampled on the given surface labels.
    """
    mu1, l1 = surface_marginal(w1)
    mu2, l2 = surface_marginal(w2)
    if labels is None:
        return float(max(np.abs(mu1 - mu2).max(initial=0.0), np.abs(l1 + l2).max(initial=0.0)))
    S = np.atleast_2d(np.asarray(labels, dtype=float))
    q1 = np.exp(1j * (S @ l1) - 0.5 * np.sum((S @ mu1) * S, axis=1))
    q2 = np.exp(1j * (-S @ l2) - 0.5 * np.sum((S @ mu2) * S, axis=1))
    return float(np.abs(q1 - q2).max(initial=0.0))


def partial_trace_defects(setup: GluingSetup, glued: GluedState, w1: QuasiFreeState, w2: QuasiFreeState, rng, n: int = 20) -> dict[str, float]:
    """Sampled defects of the four marginal conditions of a glued state."""
    S1, S2 = setup.side1, setup.side2
    nC1 = setup.ps1.n_closed
    nC2 = setup.ps2.n_closed
    out = {}
    # side 1 through psi_bullet_circle
    V1 = rng.normal(size=(n, S1.dim)) / np.sqrt(S1.dim)
    left = np.hstack([V1, np.zeros((n, 2 * nC2))])
    out["side1_via_left"] = float(np.abs(glued.characteristic(np.asarray(setup.psi_bc.matrix @ left.T).T) - w1.characteristic(V1)).max())
    # side 2 closed sector through psi_bullet_circle
    C2 = rng.normal(size=(n, 2 * nC2)) / np.sqrt(2 * nC2)
    left = np.hstack([np.zeros((n, S1.dim)), C2])
    w2c = w2.characteristic(np.hstack([C2, np.zeros((n, S2.dim - 2 * nC2))]))
    out["closed2_via_left"] = float(np.abs(glued.characteristic(np.asarray(setup.psi_bc.matrix @ left.T).T) - w2c).max())
    # side 2 through psi_circle_bullet
    V2 = rng.normal(size=(n, S2.dim)) / np.sqrt(S2.dim)
    right = np.hstack([np.zeros((n, 2 * nC1)), V2])
    out["side2_via_right"] = float(np.abs(glued.characteristic(np.asarray(setup.psi_cb.matrix @ right.T).T) - w2.characteristic(V2)).max())
    # side 1 closed sector through psi_circle_bullet
    C1 = rng.normal(size=(n, 2 * nC1)) / np.sqrt(2 * nC1)
    right = np.hstack([C1, np.zeros((n, S2.dim))])
    w1c = w1.characteristic(np.hstack([C1, np.zeros((n, S1.dim - 2 * nC1))]))
    out["closed1_via_right"] = float(np.abs(glued.characteristic(np.asarray(setup.psi_cb.matrix @ right.T).T) - w1c).max())
    return out
