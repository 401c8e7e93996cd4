"""Property suites behind ``cauchylens verify``.

Each suite returns rows ``(suite, case, quantity, value, tolerance, pass)``.
Random inputs come from a per-suite generator seeded by ``(seed, suite)``, so
a suite's rows do not depend on which other suites ran.
"""

from __future__ import annotations

import csv
import io
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as la

from . import generators, hodge, sampling
from .calculus import BoundaryCalculus, build_calculus, green_residual
from .gluing import GluingSetup, compatibility_defect, glue_states
from .hodge import IncompatibleData
from .phasespace import (
    InitialData,
    PhaseSpace,
    chh_decompose,
    flux_observable,
    gauge_generator,
    radical_basis,
    sigma,
    sigma_cs,
)
from .relativize import ExtendedSpace
from .simplicial import Mesh
from .states import QuasiFreeState, gram_check, l2_state
from .weyl import (
    SymplecticSpace,
    WeylElement,
    background_shift,
    generator,
    max_difference,
    star,
    unit,
)

COLUMNS = ("suite", "case", "quantity", "value", "tolerance", "pass")


@dataclass(frozen=True)
class Row:
    suite: str
    case: str
    quantity: str
    value: float
    tolerance: float
    passed: bool

    def cells(self) -> tuple[str, ...]:
        return (self.suite, self.case, self.quantity, f"{self.value:.6e}", f"{self.tolerance:.10g}", str(self.passed).lower())


def below(suite, case, quantity, value, tol) -> Row:
    return Row(suite, case, quantity, float(value), float(tol), bool(value <= tol))


def above(suite, case, quantity, value, tol) -> Row:
    return Row(suite, case, quantity, float(value), float(tol), bool(value >= tol))


@dataclass
class Context:
    """Meshes, tolerances and seeded randomness shared by the suites."""

    seed: int = 0
    tol_solve: float = 1e-10
    tol_sym: float = 1e-8
    mesh: Mesh | None = None
    mesh_name: str = "annulus"
    _cache: dict = field(default_factory=dict)

    def rng(self, suite: str) -> np.random.Generator:
        return np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, zlib.crc32(suite.encode())])

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def calculus(self, name: str) -> BoundaryCalculus:
        builders = {
            "primary": lambda: self.mesh if self.mesh is not None else generators.annulus(),
            "disk": generators.disk,
            "cylinder_band": generators.cylinder_band,
        }
        return self._get(("calculus", name), lambda: build_calculus(builders[name]()))

    def phasespace(self) -> PhaseSpace:
        return self._get("phasespace", lambda: PhaseSpace(self.calculus("primary"), name="bulk"))

    def extended(self) -> ExtendedSpace:
        return self._get("extended", lambda: ExtendedSpace(self.phasespace()))

    def gluing(self) -> GluingSetup:
        return self._get("gluing", lambda: GluingSetup.from_split(generators.split_sphere()))


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(b), 1e-300)
    return float(np.linalg.norm(a - b) / scale)


def _mnorm(c: BoundaryCalculus, x: np.ndarray) -> float:
    return float(np.sqrt(max(x @ (c.M[1] @ x), 0.0)))


# ------------------------------------------------------------------ Green identity


def suite_green(ctx: Context) -> list[Row]:
    rng = ctx.rng("green")
    rows = []
    for name in ("primary", "disk", "cylinder_band"):
        c = ctx.calculus(name)
        label = ctx.mesh_name if name == "primary" else name
        worst = 0.0
        for _ in range(500):
            res, scale = green_residual(c, rng.normal(size=c.n_vertices), rng.normal(size=c.n_edges))
            worst = max(worst, res / scale)
        rows.append(below("green", label, "max_rel_residual_500", worst, 1e-12))
    return rows


# ------------------------------------------------------------------ Hodge decompositions


def suite_hodge(ctx: Context) -> list[Row]:
    rng = ctx.rng("hodge")
    c = ctx.calculus("primary")
    d0 = c.d[0]
    recon = {"nontangential": 0.0, "tangential": 0.0, "coclosed": 0.0}
    orth = dict(recon)
    constraint = dict(recon)
    for _ in range(100):
        A = rng.normal(size=c.n_edges)
        nA = _mnorm(c, A)
        A_c, lam = hodge.coclosed_representative(c, A)
        dl = d0 @ lam
        recon["nontangential"] = max(recon["nontangential"], _mnorm(c, A_c + dl - A) / nA)
        orth["nontangential"] = max(orth["nontangential"], abs(A_c @ (c.M[1] @ dl)) / (_mnorm(c, A_c) * _mnorm(c, dl) + 1e-300))
        constraint["nontangential"] = max(
            constraint["nontangential"],
            np.abs(lam[c.boundary_vertices]).max(initial=0.0) / np.abs(lam).max(),
            np.abs((c.residual @ A_c)[c.interior_vertices]).max() / np.abs(c.residual @ A).max(),
        )

        split = hodge.tangential_hodge_helmholtz(c, A)
        da = d0 @ split.potential
        recon["tangential"] = max(recon["tangential"], _mnorm(c, split.tangential + da - A) / nA)
        orth["tangential"] = max(orth["tangential"], abs(split.tangential @ (c.M[1] @ da)) / (_mnorm(c, split.tangential) * _mnorm(c, da)))
        constraint["tangential"] = max(constraint["tangential"], np.abs(c.residual @ split.tangential).max() / np.abs(c.residual @ A).max())

        E = sampling.random_coclosed(c, rng)
        Eh = hodge.minimal_coclosed_extension(c, c.nml[1] @ E)
        Et = E - Eh
        nE = _mnorm(c, E)
        recon["coclosed"] = max(recon["coclosed"], _mnorm(c, Et + Eh - E) / nE)
        orth["coclosed"] = max(orth["coclosed"], abs(Et @ (c.M[1] @ Eh)) / (_mnorm(c, Et) * _mnorm(c, Eh)))
        constraint["coclosed"] = max(constraint["coclosed"], np.abs(c.residual @ Et).max() / np.abs(c.residual @ E).max())
    rows = []
    for k in recon:
        rows.append(below("hodge", k, "reconstruction_rel", recon[k], 1e-9))
        rows.append(below("hodge", k, "orthogonality_rel", orth[k], 1e-9))
        rows.append(below("hodge", k, "constraint_rel", constraint[k], 1e-9))
    cases = {
        ctx.mesh_name: (c, len(np.unique(c.components.vertex_labels[c.boundary_vertices]))),
        "annulus+disk": (build_calculus(generators.disjoint_union(generators.annulus(n_radial=2, n_angular=16), generators.disk(n_rings=2))), 2),
        "sphere": (build_calculus(generators.sphere(1)), 0),
    }
    for name, (cc, expected) in cases.items():
        dim = hodge.boundary_constant_basis(cc).shape[1]
        rows.append(below("hodge", name, "locally_constant_dim_mismatch", abs(dim - expected), 0))
    return rows


# ------------------------------------------------------------------ BVP solvers


def _ln_r_error(n_radial: int, n_angular: int) -> tuple[float, float]:
    m = generators.annulus(n_radial=n_radial, n_angular=n_angular)
    c = build_calculus(m)
    r = np.linalg.norm(m.vertices, axis=1)
    exact = np.log(r) / np.log(2.0)
    phi = hodge.solve_dirichlet(c, np.zeros(c.n_vertices), exact[c.boundary_vertices])
    # nml of d(ln r / ln 2) is -1/ln2 on r = 1 and +1/(2 ln2) on r = 2
    rb = r[c.boundary_vertices]
    flux = np.where(rb < 1.5, -1.0, 0.5) / np.log(2.0)
    return float(np.abs(phi - exact).max()), float(np.abs(c.nml[1] @ (c.d[0] @ exact) - flux).max())


def suite_bvp(ctx: Context) -> list[Row]:
    rng = ctx.rng("bvp")
    c = ctx.calculus("primary")
    rho = rng.normal(size=c.n_vertices)
    f = rng.normal(size=c.n_boundary)
    phi1 = hodge.solve_dirichlet(c, rho, f, ctx.tol_solve)
    phi2 = hodge.solve_dirichlet(c, rho, f, ctx.tol_solve)
    phi3 = hodge.solve_dirichlet(build_calculus(c.mesh), rho, f, ctx.tol_solve)
    diff = int(np.sum(phi1 != phi2) + np.sum(phi1 != phi3))
    rows = [below("bvp", "dirichlet", "bitwise_differences", diff, 0)]

    rho = rng.normal(size=c.n_vertices)
    rho[c.boundary_vertices] = 0.0
    f = rng.normal(size=c.n_boundary)
    defect, _ = hodge.compatibility_defects(c, rho, f)
    labels = hodge.boundary_component_labels(c)
    length = np.bincount(labels, weights=c.b0, minlength=c.components.count)
    f = f - (defect / np.where(length > 0, length, 1.0))[labels]
    mismatches = 0
    for delta in (0.0, 5e-10, -5e-10, 2e-9, -2e-9, 1e-3):
        _, scale = hodge.compatibility_defects(c, rho, f)
        g = f + delta * scale / length[labels]
        defects, scale = hodge.compatibility_defects(c, rho, g)
        should_fail = bool(np.any(np.abs(defects) > hodge.TOL_COMPAT * scale))
        try:
            hodge.solve_neumann(c, rho, g, ctx.tol_solve)
            raised = False
        except IncompatibleData:
            raised = True
        mismatches += raised != should_fail
    rows.append(below("bvp", "neumann", "obstruction_mismatches", mismatches, 0))

    levels = [(4, 32), (8, 64), (16, 128)]
    errs = [_ln_r_error(*lv) for lv in levels]
    sup = [e[0] for e in errs]
    nml = [e[1] for e in errs]
    order = min(np.log2(sup[i] / sup[i + 1]) for i in range(len(sup) - 1))
    rows.append(above("bvp", "annulus_ln_r", "dirichlet_order_min", order, 1.0))
    nml_order = min(np.log2(nml[i] / nml[i + 1]) for i in range(len(nml) - 1))
    rows.append(above("bvp", "annulus_ln_r", "normal_trace_order_min", nml_order, 1.0))
    return rows


# ------------------------------------------------------------------ CHH map


def suite_chh(ctx: Context) -> list[Row]:
    rng = ctx.rng("chh")
    c = ctx.calculus("primary")
    worst_sym = worst_trip = worst_e = worst_gauge = 0.0
    for _ in range(100):
        x = sampling.random_homogeneous(c, rng)
        y = sampling.random_homogeneous(c, rng)
        M = c.M[1]
        scale = abs(x.A @ (M @ y.E)) + abs(y.A @ (M @ x.E))
        s_cs = sigma_cs(c, chh_decompose(c, x), chh_decompose(c, y))
        worst_sym = max(worst_sym, abs(sigma(c, x, y) - s_cs) / scale)
    ps = ctx.phasespace()
    for _ in range(20):
        x = sampling.random_homogeneous(c, rng)
        v = ps.label(x)
        back = ps.data(v)
        worst_trip = max(worst_trip, _rel(ps.label(back), v))
        worst_e = max(worst_e, _rel(back.E, x.E))
        lam = rng.normal(size=c.n_boundary)
        lam_lg, _ = hodge.split_boundary_function(c, lam)
        worst_gauge = max(worst_gauge, float(np.abs(ps.label(gauge_generator(c, lam)) - ps.gauge_label(lam_lg)).max()) / np.abs(ps.gauge_label(lam_lg)).max())
    return [
        below("chh", ctx.mesh_name, "sigma_vs_sigma_cs_rel", worst_sym, ctx.tol_sym),
        below("chh", ctx.mesh_name, "round_trip_label_rel", worst_trip, 1e-8),
        below("chh", ctx.mesh_name, "round_trip_E_rel", worst_e, 1e-8),
        below("chh", ctx.mesh_name, "gauge_label_rel", worst_gauge, 1e-8),
    ]


# ------------------------------------------------------------------ radical


def _rank(m: np.ndarray, tol: float) -> int:
    s = la.svdvals(m) if m.size else np.zeros(0)
    return int(np.sum(s > tol * s[0])) if s.size else 0


def suite_radical(ctx: Context) -> list[Row]:
    c = ctx.calculus("primary")
    rad = radical_basis(c, 1e-9)
    e_part = max((np.abs(d.E).max() for d in rad), default=0.0)
    RA = np.array([d.A for d in rad]).T if rad else np.zeros((c.n_edges, 0))
    D = c.d[0][:, c.interior_vertices].toarray()
    q, _ = la.qr(D, mode="economic")
    into = float(np.abs(RA - q @ (q.T @ RA)).max(initial=0.0))
    back = float(np.abs(D - RA @ (RA.T @ D)).max(initial=0.0)) / max(np.abs(D).max(), 1.0)
    dim_gap = abs(RA.shape[1] - _rank(D, 1e-9)) + abs(_rank(np.hstack([RA, D]), 1e-9) - RA.shape[1])
    return [
        below("radical", ctx.mesh_name, "electric_part_max", e_part, 1e-9),
        below("radical", ctx.mesh_name, "radical_in_gauge", into, 1e-9),
        below("radical", ctx.mesh_name, "gauge_in_radical", back, 1e-9),
        below("radical", ctx.mesh_name, "dimension_mismatch", dim_gap, 0),
    ]


# ------------------------------------------------------------------ Poisson degeneracy


def suite_degeneracy(ctx: Context) -> list[Row]:
    rng = ctx.rng("degeneracy")
    c = ctx.calculus("cylinder_band")
    obs, Lam = flux_observable(c, circles=[0])
    top = Lam[c.boundary_vertices] == 1.0
    worst_int = worst_surf = 0.0
    n_obs = _mnorm(c, obs.A)
    for _ in range(50):
        x = sampling.random_interior_data(c, rng, rings=1)
        worst_int = max(worst_int, abs(sigma(c, obs, x)) / (n_obs * (_mnorm(c, x.E) + _mnorm(c, x.A))))
        y = sampling.random_homogeneous(c, rng)
        flux = float(np.sum((c.b0 * (c.nml[1] @ y.E))[top]))
        worst_surf = max(worst_surf, abs(sigma(c, obs, y) - flux) / abs(flux))
    return [
        below("degeneracy", "cylinder_band", "interior_pairing_rel", worst_int, 1e-10),
        below("degeneracy", "cylinder_band", "surface_flux_rel", worst_surf, 1e-10),
    ]


# ------------------------------------------------------------------ Weyl engine


def suite_weyl(ctx: Context) -> list[Row]:
    rng = ctx.rng("weyl")
    space = ctx.phasespace().space
    s = 1.0 / np.sqrt(space.dim)
    w1 = w2 = w3 = assoc = inner = 0.0
    for _ in range(50):
        v, w = sampling.random_labels(space, rng, 2, 3 * s)
        lhs = generator(space, v) * generator(space, w)
        rhs = WeylElement.from_terms(space, [v + w], [np.exp(-0.5j * space.sigma(v, w))])
        w1 = max(w1, max_difference(lhs, rhs))
        w2 = max(w2, max_difference(star(generator(space, v)), generator(space, -v)))
        w3 = max(w3, max_difference(generator(space, space.zero()), unit(space)))
        a, b, cc = (sampling.random_element(space, rng, 3, 3 * s) for _ in range(3))
        assoc = max(assoc, max_difference((a * b) * cc, a * (b * cc)))
        u = sampling.random_labels(space, rng, 1, 3 * s)[0]
        Wu = generator(space, u)
        inner = max(inner, max_difference(background_shift(a, u), Wu * a * star(Wu)))
    # v lives on F_0..F_{k-1}; w on F_k.. and H_k.., whose conjugates v never touches
    k = ctx.phasespace().n_closed // 2
    idx = np.arange(space.dim)
    F, H = idx[space.slice("F")], idx[space.slice("H")]
    v = np.zeros(space.dim)
    w = np.zeros(space.dim)
    v[F[:k]] = rng.normal(size=k)
    w[F[k:]] = rng.normal(size=F.size - k)
    w[H[k:]] = rng.normal(size=H.size - k)
    a = generator(space, v) + 2.0 * generator(space, 0.5 * v)
    b = generator(space, w) - 1j * generator(space, 0.3 * w)
    commute = max_difference(a * b, b * a, label_tol=0.0)
    return [
        below("weyl", "relations", "product_phase", w1, 1e-12),
        below("weyl", "relations", "adjoint", w2, 0),
        below("weyl", "relations", "unit", w3, 0),
        below("weyl", "associativity", "max_coeff_diff_50", assoc, 1e-12),
        below("weyl", "background_shift", "inner_vs_phase", inner, 1e-12),
        below("weyl", "disjoint_support", "commutator", commute, 0),
    ]


# ------------------------------------------------------------------ states


def suite_states(ctx: Context) -> list[Row]:
    rng = ctx.rng("states")
    ps = ctx.phasespace()
    space = ps.space
    state = l2_state(ps)
    worst_gram = np.inf
    for _ in range(5):
        worst_gram = min(worst_gram, gram_check(state, sampling.random_labels(space, rng, 20, 2.0 / np.sqrt(space.dim))))
    blocks_c, blocks_s = ["F", "H"], ["f", "h"]
    nC = 2 * ps.n_closed
    closed = SymplecticSpace.darboux([("F", "H", ps.n_closed)])
    surface = SymplecticSpace.darboux([("f", "h", ps.n_surface)])
    wc = state.restrict(blocks_c, closed)
    ws = state.restrict(blocks_s, surface)
    V = sampling.random_labels(space, rng, 20, 2.0 / np.sqrt(space.dim))
    prod = wc.characteristic(V[:, :nC]) * ws.characteristic(V[:, nC:])
    fact = float(np.abs(state.characteristic(V) - prod).max() / np.abs(prod).max())
    return [
        below("states", "l2", "domination_margin", state.margin, 1.0 + 1e-10),
        above("states", "l2", "gram_min_eigenvalue", worst_gram, -1e-10),
        below("states", "l2", "closed_surface_factorization_rel", fact, 1e-14),
    ]


# ------------------------------------------------------------------ relativisation


def suite_relativize(ctx: Context) -> list[Row]:
    rng = ctx.rng("relativize")
    X = ctx.extended()
    bulk, total = X.bulk, X.total
    s = 3.0 / np.sqrt(bulk.dim)
    hom = inv = ident = ulg = fact = 0.0
    for _ in range(50):
        a = sampling.random_element(bulk, rng, 2, s)
        b = sampling.random_element(bulk, rng, 2, s)
        hom = max(hom, max_difference(X.relativise(a * b), X.relativise(a) * X.relativise(b)))
    for _ in range(25):
        a = sampling.random_element(bulk, rng, 3, s)
        ra = X.relativise(a)
        lam = rng.normal(size=X.n_surface)
        inv = max(inv, max_difference(X.joint_large_gauge(ra, lam), ra))
        ident = max(ident, max_difference(X.gamma(ra), a))
        ulg = max(ulg, max_difference(X.gamma(X.u_lg(lam)), unit(bulk)))
        x = rng.normal(size=bulk.dim) * s
        phi = rng.normal(size=X.n_surface) * s
        v = X.ehat(x)
        v[X.s_phi] = phi
        h = x[bulk.slice("h")]
        dressed = WeylElement.from_terms(total, [v], [np.exp(-0.5j * phi @ h)])
        surf = total.zero()
        surf[X.s_phi] = phi
        product = X.relativise(generator(bulk, x)) * generator(total, surf)
        fact = max(fact, max_difference(product, dressed))
    return [
        below("relativize", ctx.mesh_name, "homomorphism_50", hom, 1e-12),
        below("relativize", ctx.mesh_name, "joint_gauge_invariance_25", inv, 1e-12),
        below("relativize", ctx.mesh_name, "gamma_after_relativise", ident, 1e-12),
        below("relativize", ctx.mesh_name, "gamma_of_U_LG", ulg, 1e-12),
        below("relativize", ctx.mesh_name, "generator_factorization_25", fact, 1e-12),
    ]


# ------------------------------------------------------------------ superselection


def suite_superselection(ctx: Context) -> list[Row]:
    rng = ctx.rng("superselection")
    X = ctx.extended()
    omega = l2_state(X.bulk)
    worst = 0.0
    for _ in range(20):
        Phi = rng.normal(size=X.n_surface)
        lam = rng.normal(size=X.n_surface)
        val = omega(X.gamma_phi(Phi, X.u_lg(lam)))
        worst = max(worst, abs(val - np.exp(1j * Phi @ lam)))
    Phi = rng.normal(size=X.n_surface)
    Phi2 = Phi.copy()
    Phi2[rng.integers(X.n_surface)] += 0.5
    sep = max(
        abs(omega(X.gamma_phi(Phi, X.u_lg(e))) - omega(X.gamma_phi(Phi2, X.u_lg(e))))
        for e in np.eye(X.n_surface)
    )
    return [
        below("superselection", ctx.mesh_name, "flux_phase_error_20", worst, 1e-10),
        above("superselection", ctx.mesh_name, "sector_separation", sep, 1e-6),
    ]


# ------------------------------------------------------------------ truncation


def suite_truncation(ctx: Context) -> list[Row]:
    rng = ctx.rng("truncation")
    X = ctx.extended()
    w, _ = X.boundary_spectrum()
    a = sampling.random_element(X.bulk, rng, 3, 3.0 / np.sqrt(X.bulk.dim))
    exact = max_difference(X.truncated_relativise(a, float(w[-1])), X.relativise(a), label_tol=0.0)
    errs = [e for _, e in X.dressing_errors(rng.normal(size=X.bulk.dim))]
    rise = max((errs[i + 1] - errs[i] for i in range(len(errs) - 1)), default=0.0)
    scale = max(errs[0], 1.0) if errs else 1.0
    return [
        below("truncation", ctx.mesh_name, "full_spectrum_difference", exact, 0),
        below("truncation", ctx.mesh_name, "dressing_error_max_increase", max(rise, 0.0) / scale, 1e-12),
        below("truncation", ctx.mesh_name, "final_dressing_error", errs[-1] if errs else 0.0, 1e-12),
    ]


# ------------------------------------------------------------------ gluing


def correlated_state(ps: PhaseSpace, eps: float = 0.3) -> QuasiFreeState:
    """``mu = I/2 + eps (I + X)``, X coupling F_i with f_i; dominates since mu >= I/2."""
    space = ps.space
    X = np.zeros((space.dim, space.dim))
    F = np.arange(space.dim)[space.slice("F")]
    f = np.arange(space.dim)[space.slice("f")]
    k = min(F.size, f.size)
    X[F[:k], f[:k]] = 1.0
    X[f[:k], F[:k]] = 1.0
    return QuasiFreeState(space, 0.5 * np.eye(space.dim) + eps * (np.eye(space.dim) + X))


def suite_gluing(ctx: Context) -> list[Row]:
    rng = ctx.rng("gluing")
    G = ctx.gluing()
    s = 3.0 / np.sqrt(G.left.dim)
    diagram = 0.0
    for _ in range(50):
        a = generator(G.left, rng.normal(size=G.left.dim) * s)
        diagram = max(diagram, max_difference(G.psi_circle_bullet(G.xi_21(a)), G.psi_bullet_circle(a)))
    ideal = 0.0
    for _ in range(20):
        v = rng.normal(size=G.big.dim) * s
        v[G.big.slice("h2")] = -v[G.big.slice("h1")]
        a = WeylElement.from_terms(G.big, [v, 0.5 * v], [1.0, 2.0 - 1j])
        lam = rng.normal(size=G.n_surface) * s
        u = G.big.zero()
        u[G.big.slice("f1")] = lam
        u[G.big.slice("f2")] = lam
        ideal = max(ideal, max_difference(G.won(a * generator(G.big, u)), G.won(a)))
    additivity = 0.0
    M = G.cg.M[1]
    for _ in range(100):
        x = sampling.random_closed_surface_data(G.cg, rng)
        y = sampling.random_closed_surface_data(G.cg, rng)
        _, gx = G.embed_global(x)
        _, gy = G.embed_global(y)
        scale = abs(x.A @ (M @ y.E)) + abs(y.A @ (M @ x.E))
        additivity = max(additivity, abs(G.sigma_global(x, y) - G.glued.sigma(gx, gy)) / scale)

    w1, w2 = l2_state(G.ps1), l2_state(G.ps2)
    glued = glue_states(G, w1, w2, "one_two")
    side_edges = G.edge_maps[0][0][sampling.edges_away_from_boundary(G.c1, rings=1)]
    interior = 0.0
    for _ in range(10):
        x = sampling.random_interior_data(G.cg, rng, edges=side_edges)
        v1 = G.ps1.label(G.restrict(x, 1))
        k = 1.0 / max(np.linalg.norm(v1), 1e-300)
        x = InitialData(k * x.A, k * x.E, x.rho)
        _, gx = G.embed_global(x)
        interior = max(interior, abs(glued.characteristic(gx)[0] - w1.characteristic(G.ps1.label(G.restrict(x, 1)))[0]))
    labels = rng.normal(size=(20, G.glued.dim)) * s
    same = float(np.abs(glue_states(G, w1, w2, "one_two").characteristic(labels) - glue_states(G, w1, w2, "two_one").characteristic(labels)).max())
    wc = correlated_state(G.ps1)
    probe = G.glued.zero()
    probe[G.glued.slice("F1")][0] = 1.0
    probe[G.glued.slice("f")][0] = 1.0
    probes = np.vstack([labels, probe])
    differ = float(np.abs(glue_states(G, wc, w2, "one_two").characteristic(probes) - glue_states(G, wc, w2, "two_one").characteristic(probes)).max())
    compat = max(compatibility_defect(w1, w2), compatibility_defect(w1, w2, rng.normal(size=(20, 2 * G.n_surface))))
    return [
        below("gluing", "split_sphere", "diagram_50", diagram, 1e-12),
        below("gluing", "split_sphere", "ideal_annihilated", ideal, 1e-12),
        below("gluing", "split_sphere", "sigma_additivity_100", additivity, ctx.tol_sym),
        below("gluing", "split_sphere", "interior_restriction", interior, 1e-10),
        below("gluing", "split_sphere", "modes_equal_l2", same, 1e-12),
        above("gluing", "split_sphere", "modes_differ_correlated", differ, 1e-6),
        below("gluing", "split_sphere", "compatibility_l2", compat, 1e-10),
    ]


# ------------------------------------------------------------------ determinism


def suite_determinism(ctx: Context) -> list[Row]:
    """Rebuild a fresh context twice and compare report bytes for a subset of suites."""
    names = ["green", "chh", "weyl", "relativize"]
    first = render(run_suites(names, Context(ctx.seed, ctx.tol_solve, ctx.tol_sym, ctx.mesh, ctx.mesh_name)), ctx.seed)
    second = render(run_suites(names, Context(ctx.seed, ctx.tol_solve, ctx.tol_sym, ctx.mesh, ctx.mesh_name)), ctx.seed)
    return [below("determinism", "+".join(names), "byte_differences", sum(a != b for a, b in zip(first, second)) + abs(len(first) - len(second)), 0)]


SUITES: dict[str, Callable[[Context], list[Row]]] = {
    "green": suite_green,
    "hodge": suite_hodge,
    "bvp": suite_bvp,
    "chh": suite_chh,
    "radical": suite_radical,
    "degeneracy": suite_degeneracy,
    "weyl": suite_weyl,
    "states": suite_states,
    "relativize": suite_relativize,
    "superselection": suite_superselection,
    "truncation": suite_truncation,
    "gluing": suite_gluing,
    "determinism": suite_determinism,
}


def run_suites(names, ctx: Context) -> list[Row]:
    rows = []
    for name in names:
        if name not in SUITES:
            raise KeyError(f"unknown suite {name!r}")
        rows.extend(SUITES[name](ctx))
    return sorted(rows, key=lambda r: (r.suite, r.case, r.quantity))


def render(rows: list[Row], seed: int) -> str:
    buf = io.StringIO()
    buf.write(f"# seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()
