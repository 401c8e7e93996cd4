"""Surface-field extension, relativisation and quantum gauge fixing.

Labels of the extended space are ``[F, H, f, h, phi, tau]``: a bulk CHH label
followed by a surface field ``phi`` and surface charge ``tau`` (both in LG
coordinates), with ``sigma~ = sigma ⊕ sigma_surface`` in Darboux form.
The joint large gauge direction of ``lam`` is ``(0, 0, lam, 0, lam, 0)``; it
pairs with a label as ``-<lam, h + tau>``, so invariant labels are exactly
those with ``tau = -h``.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .phasespace import PhaseSpace
from .weyl import (
    LabelPredicate,
    SpaceMismatch,
    SymplecticMap,
    SymplecticSpace,
    WeylElement,
    fixed_point_generators,
    phase_multiply,
    weyl_map,
)

TOL_INVARIANT = 1e-9


class NotInvariant(ValueError):
    """A label or element is not invariant under joint large gauge transformations."""


class EigensolveFailure(RuntimeError):
    """The boundary Laplacian eigensolve failed."""


class ExtendedSpace:
    """Bulk phase space of one surface plus a copy of its surface sector."""

    def __init__(self, ps: PhaseSpace):
        self.ps = ps
        nC, nS = ps.n_closed, ps.n_surface
        self.n_closed, self.n_surface = nC, nS
        self.bulk = ps.space
        self.surface = SymplecticSpace.darboux([("phi", "tau", nS)], name="surface")
        self.total = SymplecticSpace.darboux([("F", "H", nC), ("f", "h", nS), ("phi", "tau", nS)], name="extended")
        sl = self.total.slice
        self.s_f, self.s_h, self.s_phi, self.s_tau = sl("f"), sl("h"), sl("phi"), sl("tau")
        nb = self.bulk.dim
        eye = sp.identity(nb, format="csr")
        h_rows = sp.csr_matrix(
            (-np.ones(nS), (np.arange(nS), np.arange(nb)[self.bulk.slice("h")])), shape=(nS, nb)
        )
        mat = sp.vstack([eye, sp.csr_matrix((nS, nb)), h_rows]).tocsr()
        self.ehat_map = SymplecticMap.build(mat, self.bulk, self.total)
        self._predicate = fixed_point_generators(self.total, self.joint_functionals())
        self._spectrum = None

    # ------------------------------------------------------------ classical maps
    def coords(self, lam) -> np.ndarray:
        """LG coordinates of lam, given either as a boundary cochain or as coordinates."""
        lam = np.asarray(lam, dtype=float)
        if lam.shape == (self.n_surface,):
            return lam
        return self.ps.surface_coords(lam)

    def ehat(self, x) -> np.ndarray:
        """``(F, H, f, h) -> (F, H, f, h; 0, -h)``."""
        return self.ehat_map(self.bulk.check_label(x))

    def bulk_part(self, v) -> np.ndarray:
        return np.asarray(v)[: self.bulk.dim]

    def joint_gauge(self, lam) -> np.ndarray:
        """``G~(lam) = (0, 0, lam, 0; lam, 0)``."""
        v = self.total.zero()
        c = self.coords(lam)
        v[self.s_f] = c
        v[self.s_phi] = c
        return v

    def joint_functionals(self) -> np.ndarray:
        """Rows ``sigma~(., G~(e_i))`` for the LG basis."""
        G = np.array([self.joint_gauge(e) for e in np.eye(self.n_surface)]).reshape(self.n_surface, -1)
        return np.asarray(self.total.sigma_matrix @ G.T).T if self.n_surface else G

    def invariant_generators(self) -> LabelPredicate:
        return self._predicate

    def is_invariant(self, a: WeylElement) -> bool:
        self._check_total(a)
        return self._predicate.element(a)

    def gauge_fix(self, v) -> np.ndarray:
        """``v - G~(phi)`` with phi the surface-field slot of an invariant label."""
        v = self.total.check_label(v)
        if not self._predicate(v):
            raise NotInvariant(f"label is not invariant (defect {self._predicate.defect(v):.2e})")
        return v - self.joint_gauge(v[self.s_phi])

    # ------------------------------------------------------------ quantum maps
    def _check_total(self, a: WeylElement) -> None:
        if not a.space.same_as(self.total):
            raise SpaceMismatch("element is not over the extended space")

    def relativise(self, a: WeylElement) -> WeylElement:
        return weyl_map(self.ehat_map, a)

    def joint_large_gauge(self, a: WeylElement, lam) -> WeylElement:
        """``W~(v) -> exp(i sigma~(v, G~(lam))) W~(v) = exp(-i <lam, h + tau>) W~(v)``."""
        self._check_total(a)
        return phase_multiply(a, self.joint_gauge(lam))

    def u_lg(self, lam) -> WeylElement:
        """``U~(lam) = W(G(lam)) ⊗ W_surface(lam ⊕ 0)``."""
        return WeylElement.from_terms(self.total, self.joint_gauge(lam)[None, :], [1.0])

    def gamma(self, a: WeylElement) -> WeylElement:
        """Quantum gauge fixing on invariant elements.

        Each invariant generator is split as ``W~(v) = e^{i s/2} W~(v - g) W~(g)``
        with ``g = G~(phi)``, ``s = sigma~(v - g, g)``; the first factor is a
        relativised bulk generator and the second is sent to 1.
        """
        self._check_total(a)
        if a.is_zero():
            return WeylElement(self.bulk)
        V = a.labels
        for v in V:
            if not self._predicate(v):
                raise NotInvariant(f"term is not invariant (defect {self._predicate.defect(v):.2e})")
        G = np.array([self.joint_gauge(v[self.s_phi]) for v in V])
        rest = V - G
        s = np.einsum("ij,ij->i", rest, np.asarray(self.total.sigma_matrix @ G.T).T)
        return WeylElement.from_terms(self.bulk, rest[:, : self.bulk.dim], a.coeffs * np.exp(0.5j * s))

    def beta_phi(self, a: WeylElement, Phi) -> WeylElement:
        """``Ad W~(0; 0, Phi)``: multiplies ``W~(v)`` by ``exp(i <phi_v, Phi>)``."""
        self._check_total(a)
        u = self.total.zero()
        u[self.s_tau] = self.coords(Phi)
        return phase_multiply(a, u)

    def gamma_phi(self, Phi, a: WeylElement) -> WeylElement:
        return self.gamma(self.beta_phi(a, Phi))

    # ------------------------------------------------------------ spectral truncation
    def boundary_spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenpairs of the boundary Laplacian on LG, eigenvectors in LG coordinates."""
        if self._spectrum is None:
            c = self.ps.calculus
            U = self.ps.lg
            if U.shape[1] == 0:
                self._spectrum = (np.zeros(0), np.zeros((0, 0)))
            else:
                K = c.d_boundary.T @ c.B[1] @ c.d_boundary
                K_lg = U.T @ (K @ U)
                try:
                    w, q = la.eigh(0.5 * (K_lg + K_lg.T))
                except la.LinAlgError as exc:
                    raise EigensolveFailure(str(exc)) from exc
                self._spectrum = (w, q)
        return self._spectrum

    def projector(self, mu_cut: float) -> np.ndarray:
        """Spectral projector onto eigenvalues <= mu_cut, in LG coordinates."""
        if mu_cut < 0:
            raise ValueError("mu_cut must be non-negative")
        w, q = self.boundary_spectrum()
        if w.size == 0 or mu_cut >= w[-1]:
            return np.eye(self.n_surface)
        keep = w <= mu_cut + 1e-12 * max(abs(w[-1]), 1.0)
        return q[:, keep] @ q[:, keep].T

    def truncation_map(self, mu_cut: float) -> SymplecticMap:
        """Label map ``x -> (x; 0, -P_mu h)``."""
        P = self.projector(mu_cut)
        nb = self.bulk.dim
        h_cols = np.arange(nb)[self.bulk.slice("h")]
        dress = sp.lil_matrix((self.n_surface, nb))
        dress[:, h_cols] = -P
        mat = sp.vstack([sp.identity(nb, format="csr"), sp.csr_matrix((self.n_surface, nb)), dress.tocsr()]).tocsr()
        return SymplecticMap.build(mat, self.bulk, self.total)

    def truncated_relativise(self, a: WeylElement, mu_cut: float) -> WeylElement:
        return weyl_map(self.truncation_map(mu_cut), a)

    def dressing(self, x, mu_cut: float) -> np.ndarray:
        """Surface-charge dressing ``-P_mu h`` of a bulk label (LG coordinates)."""
        x = self.bulk.check_label(x)
        return -self.projector(mu_cut) @ x[self.bulk.slice("h")]

    def dressing_errors(self, x) -> list[tuple[float, float]]:
        """(mu, |dressing(mu) - dressing(inf)|) at every distinct eigenvalue."""
        w, _ = self.boundary_spectrum()
        full = self.dressing(x, float("inf")) if w.size else np.zeros(0)
        out = []
        for mu in np.unique(np.round(w, 12)):
            out.append((float(mu), float(np.linalg.norm(self.dressing(x, max(float(mu), 0.0)) - full))))
        return out
