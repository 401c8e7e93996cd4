"""Weyl algebras over finite-dimensional symplectic spaces.

Elements are finite combinations of generators ``W(v)`` kept in normal form:
one coefficient per canonical label. Products follow
``W(v) W(w) = exp(-i sigma(v, w) / 2) W(v + w)`` and ``W(v)* = W(-v)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp


class SpaceMismatch(ValueError):
    """Operands live over different symplectic spaces."""


class DimensionMismatch(ValueError):
    """A label has the wrong number of coordinates."""


class NotSymplectic(ValueError):
    """A linear map does not preserve the symplectic forms."""


SIG_DIGITS = 12


class SymplecticSpace:
    """A real vector space of coordinate labels with a (pre-)symplectic matrix.

    ``blocks`` names consecutive coordinate ranges, e.g. ``[("F", n), ("H", n)]``.
    """

    def __init__(self, sigma, blocks: Sequence[tuple[str, int]] | None = None, name: str = ""):
        mat = sp.csr_matrix(sigma, dtype=float)
        if mat.shape[0] != mat.shape[1]:
            raise DimensionMismatch("sigma must be square")
        skew = mat + mat.T
        if skew.nnz and np.abs(skew.data).max() > 1e-14 * max(1.0, np.abs(mat.data).max(initial=0.0)):
            raise ValueError("sigma must be antisymmetric")
        self.sigma_matrix = mat
        self.dim = mat.shape[0]
        self.blocks = list(blocks) if blocks else [("x", self.dim)]
        if sum(n for _, n in self.blocks) != self.dim:
            raise DimensionMismatch("block sizes do not add up to the dimension")
        self.name = name

    @classmethod
    def darboux(cls, pairs: Sequence[tuple[str, str, int]], name: str = "") -> "SymplecticSpace":
        """Direct sum of canonical pairs ``sigma((q,p),(q',p')) = q.p' - p.q'``."""
        mats, blocks = [], []
        for q, p, n in pairs:
            eye = sp.identity(n, format="csr")
            mats.append(sp.bmat([[None, eye], [-eye, None]]) if n else sp.csr_matrix((0, 0)))
            blocks += [(q, n), (p, n)]
        return cls(sp.block_diag(mats, format="csr") if mats else sp.csr_matrix((0, 0)), blocks, name)

    def slice(self, block: str) -> slice:
        start = 0
        for name, n in self.blocks:
            if name == block:
                return slice(start, start + n)
            start += n
        raise KeyError(block)

    def sigma(self, v, w) -> float:
        return float(np.asarray(v) @ (self.sigma_matrix @ np.asarray(w)))

    def sigma_batch(self, V: np.ndarray, W: np.ndarray) -> np.ndarray:
        """Matrix of sigma(V[i], W[j])."""
        return np.asarray(V) @ np.asarray(self.sigma_matrix @ np.asarray(W).T)

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim)

    def direct_sum(self, other: "SymplecticSpace", name: str = "") -> "SymplecticSpace":
        def tag(space, blocks):
            return [(f"{space.name}.{b}" if space.name else b, n) for b, n in blocks]
        blocks = tag(self, self.blocks) + tag(other, other.blocks)
        names = [b for b, _ in blocks]
        if len(set(names)) != len(names):
            blocks = [(f"{b}#{i}", n) for i, (b, n) in enumerate(blocks)]
        return SymplecticSpace(sp.block_diag([self.sigma_matrix, other.sigma_matrix], format="csr"), blocks, name)

    def same_as(self, other: "SymplecticSpace") -> bool:
        if self is other:
            return True
        if self.dim != other.dim:
            return False
        diff = self.sigma_matrix - other.sigma_matrix
        return diff.nnz == 0 or np.abs(diff.data).max() == 0.0

    def check_label(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"label of shape {v.shape} in a space of dimension {self.dim}")
        return v

    def __repr__(self) -> str:
        return f"SymplecticSpace(dim={self.dim}, blocks={self.blocks})"


def label_key(v: np.ndarray) -> bytes:
    """Canonical key: coordinates rounded to 12 significant digits of the label's largest entry."""
    top = float(np.abs(v).max()) if v.size else 0.0
    if top == 0.0:
        return b"0"
    exp = math.floor(math.log10(top))
    quantum = 10.0 ** (exp - SIG_DIGITS + 1)
    ints = np.rint(v / quantum).astype(np.int64)
    return exp.to_bytes(2, "little", signed=True) + ints.tobytes()


class WeylElement:
    """A finite combination ``sum_v c_v W(v)`` in normal form."""

    __slots__ = ("space", "_terms")

    def __init__(self, space: SymplecticSpace, terms: dict | None = None):
        self.space = space
        self._terms: dict[bytes, tuple[np.ndarray, complex]] = terms or {}

    @classmethod
    def from_terms(cls, space: SymplecticSpace, labels, coeffs) -> "WeylElement":
        labels = np.atleast_2d(np.asarray(labels, dtype=float))
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if labels.shape[0] and labels.shape[1] != space.dim:
            raise DimensionMismatch(f"labels of width {labels.shape[1]} in a space of dimension {space.dim}")
        acc: dict[bytes, list] = {}
        for v, c in zip(labels, coeffs):
            key = label_key(v)
            slot = acc.get(key)
            if slot is None:
                acc[key] = [v, complex(c), abs(c)]
            else:
                slot[1] += c
                slot[2] = max(slot[2], abs(c))
        terms = {k: (v, c) for k, (v, c, big) in acc.items() if abs(c) > 1e-14 * big}
        return cls(space, terms)

    # ------------------------------------------------------------ access
    def __len__(self) -> int:
        return len(self._terms)

    def terms(self) -> list[tuple[np.ndarray, complex]]:
        return list(self._terms.values())

    @property
    def labels(self) -> np.ndarray:
        if not self._terms:
            return np.zeros((0, self.space.dim))
        return np.array([v for v, _ in self._terms.values()])

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([c for _, c in self._terms.values()], dtype=complex)

    def coefficient(self, v) -> complex:
        hit = self._terms.get(label_key(self.space.check_label(v)))
        return 0j if hit is None else hit[1]

    def is_zero(self) -> bool:
        return not self._terms

    # ------------------------------------------------------------ algebra
    def _same(self, other: "WeylElement") -> None:
        if not self.space.same_as(other.space):
            raise SpaceMismatch("elements live over different spaces")

    def __add__(self, other):
        if not isinstance(other, WeylElement):
            other = scale(unit(self.space), other)
        self._same(other)
        return WeylElement.from_terms(
            self.space,
            np.concatenate([self.labels, other.labels]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        return self + (-other if isinstance(other, WeylElement) else -complex(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return multiply(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def star(self) -> "WeylElement":
        return star(self)

    def allclose(self, other: "WeylElement", label_tol: float = 1e-9, coeff_tol: float = 1e-10) -> bool:
        return max_difference(self, other, label_tol) <= coeff_tol

    def __repr__(self) -> str:
        return f"WeylElement({len(self)} terms over dim {self.space.dim})"

    def to_json(self) -> list[dict]:
        return [{"label": v.tolist(), "re": c.real, "im": c.imag} for v, c in self.terms()]

    @classmethod
    def from_json(cls, space: SymplecticSpace, doc: Iterable[dict]) -> "WeylElement":
        doc = list(doc)
        if not doc:
            return cls(space)
        labels = [d["label"] for d in doc]
        coeffs = [complex(d["re"], d["im"]) for d in doc]
        return cls.from_terms(space, labels, coeffs)


def unit(space: SymplecticSpace) -> WeylElement:
    return WeylElement.from_terms(space, space.zero()[None, :], [1.0])


def zero(space: SymplecticSpace) -> WeylElement:
    return WeylElement(space)


def generator(space: SymplecticSpace, v, background=None) -> WeylElement:
    """``W(v)`` relative to the reference background.

    ``background`` is the label-space offset ``u = K(A_bg) - K(A_ref)``;
    then ``W_bg(v) = exp(-i sigma(v, u)) W_ref(v)``, so that backgrounds
    A and A - a differ by ``exp(i sigma(v, a))``.
    """
    v = space.check_label(v)
    coeff = 1.0 + 0j
    if background is not None:
        coeff = np.exp(-1j * space.sigma(v, space.check_label(background)))
    return WeylElement.from_terms(space, v[None, :], [coeff])


def scale(a: WeylElement, c) -> WeylElement:
    c = complex(c)
    if c == 0:
        return WeylElement(a.space)
    return WeylElement(a.space, {k: (v, c * x) for k, (v, x) in a._terms.items()})


def add(a: WeylElement, b: WeylElement) -> WeylElement:
    return a + b


def multiply(a: WeylElement, b: WeylElement) -> WeylElement:
    a._same(b)
    if a.is_zero() or b.is_zero():
        return WeylElement(a.space)
    V, W = a.labels, b.labels
    phase = np.exp(-0.5j * a.space.sigma_batch(V, W))
    coeffs = (a.coeffs[:, None] * b.coeffs[None, :] * phase).ravel()
    labels = (V[:, None, :] + W[None, :, :]).reshape(-1, a.space.dim)
    return WeylElement.from_terms(a.space, labels, coeffs)


def star(a: WeylElement) -> WeylElement:
    return WeylElement.from_terms(a.space, -a.labels, np.conj(a.coeffs))


def two_norm(a: WeylElement) -> float:
    return float(np.sqrt(np.sum(np.abs(a.coeffs) ** 2)))


def phase_multiply(a: WeylElement, u) -> WeylElement:
    """``W(v) -> exp(i sigma(v, u)) W(v)``."""
    u = a.space.check_label(u)
    if a.is_zero():
        return a
    phases = np.exp(1j * (a.labels @ (a.space.sigma_matrix @ u)))
    return WeylElement.from_terms(a.space, a.labels, a.coeffs * phases)


def background_shift(a: WeylElement, diff) -> WeylElement:
    """The automorphism ``alpha(diff)``, equal to ``Ad W(diff)``."""
    return phase_multiply(a, diff)


def large_gauge(a: WeylElement, gauge_label) -> WeylElement:
    """Background shift along a large-gauge direction (the label of ``G(lam)``)."""
    return phase_multiply(a, gauge_label)


def tensor(a: WeylElement, b: WeylElement, space: SymplecticSpace | None = None) -> WeylElement:
    """``a ⊗ b`` over the direct sum (labels concatenate, coefficients multiply)."""
    space = space or a.space.direct_sum(b.space)
    if space.dim != a.space.dim + b.space.dim:
        raise SpaceMismatch("target space is not the direct sum")
    if a.is_zero() or b.is_zero():
        return WeylElement(space)
    V, W = a.labels, b.labels
    labels = np.concatenate(
        [np.repeat(V, len(W), axis=0), np.tile(W, (len(V), 1))], axis=1
    )
    coeffs = (a.coeffs[:, None] * b.coeffs[None, :]).ravel()
    return WeylElement.from_terms(space, labels, coeffs)


@dataclass(frozen=True)
class SymplecticMap:
    """A linear map between label spaces, validated symplectic at construction."""

    matrix: sp.csr_matrix
    source: SymplecticSpace
    target: SymplecticSpace

    @classmethod
    def build(cls, matrix, source: SymplecticSpace, target: SymplecticSpace, tol: float = 1e-10) -> "SymplecticMap":
        mat = sp.csr_matrix(matrix, dtype=float)
        if mat.shape != (target.dim, source.dim):
            raise DimensionMismatch(f"map of shape {mat.shape} between dims {source.dim} -> {target.dim}")
        pulled = (mat.T @ target.sigma_matrix @ mat) - source.sigma_matrix
        defect = np.abs(pulled.data).max() if pulled.nnz else 0.0
        scale_ = max(1.0, np.abs(source.sigma_matrix.data).max(initial=0.0))
        if defect > tol * scale_:
            raise NotSymplectic(f"symplectic defect {defect:.3e}")
        return cls(mat, source, target)

    def __call__(self, v) -> np.ndarray:
        return np.asarray(self.matrix @ np.asarray(v, dtype=float))


def weyl_map(iota: SymplecticMap, a: WeylElement) -> WeylElement:
    """The Weyl functor: ``W(v) -> W(iota v)``."""
    if not a.space.same_as(iota.source):
        raise SpaceMismatch("element does not live over the map's source")
    if a.is_zero():
        return WeylElement(iota.target)
    labels = np.asarray((iota.matrix @ a.labels.T).T)
    return WeylElement.from_terms(iota.target, labels, a.coeffs)


class LabelPredicate:
    """Membership test for the common kernel of linear functionals on labels."""

    def __init__(self, space: SymplecticSpace, functionals, tol: float = 1e-9):
        self.space = space
        F = np.atleast_2d(np.asarray(functionals, dtype=float)) if len(functionals) else np.zeros((0, space.dim))
        self.functionals = F
        self.tol = tol
        self._basis = None

    def defect(self, v) -> float:
        v = self.space.check_label(v)
        if not self.functionals.size:
            return 0.0
        return float(np.abs(self.functionals @ v).max()) / max(1.0, float(np.abs(v).max()))

    def __call__(self, v) -> bool:
        return self.defect(v) <= self.tol

    def element(self, a: WeylElement) -> bool:
        return all(self(v) for v, _ in a.terms())

    @property
    def basis(self) -> np.ndarray:
        """Orthonormal basis (columns) of the kernel."""
        if self._basis is None:
            if not self.functionals.size:
                self._basis = np.eye(self.space.dim)
            else:
                self._basis = la.null_space(self.functionals, rcond=1e-12)
        return self._basis


def fixed_point_generators(space: SymplecticSpace, functionals) -> LabelPredicate:
    """Labels annihilated by every functional: generators fixed by the matching phase automorphisms."""
    return LabelPredicate(space, functionals)


def max_difference(a: WeylElement, b: WeylElement, label_tol: float = 1e-9) -> float:
    """Largest coefficient mismatch after aligning labels within ``label_tol`` (relative)."""
    a._same(b)
    labels = np.concatenate([a.labels, b.labels])
    coeffs = np.concatenate([a.coeffs, -b.coeffs])
    if not len(coeffs):
        return 0.0
    scale_ = np.maximum(1.0, np.abs(labels).max(axis=1))
    group = -np.ones(len(coeffs), dtype=np.int64)
    sums = []
    for i in range(len(coeffs)):
        if group[i] >= 0:
            continue
        close = np.abs(labels - labels[i]).max(axis=1) <= label_tol * np.maximum(scale_, scale_[i])
        members = np.flatnonzero(close & (group < 0))
        group[members] = len(sums)
        sums.append(coeffs[members].sum())
    return float(np.abs(sums).max())


def dumps(a: WeylElement) -> str:
    return json.dumps(a.to_json())
