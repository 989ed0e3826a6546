"""Subspaces of a fixed ambient space: projectors, the gap metric, graph
charts, transverse intersections (closed resolvent form and projector-power
limit), and finite sums.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .numcore import (
    COMPLEX,
    DEFAULT_TOL,
    ConvergenceError,
    Frame,
    PreconditionError,
    ShapeError,
    TolerancePolicy,
    as_matrix,
    conj_t,
    frame_from_projector,
    matrix_from_json,
    matrix_to_json,
    operator_norm,
    orthonormalize,
    pseudoinverse,
    rank,
)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace described by an orthonormal frame."""

    frame: Frame

    @property
    def ambient_dim(self) -> int:
        return self.frame.ambient_dim

    @property
    def dim(self) -> int:
        return self.frame.k

    @property
    def field(self) -> str:
        return self.frame.field

    @property
    def matrix(self) -> np.ndarray:
        return self.frame.columns

    @staticmethod
    def from_vectors(vectors, tol: TolerancePolicy = DEFAULT_TOL) -> "Subspace":
        return Subspace(orthonormalize(vectors, tol))

    @staticmethod
    def from_projector(p, dim: int, tol: TolerancePolicy = DEFAULT_TOL) -> "Subspace":
        return Subspace(frame_from_projector(p, dim, tol))

    @staticmethod
    def full(n: int, field: str = "real") -> "Subspace":
        dtype = np.complex128 if field == COMPLEX else np.float64
        return Subspace(Frame(np.eye(n, dtype=dtype)))

    @staticmethod
    def zero(n: int, field: str = "real") -> "Subspace":
        dtype = np.complex128 if field == COMPLEX else np.float64
        return Subspace(Frame(np.zeros((n, 0), dtype=dtype)))

    def to_json(self) -> dict:
        return {"ambient": self.ambient_dim, "frame": matrix_to_json(self.matrix)}

    @staticmethod
    def from_json(obj, tol: TolerancePolicy = DEFAULT_TOL) -> "Subspace":
        try:
            ambient = int(obj["ambient"])
            cols = matrix_from_json(obj["frame"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed subspace object: {exc}") from exc
        if cols.shape[0] != ambient:
            raise ShapeError("frame rows do not match declared ambient dimension")
        fr = Frame(cols)
        resid = fr.gram_residual()
        if resid >= 1e-6:
            raise ValueError(f"frame fails the orthonormality check (residual {resid:.3e})")
        if resid > 100 * tol.convergence_tol:
            warnings.warn("frame re-orthonormalized on load", stacklevel=2)
            fr = orthonormalize(cols, tol)
        return Subspace(fr)


def _check_same_ambient(*spaces: Subspace):
    dims = {s.ambient_dim for s in spaces}
    if len(dims) != 1:
        raise ShapeError(f"ambient dimensions differ: {sorted(dims)}")


def projector(v: Subspace) -> np.ndarray:
    return v.matrix @ conj_t(v.matrix)


def distance(v: Subspace, w: Subspace) -> float:
    """Gap metric: operator norm of the projector difference."""
    _check_same_ambient(v, w)
    return operator_norm(projector(v) - projector(w))


def perp(v: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    n = v.ambient_dim
    p = np.eye(n, dtype=v.matrix.dtype) - projector(v)
    return Subspace.from_projector(p, n - v.dim, tol)


def complement_in(big: Subspace, small: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement of ``small`` inside ``big`` (small must lie in big)."""
    _check_same_ambient(big, small)
    p = projector(big) - projector(small)
    return Subspace.from_projector(p, big.dim - small.dim, tol)


def oracle_intersection(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """SVD-based intersection: null space of the stacked complement projectors."""
    _check_same_ambient(v, w)
    n = v.ambient_dim
    eye = np.eye(n, dtype=v.matrix.dtype)
    stacked = np.vstack([eye - projector(v), eye - projector(w)])
    r = rank(stacked, tol)
    p = eye - pseudoinverse(stacked, tol) @ stacked
    return Subspace.from_projector(p, n - r, tol)


def sum_projector(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL):
    cat = np.hstack([v.matrix, w.matrix])
    dim = rank(cat, tol)
    return cat @ pseudoinverse(cat, tol), dim


@dataclass(frozen=True, eq=False)
class GraphChartPoint:
    """A subspace in the graph chart of ``base``: columns of the operator map
    base coordinates to canonical orthogonal-complement coordinates."""

    base: Subspace
    operator: np.ndarray


def chart_to(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> GraphChartPoint:
    """Graph coordinates of ``w`` over ``v``; defined on the open unit ball."""
    _check_same_ambient(v, w)
    if distance(v, w) >= 1.0 - 1e-12:
        raise PreconditionError("subspace lies outside the unit-ball chart domain")
    vperp = perp(v, tol)
    onto_v = conj_t(v.matrix) @ w.matrix
    a = (conj_t(vperp.matrix) @ w.matrix) @ np.linalg.inv(onto_v)
    return GraphChartPoint(base=v, operator=a)


def chart_from(p: GraphChartPoint, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """The graph subspace {x + Ax : x in base}."""
    v = p.base
    vperp = perp(v, tol)
    g = v.matrix + vperp.matrix @ p.operator
    return Subspace.from_vectors(g, tol)


def chart_transition(v: Subspace, w: Subspace, a: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Coordinates over ``w`` of the graph of ``a`` over ``v``."""
    _check_same_ambient(v, w)
    a = as_matrix(a)
    vperp = perp(v, tol)
    g = v.matrix + vperp.matrix @ a
    onto_w = conj_t(w.matrix) @ g
    if rank(onto_w, tol) < w.dim:
        raise PreconditionError("graph lies outside the unit-ball chart of the target")
    wperp = perp(w, tol)
    return (conj_t(wperp.matrix) @ g) @ np.linalg.inv(onto_w)


@dataclass(frozen=True, eq=False)
class TransverseSplitting:
    """Base decomposition H = H0 + H1 + H2 with V = H0 + H1, W = H0 + H2.

    H1 and H2 need not be orthogonal to each other; both are orthogonal to H0.
    """

    h0: Subspace
    h1: Subspace
    h2: Subspace

    @property
    def ambient_dim(self) -> int:
        return self.h0.ambient_dim

    def coords(self, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Componentwise coordinates of ambient vectors in the oblique splitting."""
        basis = np.hstack([self.h0.matrix, self.h1.matrix, self.h2.matrix])
        c = np.linalg.solve(basis, vectors) if basis.shape[0] == basis.shape[1] else np.linalg.lstsq(basis, vectors, rcond=None)[0]
        d0, d1 = self.h0.dim, self.h1.dim
        return c[:d0], c[d0 : d0 + d1], c[d0 + d1 :]


def transverse_splitting(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> TransverseSplitting:
    """Oracle splitting at a transverse pair: H0 = intersection, H1, H2 the
    orthogonal complements of H0 inside V and W."""
    h0 = oracle_intersection(v, w, tol)
    h1 = complement_in(v, h0, tol)
    h2 = complement_in(w, h0, tol)
    return TransverseSplitting(h0, h1, h2)


def graph_intersection(split: TransverseSplitting, a: np.ndarray, b: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Intersection of graph(a) and graph(b) through the closed resolvent form.

    ``a`` maps (H0+H1)-coordinates to H2-coordinates, ``b`` maps
    (H0+H2)-coordinates to H1-coordinates, both of norm < 1.  The intersection
    of the two graphs is the graph over H0 of

        T(a, b) = (I - ba)^(-1) (b + ba) + (I - ab)^(-1) (a + ab),

    evaluated here by linear solves with the two resolvents.
    """
    d0, d1, d2 = split.h0.dim, split.h1.dim, split.h2.dim
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != (d2, d0 + d1) or b.shape != (d1, d0 + d2):
        raise ShapeError("chart operators do not match the splitting dimensions")
    if operator_norm(a) >= 1.0 or operator_norm(b) >= 1.0:
        raise PreconditionError("chart operators must have norm < 1")
    a0, a1 = a[:, :d0], a[:, d0:]
    b0, b2 = b[:, :d0], b[:, d0:]
    h1_part = np.linalg.solve(np.eye(d1, dtype=a.dtype) - b2 @ a1, b0 + b2 @ a0)
    h2_part = np.linalg.solve(np.eye(d2, dtype=a.dtype) - a1 @ b2, a0 + a1 @ b0)
    g = split.h0.matrix + split.h1.matrix @ h1_part + split.h2.matrix @ h2_part
    return Subspace.from_vectors(g, tol)


def graph_intersection_series(split: TransverseSplitting, a, b, trunc: float = 1e-12, max_terms: int = 500) -> np.ndarray:
    """Partial sums a + b + ab + ba + ... of the resolvent series; test oracle.

    Returns the (d1+d2) x d0 coordinate matrix of T(a, b), truncating once the
    last pair of terms drops below ``trunc`` in norm.
    """
    d0, d1, d2 = split.h0.dim, split.h1.dim, split.h2.dim
    a = as_matrix(a)
    b = as_matrix(b)
    # embed as endomorphisms of the (d0+d1+d2)-dimensional coordinate space
    n = d0 + d1 + d2
    ahat = np.zeros((n, n), dtype=np.result_type(a, b))
    bhat = np.zeros_like(ahat)
    ahat[d0 + d1 :, :d0] = a[:, :d0]
    ahat[d0 + d1 :, d0 : d0 + d1] = a[:, d0:]
    bhat[d0 : d0 + d1, :d0] = b[:, :d0]
    bhat[d0 : d0 + d1, d0 + d1 :] = b[:, d0:]
    total = np.zeros_like(ahat)
    word_a, word_b = ahat.copy(), bhat.copy()  # words ending with a / b applied first
    for _ in range(max_terms):
        total += word_a + word_b
        na, nb = operator_norm(word_a), operator_norm(word_b)
        if max(na, nb) < trunc:
            break
        word_a, word_b = bhat @ word_a, ahat @ word_b
    else:
        raise ConvergenceError("graph-intersection series did not truncate")
    return total[d0:, :d0]


def intersect_transverse(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Intersection of a transverse pair via the resolvent form T(a, b).

    The base splitting is produced by the SVD oracle at the pair itself, so the
    chart operators of ``v`` and ``w`` vanish there and the resolvent
    evaluation is exercised at the base point; :func:`graph_intersection`
    exposes the same formula for nonzero chart operators.
    """
    _check_same_ambient(v, w)
    n = v.ambient_dim
    if rank(np.hstack([v.matrix, w.matrix]), tol) < n:
        raise PreconditionError("subspaces are not transverse (V + W != H)")
    split = transverse_splitting(v, w, tol)
    basis = np.hstack([split.h0.matrix, split.h1.matrix, split.h2.matrix])
    vc = np.linalg.solve(basis, v.matrix)
    wc = np.linalg.solve(basis, w.matrix)
    d0, d1 = split.h0.dim, split.h1.dim
    # chart operators of V over H0+H1 and W over H0+H2; zero up to roundoff
    a = vc[d0 + d1 :] @ pseudoinverse(vc[: d0 + d1], tol)
    b = wc[d0 : d0 + d1] @ pseudoinverse(np.vstack([wc[:d0], wc[d0 + d1 :]]), tol)
    return graph_intersection(split, a, b, tol)


def intersect_power(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Intersection as the operator-norm limit of (P_V P_W)^n."""
    _check_same_ambient(v, w)
    m = projector(v) @ projector(w)
    current = m
    for _ in range(tol.max_iterations):
        nxt = current @ m
        delta = operator_norm(nxt - current)
        if delta < tol.convergence_tol:
            current = nxt
            break
        current = nxt
    else:
        inter = oracle_intersection(v, w, tol)
        theta = operator_norm(m - projector(inter))
        raise ConvergenceError(
            f"projector powers did not settle in {tol.max_iterations} iterations",
            contraction=theta,
        )
    dim = rank(current, tol)
    sym = (current + conj_t(current)) / 2.0
    return Subspace.from_projector(sym, dim, tol)


def sum_finite(x: Subspace, v: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> Subspace:
    """Direct sum X + V of subspaces with trivial intersection."""
    _check_same_ambient(x, v)
    cat = np.hstack([x.matrix, v.matrix])
    if rank(cat, tol) < x.dim + v.dim:
        raise PreconditionError("X and V have a nontrivial intersection")
    p = cat @ pseudoinverse(cat, tol)
    return Subspace.from_projector(p, x.dim + v.dim, tol)
