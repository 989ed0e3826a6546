"""Fredholm pairs and Fredholm maps at finite scale: indices, relative
dimension, kernel/cokernel extraction, and the additivity/duality laws.

Every dimension count here goes through ``numcore.rank`` on a frame stack or a
matrix, so the integer identities hold exactly whenever the individual rank
decisions are stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numcore import (
    DEFAULT_TOL,
    ShapeError,
    TolerancePolicy,
    as_matrix,
    conj_t,
    pseudoinverse,
    rank,
)
from .grassmann import Subspace, _check_same_ambient, perp


@dataclass(frozen=True, eq=False)
class FredholmPair:
    v: Subspace
    w: Subspace

    def __post_init__(self):
        _check_same_ambient(self.v, self.w)

    @property
    def ambient_dim(self) -> int:
        return self.v.ambient_dim


@dataclass(frozen=True, eq=False)
class FredholmMap:
    """A dense linear map with its kernel, cokernel and index.

    The cokernel is modeled by the orthogonal complement of the range in the
    codomain, with the orthogonal projection as the quotient map.
    """

    matrix: np.ndarray
    kernel: Subspace
    cokernel: Subspace
    index: int

    @property
    def domain_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def codomain_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def range_dim(self) -> int:
        return self.domain_dim - self.kernel.dim


def fredholm_map(matrix, tol: TolerancePolicy = DEFAULT_TOL) -> FredholmMap:
    m = as_matrix(matrix)
    rows, cols = m.shape
    r = rank(m, tol)
    pinv = pseudoinverse(m, tol)
    ker = Subspace.from_projector(np.eye(cols, dtype=m.dtype) - pinv @ m, cols - r, tol)
    coker = Subspace.from_projector(np.eye(rows, dtype=m.dtype) - m @ pinv, rows - r, tol)
    return FredholmMap(matrix=m, kernel=ker, cokernel=coker, index=(cols - r) - (rows - r))


def intersection_dim(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    return v.dim + w.dim - rank(np.hstack([v.matrix, w.matrix]), tol)


def sum_codim(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    return v.ambient_dim - rank(np.hstack([v.matrix, w.matrix]), tol)


def pair_index(p: FredholmPair, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """dim(V n W) - codim(V + W), both counts from one rank decision."""
    r = rank(np.hstack([p.v.matrix, p.w.matrix]), tol)
    return (p.v.dim + p.w.dim - r) - (p.ambient_dim - r)


def pair_index_via_operator(p: FredholmPair, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Index of the projection of V into the orthogonal complement of W."""
    wp = perp(p.w, tol)
    m = conj_t(wp.matrix) @ p.v.matrix
    r = rank(m, tol)
    return (p.v.dim - r) - (wp.dim - r)


def relative_dimension(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Index of the pair (V, W-perp); equals dim V - dim W at finite scale."""
    return pair_index(FredholmPair(v, perp(w, tol)), tol)


def relative_dimension_formulas(v: Subspace, w: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> tuple[int, int, int]:
    """The three defining expressions of the relative dimension.

    Returns (ind(V, W-perp), dim V n W-perp - dim V-perp n W, ind(P_W | V)).
    """
    wp = perp(w, tol)
    vp = perp(v, tol)
    first = pair_index(FredholmPair(v, wp), tol)
    second = intersection_dim(v, wp, tol) - intersection_dim(vp, w, tol)
    m = conj_t(w.matrix) @ v.matrix
    r = rank(m, tol)
    third = (v.dim - r) - (w.dim - r)
    return first, second, third


@dataclass(frozen=True, eq=False)
class AdditivityReport:
    ind_vz: int
    ind_wz: int
    dim_vw: int
    exact: bool


def verify_additivity(v: Subspace, w: Subspace, z: Subspace, tol: TolerancePolicy = DEFAULT_TOL) -> AdditivityReport:
    """ind(V, Z) = ind(W, Z) + dim(V, W)."""
    _check_same_ambient(v, w, z)
    ind_vz = pair_index(FredholmPair(v, z), tol)
    ind_wz = pair_index(FredholmPair(w, z), tol)
    dim_vw = relative_dimension(v, w, tol)
    return AdditivityReport(ind_vz, ind_wz, dim_vw, exact=(ind_vz == ind_wz + dim_vw))


@dataclass(frozen=True, eq=False)
class DualityReport:
    dim_ranges: int
    dim_kernels: int
    exact: bool


def verify_kernel_range_duality(t, t_prime, tol: TolerancePolicy = DEFAULT_TOL) -> DualityReport:
    """dim(ran T', ran T) = -dim(ker T', ker T)."""
    t = as_matrix(t)
    t_prime = as_matrix(t_prime)
    if t.shape != t_prime.shape:
        raise ShapeError("maps must have equal shapes")
    f, fp = fredholm_map(t, tol), fredholm_map(t_prime, tol)
    ran = Subspace.from_projector(t @ pseudoinverse(t, tol), f.range_dim, tol)
    ran_p = Subspace.from_projector(t_prime @ pseudoinverse(t_prime, tol), fp.range_dim, tol)
    dim_ranges = relative_dimension(ran_p, ran, tol)
    dim_kernels = relative_dimension(fp.kernel, f.kernel, tol)
    return DualityReport(dim_ranges, dim_kernels, exact=(dim_ranges == -dim_kernels))
