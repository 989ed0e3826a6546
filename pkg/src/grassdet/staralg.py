"""Matrix *-algebras with the conjugate-transpose involution: symmetric square
roots of one, the local graph chart around such a root, the unitary local
section of the conjugation action, and the lifting of square roots across a
perturbation of the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .numcore import (
    DEFAULT_TOL,
    PreconditionError,
    ShapeError,
    TolerancePolicy,
    as_matrix,
    conj_t,
    operator_norm,
)

CHART_RADIUS = np.sqrt(3.0) / 2.0


def _check_square(m: np.ndarray) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ShapeError("algebra elements are square matrices")
    return m


def is_symmetric(a, tol: float = 1e-10) -> bool:
    a = _check_square(a)
    return operator_norm(a - conj_t(a)) <= tol * max(1.0, operator_norm(a))


def check_square_root_of_one(q, tol: float = 1e-10) -> None:
    q = _check_square(q)
    n = q.shape[0]
    if operator_norm(q - conj_t(q)) > tol:
        raise PreconditionError("square root of one must be symmetric")
    if operator_norm(q @ q - np.eye(n, dtype=q.dtype)) > tol:
        raise PreconditionError("element does not square to one")


def hermitian_sqrt(a) -> np.ndarray:
    """Principal square root of a positive semidefinite symmetric matrix."""
    a = _check_square(a)
    w, v = np.linalg.eigh((a + conj_t(a)) / 2.0)
    if w.min() < -1e-12 * max(1.0, abs(w.max())):
        raise PreconditionError("matrix is not positive semidefinite")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ conj_t(v)


def principal_sqrt(a) -> np.ndarray:
    """Principal square root of a matrix with spectrum off the negative axis."""
    a = _check_square(a)
    if is_symmetric(a, 1e-12):
        return hermitian_sqrt(a)
    s = scipy.linalg.sqrtm(a)
    return np.ascontiguousarray(s)


def symmetric_split(a, q, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Decompose a symmetric element into its parts anti-commuting and
    commuting with q: (a - qaq)/2 and (a + qaq)/2."""
    a = _check_square(a)
    if not is_symmetric(a, tol):
        raise PreconditionError("input must be symmetric")
    check_square_root_of_one(q, tol)
    qaq = q @ a @ q
    return (a - qaq) / 2.0, (a + qaq) / 2.0


def chart_phi_q(q, x, tol: float = 1e-10) -> np.ndarray:
    """phi_q(x) = (1 - x^2)^(1/2) q on the symmetric anti-commutant ball of
    radius sqrt(3)/2; x + phi_q(x) is again a symmetric square root of one."""
    q = _check_square(q)
    x = _check_square(x)
    check_square_root_of_one(q, tol)
    if not is_symmetric(x, tol):
        raise PreconditionError("chart argument must be symmetric")
    if operator_norm(x @ q + q @ x) > tol * max(1.0, operator_norm(x)):
        raise PreconditionError("chart argument must anti-commute with the base point")
    if operator_norm(x) >= CHART_RADIUS:
        raise PreconditionError("chart argument norm must be below sqrt(3)/2")
    n = q.shape[0]
    z = hermitian_sqrt(np.eye(n, dtype=q.dtype) - x @ x)
    return z @ q


def chart_inverse(q, p, tol: float = 1e-10) -> np.ndarray:
    """Recover the anti-commutant coordinate of a square root of one inside
    the chart window around q."""
    check_square_root_of_one(q, tol)
    check_square_root_of_one(p, tol)
    x, y = symmetric_split(p, q, tol)
    if operator_norm(x) >= CHART_RADIUS:
        raise PreconditionError("point lies outside the chart window (anti-commutant part)")
    if operator_norm(y - q) >= 0.5:
        raise PreconditionError("point lies outside the chart window (commutant part)")
    resid = operator_norm(p - (x + chart_phi_q(q, x, tol)))
    if resid > 1e-9:
        raise PreconditionError(f"chart inversion residual {resid:.3e}")
    return x


def unitary_section(q, p, tol: float = 1e-10) -> np.ndarray:
    """u = (p + q) |p + q|^(-1) q, a unitary conjugating q to p for p in the
    ball of radius 2 around q."""
    check_square_root_of_one(q, tol)
    check_square_root_of_one(p, tol)
    if operator_norm(p - q) >= 2.0:
        raise PreconditionError("point lies outside the section window")
    s = p + q
    modulus = hermitian_sqrt(conj_t(s) @ s)
    sv = np.linalg.svd(modulus, compute_uv=False)
    if sv.size == 0 or sv[-1] < 1e-12 * max(1.0, sv[0]):
        raise PreconditionError("p + q is numerically singular")
    u = s @ np.linalg.solve(modulus, q)
    return u


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    """Similarity to a block form separating the spectrum of a square root
    perturbation: eigenvalues with |z^2 - 1| >= 1 first, the rest second."""

    basis: np.ndarray      # columns: invariant-subspace basis
    dim_outer: int         # size of the |z^2 - 1| >= 1 block

    @property
    def dim_inner(self) -> int:
        return self.basis.shape[0] - self.dim_outer


def _unit_gap(eigenvalues: np.ndarray, gap: float) -> None:
    dist = np.abs(np.abs(eigenvalues**2 - 1.0) - 1.0)
    if dist.size and dist.min() <= gap:
        raise PreconditionError("an eigenvalue sits on the spectral splitting boundary")


def spectral_split(q, gap: float = 1e-8) -> SpectralSplit:
    """Split the space into the spectral subspaces of q for the partition of
    the spectrum by the curve |z^2 - 1| = 1.

    Symmetric input uses an orthogonal eigenbasis; the general case uses an
    ordered Schur form decoupled by a Sylvester solve, avoiding any contour
    integration.
    """
    q = _check_square(q)
    n = q.shape[0]
    if is_symmetric(q, 1e-12):
        w, vecs = np.linalg.eigh((q + conj_t(q)) / 2.0)
        _unit_gap(w, gap)
        outer = np.abs(w**2 - 1.0) >= 1.0
        order = np.concatenate([np.where(outer)[0], np.where(~outer)[0]])
        return SpectralSplit(vecs[:, order], int(outer.sum()))
    t, zs, sdim = scipy.linalg.schur(
        q.astype(np.complex128), output="complex",
        sort=lambda lam: abs(lam * lam - 1.0) >= 1.0,
    )
    _unit_gap(np.diag(t), gap)
    m = int(sdim)
    if m in (0, n):
        return SpectralSplit(zs, m)
    t11, t12, t22 = t[:m, :m], t[:m, m:], t[m:, m:]
    x = scipy.linalg.solve_sylvester(t11, -t22, t12)
    basis = np.hstack([zs[:, :m], zs[:, :m] @ (-x) + zs[:, m:]])
    return SpectralSplit(basis, m)


def lifting_function(z) -> np.ndarray:
    """f(z) = 1 - z - (1 - z)^(1/2), satisfying f^2/(1-z) - 2f - z = 0."""
    z = _check_square(z)
    n = z.shape[0]
    eye = np.eye(n, dtype=z.dtype)
    return eye - z - principal_sqrt(eye - z)


def lift_square_root(q, k, tol: TolerancePolicy = DEFAULT_TOL, gap: float = 1e-8) -> np.ndarray:
    """Given q with q^2 = 1 - k, produce j with (q - j)^2 = 1.

    The space splits along the spectrum of q by the curve |z^2 - 1| = 1; on
    the outer part j is q minus the identity of the block, on the inner part
    j = q^(-1) f(k) with the lifting function f.  j is symmetric whenever q
    and k are.
    """
    q = _check_square(q)
    k = _check_square(k)
    n = q.shape[0]
    eye = np.eye(n, dtype=np.result_type(q, k))
    resid = operator_norm(q @ q - (eye - k))
    if resid > 1e-9 * max(1.0, operator_norm(q) ** 2):
        raise PreconditionError(f"q^2 = 1 - k fails with residual {resid:.3e}")
    split = spectral_split(q, gap)
    basis = split.basis
    m = split.dim_outer
    q_blocked = np.linalg.solve(basis, q @ basis)
    k_blocked = np.linalg.solve(basis, k @ basis)
    q1 = q_blocked[m:, m:]
    k1 = k_blocked[m:, m:]
    if k1.size:
        ev = np.linalg.eigvals(k1)
        if np.abs(ev).max() >= 1.0 - 1e-12:
            raise PreconditionError("inner-block spectrum reaches the unit circle")
    j_blocked = np.zeros_like(q_blocked)
    j_blocked[:m, :m] = q_blocked[:m, :m] - np.eye(m, dtype=q_blocked.dtype)
    if n - m:
        j_blocked[m:, m:] = np.linalg.solve(q1, lifting_function(k1))
    j = basis @ j_blocked @ np.linalg.solve(basis, eye)
    if not np.iscomplexobj(q) and not np.iscomplexobj(k):
        j = j.real
    if is_symmetric(q, 1e-12) and is_symmetric(k, 1e-12):
        j = (j + conj_t(j)) / 2.0
    return j
