"""Numerical substrate: tolerance policy, deterministic orthonormalization,
rank decisions, operator norms, pseudoinverse, and the JSON matrix format.

All other modules funnel their dimension counts through :func:`rank` so that
integer invariants (indices, relative dimensions) cannot disagree because of
mixed thresholds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

REAL = "real"
COMPLEX = "complex"


class ShapeError(ValueError):
    """Ambient or matrix shapes do not match."""


class PreconditionError(ValueError):
    """A documented precondition of an operation is violated."""


class ConvergenceError(RuntimeError):
    """An iteration exceeded its budget; carries the last contraction estimate."""

    def __init__(self, message, contraction=None):
        super().__init__(message)
        self.contraction = contraction


@dataclass(frozen=True)
class TolerancePolicy:
    """Thresholds shared by every rank decision and iterative stop rule."""

    rank_rel_tol: float = 1e-10
    convergence_tol: float = 1e-10
    max_iterations: int = 10_000

    def __post_init__(self):
        if self.rank_rel_tol <= 0 or self.convergence_tol <= 0:
            raise ValueError("tolerances must be strictly positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def rank_cutoff(self, sigma_max, rows, cols):
        return self.rank_rel_tol * sigma_max * max(rows, cols, 1)


DEFAULT_TOL = TolerancePolicy()


def field_of(m: np.ndarray) -> str:
    return COMPLEX if np.iscomplexobj(m) else REAL


def as_matrix(m, field=None) -> np.ndarray:
    """Coerce to a 2-d float64/complex128 array."""
    a = np.asarray(m)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d array, got shape {a.shape}")
    dtype = np.complex128 if (field == COMPLEX or np.iscomplexobj(a)) else np.float64
    return np.ascontiguousarray(a, dtype=dtype)


def conj_t(m: np.ndarray) -> np.ndarray:
    return m.conj().T


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal columns spanning a subspace of the ambient space."""

    columns: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.columns.shape[0]

    @property
    def k(self) -> int:
        return self.columns.shape[1]

    @property
    def field(self) -> str:
        return field_of(self.columns)

    def gram_residual(self) -> float:
        g = conj_t(self.columns) @ self.columns
        return float(np.linalg.norm(g - np.eye(self.k), 2)) if self.k else 0.0

    def validate(self, tol: TolerancePolicy = DEFAULT_TOL) -> None:
        if self.gram_residual() > 100 * tol.convergence_tol:
            raise ValueError("frame columns are not orthonormal")


def singular_values(m: np.ndarray) -> np.ndarray:
    m = as_matrix(m)
    if min(m.shape) == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def rank(m, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Singular values strictly above rank_rel_tol * sigma_max * max(rows, cols)."""
    m = as_matrix(m)
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_cutoff(s[0], *m.shape)))


def rank_at_scale(m, scale: float, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Rank with the cutoff anchored to an external scale instead of sigma_max.

    Needed when a matrix is expected to vanish: residues of cancelling products
    must be measured against the size of the factors, not against themselves.
    """
    m = as_matrix(m)
    s = singular_values(m)
    if s.size == 0:
        return 0
    cut = tol.rank_cutoff(max(scale, s[0] * 0), *m.shape)
    return int(np.count_nonzero(s > cut))


def operator_norm(m) -> float:
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def pseudoinverse(m, tol: TolerancePolicy = DEFAULT_TOL, scale: float | None = None) -> np.ndarray:
    """Moore-Penrose inverse under the same cutoff as :func:`rank`.

    ``scale`` anchors the cutoff externally (see :func:`rank_at_scale`).
    """
    m = as_matrix(m)
    if min(m.shape) == 0:
        return np.zeros((m.shape[1], m.shape[0]), dtype=m.dtype)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((m.shape[1], m.shape[0]), dtype=m.dtype)
    cut = tol.rank_cutoff(s[0] if scale is None else scale, *m.shape)
    inv = np.where(s > cut, 1.0 / np.where(s > cut, s, 1.0), 0.0)
    return conj_t(vh) @ (inv[:, None] * conj_t(u))


def orthonormalize(vectors, tol: TolerancePolicy = DEFAULT_TOL) -> Frame:
    """Orthonormal frame for the column space of ``vectors``.

    Width equals the SVD numerical rank.  The factorization is a column-pivoted
    modified Gram-Schmidt with a fixed pivot rule (largest remaining column
    norm, ties broken by lowest index), so the returned frame is deterministic.
    """
    m = as_matrix(vectors)
    n, k = m.shape
    r = rank(m, tol)
    if r == 0:
        return Frame(np.zeros((n, 0), dtype=m.dtype))
    work = m.copy()
    cols = []
    remaining = list(range(k))
    for _ in range(r):
        norms = np.linalg.norm(work[:, remaining], axis=0)
        best = int(np.argmax(norms))  # argmax takes the first maximum
        j = remaining.pop(best)
        v = work[:, j]
        nv = np.linalg.norm(v)
        if nv == 0.0:
            continue
        q = v / nv
        # second orthogonalization pass keeps the frame orthonormal to 1e-14
        for u in cols:
            q = q - u * (np.vdot(u, q))
        q = q / np.linalg.norm(q)
        cols.append(q)
        if remaining:
            rest = work[:, remaining]
            rest -= np.outer(q, conj_t(q[:, None]) @ rest)
            work[:, remaining] = rest
    out = np.column_stack(cols) if cols else np.zeros((n, 0), dtype=m.dtype)
    return Frame(out)


def frame_from_projector(p: np.ndarray, dim: int, tol: TolerancePolicy = DEFAULT_TOL) -> Frame:
    """Canonical frame of the range of an (approximate) orthogonal projector.

    Depends only on the projector entries, so subspaces obtained through
    different computations receive identical frames.
    """
    p = as_matrix(p)
    if dim == 0:
        return Frame(np.zeros((p.shape[0], 0), dtype=p.dtype))
    work = p.copy()
    cols = []
    remaining = list(range(p.shape[1]))
    for _ in range(dim):
        norms = np.linalg.norm(work[:, remaining], axis=0)
        best = int(np.argmax(norms))
        j = remaining.pop(best)
        v = work[:, j]
        q = v / np.linalg.norm(v)
        for u in cols:
            q = q - u * np.vdot(u, q)
        q = q / np.linalg.norm(q)
        cols.append(q)
        rest = work[:, remaining]
        rest -= np.outer(q, conj_t(q[:, None]) @ rest)
        work[:, remaining] = rest
    return Frame(np.column_stack(cols))


# --- JSON wire format -------------------------------------------------------
#
# {"field": "real"|"complex", "rows": n, "cols": m, "data": [...]}  row-major,
# complex entries as [re, im] pairs.


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    if field_of(m) == COMPLEX:
        data = [[float(z.real), float(z.imag)] for z in m.ravel()]
    else:
        data = [float(x) for x in m.ravel()]
    return {"field": field_of(m), "rows": m.shape[0], "cols": m.shape[1], "data": data}


def matrix_from_json(obj) -> np.ndarray:
    try:
        field = obj["field"]
        rows, cols = int(obj["rows"]), int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if field not in (REAL, COMPLEX):
        raise ValueError(f"unknown field tag {field!r}")
    if len(data) != rows * cols:
        raise ValueError("data length does not match rows*cols")
    if field == COMPLEX:
        flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    else:
        flat = np.array(data, dtype=np.float64)
    return flat.reshape(rows, cols)


def matrix_dumps(m) -> str:
    return json.dumps(matrix_to_json(m))


def matrix_loads(s) -> np.ndarray:
    return matrix_from_json(json.loads(s))
