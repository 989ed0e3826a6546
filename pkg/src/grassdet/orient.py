"""Orientations and co-orientations over the real field: signs against the
canonical generators of determinant lines of pairs, the two-of-three
induction through projection compositions, the tetrahedron associativity law,
and the compatibility of orientation sums with the induction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numcore import DEFAULT_TOL, PreconditionError, TolerancePolicy, conj_t, operator_norm
from .grassmann import Subspace, oracle_intersection, perp, projector, sum_finite
from .fredholm import FredholmPair, fredholm_map
from .detcalc import DetLine, compose_lift, psi_T, tensor_transport, wedge_coeff
from .bundles import pair_det_line


class FieldError(PreconditionError):
    """Operation defined over the real field only."""


def _require_real(*spaces: Subspace):
    for s in spaces:
        if s.field != "real":
            raise FieldError("orientations are defined over the real field only")


@dataclass(frozen=True, eq=False)
class Orientation:
    """A sign against the canonical generator of the pair's determinant line."""

    pair: FredholmPair
    sign: int

    def __post_init__(self):
        _require_real(self.pair.v, self.pair.w)
        if self.sign not in (-1, 1):
            raise ValueError("orientation sign must be +-1")


@dataclass(frozen=True, eq=False)
class CoOrientation:
    """A sign against the canonical generator of Det(W, V-perp)."""

    w: Subspace
    v: Subspace
    sign: int

    def __post_init__(self):
        _require_real(self.w, self.v)
        if self.sign not in (-1, 1):
            raise ValueError("co-orientation sign must be +-1")


def _same_space(a: Subspace, b: Subspace) -> bool:
    if a.dim != b.dim or a.ambient_dim != b.ambient_dim:
        return False
    return operator_norm(projector(a) - projector(b)) < 1e-8


def co_line_pair(co: CoOrientation, tol: TolerancePolicy = DEFAULT_TOL) -> FredholmPair:
    return FredholmPair(co.w, perp(co.v, tol))


def _cross_reading_factor(pair_src: FredholmPair, pair_dst: FredholmPair,
                          tol: TolerancePolicy) -> float:
    """Transport between two pair lines whose components are the same two
    subspaces in exchanged positions (intersection of one is the quotient
    model of the other).

    Both lines orient the same direct sum; identifying each dual factor with
    its space through the inner product reduces the transport to a comparison
    of ordered wedges of that sum.
    """
    i1, q1 = pair_det_line(pair_src, tol)
    i2, q2 = pair_det_line(pair_dst, tol)
    if not (_same_space(i1.space, q2.space) and _same_space(q1.space, i2.space)):
        raise PreconditionError("pair lines do not have exchanged components")
    if i1.space.dim + q1.space.dim == 0:
        return 1.0
    total = sum_finite(i1.space, q1.space, tol)
    k1 = wedge_coeff(total, np.hstack([i1.space.matrix, q1.space.matrix]))
    k2 = wedge_coeff(total, np.hstack([i2.space.matrix, q2.space.matrix]))
    return float(np.sign(k1 / k2))


def co_swapped(co: CoOrientation, tol: TolerancePolicy = DEFAULT_TOL) -> CoOrientation:
    """The same co-orientation read on Det(V, W-perp)."""
    factor = _cross_reading_factor(
        co_line_pair(co, tol),
        co_line_pair(CoOrientation(co.v, co.w, 1), tol),
        tol,
    )
    return CoOrientation(co.v, co.w, int(co.sign * factor))


def _oriented_sign(o: Orientation, v_first: Subspace, z_second: Subspace,
                   tol: TolerancePolicy) -> int:
    """Sign of the orientation read against the canonical line of the pair
    in the requested order (pair lines are order-symmetric up to frames)."""
    if _same_space(o.pair.v, v_first) and _same_space(o.pair.w, z_second):
        src = pair_det_line(o.pair, tol)
    elif _same_space(o.pair.v, z_second) and _same_space(o.pair.w, v_first):
        src = pair_det_line(o.pair, tol)
    else:
        raise PreconditionError("orientation does not belong to the requested pair")
    dst = pair_det_line(FredholmPair(v_first, z_second), tol)
    factor = tensor_transport(src, dst)
    return int(o.sign * np.sign(factor))


def _det_or_one(m: np.ndarray) -> float:
    return float(np.linalg.det(m)) if m.size else 1.0


def _induction_constant(v: Subspace, w: Subspace, z: Subspace,
                        tol: TolerancePolicy) -> float:
    """Scalar K such that consistent signs satisfy
    sign(V, Z) = sign(W, Z) * co_sign(W, V) * sgn(K).

    Built from the composition lift of the projection V -> W -> Z-perp, the
    chart identification of that composite with the direct projection
    V -> Z-perp (both live in the chart of the full codomain), and the frame
    identifications of the three determinant lines involved.
    """
    zperp = perp(z, tol)
    m1 = conj_t(w.matrix) @ v.matrix          # V -> W
    m2 = conj_t(zperp.matrix) @ w.matrix      # W -> Z-perp
    fm1 = fredholm_map(m1, tol)
    fm2 = fredholm_map(m2, tol)
    fmc = fredholm_map(m2 @ m1, tol)
    fmd = fredholm_map(conj_t(zperp.matrix) @ v.matrix, tol)  # direct V -> Z-perp
    kappa = compose_lift(fm1, fm2, fmc, tol).scale
    beta = psi_T(fmc, tol).scale / psi_T(fmd, tol).scale

    # Det(P_W|_V) against the co-orientation line Det(V, W-perp)
    co_pair = FredholmPair(v, perp(w, tol))
    co_i, co_q = pair_det_line(co_pair, tol)
    d_ck = _det_or_one(conj_t(co_i.space.matrix) @ v.matrix @ fm1.kernel.matrix)
    d_cc = _det_or_one(conj_t(co_q.space.matrix) @ w.matrix @ fm1.cokernel.matrix)
    # Det(P_{Z-perp}|_W) against Det(W, Z)
    b_i, b_q = pair_det_line(FredholmPair(w, z), tol)
    d_bk = _det_or_one(conj_t(b_i.space.matrix) @ w.matrix @ fm2.kernel.matrix)
    d_bc = _det_or_one(conj_t(b_q.space.matrix) @ zperp.matrix @ fm2.cokernel.matrix)
    # Det(P_{Z-perp}|_V) against Det(V, Z)
    a_i, a_q = pair_det_line(FredholmPair(v, z), tol)
    d_ak = _det_or_one(conj_t(a_i.space.matrix) @ v.matrix @ fmd.kernel.matrix)
    d_ac = _det_or_one(conj_t(a_q.space.matrix) @ zperp.matrix @ fmd.cokernel.matrix)
    for d in (d_ck, d_cc, d_bk, d_bc, d_ak, d_ac):
        if abs(d) < 1e-10:
            raise PreconditionError("degenerate line identification in the induction")
    return float(
        (d_cc / d_ck) * (d_bc / d_bk) * kappa * beta * (d_ak / d_ac)
    )


def induce_third(a: Orientation | None = None, b: Orientation | None = None,
                 c: CoOrientation | None = None,
                 tol: TolerancePolicy = DEFAULT_TOL):
    """Complete the triple (orientation of (V, Z), orientation of (W, Z),
    co-orientation of (W, V)) from any two of its members."""
    given = [x is not None for x in (a, b, c)]
    if sum(given) != 2:
        raise PreconditionError("exactly two of the three items must be given")
    if c is not None:
        w, v = c.w, c.v
        if a is not None:
            z = a.pair.w if _same_space(a.pair.v, v) else a.pair.v
        else:
            z = b.pair.w if _same_space(b.pair.v, w) else b.pair.v
    else:
        v, z = a.pair.v, a.pair.w
        # W is whichever member of b's pair is not the common base Z
        w = b.pair.v if _same_space(b.pair.w, z) else b.pair.w
    _require_real(v, w, z)
    k = _induction_constant(v, w, z, tol)
    s_k = int(np.sign(k))

    def c_in_slot() -> int:
        # the induction relation reads the co-orientation on Det(V, W-perp)
        return c.sign if _same_space(c.w, v) else co_swapped(c, tol).sign

    if a is None:
        sb = _oriented_sign(b, w, z, tol)
        return Orientation(FredholmPair(v, z), sb * c_in_slot() * s_k)
    sa = _oriented_sign(a, v, z, tol)
    if b is None:
        return Orientation(FredholmPair(w, z), sa * c_in_slot() * s_k)
    sb = _oriented_sign(b, w, z, tol)
    slot_sign = sa * sb * s_k
    swap = _cross_reading_factor(FredholmPair(v, perp(w, tol)),
                                 FredholmPair(w, perp(v, tol)), tol)
    return CoOrientation(w, v, int(slot_sign * swap))


def face_compatible(a: Orientation, b: Orientation, c: CoOrientation,
                    tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Whether the triple satisfies the induction relation."""
    induced = induce_third(a=a, b=b, c=None, tol=tol)
    cc = c if _same_space(c.w, induced.w) and _same_space(c.v, induced.v) else co_swapped(c, tol)
    return cc.sign == induced.sign


@dataclass(frozen=True, eq=False)
class TetrahedronReport:
    missing_edge: str
    missing_sign: int
    face_ok: tuple[bool, bool, bool, bool]

    @property
    def ok(self) -> bool:
        return all(self.face_ok)


def tetrahedron_check(v: Subspace, w: Subspace, z: Subspace, y: Subspace,
                      signs: dict, tol: TolerancePolicy = DEFAULT_TOL) -> TetrahedronReport:
    """Resolve the missing edge of the orientation tetrahedron.

    Edges: a in Or(V,Z), b in Or(V,Y), c in Or(W,Z), d in Or(W,Y),
    e in coOr(V,W), f in coOr(Y,Z).  Faces: {a,c,e}, {a,b,f}, {b,d,e},
    {c,d,f}.  Five signs are given; the two complete faces must be compatible,
    and the returned sixth sign makes the remaining two faces compatible.
    """
    _require_real(v, w, z, y)
    names = ("a", "b", "c", "d", "e", "f")
    missing = [n for n in names if n not in signs]
    if len(missing) != 1:
        raise PreconditionError("exactly five of the six signs must be given")
    missing = missing[0]

    def mk(name, sign):
        builders = {
            "a": lambda s: Orientation(FredholmPair(v, z), s),
            "b": lambda s: Orientation(FredholmPair(v, y), s),
            "c": lambda s: Orientation(FredholmPair(w, z), s),
            "d": lambda s: Orientation(FredholmPair(w, y), s),
            "e": lambda s: CoOrientation(v, w, s),
            "f": lambda s: CoOrientation(y, z, s),
        }
        return builders[name](sign)

    edges = {n: mk(n, signs[n]) for n in names if n != missing}
    vp, wp, zp, yp = (perp(s, tol) for s in (v, w, z, y))

    def or_sign_complement(o: Orientation, first: Subspace, second: Subspace) -> int:
        """Orientation read on the line of the complement pair (first, second)."""
        return o.sign * int(_cross_reading_factor(o.pair, FredholmPair(first, second), tol))

    def co_sign_on(co: CoOrientation, first_role: Subspace) -> int:
        """Co-orientation read on Det(first_role, other-perp)."""
        if _same_space(co.w, first_role):
            return co.sign
        return co_swapped(co, tol).sign

    def face_check(face, ed):
        if face == "ace":
            k = _induction_constant(v, w, z, tol)
            return (_oriented_sign(ed["a"], v, z, tol)
                    == _oriented_sign(ed["c"], w, z, tol) * co_sign_on(ed["e"], v) * int(np.sign(k)))
        if face == "bde":
            k = _induction_constant(v, w, y, tol)
            return (_oriented_sign(ed["b"], v, y, tol)
                    == _oriented_sign(ed["d"], w, y, tol) * co_sign_on(ed["e"], v) * int(np.sign(k)))
        # the two faces through the co-orientation of (Y, Z) run through the
        # complement pairs, matching the commuting projection square
        co_f = ed["f"]
        f_sign = co_f.sign * int(_cross_reading_factor(
            co_line_pair(co_f, tol), FredholmPair(yp, z), tol))
        if not _same_space(co_f.w, y):
            raise PreconditionError("edge f must be a co-orientation of (Y, Z)")
        if face == "abf":
            k = _induction_constant(zp, yp, vp, tol)
            return (or_sign_complement(ed["a"], zp, vp)
                    == or_sign_complement(ed["b"], yp, vp) * f_sign * int(np.sign(k)))
        k = _induction_constant(zp, yp, wp, tol)
        return (or_sign_complement(ed["c"], zp, wp)
                == or_sign_complement(ed["d"], yp, wp) * f_sign * int(np.sign(k)))

    faces = ("ace", "abf", "bde", "cdf")
    incomplete = [f for f in faces if missing in f]
    complete = [f for f in faces if missing not in f]
    for f in complete:
        if not face_check(f, edges):
            raise PreconditionError(f"complete face {f} is incompatible")
    solved = None
    for cand in (-1, 1):
        trial = dict(edges)
        trial[missing] = mk(missing, cand)
        if face_check(incomplete[0], trial):
            solved = cand
            break
    if solved is None:
        raise PreconditionError("no sign completes the tetrahedron")
    final = dict(edges)
    final[missing] = mk(missing, solved)
    checks = tuple(face_check(f, final) for f in faces)
    return TetrahedronReport(missing, solved, checks)


def orientation_sum(x_sign: int, x: Subspace, pair_or: Orientation,
                    tol: TolerancePolicy = DEFAULT_TOL) -> Orientation:
    """Transport of orientations through the sum lift: an orientation of X and
    one of (V, W) determine one of (X+V, W)."""
    from .bundles import sum_lift  # local import to avoid a cycle at import time

    _require_real(x)
    if x_sign not in (-1, 1):
        raise ValueError("sign must be +-1")
    pair = pair_or.pair
    rep = sum_lift(x, pair, tol)
    result_pair = FredholmPair(sum_finite(x, pair.v, tol), pair.w)
    dst = pair_det_line(result_pair, tol)
    factor = tensor_transport(rep.iso.target, dst)
    sign = int(x_sign * pair_or.sign * np.sign(rep.direct_scale * factor))
    return Orientation(result_pair, sign)


def co_from_summand(x_sign: int, x: Subspace, v: Subspace,
                    tol: TolerancePolicy = DEFAULT_TOL) -> CoOrientation:
    """Co-orientation of (X+V, V) induced by an orientation of the summand X
    through the projection of X onto the orthogonal complement of V."""
    _require_real(x, v)
    w = sum_finite(x, v, tol)
    co_pair = FredholmPair(w, perp(v, tol))
    li, lq = pair_det_line(co_pair, tol)
    if lq.space.dim != 0 or li.space.dim != x.dim:
        raise PreconditionError("summand does not project onto the co-orientation line")
    d = np.linalg.det(conj_t(li.space.matrix) @ (np.eye(v.ambient_dim) - projector(v)) @ x.matrix) if x.dim else 1.0
    return CoOrientation(w, v, int(x_sign * np.sign(d)))
