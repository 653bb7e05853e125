"""Geometric intersection numbers via axis crossings in the universal cover.

The count of ``i(c1, c2)`` walks one fundamental window of the axis of a
representative of c1 and counts the distinct lifts of c2 that cross it:
every intersection point on the surface lifts to exactly one (window
position, crossing lift) incidence, and for c1 = c2 to exactly two, which
is also the counting-current convention ``i(d_g, d_g) = 2 si(g)``.

Lift coverage is geometric rather than word-combinatorial: an orbit patch
around the basepoint conjugated along the window by greedy point locators
reaches every lift passing within sampling distance of the window; the
sampling constants cover the rigorous bound (a crossing lift's coset has a
representative moving the basepoint at most l1 + l2 + 2*diam, which the
certificates are checked against).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .enumeration import ball_elements
from .errors import Degenerate, ToleranceFailure
from .hyperbolic import (SurfaceRep, axis_distance, displacement,
                         enumeration_slack, inv2, mat_of_word, renormalize,
                         trace_to_length)
from .words import ConjClass, canonical_class, inverse_word, is_primitive, reduce_word

SAMPLE_H = 0.5
LOCATE_SLACK = 0.05
LIFT_MARGIN = 0.10
WINDOW_OFFSET = 0.1234567
PARAM_GUARD = 1e-7


@dataclass(frozen=True)
class IntersectionResult:
    count: int
    certificates: tuple

    def __post_init__(self):
        if self.count != len(self.certificates):
            raise ValueError("certificate list out of sync with count")


# ---------------------------------------------------------------------------
# cached per-representation machinery

_PATCH_CACHE: dict = {}
_LIFT_CACHE: dict = {}
_AXISREP_CACHE: dict = {}


def _delta(rep: SurfaceRep) -> float:
    return enumeration_slack(rep) / 2.0


def _patch(rep: SurfaceRep):
    """Orbit patch: all elements with d(o, m o) <= 2*Delta + h + margin,
    with words, sorted by displacement."""
    key = rep.rep_hash()
    hit = _PATCH_CACHE.get(key)
    if hit is not None:
        return hit
    radius = 2.0 * _delta(rep) + SAMPLE_H + 2 * (LOCATE_SLACK + LIFT_MARGIN) + 0.2
    mats, parents, letters, keep = ball_elements(rep, radius)
    idx = np.nonzero(keep)[0]
    disp = np.arccosh(np.maximum(
        0.5 * np.einsum("ij,ij->i", mats[idx], mats[idx]), 1.0))
    order = np.argsort(disp, kind="stable")
    idx = idx[order]
    words = [_kernels.reconstruct_word(parents, letters, int(i)) for i in idx]
    out = (np.ascontiguousarray(mats[idx]), words)
    _PATCH_CACHE[key] = out
    return out


def _apply_mat(M_flat, z: complex) -> complex:
    return (M_flat[0] * z + M_flat[1]) / (M_flat[2] * z + M_flat[3])


def _hyp_dist(z: complex, w: complex) -> float:
    q = 1.0 + (abs(z - w) ** 2) / (2.0 * z.imag * w.imag)
    return math.acosh(max(q, 1.0))


_GEN_SLOTS = None


def _gen_mats(rep: SurfaceRep):
    """Generator/inverse matrices flattened, letter per slot."""
    g = [np.asarray(M).ravel() for M in rep.gens]
    gi = [np.asarray(inv2(M)).ravel() for M in rep.gens]
    letters = list(range(1, rep.genus * 2 + 1)) + \
        [-k for k in range(1, rep.genus * 2 + 1)]
    return g + gi, letters


def _locate(rep: SurfaceRep, target: complex, start_mat, start_word,
            tol_extra: float = LOCATE_SLACK):
    """Greedy descent toward d(target, g o) <= Delta; patch rescue on stall."""
    slots, letters = _gen_mats(rep)
    M = np.array(start_mat, dtype=float)
    word = list(start_word)
    cur = _hyp_dist(target, _apply_mat(M, 1j))
    delta = _delta(rep)
    for _ in range(8000):
        if cur <= delta + tol_extra:
            return M, tuple(word), cur
        best, best_j = cur, -1
        for j, S in enumerate(slots):
            M2 = np.array([M[0] * S[0] + M[1] * S[2], M[0] * S[1] + M[1] * S[3],
                           M[2] * S[0] + M[3] * S[2], M[2] * S[1] + M[3] * S[3]])
            d = _hyp_dist(target, _apply_mat(M2, 1j))
            if d < best - 1e-12:
                best, best_j = d, j
        if best_j < 0:
            break
        S = slots[best_j]
        M = np.array([M[0] * S[0] + M[1] * S[2], M[0] * S[1] + M[1] * S[3],
                      M[2] * S[0] + M[3] * S[2], M[2] * S[1] + M[3] * S[3]])
        M /= math.sqrt(abs(M[0] * M[3] - M[1] * M[2]))
        word.append(letters[best_j])
        cur = best
    # stall: try composing with patch elements
    pmats, pwords = _patch(rep)
    Mm = M.reshape(2, 2)
    for P, w in zip(pmats, pwords):
        M2 = (Mm @ P.reshape(2, 2)).ravel()
        d = _hyp_dist(target, _apply_mat(M2, 1j))
        if d <= delta + tol_extra:
            return M2, tuple(word) + w, d
    raise ToleranceFailure(
        f"point location stalled at distance {cur:.3f} (Delta={delta:.3f})")


def _min_axis_word(rep: SurfaceRep, c: ConjClass) -> tuple:
    """Conjugate/rotation of the class word whose axis passes within Delta
    of the basepoint."""
    key = (rep.rep_hash(), c.canonical)
    hit = _AXISREP_CACHE.get(key)
    if hit is not None:
        return hit
    delta = _delta(rep)

    def adist(word):
        return axis_distance(mat_of_word(rep.gens, word))

    w = c.canonical
    # best cyclic rotation first
    best = min((w[i:] + w[:i] for i in range(len(w))), key=adist)
    cur = adist(best)
    slots = [(k,) for k in range(1, 2 * rep.genus + 1)] + \
            [(-k,) for k in range(1, 2 * rep.genus + 1)]
    for _ in range(400):
        if cur <= delta + 1e-7:
            break
        improved = False
        for s in slots:
            cand = reduce_word(s + best + inverse_word(s))
            d = adist(cand)
            if d < cur - 1e-12:
                best, cur, improved = cand, d, True
                break
        if not improved:
            # rescue with patch conjugators
            pmats, pwords = _patch(rep)
            M = mat_of_word(rep.gens, best)
            done = False
            for P, pw in zip(pmats, pwords):
                Pm = P.reshape(2, 2)
                d = axis_distance(renormalize(inv2(Pm) @ M @ Pm))
                if d <= delta + 1e-7:
                    best = reduce_word(inverse_word(pw) + best + pw)
                    cur, done = d, True
                    break
            if not done:
                raise ToleranceFailure(
                    f"no conjugate with axis within Delta found (stuck at {cur:.3f})")
            break
    _AXISREP_CACHE[key] = best
    return best


def _axis_endpoints_h(M_flat):
    """Fixed points of a hyperbolic matrix as homogeneous columns
    [[x_rep, x_att], [w_rep, w_att]] (repelling, attracting).

    The root with cancellation in (a - d -+ s) is recovered from the root
    product -b/c to stay stable for large-trace matrices.
    """
    a, b, c, d = M_flat
    tr = a + d
    s = math.copysign(math.sqrt(tr * tr - 4.0), tr)
    if abs(c) > 1e-14:
        if abs(a - d + s) >= abs(a - d - s):
            att = np.array([a - d + s, 2 * c])
            # product of the fixed points is -b/c
            rep_ = np.array([-2 * b, a - d + s])
        else:
            rep_ = np.array([a - d - s, 2 * c])
            att = np.array([-2 * b, a - d - s])
    else:
        if abs(a) > abs(d):
            att = np.array([1.0, 0.0])
            rep_ = np.array([b, d - a])
        else:
            att = np.array([b, d - a])
            rep_ = np.array([1.0, 0.0])
    att = att / np.linalg.norm(att)
    rep_ = rep_ / np.linalg.norm(rep_)
    return np.column_stack([rep_, att])


def _normalize_frames(frames):
    """Column-normalize endpoint frames with a deterministic sign (largest
    magnitude component positive); same geodesic -> same normal form."""
    F = frames.copy()
    for col in (0, 1):
        nrm = np.hypot(F[:, 0, col], F[:, 1, col])
        F[:, :, col] /= nrm[:, None]
        pick = np.abs(F[:, 0, col]) >= np.abs(F[:, 1, col])
        lead = np.where(pick, F[:, 0, col], F[:, 1, col])
        sgn = np.where(lead >= 0, 1.0, -1.0)
        F[:, :, col] *= sgn[:, None]
    return F


def _frame_keys(frames):
    return np.round(frames.reshape(-1, 4) / 1e-9).astype(np.int64)


def _frame_axis_dist(frames):
    """Distance from the basepoint i to the geodesic of each frame:
    sinh d = |1 + p q| / |p - q| for endpoints p, q (|p0| for the vertical
    line through p0)."""
    x1, w1 = frames[:, 0, 0], frames[:, 1, 0]
    x2, w2 = frames[:, 0, 1], frames[:, 1, 1]
    vert = np.abs(w1 * w2) < 1e-14
    with np.errstate(divide="ignore", invalid="ignore"):
        p = x1 / w1
        q = x2 / w2
        sinh_d = np.abs(1.0 + p * q) / np.abs(p - q)
        # vertical line x = p0: sinh d = |p0|
        p0 = np.where(np.abs(w1) < 1e-14, x2 / w2, x1 / w1)
        sinh_v = np.abs(p0)
    out = np.where(vert, sinh_v, sinh_d)
    return np.arcsinh(out)


def _lifts_near_origin(rep: SurfaceRep, word: tuple):
    """Distinct lifts of the closed geodesic of ``word`` passing within
    rho0 = Delta + h/2 + slack of the basepoint.

    Returns (endpoint frames (n, 2, 2), coset words).  Frames are obtained
    by transforming the base axis frame, never by conjugating the matrix:
    the conjugates themselves can overflow double precision for long words.
    The input word must already have its axis within Delta.
    """
    key = (rep.rep_hash(), word)
    hit = _LIFT_CACHE.get(key)
    if hit is not None:
        return hit
    delta = _delta(rep)
    rho0 = delta + SAMPLE_H / 2.0 + LOCATE_SLACK + LIFT_MARGIN
    W = mat_of_word(rep.gens, word).ravel()
    ell = trace_to_length(W[0] + W[3])
    frame = _endpoint_frame(W)
    # sample points along one period of the axis
    n_samp = max(2, int(math.ceil(ell / SAMPLE_H)) + 1)
    pmats, pwords = _patch(rep)
    P3 = pmats.reshape(-1, 2, 2)
    cand_frames, cand_words = [], []
    loc_M, loc_word = np.array([1.0, 0.0, 0.0, 1.0]), ()
    t_anchor = _axis_anchor(W, frame)
    for j in range(n_samp):
        t = t_anchor + (j * ell) / n_samp
        target = _axis_point(frame, t)
        loc_M, loc_word, _ = _locate(rep, target, loc_M, loc_word)
        gi = inv2(loc_M.reshape(2, 2))
        # lifts through candidate cosets m * g_j^-1
        F = np.einsum("nij,jk,kl->nil", P3, gi, frame)
        cand_frames.append(F)
        giw = inverse_word(loc_word)
        cand_words.extend([pw + giw for pw in pwords])
    Fs = _normalize_frames(np.concatenate(cand_frames))
    near = _frame_axis_dist(Fs) <= rho0
    Fs = Fs[near]
    keys = _frame_keys(Fs)
    _, first = np.unique(_kernels._rows_void(keys), return_index=True)
    first.sort()
    sel = np.nonzero(near)[0][first]
    Fs = Fs[first]
    words = [reduce_word(cand_words[i]) for i in sel]
    out = (Fs, words)
    _LIFT_CACHE[key] = out
    return out


def _endpoint_frame(W_flat):
    return _axis_endpoints_h(W_flat)


def _axis_anchor(W_flat, frame) -> float:
    """Axis parameter of the projection of the basepoint."""
    N = _normalizer(frame)
    z = _apply_mat(N.ravel(), 1j)
    return math.log(abs(z))


def _normalizer(frame):
    """Orientation-preserving Mobius map sending (repelling, attracting)
    to (0, infinity)."""
    rep_, att = frame[:, 0], frame[:, 1]
    N = np.array([[rep_[1], -rep_[0]], [att[1], -att[0]]])
    det = N[0, 0] * N[1, 1] - N[0, 1] * N[1, 0]
    if det < 0:
        N[0] = -N[0]   # compose with z -> -z, which fixes 0 and infinity
        det = -det
    return N / math.sqrt(det)


def _axis_point(frame, t: float) -> complex:
    """Point on the axis at parameter t (log-height in the normal frame)."""
    N = _normalizer(frame)
    Ni = inv2(N)
    z = complex(0.0, math.exp(t))
    return _apply_mat(Ni.ravel(), z)


def _window_crossings(rep: SurfaceRep, w1: tuple, lifts,
                      allow_axis_translates: bool, offset: float,
                      stop_at_first: bool = False):
    """Crossing lifts with parameter inside one fundamental window of w1."""
    W1 = mat_of_word(rep.gens, w1).ravel()
    ell1 = trace_to_length(W1[0] + W1[3])
    frame1 = _endpoint_frame(W1)
    N = _normalizer(frame1)
    t0 = _axis_anchor(W1, frame1) + offset - ell1 / 2.0
    frames, words = lifts
    if not len(frames):
        return 0, ()
    n_samp = max(2, int(math.ceil(ell1 / SAMPLE_H)) + 1)
    found = []
    loc_M, loc_word = np.array([1.0, 0.0, 0.0, 1.0]), ()
    for j in range(n_samp):
        t = t0 + (j + 0.5) * ell1 / n_samp
        target = _axis_point(frame1, t)
        loc_M, loc_word, _ = _locate(rep, target, loc_M, loc_word)
        H = loc_M.reshape(2, 2)
        # candidate lift endpoint frames in the w1 normal frame
        E = np.einsum("ij,jk,nkl->nil", N, H, frames)
        a = E[:, 0, :]   # numerators of both endpoints
        b = E[:, 1, :]   # denominators
        mag = np.hypot(a, b)
        at_zero = np.abs(a) < 1e-9 * mag
        at_inf = np.abs(b) < 1e-9 * mag
        # a translate of the window axis itself: endpoints exactly {0, inf}
        axis_like = (at_zero[:, 0] & at_inf[:, 1]) | \
                    (at_inf[:, 0] & at_zero[:, 1])
        degen = np.any(at_zero | at_inf, axis=1) & ~axis_like
        prod_num = a[:, 0] * a[:, 1]
        prod_den = b[:, 0] * b[:, 1]
        if np.any(degen):
            # An endpoint numerically at an axis end is only fatal when its
            # crossing parameter could land near the window; candidates
            # whose crossings sit far outside are dropped instead.
            with np.errstate(divide="ignore", invalid="ignore"):
                p_est = 0.5 * np.log(np.abs(prod_num / prod_den))
            close = degen & np.isfinite(p_est) & \
                (p_est > t0 - 1.0) & (p_est < t0 + ell1 + 1.0)
            if np.any(close):
                raise Degenerate("lift shares an endpoint with the window axis")
        if np.any(axis_like) and not allow_axis_translates:
            raise ToleranceFailure(
                "a lift of a distinct class coincides with the window axis")
        crossing = (prod_num * prod_den < 0) & ~axis_like & ~degen
        if not np.any(crossing):
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            params = 0.5 * np.log(-prod_num[crossing] / prod_den[crossing])
        in_window = (params >= t0) & (params < t0 + ell1)
        close_edge = np.minimum(np.abs(params - t0),
                                np.abs(params - (t0 + ell1))) < PARAM_GUARD
        if np.any(close_edge & in_window) or np.any(close_edge & ~in_window):
            raise Degenerate("crossing parameter at window boundary")
        idxs = np.nonzero(crossing)[0][in_window]
        if not len(idxs):
            continue
        # wrap-free projective coordinates of both endpoints for dedup
        r2 = a[idxs] ** 2 + b[idxs] ** 2
        c2 = (b[idxs] ** 2 - a[idxs] ** 2) / r2
        s2 = 2.0 * a[idxs] * b[idxs] / r2
        for k, i in enumerate(idxs):
            p = params[in_window][k]
            sig = (float(p), float(c2[k, 0]), float(s2[k, 0]),
                   float(c2[k, 1]), float(s2[k, 1]))
            found.append((sig, reduce_word(loc_word + words[i])))
        if stop_at_first and found:
            return _cluster_incidences(found)
    return _cluster_incidences(found)


def _cluster_incidences(found, p_tol=1e-4, e_tol=1e-5):
    """Merge repeated sightings of the same lift; distinct lifts must be
    separated well beyond the merge thresholds, which is checked."""
    reps = []   # (sig, word)
    for sig, word in found:
        for rsig, _ in reps:
            dp = abs(sig[0] - rsig[0])
            de = max(abs(sig[j] - rsig[j]) for j in range(1, 5))
            if dp < p_tol and de < e_tol:
                break
            if dp < 20 * p_tol and de < 20 * e_tol:
                raise ToleranceFailure(
                    "two crossing lifts closer than the dedup guard band")
        else:
            reps.append((sig, word))
    certs = tuple(word for _, word in reps)
    return len(certs), certs


def _count_pair(rep: SurfaceRep, w1: tuple, w2: tuple, same_class: bool) -> IntersectionResult:
    # Translates of the window axis itself appear among the candidates when
    # w1 = w2; they never cross the axis and the walk skips them in place
    # (axis_like), so the lift table is used unfiltered.
    lifts = _lifts_near_origin(rep, w2)
    for attempt, off in enumerate((WINDOW_OFFSET, WINDOW_OFFSET + 0.31,
                                   WINDOW_OFFSET + 0.57)):
        try:
            count, certs = _window_crossings(
                rep, w1, lifts, allow_axis_translates=same_class, offset=off)
            return IntersectionResult(count=count, certificates=certs)
        except Degenerate:
            if attempt == 2:
                raise ToleranceFailure(
                    "degenerate crossing persisted across window shifts")
            continue
    raise AssertionError("unreachable")


def geometric_intersection(rep: SurfaceRep, c1: ConjClass, c2: ConjClass) -> IntersectionResult:
    """i(delta_c1, delta_c2) with the counting-current conventions:
    non-primitive classes carry their power as a weight, and the diagonal
    self-pairing is twice the minimal self-intersection number."""
    p1, r1, k1 = is_primitive(c1)
    p2, r2, k2 = is_primitive(c2)
    u1 = canonical_class(r1.canonical, rep.genus, oriented=False)
    u2 = canonical_class(r2.canonical, rep.genus, oriented=False)
    if u1 == u2:
        base = self_intersection(rep, u1)
        return IntersectionResult(count=2 * k1 * k2 * base.count,
                                  certificates=base.certificates * (2 * k1 * k2))
    w1 = _min_axis_word(rep, u1)
    w2 = _min_axis_word(rep, u2)
    res = _count_pair(rep, w1, w2, same_class=False)
    if k1 * k2 == 1:
        return res
    return IntersectionResult(count=k1 * k2 * res.count,
                              certificates=res.certificates * (k1 * k2))


def self_intersection(rep: SurfaceRep, c: ConjClass) -> IntersectionResult:
    """Minimal self-intersection number of a primitive free homotopy class."""
    prim, root, k = is_primitive(c)
    if not prim:
        raise ValueError(
            f"class is the {k}-th power of {root}; self-intersection is "
            "only computed on primitive roots (power conventions vary)")
    w = _min_axis_word(rep, c)
    res = _count_pair(rep, w, w, same_class=True)
    if res.count % 2:
        raise ToleranceFailure(
            f"odd strand-incidence count {res.count} for a self-intersection")
    return IntersectionResult(count=res.count // 2,
                              certificates=res.certificates[:res.count // 2])


def is_simple(rep: SurfaceRep, c: ConjClass) -> bool:
    """Simple iff primitive with vanishing self-intersection (short-circuits
    on the first crossing found)."""
    prim, _, _ = is_primitive(c)
    if not prim:
        return False
    w = _min_axis_word(rep, c)
    lifts = _lifts_near_origin(rep, w)
    for attempt, off in enumerate((WINDOW_OFFSET, WINDOW_OFFSET + 0.31,
                                   WINDOW_OFFSET + 0.57)):
        try:
            count, _ = _window_crossings(rep, w, lifts,
                                         allow_axis_translates=True,
                                         offset=off, stop_at_first=True)
            return count == 0
        except Degenerate:
            if attempt == 2:
                raise ToleranceFailure(
                    "degenerate crossing persisted across window shifts")
    raise AssertionError("unreachable")
