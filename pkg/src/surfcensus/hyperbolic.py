"""Numerical hyperbolic geometry in the upper half-plane model.

Conventions fixed here and used everywhere else:

* model: upper half-plane, basepoint ``o = i``;
* isometries: real 2x2 matrices, det 1 (renormalized), acting by Mobius
  transformations; ``M`` and ``-M`` are the same isometry;
* boundary chart: a point ``p`` of ``R + {inf}`` sits on the circle at angle
  ``phi(p) = 2*atan2(1, p)`` (``inf -> 0``), which is the angle doubling of
  the projective line.  All interleaving tests happen in this chart;
* ``d(i, M*i) = arccosh(norm_F(M)^2 / 2)`` and, for hyperbolic ``M`` with
  translation length ``l`` whose axis passes at distance ``t`` from ``i``,
  ``cosh(d/2) = cosh(l/2) * cosh(t)``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstructionFailed, Degenerate, NotHyperbolic

PARABOLIC_TOL = 1e-12
ENDPOINT_SEP = 1e-9
RELATOR_TOL = 1e-9
RENORM_EVERY = 16

_I2 = np.eye(2)


def mat(a, b, c, d):
    return np.array([[a, b], [c, d]], dtype=float)


def inv2(M):
    # det-1 inverse, no division
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])


def renormalize(M):
    return M / math.sqrt(abs(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]))


def mat_of_word(gens, word):
    """Product of generator matrices, renormalizing det every 16 factors."""
    M = _I2.copy()
    for k, x in enumerate(word):
        G = gens[x - 1] if x > 0 else inv2(gens[-x - 1])
        M = M @ G
        if (k + 1) % RENORM_EVERY == 0:
            M = renormalize(M)
    return renormalize(M)


def trace_to_length(t: float) -> float:
    """Translation length of a hyperbolic element with trace t."""
    if abs(t) <= 2 + PARABOLIC_TOL:
        raise NotHyperbolic(f"|trace| = {abs(t)!r} is not > 2")
    return 2.0 * math.acosh(abs(t) / 2.0)


def translation_length(M) -> float:
    return trace_to_length(float(M[0, 0] + M[1, 1]))


def displacement(M) -> float:
    """d(i, M*i)."""
    q = float(np.sum(M * M)) / 2.0
    return math.acosh(max(q, 1.0))


def axis_distance(M) -> float:
    """Distance from the basepoint i to the axis of a hyperbolic M."""
    tr = abs(float(M[0, 0] + M[1, 1]))
    if tr <= 2 + PARABOLIC_TOL:
        raise NotHyperbolic("axis of a non-hyperbolic element")
    chd2 = math.sqrt((float(np.sum(M * M)) / 2.0 + 1.0) / 2.0)
    return math.acosh(max(1.0, chd2 / (tr / 2.0)))


def mobius_point(M, x: float) -> float:
    a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
    if math.isinf(x):
        return a / c if c != 0 else math.inf
    den = c * x + d
    if den == 0:
        return math.inf
    return (a * x + b) / den


def boundary_angle(x: float) -> float:
    """Chart R + {inf} -> S^1; inf -> 0, decreasing in x, range [0, 2*pi)."""
    if math.isinf(x):
        return 0.0
    return 2.0 * math.atan2(1.0, x) % (2.0 * math.pi)


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic given by its boundary endpoints (repelling first
    when it comes from an axis)."""

    start: float
    end: float

    def __post_init__(self):
        a1, a2 = boundary_angle(self.start), boundary_angle(self.end)
        gap = abs(a1 - a2)
        if min(gap, 2 * math.pi - gap) < ENDPOINT_SEP:
            raise Degenerate(f"geodesic endpoints too close: {self.start}, {self.end}")

    def transformed(self, M) -> "Geodesic":
        return Geodesic(mobius_point(M, self.start), mobius_point(M, self.end))


def axis_endpoints(M) -> Geodesic:
    """Fixed points of a hyperbolic matrix, (repelling, attracting)."""
    tr = float(M[0, 0] + M[1, 1])
    if abs(tr) <= 2 + PARABOLIC_TOL:
        raise NotHyperbolic("axis of a non-hyperbolic element")
    a, b, c, d = float(M[0, 0]), float(M[0, 1]), float(M[1, 0]), float(M[1, 1])
    s = math.copysign(math.sqrt(tr * tr - 4.0), tr)
    if abs(c) > 1e-14:
        att = (a - d + s) / (2 * c)
        rep = (a - d - s) / (2 * c)
        return Geodesic(rep, att)
    # c = 0: infinity is fixed; attracting iff |a| > |d|
    fin = b / (d - a)
    if abs(a) > abs(d):
        return Geodesic(fin, math.inf)
    return Geodesic(math.inf, fin)


def axes_cross(g1: Geodesic, g2: Geodesic) -> bool:
    """Strict linking of endpoint pairs on the boundary circle."""
    pts = [(boundary_angle(g1.start), 0), (boundary_angle(g1.end), 0),
           (boundary_angle(g2.start), 1), (boundary_angle(g2.end), 1)]
    for i in range(4):
        for j in range(i + 1, 4):
            gap = abs(pts[i][0] - pts[j][0])
            if min(gap, 2 * math.pi - gap) < ENDPOINT_SEP and pts[i][1] != pts[j][1]:
                raise Degenerate("axes share an endpoint within tolerance")
    pts.sort()
    labels = [lab for _, lab in pts]
    return labels in ([0, 1, 0, 1], [1, 0, 1, 0])


# ---------------------------------------------------------------------------
# surface-group representations

def _uhp_to_klein(z: complex):
    # UHP -> Poincare disk (i -> 0) -> Klein disk
    w = (z - 1j) / (z + 1j)
    x, y = w.real, w.imag
    r2 = x * x + y * y
    f = 2.0 / (1.0 + r2)
    return np.array([f * x, f * y])


def _apply_uhp(M, z: complex) -> complex:
    num = M[0, 0] * z + M[0, 1]
    den = M[1, 0] * z + M[1, 1]
    return num / den


def dirichlet_radius_bound(gens, word_len: int = 2):
    """Upper bound for the circumradius of the Dirichlet domain about i.

    Intersects the Klein-model bisector half-planes of all orbit points
    ``w(i)`` over nonempty words of length <= word_len (the bisector of i
    and a point at distance d along unit direction u is the Klein line
    ``k . u = tanh(d/2)``).  Returns None when that intersection is not
    compactly contained in the disk; the bound is then unusable and
    callers fall back to the crude generator bound.
    """
    mats = np.stack([renormalize(g) for g in gens]
                    + [inv2(renormalize(g)) for g in gens])
    if float(np.max(np.abs(mats))) > 1e4:
        # determinant cancellation would corrupt the polygon; callers fall
        # back to the crude diameter bound
        return None
    nm = len(mats)
    frontier = _I2[None, :, :]
    last = np.array([-1])
    constraints = {}
    for _ in range(word_len):
        pieces, lasts = [], []
        for j in range(nm):
            ok = last != (j + nm // 2) % nm
            if not np.any(ok):
                continue
            P = frontier[ok] @ mats[j]
            pieces.append(P)
            lasts.append(np.full(P.shape[0], j))
        frontier = np.concatenate(pieces)
        last = np.concatenate(lasts)
        dets = frontier[:, 0, 0] * frontier[:, 1, 1] - frontier[:, 0, 1] * frontier[:, 1, 0]
        good = np.isfinite(dets) & (np.abs(dets) > 0.5)
        frontier, last, dets = frontier[good], last[good], dets[good]
        if not len(frontier):
            return None
        frontier /= np.sqrt(np.abs(dets))[:, None, None]
        # collapse words equal in the group
        q = np.round(frontier.reshape(-1, 4) * np.sign(
            frontier[:, 0:1, 0:1].reshape(-1, 1) + 1e-30) / 1e-9).astype(np.int64)
        _, uniq = np.unique(q, axis=0, return_index=True)
        uniq.sort()
        frontier, last = frontier[uniq], last[uniq]
        # orbit points and bisector constraints, vectorized
        F = frontier
        coshd = np.einsum("nij,nij->n", F, F) / 2.0
        w = (F[:, 0, 0] * 1j + F[:, 0, 1]) / (F[:, 1, 0] * 1j + F[:, 1, 1])
        disk = (w - 1j) / (w + 1j)
        r2 = np.abs(disk) ** 2
        kx = 2 * disk.real / (1 + r2)
        ky = 2 * disk.imag / (1 + r2)
        nrm = np.hypot(kx, ky)
        good = (coshd > 1 + 1e-12) & (nrm > 1e-12)
        d = np.arccosh(np.maximum(coshd[good], 1.0))
        t = np.tanh(d / 2.0)
        # Keep the strongest constraint per direction bucket; dropping
        # constraints only enlarges the polygon, so the bound stays valid.
        bins = 512
        ang = np.mod(np.arctan2(ky[good], kx[good]), 2 * math.pi)
        bb = np.minimum((ang / (2 * math.pi) * bins).astype(int), bins - 1)
        for ux, uy, tj, j in zip(kx[good] / nrm[good], ky[good] / nrm[good],
                                 t, bb):
            cur = constraints.get(j)
            if cur is None or tj < cur[1]:
                constraints[j] = (np.array([ux, uy]), float(tj))
    if not constraints:
        return None
    U = np.array([u for u, _ in constraints.values()])
    T = np.array([t for _, t in constraints.values()])
    th = np.linspace(0, 2 * math.pi, 4096, endpoint=False)
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    if np.any(np.all(dirs @ U.T <= T[None, :] + 1e-12, axis=1)):
        return None
    # Vertices of the constraint polygon, vectorized over constraint pairs.
    n = len(T)
    ii, jj = np.triu_indices(n, k=1)
    det = U[ii, 0] * U[jj, 1] - U[ii, 1] * U[jj, 0]
    good = np.abs(det) > 1e-12
    ii, jj, det = ii[good], jj[good], det[good]
    vx = (T[ii] * U[jj, 1] - T[jj] * U[ii, 1]) / det
    vy = (U[ii, 0] * T[jj] - U[jj, 0] * T[ii]) / det
    V = np.stack([vx, vy], axis=1)
    r = np.linalg.norm(V, axis=1)
    inside = (r < 1.0 - 1e-12) & np.all(V @ U.T <= T[None, :] + 1e-9, axis=1)
    if not np.any(inside):
        return None
    rmax = float(np.max(r[inside]))
    return math.atanh(min(rmax, 1 - 1e-15))


_SLACK_CACHE: dict = {}


def enumeration_slack(rep: "SurfaceRep", max_word_len: int = 5) -> float:
    """2*Delta in the completeness radius L + 2*Delta, with Delta the best
    available Dirichlet circumradius bound (crude diameter bound as the
    last resort)."""
    if rep.dirichlet_radius is not None:
        return 2.0 * rep.dirichlet_radius
    key = rep.rep_hash()
    if key in _SLACK_CACHE:
        return _SLACK_CACHE[key]
    out = 2.0 * rep.basepoint_diam
    for wl in range(3, max_word_len + 1):
        delta = dirichlet_radius_bound(rep.gens, word_len=wl)
        if delta is not None:
            out = 2.0 * delta
            break
    _SLACK_CACHE[key] = out
    return out


@dataclass(frozen=True)
class SurfaceRep:
    """Discrete faithful representation of a genus-g surface group.

    ``gens`` are the images of a1, b1, ..., a_g, b_g as det-1 matrices
    satisfying ``prod_i [A_i, B_i] = I`` within RELATOR_TOL.
    """

    genus: int
    gens: tuple
    relator_defect: float
    basepoint_diam: float
    preset: str = "custom"
    dirichlet_radius: float | None = None
    pullback_of: tuple | None = field(default=None, compare=False)
    # extended-precision copies, kept so that derived representations
    # (pullbacks, covers) do not amplify the parent's rounding defect
    gens_ld: tuple | None = field(default=None, compare=False, repr=False)

    def ld_gens(self) -> tuple:
        if self.gens_ld is not None:
            return self.gens_ld
        return tuple(g.astype(np.longdouble) for g in self.gens)

    @property
    def euler_char(self) -> int:
        return 2 - 2 * self.genus

    def matrix(self, word) -> np.ndarray:
        return mat_of_word(self.gens, word)

    def class_trace(self, word) -> float:
        M = self.matrix(word)
        return float(M[0, 0] + M[1, 1])

    def rep_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"genus={self.genus};preset={self.preset};".encode())
        for G in self.gens:
            for v in np.asarray(G).ravel():
                h.update(f"{float(v):.12g};".encode())
        return h.hexdigest()[:16]


def make_surface_rep(gens, genus: int, preset: str = "custom",
                     pullback_of=None, gens_ld=None,
                     relator_certified: bool = False) -> SurfaceRep:
    """Validated representation constructor.

    ``relator_certified`` marks generator tuples whose relator identity is
    certified exactly at the word level (pullbacks along automorphisms,
    cover presentations): the defect is still measured, but measurement
    noise - which grows with the matrix norms of the marking - does not
    reject the construction."""
    if gens_ld is not None:
        gens_ld = tuple(
            g / np.sqrt(g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]) for g in
            (np.asarray(h, dtype=np.longdouble) for h in gens_ld))
        gens = tuple(g.astype(float) for g in gens_ld)
    else:
        gens = tuple(renormalize(np.asarray(g, dtype=float)) for g in gens)
    if len(gens) != 2 * genus:
        raise ConstructionFailed(f"need {2 * genus} generators, got {len(gens)}")
    # evaluate the relator in extended precision: its intermediate products
    # can be huge even when the generators are exact
    eye = np.eye(2, dtype=np.longdouble)
    src = gens_ld if gens_ld is not None else \
        tuple(g.astype(np.longdouble) for g in gens)
    R = eye.copy()
    for i in range(genus):
        A, B = src[2 * i], src[2 * i + 1]
        R = R @ A @ B @ _inv2t(A) @ _inv2t(B)
    defect = min(float(np.linalg.norm((R - eye).astype(float))),
                 float(np.linalg.norm((R + eye).astype(float))))
    if defect > RELATOR_TOL and not relator_certified:
        raise ConstructionFailed(f"relator defect {defect:.3e} above {RELATOR_TOL}")
    for k, G in enumerate(gens):
        tr = abs(float(G[0, 0] + G[1, 1]))
        if tr <= 2 + PARABOLIC_TOL:
            raise ConstructionFailed(f"generator {k} is not hyperbolic (|tr|={tr})")
    diam = 2.0 * max(displacement(G) for G in gens)
    delta = dirichlet_radius_bound(gens)
    if delta is None:
        delta = dirichlet_radius_bound(gens, word_len=3)
    return SurfaceRep(genus=genus, gens=gens, relator_defect=defect,
                      basepoint_diam=diam, preset=preset,
                      dirichlet_radius=delta, pullback_of=pullback_of,
                      gens_ld=gens_ld)


# -- Bolza -------------------------------------------------------------------

def _octagon_translations(dtype=np.longdouble):
    """The eight side-pairing translations of the regular hyperbolic octagon,
    as SL(2,R) matrices: translation length 2*arccosh(1+sqrt 2) along the
    axis through i at angle k*pi/4, k = 0..3."""
    one = dtype(1.0)
    c = one + np.sqrt(dtype(2.0))
    s = np.sqrt(c * c - one)
    out = []
    for k in range(4):
        th = dtype(k) * (dtype(4.0) * np.arctan(one)) / dtype(4.0)
        # SU(1,1) translation conjugated to SL(2,R) by the Cayley map
        co, si = np.cos(th), np.sin(th)
        M = np.array([[c + s * co, s * si], [s * si, c - s * co]], dtype=dtype)
        out.append(M / np.sqrt(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]))
    return out


def bolza_representation() -> SurfaceRep:
    """Genus-2 representation of the Bolza (regular octagon) surface.

    The octagon translations g0..g3 satisfy
    ``g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3 = 1``; the standard-presentation
    generators below are the Nielsen change of basis
    ``A1 = g3 g2^-1 g0, B1 = g1^-1 g2 g3^-1, A2 = g2^-1, B2 = g3``,
    whose commutator product is a conjugate of that relator.  All four are
    conjugates/products realizing systolic translation length, with
    |trace| = 2 + 2*sqrt(2).
    """
    g = _octagon_translations()
    gi = [_inv2t(m) for m in g]
    A1 = g[3] @ gi[2] @ g[0]
    B1 = gi[1] @ g[2] @ gi[3]
    A2 = gi[2]
    B2 = g[3]
    gens = []
    for M in (A1, B1, A2, B2):
        if M[0, 0] + M[1, 1] < 0:
            M = -M
        gens.append(M)
    rep = make_surface_rep(gens, genus=2, preset="bolza", gens_ld=gens)
    # The octagon translations generate the same group and their bisector
    # octagon is the actual Dirichlet domain; its circumradius beats the
    # generic bound computed from the standard-presentation generators.
    delta = dirichlet_radius_bound([m.astype(float) for m in g], word_len=2)
    if delta is not None and (rep.dirichlet_radius is None
                              or delta < rep.dirichlet_radius):
        import dataclasses
        rep = dataclasses.replace(rep, dirichlet_radius=delta)
    return rep


# -- Fenchel-Nielsen (genus 2, dumbbell chart) -------------------------------

@dataclass(frozen=True)
class FNCoords:
    """Fenchel-Nielsen coordinates in the fixed genus-2 dumbbell chart.

    Pants curves: u1 = a1, u2 = a2 (one non-separating curve in each
    handle) and the separating curve s, freely homotopic to [a1,b1].
    ``lengths = (l(u1), l(u2), l(s))``; ``twists = (t1, t2, ts)`` are the
    gluing translations along u1, u2, s.  Twist sign: positive twist
    translates by e^{t/2} toward the attracting endpoint of the glued
    curve's matrix.
    """

    lengths: tuple
    twists: tuple

    def __post_init__(self):
        if len(self.lengths) != 3 or len(self.twists) != 3:
            raise ConstructionFailed("genus-2 chart needs 3 lengths and 3 twists")
        if any(l <= 0 for l in self.lengths):
            raise ConstructionFailed("pants curve lengths must be positive")


def _pants_second_generator(l_boundary, l_second, l_third, dtype=float):
    """X2 for the pants with X1 = diag(e^{l1/2}, e^{-l1/2}); traces satisfy
    tr X2 = 2cosh(l2/2), tr X1X2 = -2cosh(l3/2) (the discrete sign)."""
    one = dtype(1.0)
    l1, l2, l3 = dtype(l_boundary), dtype(l_second), dtype(l_third)
    y = 2 * np.cosh(l2 / 2)
    z = -2 * np.cosh(l3 / 2)
    el = np.exp(l1 / 2)
    a = (z - y / el) / (el - one / el)
    d = y - a
    c = a * d - one
    if abs(float(c)) < 1e-14:
        raise ConstructionFailed("degenerate pants configuration")
    return np.array([[a, one], [c, d]], dtype=dtype)


def _eigenframe(M):
    """Frame P with M = P diag(mu, 1/mu) P^-1, |mu| > 1, det P = 1."""
    dtype = M.dtype.type if hasattr(M, "dtype") else float
    tr = M[0, 0] + M[1, 1]
    s = np.copysign(np.sqrt(tr * tr - 4), tr)
    mu = (tr + s) / 2
    cols = []
    for lam in (mu, 1 / mu):
        v = np.array([M[0, 1], lam - M[0, 0]], dtype=dtype)
        if float(np.linalg.norm(v.astype(float))) < 1e-12:
            v = np.array([lam - M[1, 1], M[1, 0]], dtype=dtype)
        cols.append(v / np.sqrt(v[0] * v[0] + v[1] * v[1]))
    P = np.column_stack(cols)
    det = P[0, 0] * P[1, 1] - P[0, 1] * P[1, 0]
    if abs(float(det)) < 1e-12:
        raise ConstructionFailed("defective hyperbolic matrix")
    if det < 0:
        P[:, 1] = -P[:, 1]
        det = -det
    return P / np.sqrt(det)


def _twist_mat(frame, tau):
    """Translation by tau along the axis whose eigenframe is ``frame``."""
    T = np.array([[math.exp(tau / 2.0), 0.0], [0.0, math.exp(-tau / 2.0)]])
    return frame @ T @ np.linalg.inv(frame)


_J = np.array([[0.0, -1.0], [1.0, 0.0]])


def _inv2t(M):
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]], dtype=M.dtype)


def _handle_block(l_core, l_sep, tau, dtype=float):
    """One-holed torus: A = X1, B glues X2 to X1^-1 with twist tau.

    Returns (A, B); the boundary [A, B] is conjugate to (X1 X2)^-1 and has
    trace -2cosh(l_sep/2).  Every solution of B X2 B^-1 = X1^-1 lies in the
    twist family (the centralizer of X1 is the translation group of its
    axis), so tau sweeps the whole Fenchel-Nielsen fiber.
    """
    lam = dtype(l_core) / 2
    zero = dtype(0.0)
    X1 = np.array([[np.exp(lam), zero], [zero, np.exp(-lam)]], dtype=dtype)
    X2 = _pants_second_generator(l_core, l_core, l_sep, dtype)
    Q = _eigenframe(X2)
    J = np.array([[zero, -dtype(1.0)], [dtype(1.0), zero]], dtype=dtype)
    B0 = J @ _inv2t(Q)
    B0 = B0 / np.sqrt(B0[0, 0] * B0[1, 1] - B0[0, 1] * B0[1, 0])
    th = dtype(tau) / 2
    T = np.array([[np.exp(th), zero], [zero, np.exp(-th)]], dtype=dtype)
    return X1, T @ B0


def _short_word_audit(gens, max_len=4):
    """Reject configurations with elliptic short words (non-discreteness)."""
    from itertools import product as iproduct
    mats = [renormalize(g) for g in gens] + [inv2(renormalize(g)) for g in gens]
    n = len(mats)
    for k in range(1, max_len + 1):
        for idx in iproduct(range(n), repeat=k):
            ok = all(idx[i] != (idx[i + 1] + n // 2) % n for i in range(k - 1))
            if not ok:
                continue
            M = _I2
            for j in idx:
                M = M @ mats[j]
            tr = abs(float(M[0, 0] + M[1, 1]))
            if tr < 2.0 - 1e-7:
                det = abs(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
                tr /= math.sqrt(det)
                if tr < 2.0 - 1e-7:
                    return False
    return True


def _klein_to_uhp(k) -> complex:
    r2 = float(k[0]) ** 2 + float(k[1]) ** 2
    f = 1.0 + math.sqrt(max(0.0, 1.0 - r2))
    w = complex(k[0] / f, k[1] / f)
    return 1j * (1 + w) / (1 - w)


def _balance_basepoint(gens, iters: int = 12):
    """Conjugate the whole representation so the generator orbit of i is
    roughly centered; keeps matrix norms small for downstream arithmetic.

    Arithmetic stays in the input dtype (longdouble survives a cast to
    float64 much better once the norms are tame); the recentering moves
    themselves only need double precision.
    """
    dtype = np.asarray(gens[0]).dtype
    one = dtype.type(1.0)

    def renorm(M):
        return M / np.sqrt(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])

    cur = [renorm(np.asarray(g, dtype)) for g in gens]
    best, best_disp = cur, max(displacement(g.astype(float)) for g in cur)
    for _ in range(iters):
        f64 = [g.astype(float) for g in cur]
        pts = [_apply_uhp(M, 1j) for M in f64] + \
              [_apply_uhp(inv2(M), 1j) for M in f64]
        ks = np.array([_uhp_to_klein(z) for z in pts])
        kbar = ks.mean(axis=0)
        if np.linalg.norm(kbar) < 1e-9:
            break
        z0 = _klein_to_uhp(kbar)
        x, y = z0.real, z0.imag
        T = (np.array([[1.0, -x], [0.0, y]]) / math.sqrt(y)).astype(dtype)
        Ti = np.array([[T[1, 1], -T[0, 1]], [-T[1, 0], T[0, 0]]], dtype=dtype)
        cur = [renorm(T @ g @ Ti) for g in cur]
        disp = max(displacement(g.astype(float)) for g in cur)
        if disp < best_disp - 1e-12:
            best, best_disp = cur, disp
    return best


def fn_to_representation(coords: FNCoords) -> SurfaceRep:
    """Genus-2 representation from dumbbell Fenchel-Nielsen coordinates.

    Built in extended precision and then recentered: the cross-handle
    conjugator can be large, and the relator tolerance is tight.
    """
    LD = np.longdouble
    l1, l2, ls = coords.lengths
    t1, t2, ts = coords.twists
    A1, B1 = _handle_block(l1, ls, t1, LD)
    A2p, B2p = _handle_block(l2, ls, t2, LD)
    W1 = A1 @ B1 @ _inv2t(A1) @ _inv2t(B1)
    W2 = A2p @ B2p @ _inv2t(A2p) @ _inv2t(B2p)
    P1 = _eigenframe(_inv2t(W1))
    C0 = P1 @ _inv2t(_eigenframe(W2))
    C0 = C0 / np.sqrt(C0[0, 0] * C0[1, 1] - C0[0, 1] * C0[1, 0])
    th = LD(ts) / 2
    zero = LD(0.0)
    T = np.array([[np.exp(th), zero], [zero, np.exp(-th)]], dtype=LD)
    C = P1 @ T @ _inv2t(P1) @ C0
    Ci = _inv2t(C)
    gens_ld = _balance_basepoint([A1, B1, C @ A2p @ Ci, C @ B2p @ Ci])
    gens = [g.astype(float) for g in gens_ld]
    if not _short_word_audit(gens):
        raise ConstructionFailed("elliptic short word; gluing is not discrete")
    rep = make_surface_rep(gens, genus=2, preset="fn", gens_ld=gens_ld)
    # pants curve lengths must reproduce the inputs
    for w, l in (((1,), l1), ((3,), l2), ((1, 2, -1, -2), ls)):
        got = trace_to_length(rep.class_trace(w))
        if abs(got - l) > 1e-6:
            raise ConstructionFailed(f"pants length mismatch: {got} vs {l}")
    return rep
