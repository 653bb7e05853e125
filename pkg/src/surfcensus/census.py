"""Counting and pairing computations: stable-norm balls, lattice counts,
bundle and Lagrangian-torus censuses, Liouville pairings, area bounds,
simple-curve counts, fingerprints, and the mapping-class census.

Area conventions: hyperbolic area of the genus-g surface is 2*pi*|chi|,
the circle factor has length 2*pi, and all censuses report lower/upper
brackets derived from the area sandwiches
``2 pi |gamma| <= area <= 2 pi |gamma| + area(Sigma)`` (surface cross
circle) and ``pairing <= minimal graph area <= pairing + 12 pi |chi|``
(surface cross surface).  Estimated pairings carry their cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from . import _kernels
from .enumeration import class_length, get_census
from .errors import (BudgetExceeded, Degenerate, EmptyHull, InsufficientSample)
from .hyperbolic import SurfaceRep
from .intersections import geometric_intersection, is_simple
from .mapping import Automorphism, pull_back_representation, twist_automorphism
from .words import ConjClass, is_primitive

LATTICE_BUDGET_POINTS = 600_000_000


# ---------------------------------------------------------------------------
# stable norm

@dataclass(frozen=True)
class NormBallPolytope:
    """Inner approximation of the stable-norm unit ball from classes of
    length <= cutoff; exact on faces supported by those classes."""

    dimension: int
    vertices: np.ndarray      # (n, 2g)
    normals: np.ndarray       # facet normals
    offsets: np.ndarray       # facet offsets, gauge(v) = max normals.v/offsets
    cutoff: float
    volume: float

    def gauge(self, v) -> float:
        v = np.asarray(v, dtype=float)
        if not np.any(v):
            return 0.0
        return float(max(np.max(self.normals @ v / self.offsets), 0.0))


def _fan_volume(hull: ConvexHull) -> float:
    pts = hull.points
    centroid = pts[hull.vertices].mean(axis=0)
    vols = []
    d = pts.shape[1]
    fact = math.factorial(d)
    for simplex in hull.simplices:
        M = pts[simplex] - centroid
        vols.append(abs(np.linalg.det(M)) / fact)
    return float(math.fsum(vols))


def polytope_from_points(points, cutoff: float) -> NormBallPolytope:
    pts = np.asarray(points, dtype=float)
    d = pts.shape[1]
    try:
        hull = ConvexHull(pts, qhull_options="Qt")
    except Exception as e:
        raise Degenerate(f"hull construction failed: {e}")
    normals = hull.equations[:, :-1]
    offsets = -hull.equations[:, -1]
    if np.any(offsets <= 1e-12):
        raise Degenerate("origin is not interior to the hull")
    vol = _fan_volume(hull)
    qvol = float(hull.volume)
    if abs(vol - qvol) > 1e-9 * max(1.0, qvol):
        raise Degenerate(
            f"fan volume {vol} disagrees with hull volume {qvol}")
    return NormBallPolytope(dimension=d, vertices=pts[hull.vertices],
                            normals=normals, offsets=offsets,
                            cutoff=cutoff, volume=vol)


def stable_norm_ball(rep: SurfaceRep, lmax: float) -> NormBallPolytope:
    """Hull of +-h/l over enumerated classes with nonzero homology h."""
    entries = get_census(rep, lmax)
    pts = []
    for e in entries:
        h = e.homology
        if not np.any(h):
            continue
        pts.append(h / e.length)
        pts.append(-h / e.length)
    if not pts:
        raise EmptyHull(f"no nonzero homology classes below cutoff {lmax}")
    return polytope_from_points(np.array(pts), cutoff=lmax)


def norm_value(ball: NormBallPolytope, v) -> float:
    """Minkowski gauge of the ball (the stable norm's inner approximation)."""
    return ball.gauge(v)


def polytope_volume(ball: NormBallPolytope) -> float:
    return ball.volume


def lattice_count(ball: NormBallPolytope, amax: float,
                  budget_points: int = LATTICE_BUDGET_POINTS) -> int:
    """#{v integral : gauge(v) <= amax} by a bounded-box sweep."""
    if amax < 0:
        return 0
    box = np.floor(amax * np.max(np.abs(ball.vertices), axis=0)
                   + 1e-9).astype(np.int64)
    n_pts = int(np.prod(2 * box + 1))
    if n_pts > budget_points:
        raise BudgetExceeded(
            f"lattice box of {n_pts:.3g} points exceeds budget")
    return _kernels.gauge_count(ball.normals, ball.offsets, box, amax)


# ---------------------------------------------------------------------------
# censuses in Sigma x S^1

@dataclass(frozen=True)
class CensusRow:
    bound: float
    count_lower: int
    count_upper: int
    exponent: float
    cutoff: float

    def __post_init__(self):
        if self.count_lower > self.count_upper:
            raise ValueError("census bracket inverted")

    @property
    def normalized_lower(self) -> float:
        return self.count_lower / self.bound ** self.exponent

    @property
    def normalized_upper(self) -> float:
        return self.count_upper / self.bound ** self.exponent


def surface_area(rep: SurfaceRep) -> float:
    return 2.0 * math.pi * abs(rep.euler_char)


def torus_bundle_census(rep: SurfaceRep, amax: float,
                        ball: NormBallPolytope) -> CensusRow:
    """Bracket for the count of genus-g surface classes in the circle
    bundle with area <= amax, via the stable-norm sandwich."""
    two_pi = 2.0 * math.pi
    upper = lattice_count(ball, amax / two_pi)
    shift = amax - surface_area(rep)
    lower = lattice_count(ball, shift / two_pi) if shift >= 0 else 0
    return CensusRow(bound=amax, count_lower=lower, count_upper=upper,
                     exponent=2.0 * rep.genus, cutoff=ball.cutoff)


def sigma1(d: int) -> int:
    """Sum of divisors: the number of index-d subgroups of Z^2."""
    return sum(k for k in range(1, d + 1) if d % k == 0)


def primitive_lengths(rep: SurfaceRep, lmax: float) -> np.ndarray:
    out = [e.length for e in get_census(rep, lmax)
           if is_primitive(e.cls)[0]]
    return np.array(sorted(out))


def genus1_bundle_census(rep: SurfaceRep, amax: float, lmax: float,
                         exact_subgroup_count: bool = False) -> CensusRow:
    """Bracket for the count of genus-1 surface classes in the circle
    bundle: lower = degree-1 tori over primitive geodesics, upper adds
    at most d^2 (optionally exactly sigma_1(d)) covers per degree."""
    two_pi = 2.0 * math.pi
    if lmax + 1e-9 < amax / two_pi:
        raise ValueError(
            f"enumeration cutoff {lmax} below census horizon {amax / two_pi}")
    lens = primitive_lengths(rep, lmax)
    lower = int(np.searchsorted(lens, amax / two_pi + 1e-12, side="right"))
    upper = 0
    d = 1
    while lens.size and two_pi * d * lens[0] <= amax + 1e-12:
        k = int(np.searchsorted(lens, amax / (two_pi * d) + 1e-12,
                                side="right"))
        upper += (sigma1(d) if exact_subgroup_count else d * d) * k
        d += 1
    return CensusRow(bound=amax, count_lower=lower, count_upper=upper,
                     exponent=1.0, cutoff=lmax)


# ---------------------------------------------------------------------------
# Liouville pairing and Lagrangian counts

@dataclass(frozen=True)
class CurrentEstimate:
    value: float
    cutoff: float
    sample_size: int
    method: str = "bowen-average"

    def __post_init__(self):
        if self.value < 0 or self.sample_size < 1:
            raise ValueError("invalid current estimate")


def liouville_pairing(rep_sigma: SurfaceRep, rep_rho: SurfaceRep,
                      lmax: float, min_sample: int = 100) -> CurrentEstimate:
    """Estimate of the Liouville-current pairing of the two metrics.

    Closed geodesics below the sigma-cutoff equidistribute toward the
    Liouville current, so pairing ~ pi^2 |chi| * sum(l_rho) / sum(l_sigma)
    over the same conjugacy classes; exact (= pi^2 |chi|) on the diagonal.
    """
    if rep_sigma.genus != rep_rho.genus:
        raise ValueError("pairing requires metrics on the same surface")
    entries = get_census(rep_sigma, lmax)
    if len(entries) < min_sample:
        raise InsufficientSample(
            f"{len(entries)} classes below cutoff {lmax}; need {min_sample}")
    s_sigma = math.fsum(e.length for e in entries)
    s_rho = math.fsum(class_length(rep_rho, e.cls) for e in entries)
    chi = abs(rep_sigma.euler_char)
    value = math.pi ** 2 * chi * s_rho / s_sigma
    return CurrentEstimate(value=value, cutoff=lmax, sample_size=len(entries))


def lagrangian_area_bounds(rep_sigma: SurfaceRep, rep_rho: SurfaceRep,
                           lmax: float):
    """[pairing, pairing + 12 pi |chi|] bracketing the minimal area of the
    graph class in the product of the two surfaces."""
    est = liouville_pairing(rep_sigma, rep_rho, lmax)
    width = 12.0 * math.pi * abs(rep_sigma.euler_char)
    return est.value, est.value + width


def lagrangian_torus_census(rep_sigma: SurfaceRep, rep_rho: SurfaceRep,
                            amax: float, lmax_sigma: float,
                            lmax_rho: float) -> CensusRow:
    """Bracket for genus-1 minimal Lagrangian tori of area <= amax:
    products of primitive closed geodesics, counted once at degree 1 and
    at most d^2 times at degree d."""
    ls = primitive_lengths(rep_sigma, lmax_sigma)
    lr = primitive_lengths(rep_rho, lmax_rho)
    if not ls.size or not lr.size:
        return CensusRow(bound=amax, count_lower=0, count_upper=0,
                         exponent=1.0, cutoff=min(lmax_sigma, lmax_rho))
    if lmax_sigma * lr[0] < amax - 1e-9 or lmax_rho * ls[0] < amax - 1e-9:
        raise ValueError("enumeration cutoffs below the census horizon "
                         f"{amax / lr[0]:.3f} / {amax / ls[0]:.3f}")

    def pair_count(bound: float) -> int:
        # number of (alpha, beta) with l_sigma(alpha) * l_rho(beta) <= bound
        k = np.searchsorted(lr, bound / ls + 1e-12, side="right")
        return int(k.sum())

    lower = pair_count(amax)
    upper = 0
    d = 1
    while d * ls[0] * lr[0] <= amax + 1e-12:
        upper += d * d * pair_count(amax / d)
        d += 1
    return CensusRow(bound=amax, count_lower=lower, count_upper=upper,
                     exponent=1.0, cutoff=min(lmax_sigma, lmax_rho))


# ---------------------------------------------------------------------------
# simple curves

def simple_census(rep: SurfaceRep, lmax: float, thresholds=None):
    """Counts of unoriented primitive simple classes per threshold and the
    log-log least-squares exponent of the counts."""
    entries = get_census(rep, lmax)
    simple_lengths = np.array(sorted(
        e.length for e in entries if is_simple(rep, e.cls)))
    if thresholds is None:
        lo = max(3.5, math.floor(simple_lengths[0]) if simple_lengths.size else 3.5)
        thresholds = [float(t) for t in np.arange(lo, lmax + 1e-9, 1.0)]
        if not thresholds or thresholds[-1] < lmax - 1e-9:
            thresholds.append(float(lmax))
    rows = [(float(t), int(np.searchsorted(simple_lengths, t + 1e-12,
                                           side="right")))
            for t in thresholds]
    pts = [(math.log(t), math.log(c)) for t, c in rows if c > 0]
    if len(pts) >= 2:
        xs = np.array([p[0] for p in pts])
        ys = np.array([p[1] for p in pts])
        exponent = float(np.polyfit(xs, ys, 1)[0])
    else:
        exponent = float("nan")
    return rows, exponent


# ---------------------------------------------------------------------------
# fingerprint and mapping-class census

@dataclass(frozen=True)
class MultiCurve:
    """Weighted multicurve: finitely many classes with positive weights."""

    components: tuple   # ((ConjClass, weight), ...)

    def __post_init__(self):
        classes = [c for c, _ in self.components]
        if len(set(classes)) != len(classes):
            raise ValueError("multicurve components must be distinct")
        if any(w <= 0 for _, w in self.components):
            raise ValueError("multicurve weights must be positive")

    def scaled(self, t: float) -> "MultiCurve":
        return MultiCurve(tuple((c, t * w) for c, w in self.components))


def rigidity_fingerprint(mu: MultiCurve, nu: MultiCurve,
                         twists, rep: SurfaceRep) -> np.ndarray:
    """Pairing vector { i(mu, phi(nu)) } over the finite battery of
    mapping classes; bilinear in the weights."""
    out = []
    for phi in twists:
        total = 0.0
        for c1, w1 in mu.components:
            for c2, w2 in nu.components:
                img = phi.apply_class(c2)
                total += w1 * w2 * geometric_intersection(rep, c1, img).count
        out.append(total)
    return np.array(out)


def _default_battery(genus: int = 2):
    from .words import canonical_class
    words = [(1,), (2,), (3,), (4,), (1, 3), (1, 4), (2, 4)]
    return [canonical_class(w, genus) for w in words]


def enumerate_mapping_classes(word_radius: int, genus: int = 2):
    """Distinct mapping classes of twist words of length <= word_radius,
    deduplicated by their action on a fixed battery of curve classes."""
    if word_radius > 4:
        raise ValueError("word radius beyond 4 is not supported at desk scale")
    from .mapping import identity_automorphism
    battery = _default_battery(genus)

    def key(phi):
        return tuple(phi.apply_class(c).canonical for c in battery)

    letters = []
    for cid in ("A1", "B1", "A2", "B2", "C"):
        letters.append(twist_automorphism(cid, 1))
        letters.append(twist_automorphism(cid, -1))
    ident = identity_automorphism(genus)
    seen = {key(ident): ident}
    frontier = [ident]
    for _ in range(word_radius):
        nxt = []
        for phi in frontier:
            for ltr in letters:
                cand = ltr.compose(phi)
                k = key(cand)
                if k not in seen:
                    seen[k] = cand
                    nxt.append(cand)
        frontier = nxt
    return list(seen.values())


def mapping_class_census(rep_sigma: SurfaceRep, rep_rho: SurfaceRep,
                         word_radius: int, amax: float,
                         lmax: float) -> CensusRow:
    """Bracket for the count of graph classes over mapping classes in the
    twist-word ball with minimal area <= amax, via the pairing sandwich.

    The pairing against each pushforward metric is the Bowen estimate, so
    the bracket carries the estimator's cutoff."""
    phis = enumerate_mapping_classes(word_radius, rep_sigma.genus)
    width = 12.0 * math.pi * abs(rep_sigma.euler_char)
    lower = upper = 0
    for phi in phis:
        pushed = pull_back_representation(rep_rho, phi.inverse())
        est = liouville_pairing(rep_sigma, pushed, lmax).value
        if est <= amax:
            upper += 1
        if est + width <= amax:
            lower += 1
    return CensusRow(bound=amax, count_lower=lower, count_upper=upper,
                     exponent=6.0 * (rep_sigma.genus - 1), cutoff=lmax)
