"""Complete enumeration of conjugacy classes up to a length cutoff.

Every free homotopy class of translation length l has a representative
whose axis meets the Dirichlet domain about the basepoint, hence passes
within Delta of it; that representative satisfies
``d(o, g o) = 2 arccosh(cosh(l/2) cosh(t)) <= 2 arccosh(cosh(l/2) cosh(Delta))``.
Enumerating the whole orbit ball of that radius (plus a connectivity pad
on the breadth-first expansion) therefore visits at least one
representative per class; exact word-level canonicalization dedups them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, NotHyperbolic, ToleranceFailure
from .hyperbolic import (PARABOLIC_TOL, SurfaceRep, enumeration_slack,
                         trace_to_length)
from .words import ConjClass, canonical_class, homology_of, _order_key

DEFAULT_BUDGET_PRODUCTS = 50_000_000
BFS_PAD = 2.0


@dataclass(frozen=True)
class ClassEntry:
    cls: ConjClass
    trace: float
    length: float

    @property
    def homology(self) -> np.ndarray:
        return homology_of(self.cls)


def class_length(rep: SurfaceRep, c: ConjClass) -> float:
    """Translation length of the class in the given representation."""
    return trace_to_length(rep.class_trace(c.canonical))


def _node_cap(rep: SurfaceRep, radius: float, budget_products: int) -> int:
    # expected orbit-point count ~ area(B_R)/area(surface)
    expected = (math.cosh(radius) - 1.0) / (2.0 * abs(rep.euler_char))
    cap = int(64 + 3.0 * expected)
    budget_nodes = budget_products // (4 * rep.genus)
    if cap > budget_nodes:
        raise BudgetExceeded(
            f"estimated ball size {cap:.3g} nodes exceeds budget "
            f"{budget_nodes:.3g}; raise the budget or lower the cutoff")
    return cap


def ball_elements(rep: SurfaceRep, radius: float,
                  budget_products: int = DEFAULT_BUDGET_PRODUCTS,
                  pad: float = BFS_PAD):
    """All group elements with d(i, g i) <= radius (matrices flattened to
    rows) together with BFS parent/letter arrays for word reconstruction."""
    cap = _node_cap(rep, radius + pad, budget_products)
    mats, parents, letters, depths, status = _kernels.ball_bfs(
        rep.gens, radius + pad, cap)
    if status != _kernels.BUDGET_OK:
        raise BudgetExceeded("node cap hit during ball search; result incomplete",
                             partial=None)
    coshd = 0.5 * np.einsum("ij,ij->i", mats, mats)
    keep = coshd <= math.cosh(radius)
    return mats, parents, letters, keep


def enumerate_classes(rep: SurfaceRep, lmax: float, oriented: bool = False,
                      budget_products: int = DEFAULT_BUDGET_PRODUCTS,
                      pad: float = BFS_PAD):
    """COMPLETE list of conjugacy classes with translation length <= lmax,
    sorted by (length, canonical word).  Returns list of ClassEntry."""
    if lmax <= 0:
        raise ValueError("lmax must be positive")
    delta = enumeration_slack(rep) / 2.0
    r_target = 2.0 * math.acosh(math.cosh(lmax / 2.0) * math.cosh(delta))
    cap = _node_cap(rep, r_target + pad, budget_products)
    mats, parents, letters, depths, status = _kernels.ball_bfs(
        rep.gens, r_target + pad, cap)
    if status != _kernels.BUDGET_OK:
        raise BudgetExceeded("node cap hit during ball search; census incomplete",
                             partial=None)

    tr = np.abs(mats[:, 0] + mats[:, 3])
    hyper = tr > 2.0 + PARABOLIC_TOL
    coshd = 0.5 * np.einsum("ij,ij->i", mats, mats)
    with np.errstate(invalid="ignore", divide="ignore"):
        lens = 2.0 * np.arccosh(np.maximum(tr, 2.0) / 2.0)
        cosh_half_d = np.sqrt((coshd + 1.0) / 2.0)
        cosh_axis = cosh_half_d / np.maximum(tr / 2.0, 1.0)
    select = hyper & (lens <= lmax + 1e-12) & \
        (cosh_axis <= math.cosh(delta) + 1e-9)
    select[0] = False

    found: dict[ConjClass, ClassEntry] = {}
    for idx in np.nonzero(select)[0]:
        word = _kernels.reconstruct_word(parents, letters, int(idx))
        cls = canonical_class(word, rep.genus, oriented=oriented)
        if cls in found:
            continue
        trace = rep.class_trace(cls.canonical)
        length = trace_to_length(trace)
        if abs(length - lens[idx]) > 1e-6 * (1.0 + length):
            raise ToleranceFailure(
                f"canonical-word length {length} disagrees with ball "
                f"element length {lens[idx]}")
        if length <= lmax + 1e-12:
            found[cls] = ClassEntry(cls=cls, trace=trace, length=length)
    out = sorted(found.values(), key=lambda e: (e.length, _order_key(e.cls.canonical)))
    return out


# ---------------------------------------------------------------------------
# in-process census cache

_CENSUS_CACHE: dict = {}


def get_census(rep: SurfaceRep, lmax: float, oriented: bool = False,
               budget_products: int = DEFAULT_BUDGET_PRODUCTS):
    """Cached enumerate_classes: reuses any previous enumeration of the same
    representation at a cutoff >= lmax (filtered), re-enumerating otherwise."""
    key = (rep.rep_hash(), oriented)
    hit = _CENSUS_CACHE.get(key)
    if hit is not None and hit[0] >= lmax:
        return [e for e in hit[1] if e.length <= lmax + 1e-12]
    entries = enumerate_classes(rep, lmax, oriented=oriented,
                                budget_products=budget_products)
    _CENSUS_CACHE[key] = (lmax, entries)
    return entries


def clear_census_cache():
    _CENSUS_CACHE.clear()


def systole(rep: SurfaceRep, search_lmax: float = 4.0) -> float:
    """Length of the shortest closed geodesic (grows the cutoff as needed)."""
    lmax = search_lmax
    for _ in range(8):
        entries = get_census(rep, lmax)
        if entries:
            return entries[0].length
        lmax *= 1.5
    raise NotHyperbolic("no closed geodesic found; representation broken")
