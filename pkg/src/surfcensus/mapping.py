"""Dehn-twist automorphisms of the genus-2 surface group.

The five twist curves are the Humphries-style generating set: the four
handle curves a1, b1, a2, b2 and the chain curve c = a1.a2 between the
handles.  Generator-image tables live in data/twist_tables.txt and are
validated on load: relator preserved up to conjugacy (exact, on free
words), positive/negative tables compose to the identity, and the
homology action is the symplectic transvection of the curve's class.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedCurve
from .hyperbolic import SurfaceRep, make_surface_rep, mat_of_word
from .words import (ConjClass, canonical_class, concat, cyclic_reduce,
                    homology_of, inverse_word, parse_word, reduce_word,
                    surface_relator)

TWIST_CURVES = {
    "A1": (1,),
    "B1": (2,),
    "A2": (3,),
    "B2": (4,),
    "C": (1, 3),
}


def _relator_conjugate(word, genus) -> bool:
    core, _ = cyclic_reduce(reduce_word(word))
    rel = surface_relator(genus)
    rots = [rel[i:] + rel[:i] for i in range(len(rel))]
    inv = inverse_word(rel)
    rots += [inv[i:] + inv[:i] for i in range(len(inv))]
    return core in rots


@dataclass(frozen=True)
class Automorphism:
    """Surface-group automorphism by generator images (genus 2)."""

    images: tuple          # word per generator a1, b1, a2, b2
    inverse_images: tuple
    label: str = ""
    genus: int = 2

    def __post_init__(self):
        rel = surface_relator(self.genus)
        if not _relator_conjugate(self.apply_word(rel), self.genus):
            raise ValueError(f"automorphism {self.label!r} moves the relator "
                             "off its conjugacy class")
        inv = Automorphism.__new__(Automorphism)
        object.__setattr__(inv, "images", self.inverse_images)
        for k in range(2 * self.genus):
            gen = (k + 1,)
            there = inv._apply(self.images[k])
            back = self._apply(self.inverse_images[k])
            if there != gen or back != gen:
                raise ValueError(
                    f"automorphism {self.label!r}: inverse tables do not "
                    f"compose to the identity on generator {k + 1}")

    def _apply(self, word):
        out = []
        for x in word:
            im = self.images[x - 1] if x > 0 else \
                inverse_word(self.images[-x - 1])
            for y in im:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return tuple(out)

    def apply_word(self, word) -> tuple:
        return self._apply(reduce_word(word))

    def apply_class(self, c: ConjClass) -> ConjClass:
        return canonical_class(self._apply(c.canonical), self.genus,
                               oriented=c.oriented)

    def inverse(self) -> "Automorphism":
        return Automorphism(images=self.inverse_images,
                            inverse_images=self.images,
                            label=f"({self.label})^-1", genus=self.genus)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other: (self*other)(x) = self(other(x))."""
        images = tuple(self._apply(w) for w in other.images)
        inv = tuple(other.inverse()._apply(w) for w in self.inverse_images)
        return Automorphism(images=images, inverse_images=inv,
                            label=f"{self.label}*{other.label}",
                            genus=self.genus)

    def homology_action(self) -> np.ndarray:
        """Integer matrix of the abelianized action (columns = images)."""
        cols = [homology_of(w, self.genus) for w in self.images]
        return np.stack(cols, axis=1)

    def is_identity(self) -> bool:
        return all(self.images[k] == (k + 1,) for k in range(2 * self.genus))


def identity_automorphism(genus: int = 2) -> Automorphism:
    gens = tuple((k + 1,) for k in range(2 * genus))
    return Automorphism(images=gens, inverse_images=gens, label="id",
                        genus=genus)


def _load_tables() -> dict:
    text = importlib.resources.files("surfcensus.data") \
        .joinpath("twist_tables.txt").read_text()
    raw: dict = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        head, word = line.split("->")
        tag, gen = head.split()
        raw.setdefault(tag, {})[parse_word(gen, 2)[0]] = parse_word(word.strip(), 2)
    out = {}
    for curve in TWIST_CURVES:
        plus, minus = raw[curve + "+"], raw[curve + "-"]
        images = tuple(plus[k + 1] for k in range(4))
        inv = tuple(minus[k + 1] for k in range(4))
        out[curve] = Automorphism(images=images, inverse_images=inv,
                                  label=f"T_{curve}")
    return out


_TABLES = _load_tables()


def twist_automorphism(curve_id: str, n: int) -> Automorphism:
    """n-th power of the positive Dehn twist about one of the five curves."""
    if curve_id not in _TABLES:
        raise UnsupportedCurve(
            f"twist curve {curve_id!r}; supported: {sorted(_TABLES)}")
    if n == 0:
        return identity_automorphism()
    base = _TABLES[curve_id] if n > 0 else _TABLES[curve_id].inverse()
    out = base
    for _ in range(abs(n) - 1):
        out = base.compose(out)
    object.__setattr__(out, "label", f"T_{curve_id}^{n}")
    return out


def twist_curve_class(curve_id: str, oriented: bool = False) -> ConjClass:
    if curve_id not in TWIST_CURVES:
        raise UnsupportedCurve(curve_id)
    return canonical_class(TWIST_CURVES[curve_id], 2, oriented=oriented)


def apply_automorphism(phi: Automorphism, c: ConjClass) -> ConjClass:
    return phi.apply_class(c)


def pull_back_representation(rep: SurfaceRep, phi: Automorphism) -> SurfaceRep:
    """Representation g -> rep(phi(g)); realizes the pulled-back metric:
    lengths satisfy l_pullback(c) = l_rep(phi(c)).

    Word products run in extended precision and the result is recentred:
    twisted generators can carry large matrix norms."""
    from .hyperbolic import _balance_basepoint
    ld_gens = rep.ld_gens()
    raw = [mat_of_word(ld_gens, phi.images[k]) for k in range(2 * rep.genus)]
    gens_ld = _balance_basepoint(raw)
    return make_surface_rep([g.astype(float) for g in gens_ld], rep.genus,
                            preset=f"pullback:{rep.preset}:{phi.label}",
                            pullback_of=(rep, phi), gens_ld=gens_ld,
                            relator_certified=True)


def twist_limit_residual(alpha: ConjClass, gamma: ConjClass, beta: ConjClass,
                         n: int, rep: SurfaceRep) -> int:
    """|i(T_alpha^n(gamma), beta) - n i(alpha,gamma) i(alpha,beta)|; the
    twist-convergence bound says this never exceeds i(gamma, beta)."""
    from .intersections import geometric_intersection
    for curve_id in TWIST_CURVES:
        if twist_curve_class(curve_id) == canonical_class(
                alpha.canonical, alpha.genus, oriented=False):
            break
    else:
        raise UnsupportedCurve(
            "twist axis must be one of the five generating curves")
    if n < 1:
        raise ValueError("twist power must be >= 1")
    phi = twist_automorphism(curve_id, n)
    tg = phi.apply_class(gamma)
    lhs = geometric_intersection(rep, tg, beta).count
    ia_g = geometric_intersection(rep, alpha, gamma).count
    ia_b = geometric_intersection(rep, alpha, beta).count
    return abs(lhs - n * ia_g * ia_b)
