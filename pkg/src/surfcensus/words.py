"""Words and conjugacy classes in genus-g surface groups.

Letters are signed integers: ``+(2i-1)`` is the handle generator ``a_i``,
``+(2i)`` is ``b_i``, negatives are inverses.  The single relator is
``prod_i [a_i, b_i]``.  Conjugacy representatives are computed by Dehn's
algorithm for the (C'(1/8) small-cancellation) surface presentation:
cyclic Dehn shortening, closure under half-relator exchanges, then the
minimal rotation in the fixed letter order
``a1 < a1^-1 < b1 < b1^-1 < a2 < ...``.

The half-relator exchanges matter: rotation alone does not identify e.g.
``[a1,b1]`` with ``[b2^-1,a2^-1]``, which are equal in the group.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import EmptyWord

# Caps the half-relator exchange closure; words hitting this are pathological.
_ORBIT_CAP = 20000


def reduce_word(letters) -> tuple:
    """Freely reduce a letter sequence."""
    out = []
    for x in letters:
        if x == 0:
            raise ValueError("letter 0 is not a generator")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(int(x))
    return tuple(out)


def inverse_word(letters) -> tuple:
    return tuple(-x for x in reversed(letters))


def concat(*parts) -> tuple:
    out = []
    for p in parts:
        for x in p:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(int(x))
    return tuple(out)


def cyclic_reduce(letters):
    """Return (core, conj) with ``letters = conj * core * conj^-1`` freely."""
    w = list(reduce_word(letters))
    pre = []
    while len(w) >= 2 and w[0] == -w[-1]:
        pre.append(w[0])
        w = w[1:-1]
    return tuple(w), tuple(pre)


@lru_cache(maxsize=None)
def surface_relator(genus: int) -> tuple:
    rel = []
    for i in range(1, genus + 1):
        a, b = 2 * i - 1, 2 * i
        rel += [a, b, -a, -b]
    return tuple(rel)


@lru_cache(maxsize=None)
def _relator_rotations(genus: int):
    """All cyclic rotations of the relator and its inverse."""
    rel = surface_relator(genus)
    inv = inverse_word(rel)
    rots = []
    n = len(rel)
    for w in (rel, inv):
        for i in range(n):
            rots.append(w[i:] + w[:i])
    return tuple(rots)


def _letter_order(x: int) -> int:
    # a1 < a1^-1 < b1 < b1^-1 < a2 < ...
    return 2 * (abs(x) - 1) + (0 if x > 0 else 1)


def _order_key(word):
    return tuple(_letter_order(x) for x in word)


def _min_rotation(word):
    if not word:
        return word
    n = len(word)
    best = None
    for i in range(n):
        cand = word[i:] + word[:i]
        if best is None or _order_key(cand) < _order_key(best):
            best = cand
    return best


def _match_at(wrot, rho):
    """Longest common prefix of wrot with relator rotation rho."""
    m = 0
    lim = min(len(wrot), len(rho) - 1)
    while m < lim and wrot[m] == rho[m]:
        m += 1
    return m


def _dehn_step(word, genus):
    """One length-reducing Dehn replacement on the cyclic word, or None."""
    n = len(word)
    half = len(surface_relator(genus)) // 2
    for i in range(n):
        wrot = word[i:] + word[:i]
        for rho in _relator_rotations(genus):
            m = _match_at(wrot, rho)
            if m > half:
                repl = inverse_word(rho[m:])
                new = concat(repl, wrot[m:])
                core, _ = cyclic_reduce(new)
                return core
    return None


def _half_flips(word, genus):
    """All words obtained by exchanging one half-relator subword."""
    n = len(word)
    half = len(surface_relator(genus)) // 2
    out = []
    for i in range(n):
        wrot = word[i:] + word[:i]
        for rho in _relator_rotations(genus):
            if _match_at(wrot, rho) >= half:
                repl = inverse_word(rho[half:])
                new = concat(repl, wrot[half:])
                core, _ = cyclic_reduce(new)
                out.append(core)
    return out


def _shorten_fully(word, genus):
    w = word
    while True:
        nxt = _dehn_step(w, genus)
        if nxt is None:
            return w
        w = nxt


def class_orbit(word, genus) -> frozenset:
    """Closure of a cyclically Dehn-reduced word under half-relator
    exchanges, each member stored as its minimal rotation."""
    core, _ = cyclic_reduce(word)
    core = _shorten_fully(core, genus)
    seen = {_min_rotation(core)}
    frontier = [core]
    while frontier:
        cur = frontier.pop()
        for f in _half_flips(cur, genus):
            if len(f) < len(cur):
                # an exchange exposed a shorter form; restart from it
                return class_orbit(f, genus)
            key = _min_rotation(f)
            if key not in seen:
                if len(seen) >= _ORBIT_CAP:
                    raise RuntimeError("half-relator exchange closure blew up")
                seen.add(key)
                frontier.append(key)
    return frozenset(seen)


@dataclass(frozen=True)
class ConjClass:
    """Canonical representative of a free homotopy class.

    ``canonical`` is the minimal word over the class orbit (and the inverse
    orbit when unoriented); two ConjClass values compare equal exactly when
    the underlying classes are conjugate (conjugate-or-inverse if unoriented).
    """

    canonical: tuple
    genus: int
    oriented: bool = False

    @property
    def word(self) -> tuple:
        return self.canonical

    def __len__(self):
        return len(self.canonical)

    def inverse(self) -> "ConjClass":
        return canonical_class(inverse_word(self.canonical), self.genus,
                               oriented=self.oriented)

    def __str__(self):
        names = []
        for x in self.canonical:
            base = "ab"[(abs(x) - 1) % 2] + str((abs(x) + 1) // 2)
            names.append(base if x > 0 else base.upper())
        return ".".join(names) if names else "1"


def is_trivial_in_group(word, genus: int) -> bool:
    """Exact word problem via Dehn's algorithm (complete for the C'(1/8)
    surface presentation): true iff the word is the identity."""
    w = reduce_word(word)
    while True:
        core, _ = cyclic_reduce(w)
        if not core:
            return True
        nxt = _dehn_step(core, genus)
        if nxt is None:
            return False
        w = nxt


def canonical_class(word, genus: int, oriented: bool = False) -> ConjClass:
    w = reduce_word(word)
    core, _ = cyclic_reduce(w)
    if not core:
        raise EmptyWord("word is trivial in the free group")
    orbit = class_orbit(core, genus)
    cands = set(orbit)
    if not oriented:
        inv_orbit = class_orbit(inverse_word(next(iter(orbit))), genus)
        cands |= inv_orbit
    best = min(cands, key=_order_key)
    return ConjClass(best, genus, oriented)


def is_primitive(cls: ConjClass):
    """Whether the class is not a proper power; returns (flag, root, power).

    Power structure is read off literal periodicity across the whole
    exchange orbit (a power's minimal form is periodic, but the orbit
    minimum need not be).
    """
    orbit = class_orbit(cls.canonical, cls.genus)
    n = len(cls.canonical)
    best_k, best_root = 1, cls.canonical
    for member in orbit:
        for k in range(2, n + 1):
            if n % k:
                continue
            p = n // k
            if member == member[:p] * k and k > best_k:
                best_k, best_root = k, member[:p]
    if best_k == 1:
        return True, cls, 1
    root = canonical_class(best_root, cls.genus, oriented=cls.oriented)
    return False, root, best_k


def homology_of(obj, genus: int | None = None) -> np.ndarray:
    """Abelianization: a_i -> e_{2i-1}, b_i -> e_{2i} (1-indexed)."""
    if isinstance(obj, ConjClass):
        word, genus = obj.canonical, obj.genus
    else:
        word = tuple(obj)
        if genus is None:
            raise ValueError("genus required for raw words")
    v = np.zeros(2 * genus, dtype=np.int64)
    for x in word:
        v[abs(x) - 1] += 1 if x > 0 else -1
    return v


def homology_mod2_pairing(word, bits) -> int:
    """Pair the abelianization mod 2 against a 2g-bit vector."""
    s = 0
    for x in word:
        s ^= int(bits[abs(x) - 1]) & 1
    return s


_LETTER_RE = None


def parse_word(text: str, genus: int) -> tuple:
    """Parse words like ``a1.B1.a2`` or ``a1 b1^-1`` (capital = inverse)."""
    import re
    toks = re.findall(r"([abAB])(\d+)(\^-1)?", text)
    if not toks:
        raise ValueError(f"cannot parse word {text!r}")
    out = []
    for kind, idx, pw in toks:
        i = int(idx)
        if not 1 <= i <= genus:
            raise ValueError(f"generator index {i} out of range for genus {genus}")
        letter = 2 * i - 1 if kind.lower() == "a" else 2 * i
        if kind.isupper() or pw:
            letter = -letter
        out.append(letter)
    return reduce_word(out)
