"""Hot numeric kernels: Cayley-ball breadth-first search and lattice sweeps.

Two interchangeable backends:

* a numba ``@njit`` implementation (default when numba imports cleanly), and
* a pure-numpy frontier implementation.

Selection: ``SURFCENSUS_FORCE_NUMPY=1`` (or numba's own
``NUMBA_DISABLE_JIT=1``) forces the numpy path.  Both return identical
element sets; node discovery order differs, which downstream code must not
rely on (it sorts its outputs).  ``benchmarks/bench_kernels.py`` compares
the two.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FORCE_NUMPY = os.environ.get("SURFCENSUS_FORCE_NUMPY", "") not in ("", "0")
if os.environ.get("NUMBA_DISABLE_JIT", "") not in ("", "0"):
    _FORCE_NUMPY = True

try:
    if _FORCE_NUMPY:
        raise ImportError
    import numba
    from numba import njit
    from numba.typed import Dict as NumbaDict
    from numba.core import types as nbtypes
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

QUANT = 1e-6  # node-key quantum; orbit points of distinct elements are
              # macroscopically separated, so collisions cannot merge them

BUDGET_OK = 0
BUDGET_NODES = 1


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def _pack_gens(gens) -> np.ndarray:
    """Generators and inverses as an (4g, 2, 2) array; index i is letter
    i+1 for i < 2g, and the inverse of letter i-2g+1 beyond."""
    g = [np.asarray(M, dtype=np.float64) for M in gens]
    inv = [np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]]) for M in g]
    return np.stack(g + inv)


def _letter_of_slot(slot: int, n_gens: int) -> int:
    return slot + 1 if slot < n_gens else -(slot - n_gens + 1)


# ---------------------------------------------------------------------------
# numba backend

if HAVE_NUMBA:

    _KEY_TYPE = nbtypes.UniTuple(nbtypes.int64, 4)
    _VAL_TYPE = nbtypes.int64

    @njit(cache=True)
    def _key_of(m0, m1, m2, m3, quant):
        # sign-normalize by the largest-magnitude entry
        best = abs(m0)
        sign = 1.0 if m0 >= 0 else -1.0
        for v in (m1, m2, m3):
            if abs(v) > best:
                best = abs(v)
                sign = 1.0 if v >= 0 else -1.0
        return (np.int64(round(m0 * sign / quant)),
                np.int64(round(m1 * sign / quant)),
                np.int64(round(m2 * sign / quant)),
                np.int64(round(m3 * sign / quant)))

    @njit(cache=True)
    def _ball_bfs_numba(mats, cosh_expand, cap, renorm_every):
        n_slots = mats.shape[0]
        n_gens = n_slots // 2
        out = np.empty((cap, 4), dtype=np.float64)
        parents = np.empty(cap, dtype=np.int32)
        letters = np.empty(cap, dtype=np.int8)
        depths = np.empty(cap, dtype=np.int16)
        seen = NumbaDict.empty(key_type=_KEY_TYPE, value_type=_VAL_TYPE)
        out[0, 0] = 1.0
        out[0, 1] = 0.0
        out[0, 2] = 0.0
        out[0, 3] = 1.0
        parents[0] = -1
        letters[0] = 0
        depths[0] = 0
        seen[_key_of(1.0, 0.0, 0.0, 1.0, QUANT)] = 0
        n = 1
        head = 0
        status = BUDGET_OK
        while head < n:
            pa, pb, pc, pd = out[head, 0], out[head, 1], out[head, 2], out[head, 3]
            inlet = letters[head]
            dep = depths[head] + 1
            for s in range(n_slots):
                # skip the immediate inverse of the incoming letter
                if inlet != 0:
                    if inlet > 0 and s == inlet - 1 + n_gens:
                        continue
                    if inlet < 0 and s == -inlet - 1:
                        continue
                ga, gb = mats[s, 0, 0], mats[s, 0, 1]
                gc, gd = mats[s, 1, 0], mats[s, 1, 1]
                a = pa * ga + pb * gc
                b = pa * gb + pb * gd
                c = pc * ga + pd * gc
                d = pc * gb + pd * gd
                if dep % renorm_every == 0:
                    det = a * d - b * c
                    f = 1.0 / math.sqrt(abs(det))
                    a *= f
                    b *= f
                    c *= f
                    d *= f
                coshd = 0.5 * (a * a + b * b + c * c + d * d)
                if coshd > cosh_expand:
                    continue
                key = _key_of(a, b, c, d, QUANT)
                if key in seen:
                    continue
                if n >= cap:
                    return out[:n], parents[:n], letters[:n], depths[:n], BUDGET_NODES
                seen[key] = n
                out[n, 0] = a
                out[n, 1] = b
                out[n, 2] = c
                out[n, 3] = d
                parents[n] = head
                ltr = s + 1 if s < n_gens else -(s - n_gens + 1)
                letters[n] = ltr
                depths[n] = dep
                n += 1
            head += 1
        return out[:n], parents[:n], letters[:n], depths[:n], status

    @njit(cache=True)
    def _gauge_count_numba(normals, offsets, box, amax):
        """Count integer points v in [-box, box]^dim with
        max_j (normals[j] . v) / offsets[j] <= amax."""
        dim = box.shape[0]
        nf = normals.shape[0]
        idx = np.zeros(dim, dtype=np.int64)
        v = np.empty(dim, dtype=np.float64)
        total = np.int64(0)
        while True:
            for k in range(dim):
                v[k] = idx[k] - box[k]
            g = 0.0
            for j in range(nf):
                s = 0.0
                for k in range(dim):
                    s += normals[j, k] * v[k]
                s /= offsets[j]
                if s > g:
                    g = s
            if g <= amax:
                total += 1
            k = dim - 1
            while k >= 0:
                idx[k] += 1
                if idx[k] <= 2 * box[k]:
                    break
                idx[k] = 0
                k -= 1
            if k < 0:
                break
        return total


# ---------------------------------------------------------------------------
# numpy backend

def _keys_of(batch: np.ndarray) -> np.ndarray:
    """Quantized sign-normalized keys for a (n, 4) batch of matrices."""
    picks = np.argmax(np.abs(batch), axis=1)
    signs = np.sign(batch[np.arange(len(batch)), picks])
    signs[signs == 0] = 1.0
    return np.round(batch * signs[:, None] / QUANT).astype(np.int64)


def _rows_void(a: np.ndarray):
    a = np.ascontiguousarray(a)
    return a.view([("", a.dtype)] * a.shape[1]).ravel()


def _ball_bfs_numpy(mats, cosh_expand, cap, renorm_every):
    n_slots = mats.shape[0]
    n_gens = n_slots // 2
    flat = mats.reshape(n_slots, 4)
    out = [np.array([[1.0, 0.0, 0.0, 1.0]])]
    parents = [np.array([-1], dtype=np.int32)]
    letters = [np.array([0], dtype=np.int8)]
    depths = [np.array([0], dtype=np.int16)]
    visited = _keys_of(out[0])
    frontier = out[0]
    f_ids = np.array([0], dtype=np.int64)
    f_letters = letters[0]
    n = 1
    depth = 0
    status = BUDGET_OK
    while len(frontier):
        depth += 1
        cand_mats, cand_par, cand_let = [], [], []
        for s in range(n_slots):
            ltr = s + 1 if s < n_gens else -(s - n_gens + 1)
            ok = f_letters != -ltr
            if not np.any(ok):
                continue
            F = frontier[ok]
            a = F[:, 0] * flat[s, 0] + F[:, 1] * flat[s, 2]
            b = F[:, 0] * flat[s, 1] + F[:, 1] * flat[s, 3]
            c = F[:, 2] * flat[s, 0] + F[:, 3] * flat[s, 2]
            d = F[:, 2] * flat[s, 1] + F[:, 3] * flat[s, 3]
            M = np.stack([a, b, c, d], axis=1)
            if depth % renorm_every == 0:
                det = a * d - b * c
                M /= np.sqrt(np.abs(det))[:, None]
            keep = 0.5 * np.einsum("ij,ij->i", M, M) <= cosh_expand
            if not np.any(keep):
                continue
            cand_mats.append(M[keep])
            cand_par.append(f_ids[ok][keep].astype(np.int32))
            cand_let.append(np.full(int(keep.sum()), ltr, dtype=np.int8))
        if not cand_mats:
            break
        M = np.concatenate(cand_mats)
        P = np.concatenate(cand_par)
        L = np.concatenate(cand_let)
        keys = _keys_of(M)
        # dedup inside the level (keep first occurrence, stable)
        _, first = np.unique(_rows_void(keys), return_index=True)
        first.sort()
        M, P, L, keys = M[first], P[first], L[first], keys[first]
        # drop already-visited elements
        new = ~np.isin(_rows_void(keys), _rows_void(visited))
        if not np.any(new):
            break
        M, P, L, keys = M[new], P[new], L[new], keys[new]
        if n + len(M) > cap:
            room = cap - n
            M, P, L, keys = M[:room], P[:room], L[:room], keys[:room]
            status = BUDGET_NODES
        ids = np.arange(n, n + len(M), dtype=np.int64)
        n += len(M)
        out.append(M)
        parents.append(P)
        letters.append(L)
        depths.append(np.full(len(M), depth, dtype=np.int16))
        visited = np.concatenate([visited, keys])
        frontier, f_ids, f_letters = M, ids, L
        if status == BUDGET_NODES:
            break
    return (np.concatenate(out), np.concatenate(parents),
            np.concatenate(letters), np.concatenate(depths), status)


def _gauge_count_numpy(normals, offsets, box, amax, chunk=200000):
    dim = len(box)
    shape = 2 * box + 1
    total_pts = int(np.prod(shape))
    count = 0
    scaled = normals / offsets[:, None]
    for start in range(0, total_pts, chunk):
        idx = np.arange(start, min(start + chunk, total_pts))
        coords = np.empty((len(idx), dim))
        rem = idx
        for k in range(dim - 1, -1, -1):
            coords[:, k] = rem % shape[k] - box[k]
            rem = rem // shape[k]
        g = (coords @ scaled.T).max(axis=1)
        count += int(np.sum(g <= amax))
    return count


# ---------------------------------------------------------------------------
# public entry points

def ball_bfs(gens, radius_expand: float, cap: int, renorm_every: int = 16):
    """All group elements with d(i, g i) <= radius_expand, by breadth-first
    search over the Cayley graph (expansion is pruned at the same radius,
    so the caller must pad the target radius for connectivity; see
    enumeration.py).

    Returns (mats (n,4) row-major, parents, letters, depths, status).
    """
    mats = _pack_gens(gens)
    cosh_expand = math.cosh(radius_expand)
    if HAVE_NUMBA:
        return _ball_bfs_numba(mats, cosh_expand, cap, renorm_every)
    return _ball_bfs_numpy(mats, cosh_expand, cap, renorm_every)


def gauge_count(normals, offsets, box, amax) -> int:
    """Count integer points with polytope gauge <= amax in the given box."""
    normals = np.ascontiguousarray(normals, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.float64)
    box = np.ascontiguousarray(box, dtype=np.int64)
    if HAVE_NUMBA:
        return int(_gauge_count_numba(normals, offsets, box, float(amax)))
    return int(_gauge_count_numpy(normals, offsets, box, float(amax)))


def reconstruct_word(parents, letters, idx: int) -> tuple:
    """Word of a BFS node by walking the parent chain."""
    rev = []
    while idx > 0:
        rev.append(int(letters[idx]))
        idx = int(parents[idx])
    return tuple(reversed(rev))
