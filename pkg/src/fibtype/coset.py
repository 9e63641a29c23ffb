"""Todd-Coxeter coset enumeration and Reidemeister-Schreier rewriting.

The enumerator keeps its state in numpy arrays so the hot loops compile with
numba. Cosets are numbered from 1; 0 marks an undefined table entry. Column
``2*g`` is generator ``x_g`` and column ``2*g + 1`` its inverse, so the inverse
column is always ``col ^ 1``.

The Python driver calls the compiled kernels in bounded chunks, which is how
time limits are enforced without callbacks into the interpreter.
"""

from __future__ import annotations

import builtins
import time
from collections import deque
from dataclasses import dataclass, field
from math import lcm
from typing import Sequence

import numpy as np

from .presentations import GeneralPresentation, Word

try:  # pragma: no cover - exercised implicitly
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

__all__ = [
    "EnumerationLimits",
    "CosetTable",
    "EnumerationOverflow",
    "enumerate_cosets",
    "enumerate",
    "group_order",
    "quotient_by_normal_closure",
    "order_of_element",
    "schreier_generators",
    "reidemeister_schreier",
    "abelian_quotient_table",
    "derived_subgroup_table",
    "kernel_generators",
]

# slots of the int64 state vector shared with the kernels
_NEXT, _CUR, _ACTIVE, _PEAK, _QLEN, _DLEN, _DOVER, _TRACK, _DEFINED = range(9)
_STATE_SIZE = 9

_RUNNING, _DONE, _FULL = 0, 1, 2
_CHUNK = 20000


@dataclass(frozen=True)
class EnumerationLimits:
    max_cosets: int = 10**6
    max_time: float | None = None  # seconds

    def __post_init__(self):
        if self.max_cosets < 1:
            raise ValueError("max_cosets must be positive")


class EnumerationOverflow(RuntimeError):
    """Raised by helpers that need a complete table; carries the partial result."""

    def __init__(self, table: "CosetTable"):
        super().__init__(f"coset enumeration did not complete ({table.overflow_reason})")
        self.table = table


@dataclass
class CosetTable:
    generator_count: int
    table: np.ndarray  # (N+1) x 2g, row 0 unused
    status: str  # "complete" | "overflowed"
    peak_cosets: int
    defined_cosets: int
    overflow_reason: str | None = None
    strategy: str = "hlt"
    elapsed: float = field(default=0.0, compare=False)

    @property
    def is_complete(self) -> bool:
        return self.status == "complete"

    @property
    def index(self) -> int | None:
        return self.table.shape[0] - 1 if self.is_complete else None

    def coset_count(self) -> int:
        return self.table.shape[0] - 1

    def act(self, coset: int, w: Word) -> int:
        c = coset
        for g, e in w.letters():
            c = int(self.table[c, 2 * g + (e < 0)])
        return c

    def permutation(self, w: Word) -> np.ndarray:
        """Image of every coset under w, as a 0-based array over cosets 1..N."""
        if not self.is_complete:
            raise EnumerationOverflow(self)
        perm = np.arange(1, self.coset_count() + 1, dtype=np.int64)
        for g, e in w.letters():
            perm = self.table[perm, 2 * g + (e < 0)].astype(np.int64)
        return perm

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "peak_cosets": self.peak_cosets,
            "defined_cosets": self.defined_cosets,
            "strategy": self.strategy,
        }


# --- compiled kernels ------------------------------------------------------------


@njit(cache=True)
def _rep(p, c):
    r = c
    while p[r] != r:
        r = p[r]
    while p[c] != r:
        nxt = p[c]
        p[c] = r
        c = nxt
    return r


@njit(cache=True)
def _merge(p, q, st, a, b):
    a = _rep(p, a)
    b = _rep(p, b)
    if a == b:
        return
    if a > b:
        a, b = b, a
    p[b] = a
    q[st[_QLEN]] = b
    st[_QLEN] += 1
    st[_ACTIVE] -= 1


@njit(cache=True)
def _push(st, dc, dx, c, x):
    if st[_TRACK] == 0:
        return
    if st[_DLEN] >= dc.shape[0]:
        st[_DOVER] = 1
        return
    dc[st[_DLEN]] = c
    dx[st[_DLEN]] = x
    st[_DLEN] += 1


@njit(cache=True)
def _coincidence(table, p, q, st, dc, dx, a, b):
    ncols = table.shape[1]
    st[_QLEN] = 0
    _merge(p, q, st, a, b)
    i = 0
    while i < st[_QLEN]:
        g = q[i]
        i += 1
        for x in range(ncols):
            d = table[g, x]
            if d == 0:
                continue
            xi = x ^ 1
            table[d, xi] = 0
            mu = _rep(p, g)
            nu = _rep(p, d)
            if table[mu, x] != 0:
                _merge(p, q, st, nu, table[mu, x])
            elif table[nu, xi] != 0:
                _merge(p, q, st, mu, table[nu, xi])
            else:
                table[mu, x] = nu
                table[nu, xi] = mu
                _push(st, dc, dx, mu, x)


@njit(cache=True)
def _new_coset(table, p, st, f, x):
    n = st[_NEXT]
    st[_NEXT] += 1
    p[n] = n
    table[f, x] = n
    table[n, x ^ 1] = f
    st[_ACTIVE] += 1
    st[_DEFINED] += 1
    if st[_ACTIVE] > st[_PEAK]:
        st[_PEAK] = st[_ACTIVE]
    return n


@njit(cache=True)
def _scan(table, p, q, st, dc, dx, a, word, start, end, fill, capacity):
    """Scan word[start:end] at coset a; with ``fill`` define cosets as needed.

    Returns 1 only if a definition was needed but the table is full.
    """
    f = a
    b = a
    i = start
    j = end - 1
    while True:
        while i <= j and table[f, word[i]] != 0:
            f = table[f, word[i]]
            i += 1
        if i > j:
            if f != b:
                _coincidence(table, p, q, st, dc, dx, f, b)
            return 0
        while j >= i and table[b, word[j] ^ 1] != 0:
            b = table[b, word[j] ^ 1]
            j -= 1
        if j < i:
            _coincidence(table, p, q, st, dc, dx, f, b)
            return 0
        if i == j:
            table[f, word[i]] = b
            table[b, word[i] ^ 1] = f
            _push(st, dc, dx, f, word[i])
            return 0
        if not fill:
            return 0
        if st[_NEXT] >= capacity:
            return 1
        _new_coset(table, p, st, f, word[i])
        _push(st, dc, dx, f, word[i])


@njit(cache=True)
def _fill_subgroup(table, p, q, st, dc, dx, sub, soff, capacity):
    for s in range(soff.shape[0] - 1):
        if _scan(table, p, q, st, dc, dx, 1, sub, soff[s], soff[s + 1], True, capacity):
            return _FULL
    return _RUNNING


@njit(cache=True)
def _lookahead(table, p, q, st, dc, dx, rel, roff):
    for c in range(1, st[_NEXT]):
        if p[c] != c:
            continue
        for r in range(roff.shape[0] - 1):
            _scan(table, p, q, st, dc, dx, c, rel, roff[r], roff[r + 1], False, 0)
            if p[c] != c:
                break


@njit(cache=True)
def _hlt_run(table, p, q, st, dc, dx, rel, roff, capacity, steps):
    ncols = table.shape[1]
    while steps > 0:
        c = st[_CUR]
        if c >= st[_NEXT]:
            return _DONE
        if p[c] == c:
            for r in range(roff.shape[0] - 1):
                if _scan(table, p, q, st, dc, dx, c, rel, roff[r], roff[r + 1], True, capacity):
                    return _FULL
                if p[c] != c:
                    break
            if p[c] == c:
                for x in range(ncols):
                    if table[c, x] == 0:
                        if st[_NEXT] >= capacity:
                            return _FULL
                        _new_coset(table, p, st, c, x)
        st[_CUR] += 1
        steps -= 1
    return _RUNNING


@njit(cache=True)
def _process_deductions(table, p, q, st, dc, dx, conj, coff, cfirst):
    # cfirst[x] .. cfirst[x+1] index the conjugates starting with column x
    while st[_DLEN] > 0:
        st[_DLEN] -= 1
        c = dc[st[_DLEN]]
        x = dx[st[_DLEN]]
        if p[c] != c:
            continue
        for side in range(2):
            a = c if side == 0 else table[c, x]
            y = x if side == 0 else x ^ 1
            if a == 0 or p[a] != a:
                continue
            for t in range(cfirst[y], cfirst[y + 1]):
                _scan(table, p, q, st, dc, dx, a, conj, coff[t], coff[t + 1], False, 0)
                if p[a] != a:
                    break
            if p[c] != c or table[c, x] == 0:
                break


@njit(cache=True)
def _felsch_run(table, p, q, st, dc, dx, rel, roff, conj, coff, cfirst, capacity, steps):
    ncols = table.shape[1]
    while steps > 0:
        _process_deductions(table, p, q, st, dc, dx, conj, coff, cfirst)
        if st[_DOVER]:
            st[_DOVER] = 0
            _lookahead(table, p, q, st, dc, dx, rel, roff)
            continue
        c = st[_CUR]
        while c < st[_NEXT]:
            if p[c] == c:
                full_row = True
                for x in range(ncols):
                    if table[c, x] == 0:
                        full_row = False
                        break
                if not full_row:
                    break
            c += 1
        st[_CUR] = c
        if c >= st[_NEXT]:
            return _DONE
        x = 0
        while table[c, x] != 0:
            x += 1
        if st[_NEXT] >= capacity:
            return _FULL
        _new_coset(table, p, st, c, x)
        _push(st, dc, dx, c, x)
        steps -= 1
    return _RUNNING


@njit(cache=True)
def _compact(table, p, st):
    N = st[_NEXT]
    newidx = np.zeros(N, dtype=np.int32)
    k = 0
    for c in range(1, N):
        if p[c] == c:
            k += 1
            newidx[c] = k
    ncols = table.shape[1]
    for c in range(1, N):
        if p[c] == c:
            nc = newidx[c]
            for x in range(ncols):
                v = table[c, x]
                table[nc, x] = newidx[v] if v != 0 else 0
    for c in range(k + 1, N):
        for x in range(ncols):
            table[c, x] = 0
    for c in range(1, N):
        p[c] = c
    cur = k + 1
    for c in range(st[_CUR], N):
        if newidx[c] != 0:
            cur = newidx[c]
            break
    st[_CUR] = cur
    st[_NEXT] = k + 1
    st[_ACTIVE] = k
    return N - 1 - k


@njit(cache=True)
def _closed(table, p, st, rel, roff, sub, soff):
    """True iff the live part of the table is complete and every relator closes."""
    N = st[_NEXT]
    ncols = table.shape[1]
    for c in range(1, N):
        if p[c] != c:
            continue
        for x in range(ncols):
            v = table[c, x]
            if v == 0 or p[v] != v or table[v, x ^ 1] != c:
                return False
        for r in range(roff.shape[0] - 1):
            f = c
            for i in range(roff[r], roff[r + 1]):
                f = table[f, rel[i]]
            if f != c:
                return False
    for s in range(soff.shape[0] - 1):
        f = 1
        for i in range(soff[s], soff[s + 1]):
            f = table[f, sub[i]]
        if f != 1:
            return False
    return True


# --- Python driver ---------------------------------------------------------------


def _columns(w: Word) -> list[int]:
    return [2 * g + (e < 0) for g, e in w.letters()]


def _flatten(words: Sequence[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    off = [0]
    flat: list[int] = []
    for w in words:
        flat.extend(w)
        off.append(len(flat))
    return np.array(flat, dtype=np.int32), np.array(off, dtype=np.int64)


def _conjugates(words: Sequence[list[int]], ncols: int):
    by_first: list[list[list[int]]] = [[] for _ in range(ncols)]
    for w in words:
        inv = [x ^ 1 for x in reversed(w)]
        seen = set()
        for base in (w, inv):
            for i in range(len(base)):
                c = base[i:] + base[:i]
                if tuple(c) not in seen:
                    seen.add(tuple(c))
                    by_first[c[0]].append(c)
    flat_words = [c for group in by_first for c in group]
    first = np.cumsum([0] + [len(g) for g in by_first]).astype(np.int64)
    conj, coff = _flatten(flat_words)
    return conj, coff, first


def enumerate_cosets(
    p: GeneralPresentation,
    subgroup_generators: Sequence[Word] = (),
    limits: EnumerationLimits | None = None,
    strategy: str = "hlt",
) -> CosetTable:
    """Enumerate the cosets of the subgroup generated by ``subgroup_generators``.

    ``strategy`` is ``"hlt"`` (relator-based definitions with lookahead) or
    ``"felsch"`` (definitions in table order, every deduction processed).
    A table that hits ``limits`` comes back with status ``"overflowed"``;
    that says nothing about finiteness.
    """
    limits = limits or EnumerationLimits()
    if strategy not in ("hlt", "felsch"):
        raise ValueError(f"unknown strategy {strategy!r}")
    ngen = p.generator_count
    ncols = 2 * ngen
    rels = [_columns(r.cyclic_reduce()) for r in p.relators]
    rels = [r for r in rels if r]
    subs = [_columns(s.free_reduce()) for s in subgroup_generators]
    subs = [s for s in subs if s]
    rel, roff = _flatten(rels)
    sub, soff = _flatten(subs)

    capacity = limits.max_cosets + 1
    t0 = time.perf_counter()
    table = np.zeros((capacity, max(ncols, 1)), dtype=np.int32)
    pp = np.arange(capacity, dtype=np.int32)
    q = np.zeros(capacity, dtype=np.int32)
    st = np.zeros(_STATE_SIZE, dtype=np.int64)
    st[_NEXT], st[_CUR], st[_ACTIVE], st[_PEAK], st[_DEFINED] = 2, 1, 1, 1, 1
    felsch = strategy == "felsch"
    ded = max(1024, min(capacity, 1 << 20))
    dc = np.zeros(ded if felsch else 1, dtype=np.int32)
    dx = np.zeros(ded if felsch else 1, dtype=np.int32)
    st[_TRACK] = int(felsch)
    if felsch:
        conj, coff, cfirst = _conjugates(rels, ncols)

    def out_of_time() -> bool:
        return limits.max_time is not None and time.perf_counter() - t0 > limits.max_time

    def finish(status: str, reason: str | None) -> CosetTable:
        _compact(table, pp, st)
        n = int(st[_NEXT])
        return CosetTable(
            generator_count=ngen,
            table=table[:n, :ncols].copy(),
            status=status,
            peak_cosets=int(st[_PEAK]),
            defined_cosets=int(st[_DEFINED]),
            overflow_reason=reason,
            strategy=strategy,
            elapsed=time.perf_counter() - t0,
        )

    if ncols == 0:
        return finish("complete", None)

    def try_free() -> bool:
        before = int(st[_ACTIVE])
        _lookahead(table, pp, q, st, dc, dx, rel, roff)
        if felsch:
            _process_deductions(table, pp, q, st, dc, dx, conj, coff, cfirst)
        _compact(table, pp, st)
        return int(st[_ACTIVE]) < before or st[_NEXT] < capacity

    state = _fill_subgroup(table, pp, q, st, dc, dx, sub, soff, capacity)
    while state == _FULL:
        if not try_free():
            return finish("overflowed", "max_cosets")
        state = _fill_subgroup(table, pp, q, st, dc, dx, sub, soff, capacity)

    while True:
        if out_of_time():
            return finish("overflowed", "max_time")
        if felsch:
            state = _felsch_run(table, pp, q, st, dc, dx, rel, roff, conj, coff, cfirst, capacity, _CHUNK)
        else:
            state = _hlt_run(table, pp, q, st, dc, dx, rel, roff, capacity, _CHUNK)
        if state == _FULL:
            if not try_free():
                return finish("overflowed", "max_cosets")
        elif state == _DONE:
            if _closed(table, pp, st, rel, roff, sub, soff):
                return finish("complete", None)
            # a late coincidence reopened a processed row: sweep again
            _compact(table, pp, st)
            st[_CUR] = 1


enumerate = enumerate_cosets  # noqa: A001 - public name used throughout


def group_order(p: GeneralPresentation, limits: EnumerationLimits | None = None, strategy: str = "hlt") -> int:
    t = enumerate_cosets(p, (), limits, strategy)
    if not t.is_complete:
        raise EnumerationOverflow(t)
    return t.coset_count()


def quotient_by_normal_closure(p: GeneralPresentation, extra: Sequence[Word]) -> GeneralPresentation:
    return p.with_relators(list(extra))


def order_of_element(
    p: GeneralPresentation,
    w: Word,
    limits: EnumerationLimits | None = None,
    table: CosetTable | None = None,
) -> int:
    """Order of w, read off the regular representation on the trivial subgroup."""
    t = table if table is not None else enumerate_cosets(p, (), limits)
    if not t.is_complete:
        raise EnumerationOverflow(t)
    perm = t.permutation(w) - 1
    seen = np.zeros(len(perm), dtype=bool)
    order = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length, c = 0, start
        while not seen[c]:
            seen[c] = True
            c = perm[c]
            length += 1
        order = lcm(order, length)
    return order


# --- Reidemeister-Schreier ---------------------------------------------------------


def _spanning_tree(t: CosetTable) -> set[tuple[int, int]]:
    """BFS Schreier transversal; returns the tree edges as (coset, column), both directions."""
    n, ncols = t.coset_count(), 2 * t.generator_count
    seen = [False] * (n + 1)
    seen[1] = True
    tree: set[tuple[int, int]] = set()
    dq = deque([1])
    while dq:
        c = dq.popleft()
        for x in range(ncols):
            d = int(t.table[c, x])
            if not seen[d]:
                seen[d] = True
                tree.add((c, x))
                tree.add((d, x ^ 1))
                dq.append(d)
    return tree


def schreier_generators(t: CosetTable) -> list[tuple[int, int]]:
    """Pairs (coset, generator) whose edge ``coset -x_g->`` lies off the spanning tree."""
    if not t.is_complete:
        raise EnumerationOverflow(t)
    tree = _spanning_tree(t)
    return [
        (c, g)
        for c in range(1, t.coset_count() + 1)
        for g in range(t.generator_count)
        if (c, 2 * g) not in tree
    ]


def reidemeister_schreier(p: GeneralPresentation, t: CosetTable) -> GeneralPresentation:
    """Presentation of the subgroup whose coset table is t.

    Generators are numbered in the order of :func:`schreier_generators`; the
    relators are every relator of p rewritten at every coset, freely reduced,
    with empty words dropped.
    """
    gens = schreier_generators(t)
    index = {cg: i for i, cg in builtins.enumerate(gens)}
    tab = t.table
    rels: list[Word] = []
    for r in p.relators:
        letters = r.letters()
        for c in range(1, t.coset_count() + 1):
            out: list[tuple[int, int]] = []
            cur = c
            for g, e in letters:
                if e > 0:
                    s = index.get((cur, g))
                    if s is not None:
                        out.append((s, 1))
                    cur = int(tab[cur, 2 * g])
                else:
                    prev = int(tab[cur, 2 * g + 1])
                    s = index.get((prev, g))
                    if s is not None:
                        out.append((s, -1))
                    cur = prev
            assert cur == c, "relator does not close; table is not a coset table of p"
            w = Word.from_letters(out).free_reduce()
            if len(w):
                rels.append(w)
    return GeneralPresentation(len(gens), rels)


def abelian_quotient_table(
    generator_count: int, images: Sequence[Sequence[int]], torsion: Sequence[int]
) -> CosetTable:
    """Coset table of the kernel of ``x_g -> images[g]`` onto ``Z_d1 x ... x Z_dr``.

    Cosets are the group elements in mixed-radix order, coset 1 being zero. The
    caller guarantees the map is a homomorphism; :func:`reidemeister_schreier`
    asserts every relator closes, which checks it.
    """
    torsion = tuple(int(d) for d in torsion)
    if len(images) != generator_count or any(len(v) != len(torsion) for v in images):
        raise ValueError("need one image vector per generator, matching the torsion")
    order = int(np.prod(torsion)) if torsion else 1
    elems = np.array(np.unravel_index(np.arange(order), torsion or (1,))).T.reshape(order, -1)
    if not torsion:
        elems = np.zeros((1, 0), dtype=np.int64)
    tab = np.zeros((order + 1, 2 * generator_count), dtype=np.int32)
    mods = np.array(torsion, dtype=np.int64)
    for g, a in builtins.enumerate(images):
        a = np.array(a, dtype=np.int64)
        for sign, col in ((1, 2 * g), (-1, 2 * g + 1)):
            tgt = (elems + sign * a) % mods if torsion else elems
            idx = np.ravel_multi_index(tgt.T, torsion) if torsion else np.zeros(1, dtype=np.int64)
            tab[1:, col] = idx + 1
    return CosetTable(generator_count, tab, "complete", order, order, strategy="direct")


def derived_subgroup_table(p: GeneralPresentation) -> CosetTable:
    """Coset table of the derived subgroup, for a group with finite abelianization."""
    from .abelian import abelian_images

    images, tors = abelian_images(p.generator_count, p.relators)
    return abelian_quotient_table(p.generator_count, images, tors)


def kernel_generators(images: Sequence[int], d: int, pivot: int) -> list[Word]:
    """Schreier generators of the kernel of a map onto Z_d, with transversal x_pivot^j.

    Requires ``images[pivot]`` to be a unit mod d.
    """
    u = pow(images[pivot], -1, d)
    gens = [Word.of((pivot, d))]
    for j in range(d):
        for g, a in builtins.enumerate(images):
            if g == pivot:
                continue
            back = (j * images[pivot] + a) * u % d
            w = Word.from_letters([(pivot, 1)] * j + [(g, 1)] + [(pivot, -1)] * back)
            gens.append(w)
    return gens
