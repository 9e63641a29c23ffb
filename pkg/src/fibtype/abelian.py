"""Exact integer linear algebra for abelianizations.

Everything here works over Python integers; entries such as 2^n - 1 grow
quickly and nothing may be rounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, prod
from typing import Sequence

from .presentations import CyclicPresentation, FibTypeParams, GeneralPresentation, Word

__all__ = [
    "IntegerMatrix",
    "AbelianInvariants",
    "RepresenterPolynomial",
    "relation_matrix",
    "presentation_matrix",
    "smith_normal_form",
    "abelianization",
    "abelianization_general",
    "abelian_images",
    "representer_polynomial",
    "resultant",
    "abelian_order_via_resultant",
    "alexander_condition_check",
]

IntegerMatrix = list  # list[list[int]], dense, row-major


@dataclass(frozen=True)
class AbelianInvariants:
    torsion: tuple[int, ...] = ()
    free_rank: int = 0

    def __post_init__(self):
        tors = tuple(int(d) for d in self.torsion)
        if any(d < 2 for d in tors):
            raise ValueError("torsion invariants must be >= 2")
        if any(b % a for a, b in zip(tors, tors[1:])):
            raise ValueError("torsion invariants must form a divisibility chain")
        object.__setattr__(self, "torsion", tors)

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int:
        """Order of the group; 0 encodes infinite."""
        return prod(self.torsion) if self.free_rank == 0 else 0

    def to_json(self) -> dict:
        return {"torsion": list(self.torsion), "free_rank": self.free_rank, "order": self.order}

    def __str__(self) -> str:
        parts = [f"Z_{d}" for d in self.torsion] + ["Z"] * self.free_rank
        return " x ".join(parts) if parts else "1"


def presentation_matrix(generator_count: int, relators: Sequence[Word]) -> IntegerMatrix:
    return [r.exponent_sums(generator_count) for r in relators]


def relation_matrix(p: CyclicPresentation) -> IntegerMatrix:
    """Row i holds the exponent sums of the i-th shift of the defining word (a circulant)."""
    return presentation_matrix(p.n, p.relators())


def _identity(n: int) -> IntegerMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(M: IntegerMatrix, transforms: bool = False):
    """Smith normal form of an integer matrix.

    Returns ``(invariants, None)`` or, with ``transforms=True``,
    ``(invariants, (U, V, D))`` where ``U @ M @ V == D`` and U, V are unimodular.
    The pivot is always an entry of least absolute value.
    """
    rows = len(M)
    cols = len(M[0]) if rows else 0
    A = [list(map(int, r)) for r in M]
    U = _identity(rows) if transforms else None
    V = _identity(cols) if transforms else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if U is not None:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        if V is not None:
            for r in V:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        ra, rs = A[dst], A[src]
        for c in range(cols):
            if rs[c]:
                ra[c] += q * rs[c]
        if U is not None:
            ua, us = U[dst], U[src]
            for c in range(rows):
                if us[c]:
                    ua[c] += q * us[c]

    def add_col(dst, src, q):
        for r in A:
            if r[src]:
                r[dst] += q * r[src]
        if V is not None:
            for r in V:
                if r[src]:
                    r[dst] += q * r[src]

    t = 0
    while t < min(rows, cols):
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                a = A[i][j]
                if a and (best is None or abs(a) < best[0]):
                    best = (abs(a), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        swap_rows(t, best[1])
        swap_cols(t, best[2])
        while True:
            p = A[t][t]
            clean = True
            for i in range(t + 1, rows):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // p))
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, cols):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // p))
                    clean = clean and A[t][j] == 0
            if not clean:
                cand = [(abs(A[i][t]), i, t) for i in range(t + 1, rows) if A[i][t]]
                cand += [(abs(A[t][j]), t, j) for j in range(t + 1, cols) if A[t][j]]
                _, i, j = min(cand)
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            bad = next(
                (i for i in range(t + 1, rows) for j in range(t + 1, cols) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            if U is not None:
                U[t] = [-x for x in U[t]]
        t += 1

    diag = [A[i][i] for i in range(min(rows, cols))]
    nonzero = [d for d in diag if d]
    inv = AbelianInvariants(tuple(d for d in nonzero if d > 1), cols - len(nonzero))
    if transforms:
        return inv, (U, V, A)
    return inv, None


def abelianization_general(p: GeneralPresentation) -> AbelianInvariants:
    if p.generator_count == 0:
        return AbelianInvariants()
    if not p.relators:
        return AbelianInvariants((), p.generator_count)
    return smith_normal_form(presentation_matrix(p.generator_count, p.relators))[0]


def abelianization(p: CyclicPresentation) -> AbelianInvariants:
    return smith_normal_form(relation_matrix(p))[0]


def abelian_images(generator_count: int, relators: Sequence[Word]) -> tuple[list[tuple[int, ...]], tuple[int, ...]]:
    """Images of the generators in a finite abelianization ``Z_d1 x ... x Z_dr``.

    With ``U M V = D`` the coordinates of ``e_g`` in the diagonal basis are row g
    of V; only the columns carrying a torsion invariant are kept.
    """
    M = presentation_matrix(generator_count, relators)
    inv, (U, V, D) = smith_normal_form(M, transforms=True)
    if not inv.is_finite:
        raise ValueError(f"abelianization {inv} is infinite")
    cols = [j for j in range(min(len(D), generator_count)) if D[j][j] > 1]
    tors = tuple(D[j][j] for j in cols)
    assert tors == inv.torsion
    images = [tuple(V[g][j] % D[j][j] for j in cols) for g in range(generator_count)]
    return images, tors


# --- polynomials -------------------------------------------------------------


@dataclass(frozen=True)
class RepresenterPolynomial:
    """Finitely supported integer polynomial, ``{degree: coefficient}``."""

    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {int(d): int(c) for d, c in self.coefficients.items() if c}
        object.__setattr__(self, "coefficients", clean)

    @classmethod
    def from_list(cls, coeffs: Sequence[int]) -> "RepresenterPolynomial":
        return cls({i: c for i, c in enumerate(coeffs)})

    def dense(self) -> list[int]:
        """Coefficient list from the lowest to the highest nonzero degree."""
        if not self.coefficients:
            return []
        lo, hi = min(self.coefficients), max(self.coefficients)
        return [self.coefficients.get(d, 0) for d in range(lo, hi + 1)]

    def at_one(self) -> int:
        return sum(self.coefficients.values())

    def __hash__(self):
        return hash(tuple(sorted(self.coefficients.items())))


def representer_polynomial(w: Word, n: int | None = None) -> RepresenterPolynomial:
    """``Σ e t^g`` over syllables ``x_g^e``; for x_0 x_m x_k^{-1} this is 1 + t^m - t^k."""
    coeffs: dict[int, int] = {}
    for g, e in w.syllables:
        coeffs[g] = coeffs.get(g, 0) + e
    return RepresenterPolynomial(coeffs)


def _trim(a: list[int]) -> list[int]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _content(a: list[int]) -> int:
    c = 0
    for x in a:
        c = gcd(c, x)
    return c


def _prem(a: list[int], b: list[int]) -> list[int]:
    """Pseudo-remainder of a by b: lc(b)^(deg a - deg b + 1) a mod b."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    e = len(a) - len(b) + 1
    while len(a) - 1 >= db and a:
        da = len(a) - 1
        la = a[-1]
        shift = da - db
        a = [lb * x for x in a]
        for i, bc in enumerate(b):
            a[i + shift] -= la * bc
        a = _trim(a)
        e -= 1
    if e > 0:
        a = [x * lb**e for x in a]
    return a


def resultant(a: Sequence[int], b: Sequence[int]) -> int:
    """Resultant of integer polynomials (coefficient lists, lowest degree first).

    Subresultant pseudo-remainder sequence; all arithmetic is exact.
    """
    A, B = _trim(a), _trim(b)
    if not A or not B:
        return 0
    ca, cb = _content(A), _content(B)
    A = [x // ca for x in A]
    B = [x // cb for x in B]
    dA, dB = len(A) - 1, len(B) - 1
    t = ca**dB * cb**dA
    s = 1
    if dA < dB:
        A, B = B, A
        if dA % 2 and dB % 2:
            s = -1
    if len(B) == 1:
        return s * t * B[0] ** (len(A) - 1)
    g = h = 1
    while True:
        dA, dB = len(A) - 1, len(B) - 1
        delta = dA - dB
        if dA % 2 and dB % 2:
            s = -s
        R = _prem(A, B)
        A = B
        if not R:
            return 0
        den = g * h**delta
        assert all(x % den == 0 for x in R)
        B = [x // den for x in R]
        g = A[-1]
        if delta:
            num, hd = g**delta, h ** (delta - 1)
            assert num % hd == 0
            h = num // hd
        if len(B) == 1:
            break
    dA = len(A) - 1
    num = B[0] ** dA
    hd = h ** (dA - 1)
    assert num % hd == 0
    return s * t * (num // hd)


def abelian_order_via_resultant(p: FibTypeParams) -> int:
    """``|Res(t^n - 1, 1 + t^m - t^k)|``: the order of G_n(m,k)^ab, 0 if infinite."""
    n, m, k = p.as_tuple()
    f = [0] * n
    f[0] += 1
    f[m] += 1
    f[k] -= 1
    cyc = [-1] + [0] * (n - 1) + [1]
    return abs(resultant(cyc, f))


def alexander_condition_check(f: RepresenterPolynomial) -> tuple[bool, str]:
    """Test ``|f(1)| = 1`` and symmetry of the coefficients up to ``±t^j``."""
    c = f.dense()
    if not c:
        raise ValueError("zero polynomial")
    v = f.at_one()
    if abs(v) != 1:
        return False, f"f(1) = {v}, not ±1"
    rev = c[::-1]
    if c == rev or c == [-x for x in rev]:
        return True, "f(1) = ±1 and coefficients symmetric up to units"
    return False, f"coefficients {c} not symmetric up to ±t^j"
