"""Words in free groups, cyclic presentations and the Fibonacci-type family.

A word is stored as a tuple of ``(generator, exponent)`` syllables with
nonzero integer exponents.  Nothing is reduced implicitly: the relator
``x0 x1 X1`` of H(n,1) keeps all three letters because the Whitehead graph
and the face-pairing checks need the unreduced relator.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Sequence

__all__ = [
    "Word",
    "CyclicPresentation",
    "GeneralPresentation",
    "FibTypeParams",
    "Substitution",
    "parse_word",
    "apply_shift",
    "make_fib_presentation",
    "reduce_gcd",
    "to_h_form",
    "h_form_substitution",
    "flip_substitution",
    "halve_even_presentation",
    "relator_key",
    "same_relator_sets",
]


@dataclass(frozen=True)
class Word:
    """A word as a sequence of ``(generator_index, exponent)`` syllables."""

    syllables: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        syl = tuple((int(g), int(e)) for g, e in self.syllables)
        for g, e in syl:
            if e == 0:
                raise ValueError("exponents must be nonzero")
            if g < 0:
                raise ValueError("generator indices must be nonnegative")
        object.__setattr__(self, "syllables", syl)

    @classmethod
    def from_letters(cls, letters: Iterable[tuple[int, int]]) -> "Word":
        """Build from ``(generator, ±1)`` letters, merging equal neighbours."""
        out: list[list[int]] = []
        for g, e in letters:
            if out and out[-1][0] == g and (out[-1][1] > 0) == (e > 0):
                out[-1][1] += e
            else:
                out.append([g, e])
        return cls(tuple((g, e) for g, e in out))

    @classmethod
    def of(cls, *pairs: tuple[int, int]) -> "Word":
        return cls(tuple(pairs))

    def letters(self) -> tuple[tuple[int, int], ...]:
        """Expansion into ``(generator, ±1)`` letters."""
        out = []
        for g, e in self.syllables:
            s = 1 if e > 0 else -1
            out.extend([(g, s)] * abs(e))
        return tuple(out)

    def signed(self) -> tuple[int, ...]:
        """Letters encoded as ``±(generator + 1)``."""
        return tuple((g + 1) * s for g, s in self.letters())

    def __len__(self) -> int:
        return sum(abs(e) for _, e in self.syllables)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.syllables)))

    def __mul__(self, other: "Word") -> "Word":
        return Word.from_letters(self.letters() + other.letters())

    def max_generator(self) -> int:
        return max((g for g, _ in self.syllables), default=-1)

    def free_reduce(self) -> "Word":
        stack: list[tuple[int, int]] = []
        for g, s in self.letters():
            if stack and stack[-1] == (g, -s):
                stack.pop()
            else:
                stack.append((g, s))
        return Word.from_letters(stack)

    def cyclic_reduce(self) -> "Word":
        letters = list(self.free_reduce().letters())
        while len(letters) >= 2 and letters[0][0] == letters[-1][0] and letters[0][1] == -letters[-1][1]:
            letters = letters[1:-1]
        return Word.from_letters(letters)

    def is_freely_reduced(self) -> bool:
        lt = self.letters()
        return all(not (a[0] == b[0] and a[1] == -b[1]) for a, b in zip(lt, lt[1:]))

    def is_cyclically_reduced(self) -> bool:
        lt = self.letters()
        if not self.is_freely_reduced():
            return False
        return len(lt) < 2 or not (lt[0][0] == lt[-1][0] and lt[0][1] == -lt[-1][1])

    def exponent_sums(self, n: int) -> list[int]:
        row = [0] * n
        for g, e in self.syllables:
            row[g] += e
        return row

    def to_text(self) -> str:
        """Render as ``x0 x3 X2``; repeated letters are written out."""
        if not self.syllables:
            return "1"
        return " ".join(("x%d" if s > 0 else "X%d") % g for g, s in self.letters())

    def __str__(self) -> str:
        return self.to_text()


_TOKEN = re.compile(r"^([xX])(\d+)(?:\^(-?\d+))?$")


def parse_word(text: str, n: int | None = None) -> Word:
    """Parse ``x0 x3 X2`` (uppercase is the inverse; ``x1^2`` allowed).

    ``1`` or an empty string is the empty word.  Indices ``>= n`` are rejected
    when ``n`` is given.
    """
    text = text.strip()
    if text in ("", "1"):
        return Word()
    pairs = []
    for tok in text.replace(",", " ").replace("*", " ").split():
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad letter {tok!r}; expected x<i>, X<i> or x<i>^<e>")
        g = int(m.group(2))
        e = int(m.group(3)) if m.group(3) is not None else 1
        if e == 0:
            raise ValueError(f"zero exponent in {tok!r}")
        if m.group(1) == "X":
            e = -e
        if n is not None and g >= n:
            raise ValueError(f"generator index {g} out of range for n={n}")
        pairs.append((g, e))
    return Word.from_letters(
        [(g, 1 if e > 0 else -1) for g, e in pairs for _ in range(abs(e))]
    )


def apply_shift(w: Word, i: int, n: int) -> Word:
    """The shift automorphism applied ``i`` times: every index moves by ``i`` mod ``n``."""
    return Word(tuple(((g + i) % n, e) for g, e in w.syllables))


@dataclass(frozen=True)
class GeneralPresentation:
    generator_count: int
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        if self.generator_count < 0:
            raise ValueError("generator_count must be nonnegative")
        rels = tuple(self.relators)
        for r in rels:
            if r.max_generator() >= self.generator_count:
                raise ValueError(f"relator {r} uses a generator >= {self.generator_count}")
        object.__setattr__(self, "relators", rels)

    def with_relators(self, extra: Sequence[Word]) -> "GeneralPresentation":
        return GeneralPresentation(self.generator_count, self.relators + tuple(extra))


@dataclass(frozen=True)
class CyclicPresentation:
    """The presentation on ``x_0..x_{n-1}`` with relators ``θ^i(w)``, ``0 <= i < n``."""

    n: int
    w: Word
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.w.max_generator() >= self.n:
            raise ValueError("defining word uses a generator index >= n")

    def relators(self) -> list[Word]:
        return [apply_shift(self.w, i, self.n) for i in range(self.n)]

    def to_general(self) -> GeneralPresentation:
        return GeneralPresentation(self.n, tuple(self.relators()))

    def __str__(self) -> str:
        return self.name or f"G_{self.n}({self.w})"


@dataclass(frozen=True)
class FibTypeParams:
    """Parameters ``(n, m, k)`` of G_n(m,k) = G_n(x_0 x_m x_k^{-1}); m, k taken mod n."""

    n: int
    m: int
    k: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("n must be >= 1")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", int(self.m) % self.n)
        object.__setattr__(self, "k", int(self.k) % self.n)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.n, self.m, self.k)

    def flipped(self) -> "FibTypeParams":
        """The parameters of the isomorphic G_n(m, m-k)."""
        return FibTypeParams(self.n, self.m, self.m - self.k)


def fib_word(m: int, k: int) -> Word:
    return Word.from_letters([(0, 1), (m, 1), (k, -1)])


def make_fib_presentation(p: FibTypeParams) -> CyclicPresentation:
    n, m, k = p.as_tuple()
    return CyclicPresentation(n, fib_word(m, k), name=f"G_{n}({m},{k})")


def reduce_gcd(p: FibTypeParams) -> tuple[int, FibTypeParams]:
    """Split off ``d = gcd(n, m, k)``; G_n(m,k) is a free product of d copies of the result."""
    d = gcd(gcd(p.n, p.m), p.k)
    return d, FibTypeParams(p.n // d, p.m // d, p.k // d)


# --- generator substitutions -------------------------------------------------


@dataclass(frozen=True)
class Substitution:
    """``x_a -> x_{target[a]}^{sign[a]}`` on an n-generator free group."""

    target: tuple[int, ...]
    sign: tuple[int, ...]

    def apply(self, w: Word) -> Word:
        letters = []
        for g, s in w.letters():
            letters.append((self.target[g], self.sign[g] * s))
        return Word.from_letters(letters)

    def compose(self, after: "Substitution") -> "Substitution":
        """Apply ``self`` first, then ``after``."""
        tgt = tuple(after.target[t] for t in self.target)
        sgn = tuple(after.sign[t] * s for t, s in zip(self.target, self.sign))
        return Substitution(tgt, sgn)


def relator_key(w: Word) -> tuple[int, ...]:
    """Canonical key of a relator up to cyclic permutation and inversion."""
    a = w.signed()
    if not a:
        return ()
    b = tuple(-x for x in reversed(a))
    rots = [a[i:] + a[:i] for i in range(len(a))] + [b[i:] + b[:i] for i in range(len(b))]
    return min(rots)


def same_relator_sets(rels_a: Iterable[Word], rels_b: Iterable[Word]) -> bool:
    """Multiset equality of relators up to cyclic permutation and inversion."""
    return sorted(map(relator_key, rels_a)) == sorted(map(relator_key, rels_b))


def flip_substitution(n: int) -> Substitution:
    """``x_a -> x_{-a}^{-1}``, carrying G_n(m,k) onto G_n(m, m-k)."""
    return Substitution(tuple((-a) % n for a in range(n)), (-1,) * n)


def h_form_substitution(p: FibTypeParams) -> tuple[int, Substitution] | None:
    """Return ``(m', σ)`` with σ carrying the relators of G_n(m,k) onto H(n,m').

    Requires ``gcd(n,m,k) = 1`` for the result to be meaningful; returns
    ``None`` when neither ``k`` nor ``m-k`` is a unit mod n.
    """
    n, m, k = p.as_tuple()
    if gcd(n, k) == 1:
        u = pow(k, -1, n) if n > 1 else 0
        sub = Substitution(tuple((a * u) % n for a in range(n)), (1,) * n)
        return (m * u) % n, sub
    k2 = (m - k) % n
    if gcd(n, k2) == 1:
        u = pow(k2, -1, n) if n > 1 else 0
        scale = Substitution(tuple((a * u) % n for a in range(n)), (1,) * n)
        return (m * u) % n, flip_substitution(n).compose(scale)
    return None


def to_h_form(p: FibTypeParams) -> tuple[int, int] | None:
    """``(n, m')`` with G_n(m,k) ≅ H(n,m'), or None.

    The reindexing is checked on the relator sets before returning; a
    failure raises ``AssertionError`` since it would mean a broken formula.
    """
    found = h_form_substitution(p)
    if found is None:
        return None
    m_prime, sub = found
    src = make_fib_presentation(p).relators()
    dst = make_fib_presentation(FibTypeParams(p.n, m_prime, 1)).relators()
    if not same_relator_sets([sub.apply(r) for r in src], dst):
        raise AssertionError(f"reindexing of {p} onto H({p.n},{m_prime}) failed")
    return p.n, m_prime


# --- halving the even Fibonacci and Sieradski presentations -----------------


ALT_FIBONACCI_WORD = Word.of((0, -1), (1, 2), (2, -1), (1, 1))
ALT_SIERADSKI_WORD = Word.of((0, 1), (1, 2), (2, 1), (1, -1))


def _alt_word(m: int, w: Word) -> Word:
    return Word.from_letters([(g % m, s) for g, s in w.letters()])


def halve_even_presentation(p: CyclicPresentation) -> CyclicPresentation:
    """Eliminate the odd generators of G_{2m}(1,2) or G_{2m}(2,1).

    Even-indexed relators are solved for the odd generators
    (``x_{2j+1} = x_{2j}^{-1} x_{2j+2}`` resp. ``x_{2j} x_{2j+2}``); substituting into
    the odd-indexed relators and renaming ``y_j = x_{2j}`` leaves m relators,
    which are checked to be the shifts of the returned defining word.
    """
    n = p.n
    if n % 2 or n < 2 or len(p.w) != 3:
        raise ValueError("need an even-n presentation with a length-3 defining word")
    m = n // 2
    fib = same_relator_sets([p.w], [fib_word(1 % n, 2 % n)])
    sier = same_relator_sets([p.w], [fib_word(2 % n, 1 % n)])
    if not (fib or sier):
        raise ValueError("only G_{2m}(1,2) and G_{2m}(2,1) can be halved")
    if fib:
        odd = {2 * j + 1: [(2 * j, -1), ((2 * j + 2) % n, 1)] for j in range(m)}
        target = _alt_word(m, ALT_FIBONACCI_WORD)
        relator = lambda i: [(i, 1), ((i + 1) % n, 1), ((i + 2) % n, -1)]
    else:
        odd = {2 * j + 1: [(2 * j, 1), ((2 * j + 2) % n, 1)] for j in range(m)}
        target = _alt_word(m, ALT_SIERADSKI_WORD)
        relator = lambda i: [(i, 1), ((i + 2) % n, 1), ((i + 1) % n, -1)]

    def substitute(letters):
        out = []
        for g, s in letters:
            if g in odd:
                piece = odd[g] if s > 0 else [(h, -t) for h, t in reversed(odd[g])]
                out.extend(piece)
            else:
                out.append((g, s))
        return [(g // 2, s) for g, s in out]

    new_rels = [Word.from_letters(substitute(relator(2 * j + 1))) for j in range(m)]
    result = CyclicPresentation(m, target, name=f"G_{m}({target})")
    if not same_relator_sets(new_rels, result.relators()):
        raise AssertionError("elimination did not produce the expected cyclic presentation")
    return result
