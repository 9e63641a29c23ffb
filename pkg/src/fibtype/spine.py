"""Face-pairing polyhedra and the spine obstructions.

A complex is a polyhedral 2-sphere: directed labelled edges plus faces given
as counterclockwise edge walks ``[(edge, +1 | -1), ...]`` (seen from outside).
A pairing sends occurrence ``i`` of its plus face to occurrence
``(offset - i) mod L`` of its minus face, reversing orientation, so the two
boundaries agree when one is read clockwise and the other counterclockwise.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from math import gcd
from typing import Sequence

from .abelian import abelianization, abelianization_general
from .presentations import (
    ALT_FIBONACCI_WORD,
    ALT_SIERADSKI_WORD,
    CyclicPresentation,
    FibTypeParams,
    GeneralPresentation,
    Word,
    make_fib_presentation,
    relator_key,
)
from .whitehead import (
    LabeledMultigraph,
    SphericalEmbedding,
    WVertex,
    Edge,
    enumerate_spherical_embeddings,
    is_planar,
    minor_reduce,
    whitehead_graph,
)

__all__ = [
    "PolyEdge",
    "FacePairing",
    "FacePairingComplex",
    "QuotientCellCounts",
    "Diagnostic",
    "SpineCertificate",
    "SpineObstruction",
    "GateViolation",
    "PreconditionError",
    "build_h_n1_polyhedron",
    "build_alt_fibonacci_polyhedron",
    "build_alt_sieradski_polyhedron",
    "verify_face_pairing",
    "closed_manifold_gate",
    "corner_multiplicity_obstruction",
    "star_boundary",
    "sphere_assembly_obstruction",
    "brute_force_assemblies",
    "nonplanar_branch_obstruction",
    "cycles_match",
    "edge_cycle_matches",
]


class GateViolation(ValueError):
    """The abelianization is not finite of odd order, so closed-manifold reasoning does not apply."""


class PreconditionError(ValueError):
    pass


# --- the complex ------------------------------------------------------------------


@dataclass(frozen=True)
class PolyEdge:
    tail: str
    head: str
    label: int
    name: str = ""

    def display(self) -> str:
        return self.name or f"[{self.tail},{self.head}]"


@dataclass(frozen=True)
class FacePairing:
    plus: int
    minus: int
    offset: int
    reversing: bool = True

    def image(self, i: int, length: int) -> int:
        return (self.offset - i) % length if self.reversing else (self.offset + i) % length

    def flipped(self) -> "FacePairing":
        """Same base-vertex correspondence, opposite orientation (a deliberate corruption)."""
        if not self.reversing:
            raise ValueError("already orientation preserving")
        return FacePairing(self.plus, self.minus, self.offset + 1, reversing=False)

    def preimage(self, j: int, length: int) -> int:
        return (self.offset - j) % length if self.reversing else (j - self.offset) % length


Walk = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class FacePairingComplex:
    name: str
    generator_count: int
    vertices: tuple[str, ...]
    edges: tuple[PolyEdge, ...]
    faces: tuple[Walk, ...]
    face_names: tuple[str, ...]
    pairs: tuple[FacePairing, ...]

    # walks

    def start(self, occ: tuple[int, int]) -> str:
        e, s = occ
        return self.edges[e].tail if s > 0 else self.edges[e].head

    def end(self, occ: tuple[int, int]) -> str:
        e, s = occ
        return self.edges[e].head if s > 0 else self.edges[e].tail

    def face_word(self, f: int) -> Word:
        return Word.from_letters([(self.edges[e].label, s) for e, s in self.faces[f]])

    def face_vertices(self, f: int) -> list[str]:
        return [self.start(o) for o in self.faces[f]]

    def with_pairs(self, pairs: Sequence[FacePairing]) -> "FacePairingComplex":
        return FacePairingComplex(
            self.name, self.generator_count, self.vertices, self.edges, self.faces, self.face_names, tuple(pairs)
        )

    def sphere_issues(self) -> list[str]:
        """Reasons the faces fail to form an oriented polyhedral 2-sphere (empty if fine)."""
        issues = []
        uses: dict[int, list[int]] = {i: [] for i in range(len(self.edges))}
        for f, walk in enumerate(self.faces):
            for i, occ in enumerate(walk):
                if self.end(occ) != self.start(walk[(i + 1) % len(walk)]):
                    issues.append(f"face {self.face_names[f]} is not a closed walk at position {i}")
                uses[occ[0]].append(occ[1])
        for e, signs in uses.items():
            if sorted(signs) != [-1, 1]:
                issues.append(f"edge {self.edges[e].display()} used with signs {signs}")
        # vertex links must be single cycles
        link: dict[str, list[tuple]] = {v: [] for v in self.vertices}
        for walk in self.faces:
            L = len(walk)
            for i in range(L):
                (e1, s1), (e2, s2) = walk[i], walk[(i + 1) % L]
                a = (e1, 1 if s1 > 0 else 0)
                b = (e2, 0 if s2 > 0 else 1)
                link[self.end(walk[i])].append((a, b))
        for v, corners in link.items():
            if not corners:
                issues.append(f"vertex {v} lies on no face")
                continue
            adj: dict = {}
            for a, b in corners:
                adj.setdefault(a, []).append(b)
                adj.setdefault(b, []).append(a)
            if any(len(x) != 2 for x in adj.values()):
                issues.append(f"link of {v} is not a cycle")
                continue
            seen = {corners[0][0]}
            stack = [corners[0][0]]
            while stack:
                for y in adj[stack.pop()]:
                    if y not in seen:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(adj):
                issues.append(f"link of {v} is disconnected")
        chi = len(self.vertices) - len(self.edges) + len(self.faces)
        if chi != 2:
            issues.append(f"V - E + F = {chi}, not 2")
        return issues

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "generator_count": self.generator_count,
            "vertices": list(self.vertices),
            "edges": [asdict(e) for e in self.edges],
            "faces": [{"name": nm, "walk": [list(o) for o in walk]} for nm, walk in zip(self.face_names, self.faces)],
            "pairs": [asdict(p) for p in self.pairs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FacePairingComplex":
        return cls(
            data["name"],
            data["generator_count"],
            tuple(data["vertices"]),
            tuple(PolyEdge(**e) for e in data["edges"]),
            tuple(tuple((int(e), int(s)) for e, s in f["walk"]) for f in data["faces"]),
            tuple(f["name"] for f in data["faces"]),
            tuple(FacePairing(**p) for p in data["pairs"]),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _solve_offset(word_plus: Sequence[tuple[int, int]], word_minus: Sequence[tuple[int, int]]) -> int:
    """The unique offset making the plus face read (ccw) as the minus face read cw."""
    L = len(word_plus)
    if len(word_minus) != L:
        raise ValueError("paired faces differ in length")
    good = [
        o
        for o in range(L)
        if all(word_plus[i] == (word_minus[(o - i) % L][0], -word_minus[(o - i) % L][1]) for i in range(L))
    ]
    if len(good) != 1:
        raise ValueError(f"pairing offset not unique: {good}")
    return good[0]


def _assemble(name, n, vertices, edges, named_faces, pair_names) -> FacePairingComplex:
    names = [nm for nm, _ in named_faces]
    faces = tuple(tuple(w) for _, w in named_faces)
    cx = FacePairingComplex(name, n, tuple(vertices), tuple(edges), faces, tuple(names), ())
    pairs = []
    for plus, minus in pair_names:
        a, b = names.index(plus), names.index(minus)
        pw = [(edges[e].label, s) for e, s in faces[a]]
        mw = [(edges[e].label, s) for e, s in faces[b]]
        pairs.append(FacePairing(a, b, _solve_offset(pw, mw)))
    cx = cx.with_pairs(pairs)
    issues = cx.sphere_issues()
    if issues:
        raise AssertionError(f"{name}: transcription is not a sphere: {issues}")
    return cx


def _walk_from_vertices(cycle: Sequence[str], index: dict) -> list[tuple[int, int]]:
    walk = []
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        if (a, b) in index:
            walk.append((index[(a, b)], 1))
        else:
            walk.append((index[(b, a)], -1))
    return walk


def build_h_n1_polyhedron(n: int) -> FacePairingComplex:
    """Poles N, S and pendant vertices v_j.

    Edge ``[N,S]_j``, loop ``[S,S]_j`` and ``[S,v_j]`` all carry x_j. The region
    between ``[N,S]_j`` and ``[N,S]_{j+1}`` (containing loop j+1) spells r_j
    counterclockwise; the disc inside loop j, holding the pendant edge to
    v_{j+1}, spells r_j clockwise.
    """
    if n < 2:
        raise PreconditionError("the polyhedron needs n >= 2")
    verts = ["N", "S"] + [f"v{j}" for j in range(n)]
    edges = (
        [PolyEdge("N", "S", j, f"[N,S]_{j}") for j in range(n)]
        + [PolyEdge("S", "S", j, f"[S,S]_{j}") for j in range(n)]
        + [PolyEdge("S", f"v{j}", j, f"[S,v{j}]") for j in range(n)]
    )
    ns, loop, pend = (lambda j: j % n), (lambda j: n + j % n), (lambda j: 2 * n + j % n)
    faces = []
    for j in range(n):
        faces.append((f"F{j}-", [(ns(j), 1), (loop(j + 1), 1), (ns(j + 1), -1)]))
        faces.append((f"F{j}+", [(loop(j), -1), (pend(j + 1), 1), (pend(j + 1), -1)]))
    return _assemble(f"H({n},1)", n, verts, edges, faces, [(f"F{j}+", f"F{j}-") for j in range(n)])


def build_alt_fibonacci_polyhedron(m: int) -> FacePairingComplex:
    """Pentagonal face pairing for G_m(x_0^{-1} x_1^2 x_2^{-1} x_1)."""
    if m < 3:
        raise PreconditionError("the polyhedron needs m >= 3")
    verts = ["N", "S"] + [f"{c}{j}" for c in "uvw" for j in range(m)]
    edges, index = [], {}

    def add(t, h, lab):
        index[(t, h)] = len(edges)
        edges.append(PolyEdge(t, h, lab % m))

    for j in range(m):
        add("N", f"v{j}", j + 1)
        add(f"w{j}", f"v{j}", j)
        add(f"w{(j - 1) % m}", f"w{j}", j)
        add(f"u{j}", f"w{j}", j + 1)
        add(f"u{j}", "S", j)
    faces = []
    for j in range(m):
        a, b = j, (j + 1) % m
        faces.append((f"F{j}-", _walk_from_vertices(["N", f"v{a}", f"w{a}", f"w{b}", f"v{b}"], index)))
        faces.append((f"F{j}+", _walk_from_vertices([f"u{a}", "S", f"u{b}", f"w{b}", f"w{a}"], index)))
    return _assemble(f"G_{m}(X0 x1 x1 X2 x1)", m, verts, edges, faces, [(f"F{j}+", f"F{j}-") for j in range(m)])


def build_alt_sieradski_polyhedron(m: int) -> FacePairingComplex:
    """Pentagonal face pairing for G_m(x_0 x_1^2 x_2 x_1^{-1})."""
    if m < 3:
        raise PreconditionError("the polyhedron needs m >= 3")
    verts = ["N", "S"] + [f"{c}{j}" for c in "uvw" for j in range(m)]
    edges, index = [], {}

    def add(t, h, lab):
        index[(t, h)] = len(edges)
        edges.append(PolyEdge(t, h, lab % m))

    for j in range(m):
        add("N", f"u{j}", j - 1)
        add(f"u{j}", f"v{j}", j)
        add(f"v{j}", f"w{j}", j)
        add(f"w{j}", f"u{(j + 1) % m}", j + 1)
        add(f"v{j}", "S", j + 1)
    faces = []
    for j in range(m):
        a, b, c = j, (j + 1) % m, (j + 2) % m
        faces.append((f"F{j}-", _walk_from_vertices(["N", f"u{b}", f"v{b}", f"w{b}", f"u{c}"], index)))
        faces.append((f"F{j}+", _walk_from_vertices([f"v{a}", "S", f"v{b}", f"u{b}", f"w{a}"], index)))
    return _assemble(f"G_{m}(x0 x1 x1 x2 X1)", m, verts, edges, faces, [(f"F{j}+", f"F{j}-") for j in range(m)])


# --- verification -----------------------------------------------------------------


@dataclass(frozen=True)
class QuotientCellCounts:
    c0: int
    c1: int
    c2: int
    c3: int

    @property
    def chi(self) -> int:
        return self.c0 - self.c1 + self.c2 - self.c3

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.c0, self.c1, self.c2, self.c3)


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # not-a-sphere | length-mismatch | label-mismatch | orbit-count | euler | unmatched-relator | label-class
    detail: str


@dataclass
class SpineCertificate:
    complex_name: str
    counts: QuotientCellCounts
    edge_cycles: list[list[tuple[int, int]]]  # (edge, pair carrying it to the next edge)
    vertex_orbits: list[list[str]]
    edge_orbits: list[list[int]]
    presentation: GeneralPresentation  # quotient 2-skeleton, generators = edge classes
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.diagnostics

    def kinds(self) -> set[str]:
        return {d.kind for d in self.diagnostics}

    def cycle_text(self, c: FacePairingComplex, cycle: Sequence[tuple[int, int]]) -> str:
        parts = []
        for e, pi in cycle:
            parts += [c.edges[e].display(), f"F{pi}"]
        return " ".join(parts + [c.edges[cycle[0][0]].display()])

    def to_json(self) -> dict:
        return {
            "complex": self.complex_name,
            "counts": list(self.counts.as_tuple()),
            "chi": self.counts.chi,
            "ok": self.ok,
            "diagnostics": [asdict(d) for d in self.diagnostics],
            "vertex_orbits": self.vertex_orbits,
            "edge_orbits": self.edge_orbits,
        }


class _UF:
    def __init__(self, items):
        self.p = {x: x for x in items}

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            self.p[b] = a

    def classes(self) -> list[list]:
        out: dict = {}
        for x in self.p:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


def verify_face_pairing(c: FacePairingComplex, p: CyclicPresentation | GeneralPresentation) -> SpineCertificate:
    """Check that identifying paired faces yields a closed 3-manifold with 2-skeleton p.

    Counts the quotient cells, requires ``(1, n, n, 1)`` (so chi = 0), and
    matches the paired face words against the relators of p up to cyclic
    permutation and inversion. Problems come back as diagnostics.
    """
    rels = p.relators() if isinstance(p, CyclicPresentation) else list(p.relators)
    ngen = p.n if isinstance(p, CyclicPresentation) else p.generator_count
    diags: list[Diagnostic] = [Diagnostic("not-a-sphere", s) for s in c.sphere_issues()]

    vuf = _UF(c.vertices)
    euf = _UF(range(len(c.edges)))
    partner: dict[tuple[int, int], tuple[int, int, int]] = {}
    for pi, pr in enumerate(c.pairs):
        fp, fm = c.faces[pr.plus], c.faces[pr.minus]
        L = len(fp)
        if len(fm) != L:
            diags.append(Diagnostic("length-mismatch", f"pair {pi}: {L} vs {len(fm)}"))
            continue
        for i in range(L):
            j = pr.image(i, L)
            (e1, s1), (e2, s2) = fp[i], fm[j]
            if c.edges[e1].label != c.edges[e2].label or s1 != (-s2 if pr.reversing else s2):
                diags.append(Diagnostic("label-mismatch", f"pair {pi} position {i}"))
            euf.union(e1, e2)
            if pr.reversing:
                vuf.union(c.start(fp[i]), c.end(fm[j]))
                vuf.union(c.end(fp[i]), c.start(fm[j]))
            else:
                vuf.union(c.start(fp[i]), c.start(fm[j]))
                vuf.union(c.end(fp[i]), c.end(fm[j]))
            partner[(pr.plus, i)] = (pi, pr.minus, j)
            partner[(pr.minus, j)] = (pi, pr.plus, i)

    counts = QuotientCellCounts(len(vuf.classes()), len(euf.classes()), len(c.pairs), 1)
    if counts.c0 != 1 or counts.c1 != ngen or counts.c2 != len(rels):
        diags.append(Diagnostic("orbit-count", f"quotient cells {counts.as_tuple()}, expected (1,{ngen},{len(rels)},1)"))
    if counts.chi != 0:
        diags.append(Diagnostic("euler", f"chi = {counts.chi}"))

    # edge cycles: alternate the pairing map with the other occurrence of each edge
    occs: dict[int, list[tuple[int, int]]] = {}
    for f, walk in enumerate(c.faces):
        for i, (e, _) in enumerate(walk):
            occs.setdefault(e, []).append((f, i))
    cycles = []
    done: set = set()
    for f, walk in enumerate(c.faces):
        for i in range(len(walk)):
            if (f, i) in done or (f, i) not in partner:
                continue
            cyc = []
            cur = (f, i)
            while cur not in done and cur in partner:
                done.add(cur)
                pi, g, j = partner[cur]
                done.add((g, j))
                cyc.append((c.faces[cur[0]][cur[1]][0], pi))
                e = c.faces[g][j][0]
                others = [o for o in occs[e] if o != (g, j)]
                if not others:
                    break
                cur = others[0]
            cycles.append(cyc)

    # labels per edge class and the quotient 2-skeleton
    cls = euf.classes()
    cls.sort(key=lambda k: min(k))
    cls_of = {e: idx for idx, k in enumerate(cls) for e in k}
    class_labels = [sorted({c.edges[e].label for e in k}) for k in cls]
    if any(len(lab) != 1 for lab in class_labels) or sorted(lab[0] for lab in class_labels) != list(range(len(cls))):
        if len(cls) == ngen or not diags:
            diags.append(Diagnostic("label-class", f"edge classes carry labels {class_labels}"))
    quotient_rels = [
        Word.from_letters([(cls_of[e], s) for e, s in c.faces[pr.minus]]) for pr in c.pairs
    ]
    skeleton = GeneralPresentation(len(cls), tuple(quotient_rels))

    face_keys = Counter(relator_key(c.face_word(pr.minus)) for pr in c.pairs)
    rel_keys = Counter(relator_key(r) for r in rels)
    if face_keys != rel_keys:
        missing = rel_keys - face_keys
        extra = face_keys - rel_keys
        diags.append(Diagnostic("unmatched-relator", f"missing {dict(missing)}, extra {dict(extra)}"))
    else:
        per_face = Counter(relator_key(c.face_word(f)) for f in range(len(c.faces)))
        bad = {k: v for k, v in per_face.items() if v != 2}
        if bad:
            diags.append(Diagnostic("unmatched-relator", f"relators not spelled by exactly two faces: {bad}"))

    return SpineCertificate(
        complex_name=c.name,
        counts=counts,
        edge_cycles=cycles,
        vertex_orbits=sorted(sorted(k) for k in vuf.classes()),
        edge_orbits=[sorted(k) for k in cls],
        presentation=skeleton,
        diagnostics=diags,
    )


# --- obstructions -------------------------------------------------------------------


@dataclass
class SpineObstruction:
    kind: str  # relator-multiplicity | assembly-reversal | non-planar
    params: tuple | None
    evidence: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": list(self.params) if self.params else None, "evidence": self.evidence}


def closed_manifold_gate(p: CyclicPresentation) -> None:
    inv = abelianization(p)
    if not inv.is_finite or inv.order % 2 == 0:
        raise GateViolation(f"abelianization {inv} is not finite of odd order")


def corner_multiplicity_obstruction(
    e: SphericalEmbedding, p: CyclicPresentation, check_gate: bool = True
) -> SpineObstruction | None:
    """A face whose darts come from some relator more than twice.

    Each face F is the link of a polyhedron vertex u_F and each of its darts a
    2-cell corner there. A relator has only two 2-cells in the polyhedron, each
    meeting u_F at most once.
    """
    if check_gate:
        closed_manifold_gate(p)
    rels = p.relators()
    offending = []
    for fi, face in enumerate(e.faces):
        cnt = e.face_relators(face)
        for r, times in sorted(cnt.items()):
            if times > 2:
                offending.append(
                    {
                        "face": fi,
                        "face_vertices": [str(v) for v in e.face_vertices(face)],
                        "relator": r,
                        "relator_word": rels[r].to_text(),
                        "count": times,
                        "face_relators": [e.graph.edges[d >> 1].provenance[0] for d in face],
                    }
                )
    if not offending:
        return None
    return SpineObstruction("relator-multiplicity", None, {"occurrences": offending})


def _opposite_letter(rel_letters, pos: int) -> tuple[int, int]:
    g, s = rel_letters[(pos + 2) % len(rel_letters)]
    return g, s


def star_boundary(e: SphericalEmbedding, face: Sequence[int], rels: Sequence[Word]) -> list[tuple[int, int]]:
    """Boundary of the union of triangles around u_F, as (label, sign) in face order.

    Dart d of F is the corner of a triangle between letters p and p+1; the
    side opposite that corner is letter p+2, read backwards when d runs from
    the arrival end to the departure end.
    """
    out = []
    for d in face:
        ri, pos = e.graph.edges[d >> 1].provenance
        letters = rels[ri].letters()
        if len(letters) != 3:
            raise ValueError("star boundaries are defined here for triangular relators")
        g, s = _opposite_letter(letters, pos)
        out.append((g, -s) if d % 2 == 0 else (g, s))
    return out


def cycles_match(a: Sequence[tuple[int, int]], b: Sequence[tuple[int, int]]) -> bool:
    """Equality of directed labelled cycles up to rotation and reflection."""
    if len(a) != len(b):
        return False
    L = len(a)
    if L == 0:
        return True
    rev = [(g, -s) for g, s in reversed(b)]
    for cand in (list(b), rev):
        for r in range(L):
            if all(a[i] == cand[(i + r) % L] for i in range(L)):
                return True
    return False


def edge_cycle_matches(c: FacePairingComplex, cycle: Sequence[tuple[int, int]], text: str) -> bool:
    """Compare a computed edge cycle with ``"[a,b] F1 [c,d] F0 [a,b]"`` up to rotation and reversal."""
    toks = text.split()
    if len(toks) < 3 or toks[0] != toks[-1] or len(toks) % 2 == 0:
        raise ValueError(f"malformed edge cycle {text!r}")
    want_e, want_p = toks[0:-1:2], [int(t[1:]) for t in toks[1::2]]
    got_e = [c.edges[e].display() for e, _ in cycle]
    got_p = [pi for _, pi in cycle]
    L = len(got_e)
    if len(want_e) != L:
        return False
    # reversed walk: edges backwards, each pair now sits before its source edge
    rev_e = got_e[::-1]
    rev_p = [got_p[(L - 2 - i) % L] for i in range(L)]
    for es, ps in ((got_e, got_p), (rev_e, rev_p)):
        for r in range(L):
            if all(es[(i + r) % L] == want_e[i] and ps[(i + r) % L] == want_p[i] for i in range(L)):
                return True
    return False


def _quoted_words(n: int, m: int) -> dict:
    h = n // 2
    w_even = [((t * m + (h if t % 2 == 0 else 0)) % n, 1) for t in range(1, h + 1)]
    w_odd = [((g + 1) % n, 1) for g, _ in w_even]
    cs = {i: [((i + m) % n, 1), ((i + m + h) % n, 1)] for i in range(h)}
    return {"W_even": w_even, "W_odd": w_odd, "C": cs}


def _glue_along(disk: list[tuple[int, int]], other: list[tuple[int, int]], at: int) -> list[tuple[int, int]]:
    """Replace side ``at`` of disk by the rest of ``other``, glued along the equal label."""
    g, s = disk[at]
    t = next(i for i, (h, _) in enumerate(other) if h == g)
    s1 = other[t][1]
    L = len(other)
    rest = [other[(t + k) % L] for k in range(1, L)]
    if s == s1:
        rest = [(h, -x) for h, x in reversed(rest)]
    return disk[:at] + rest + disk[at + 1 :]


def _assembly_preconditions(p: FibTypeParams) -> None:
    n, m, k = p.as_tuple()
    if n % 2 or k != n // 2 or gcd(m, n // 2) != 1 or gcd(m + n // 2, n) != 2:
        raise PreconditionError(f"{p.as_tuple()} needs n even, k = n/2, (m,n/2) = 1 and (m+n/2,n) = 2")


def sphere_assembly_obstruction(p: FibTypeParams, oracle_max_n: int = 12) -> SpineObstruction:
    """The k = n/2, (m+n/2,n) = 2 obstruction.

    The stars of the sink faces give n/2-gons D_even, D_odd and those of the
    source 2-gon faces give 2-gons C_i. Gluing every C_i onto D_even along its
    unique matching label leaves an n/2-gon that cannot be glued to D_odd into
    a sphere. All of this is read off the unique spherical embedding and
    compared with the closed-form words; for n <= ``oracle_max_n`` an
    exhaustive search over corner assignments confirms no consistent assembly.
    """
    _assembly_preconditions(p)
    n, m, k = p.as_tuple()
    pres = make_fib_presentation(p)
    closed_manifold_gate(pres)
    rels = pres.relators()
    g = whitehead_graph(pres)
    embeddings = enumerate_spherical_embeddings(g)
    if len(embeddings) != 1:
        raise AssertionError(f"expected a unique spherical embedding, found {len(embeddings)}")
    emb = embeddings[0]
    sinks, sources = {}, {}
    for face in emb.faces:
        vs = emb.face_vertices(face)
        if all(not v.primed for v in vs):
            key = "even" if WVertex(0) in vs else "odd" if WVertex(1) in vs else None
            sinks[key] = star_boundary(emb, face, rels)
        elif all(v.primed for v in vs):
            i = min(v.index for v in vs) % (n // 2)
            sources[i] = star_boundary(emb, face, rels)
    if set(sinks) != {"even", "odd"} or len(sources) != n // 2:
        raise AssertionError("sink/source faces do not have the expected shape")

    quoted = _quoted_words(n, m)
    agree = {
        "D_even": cycles_match(sinks["even"], quoted["W_even"]),
        "D_odd": cycles_match(sinks["odd"], quoted["W_odd"]),
        "C": all(cycles_match(sources[i], quoted["C"][i]) for i in range(n // 2)),
    }
    if not all(agree.values()):
        raise AssertionError(f"embedding-derived boundaries disagree with the closed forms: {agree}")

    disk = list(sinks["even"])
    forced = []
    glued = disk
    for side in range(len(disk)):
        lab = disk[side][0]
        cands = [i for i, cyc in sources.items() if any(h == lab for h, _ in cyc)]
        forced.append(len(cands) == 1)
    if not all(forced):
        return SpineObstruction(
            "assembly-reversal",
            p.as_tuple(),
            {"concluded": False, "reason": "identification of D_even with the C_i is not forced", "forced": forced},
        )
    # glue from the last side backwards so indices stay valid
    for side in reversed(range(len(disk))):
        lab = disk[side][0]
        i = next(i for i, cyc in sources.items() if any(h == lab for h, _ in cyc))
        glued = _glue_along(glued, sources[i], side)
    d_odd = sinks["odd"]
    reverse_odd = [(g_, s_) for g_, s_ in reversed(quoted["W_odd"])]
    positive = glued if all(s > 0 for _, s in glued) else [(h, -s) for h, s in reversed(glued)]
    is_reverse = cycles_match(positive, reverse_odd) and all(s > 0 for _, s in positive)
    can_close = cycles_match(glued, d_odd)

    evidence = {
        "concluded": True,
        "W_even": _show(quoted["W_even"]),
        "W_odd": _show(quoted["W_odd"]),
        "C": {str(i): _show(quoted["C"][i]) for i in range(n // 2)},
        "glued_boundary": _show(glued),
        "glued_is_reverse_of_W_odd": is_reverse,
        "glued_matches_D_odd": can_close,
        "forced": forced,
        "census": [list(x) for x in emb.census],
    }
    if n <= oracle_max_n:
        labelled = enumerate_spherical_embeddings(g, labelled=True)
        evidence["oracle_embeddings"] = len(labelled)
        evidence["oracle_assemblies"] = sum(len(brute_force_assemblies(x, rels, limit=1)) for x in labelled)
    if can_close or not is_reverse or evidence.get("oracle_assemblies", 0):
        raise AssertionError(f"assembly obstruction failed for {p.as_tuple()}: {evidence}")
    return SpineObstruction("assembly-reversal", p.as_tuple(), evidence)


def _show(cyc: Sequence[tuple[int, int]]) -> str:
    return " ".join(f"x{g}" if s > 0 else f"X{g}" for g, s in cyc)


def brute_force_assemblies(
    e: SphericalEmbedding, rels: Sequence[Word], limit: int | None = None
) -> list[dict]:
    """Consistent ways to build the polyhedron boundary from the embedding.

    Every Whitehead edge is a corner (relator r, position p); its two darts go
    to the two copies of r. Around each face, consecutive darts glue a side of
    one copy to a side of the next. An assignment is consistent when every side
    gets the same partner at both of its ends and is never glued to itself.
    """
    edges = e.graph.edges
    by_rel: dict[int, list[int]] = {}
    for idx, ed in enumerate(edges):
        by_rel.setdefault(ed.provenance[0], []).append(idx)
    rel_order = sorted(by_rel)
    # gluings: per consecutive dart pair in a face
    glue_list = []
    for face in e.faces:
        L = len(face)
        for i in range(L):
            a, b = face[i], face[(i + 1) % L]
            glue_list.append((a, b, (tuple(face), i)))
    length = {r: len(rels[r].letters()) for r in rel_order}

    def side_of(dart: int, copy: int, head: bool) -> tuple[int, int, int]:
        r, pos = edges[dart >> 1].provenance
        even = dart % 2 == 0
        # the head of an even dart is the departure end of letter pos+1
        off = (1 if even else 0) if head else (0 if even else 1)
        return (r, copy, (pos + off) % length[r])

    ready_at: dict[int, list] = {}
    rank = {r: i for i, r in enumerate(rel_order)}
    for a, b, tag in glue_list:
        ra, rb = edges[a >> 1].provenance[0], edges[b >> 1].provenance[0]
        ready_at.setdefault(max(rank[ra], rank[rb]), []).append((a, b, tag))

    copy_of: dict[int, int] = {}
    partner: dict[tuple, dict] = {}
    results: list[dict] = []

    def apply(level: int, undo: list) -> bool:
        for a, b, tag in ready_at.get(level, []):
            A = side_of(a, copy_of[a], True)
            B = side_of(b, copy_of[b], False)
            if A == B:
                return False
            for X, Y in ((A, B), (B, A)):
                ends = partner.setdefault(X, {})
                other = [v for t, v in ends.items() if t != (tag, X is A)]
                if any(v != Y for v in other):
                    return False
                ends[(tag, X is A)] = Y
                undo.append((X, (tag, X is A)))
        return True

    def search(level: int) -> bool:
        if level == len(rel_order):
            results.append(dict(copy_of))
            return limit is not None and len(results) >= limit
        r = rel_order[level]
        eds = by_rel[r]
        for mask in range(1 << (len(eds) - 1)):  # first corner fixed: copy 0 gets its even dart
            bits = [0] + [(mask >> t) & 1 for t in range(len(eds) - 1)]
            for ed, bit in zip(eds, bits):
                copy_of[2 * ed] = bit
                copy_of[2 * ed + 1] = 1 - bit
            undo: list = []
            ok = apply(level, undo)
            if ok and search(level + 1):
                return True
            for X, t in undo:
                partner[X].pop(t, None)
        for ed in eds:
            copy_of.pop(2 * ed, None)
            copy_of.pop(2 * ed + 1, None)
        return False

    search(0)
    return results


def nonplanar_branch_obstruction(p: FibTypeParams) -> SpineObstruction:
    """The k = n/2, (m+n/2,n) = 1 case: contract to a Moebius ladder.

    Relabel ``w_j = v_{(m+n/2) j}``; contracting the edges ``(w_j, w'_{j+a m})``
    with ``a = (m+n/2)^{-1} mod n`` leaves the circulant with edges
    ``(w_j, w_{j+1})`` and ``(w_j, w_{j+n/2})``, non-planar for n >= 6.
    """
    n, m, k = p.as_tuple()
    if n < 6 or n % 2 or k != n // 2 or gcd(m, n // 2) != 1 or gcd(m + n // 2, n) != 1:
        raise PreconditionError(f"{p.as_tuple()} needs n >= 6 even, k = n/2, (m,n/2) = 1 and (m+n/2,n) = 1")
    h = n // 2
    alpha = pow(m + h, -1, n)
    pres = make_fib_presentation(p)
    closed_manifold_gate(pres)
    g = whitehead_graph(pres)
    # v_i = w_{alpha i}
    ren = {WVertex(i, pr): (f"w{(alpha * i) % n}" + ("'" if pr else "")) for i in range(n) for pr in (False, True)}
    rg = LabeledMultigraph(
        tuple(ren[v] for v in g.vertices), tuple(Edge(ren[ed.u], ren[ed.v], ed.provenance) for ed in g.edges)
    )
    expected = Counter()
    for j in range(n):
        expected[frozenset((f"w{j}", f"w{(j + 1) % n}"))] += 1
        expected[frozenset((f"w{j}'", f"w{(j + h) % n}'"))] += 1
        expected[frozenset((f"w{j}", f"w{(j + alpha * m) % n}'"))] += 1
    if rg.edge_pairs() != expected:
        raise AssertionError("relabelled Whitehead graph does not have the closed-form edges")
    script = [("contract_edge", f"w{j}", f"w{(j + alpha * m) % n}'") for j in range(n)]
    minor = minor_reduce(rg, script)
    circ = Counter()
    for j in range(n):
        circ[frozenset((f"w{j}", f"w{(j + 1) % n}"))] += 1
        circ[frozenset((f"w{j}", f"w{(j + h) % n}"))] += 1
    if minor.edge_pairs() != circ:
        raise AssertionError("contraction did not give the circulant C_n(1, n/2)")
    planar, witness = is_planar(minor)
    if planar:
        raise AssertionError("circulant minor unexpectedly planar")
    return SpineObstruction(
        "non-planar",
        p.as_tuple(),
        {
            "alpha": alpha,
            "contracted": [f"(w{j},w{(j + alpha * m) % n}')" for j in range(n)],
            "minor_vertices": len(minor.vertices),
            "minor_edges": len(minor.edges),
            "witness": witness.to_json(),
            "witness_verified": witness.verify(minor),
        },
    )
