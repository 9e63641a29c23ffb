"""Whitehead graphs, planarity witnesses, scripted minors and spherical embeddings.

Conventions. A letter ``x_g`` enters the vertex link at ``v_g`` and leaves at
``v_g'``; ``x_g^{-1}`` enters at ``v_g'`` and leaves at ``v_g``. Each cyclic
two-letter subword ``ab`` of a relator contributes one edge joining the
arrival end of ``a`` to the departure end of ``b``. Its provenance is the
relator index and the position of ``a``.

Embeddings are rotation systems on darts: edge ``e`` has dart ``2e`` leaving
its first endpoint and ``2e + 1`` leaving the second. Faces are orbits of
``d -> sigma(d ^ 1)``.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import permutations
from typing import Hashable, Iterable, NamedTuple, Sequence

import networkx as nx

from .presentations import CyclicPresentation, GeneralPresentation, Word

__all__ = [
    "WVertex",
    "Edge",
    "LabeledMultigraph",
    "KuratowskiWitness",
    "SphericalEmbedding",
    "EmbeddingBudgetExceeded",
    "MinorOp",
    "whitehead_graph",
    "fib_whitehead_edges",
    "is_planar",
    "minor_reduce",
    "is_three_connected",
    "enumerate_spherical_embeddings",
    "to_dot",
    "complete_graph",
    "complete_bipartite_graph",
    "from_networkx",
    "DEFAULT_EMBED_BUDGET",
]

DEFAULT_EMBED_BUDGET = 1 << 24


class WVertex(NamedTuple):
    """``v_index`` or, when primed, ``v_index'``."""

    index: int
    primed: bool = False

    def __str__(self) -> str:
        return f"v{self.index}" + ("'" if self.primed else "")


@dataclass(frozen=True)
class Edge:
    u: Hashable
    v: Hashable
    provenance: tuple[int, int] | None = None  # (relator, position)

    @property
    def is_loop(self) -> bool:
        return self.u == self.v

    def joins(self, a, b) -> bool:
        return (self.u, self.v) in ((a, b), (b, a))


@dataclass(frozen=True)
class LabeledMultigraph:
    vertices: tuple
    edges: tuple[Edge, ...]

    def __post_init__(self):
        vs = tuple(self.vertices)
        known = set(vs)
        if len(known) != len(vs):
            raise ValueError("duplicate vertex")
        for e in self.edges:
            if e.u not in known or e.v not in known:
                raise ValueError(f"edge {e} has an endpoint outside the vertex set")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", tuple(self.edges))

    def degree(self, v) -> int:
        return sum((e.u == v) + (e.v == v) for e in self.edges)

    def degrees(self) -> dict:
        deg = {v: 0 for v in self.vertices}
        for e in self.edges:
            deg[e.u] += 1
            deg[e.v] += 1
        return deg

    def simple(self) -> nx.Graph:
        """Underlying simple graph: loops dropped, parallel edges merged."""
        G = nx.Graph()
        G.add_nodes_from(self.vertices)
        G.add_edges_from((e.u, e.v) for e in self.edges if not e.is_loop)
        return G

    def multigraph(self) -> nx.MultiGraph:
        G = nx.MultiGraph()
        G.add_nodes_from(self.vertices)
        G.add_edges_from((e.u, e.v) for e in self.edges)
        return G

    def edge_pairs(self) -> Counter:
        return Counter(frozenset((e.u, e.v)) for e in self.edges)


def from_networkx(G: nx.Graph) -> LabeledMultigraph:
    return LabeledMultigraph(tuple(G.nodes), tuple(Edge(u, v) for u, v in G.edges()))


def complete_graph(n: int) -> LabeledMultigraph:
    return from_networkx(nx.complete_graph(n))


def complete_bipartite_graph(a: int, b: int) -> LabeledMultigraph:
    return from_networkx(nx.complete_bipartite_graph(a, b))


# --- Whitehead graph -------------------------------------------------------------


def _arrive(g: int, e: int) -> WVertex:
    return WVertex(g, e < 0)


def _depart(g: int, e: int) -> WVertex:
    return WVertex(g, e > 0)


def whitehead_graph(p: CyclicPresentation | GeneralPresentation) -> LabeledMultigraph:
    """Whitehead graph of the relators as given (no cyclic reduction)."""
    if isinstance(p, CyclicPresentation):
        n, rels = p.n, p.relators()
    else:
        n, rels = p.generator_count, list(p.relators)
    verts = tuple(WVertex(i) for i in range(n)) + tuple(WVertex(i, True) for i in range(n))
    edges = []
    for ri, r in enumerate(rels):
        letters = r.letters()
        L = len(letters)
        for pos in range(L):
            a, b = letters[pos], letters[(pos + 1) % L]
            edges.append(Edge(_arrive(*a), _depart(*b), (ri, pos)))
    return LabeledMultigraph(verts, tuple(edges))


def fib_whitehead_edges(n: int, m: int, k: int) -> Counter:
    """The closed-form edge family of G_n(m,k) as a multiset of vertex pairs."""
    out: Counter = Counter()
    for i in range(n):
        out[frozenset((WVertex(i), WVertex((i + m) % n, True)))] += 1
        out[frozenset((WVertex(i), WVertex((i + m - k) % n)))] += 1
        out[frozenset((WVertex(i, True), WVertex((i + k) % n, True)))] += 1
    return out


# --- planarity with witnesses ------------------------------------------------------


@dataclass(frozen=True)
class KuratowskiWitness:
    kind: str  # "K5" | "K33"
    branch_vertices: tuple
    paths: tuple[tuple, ...]  # vertex sequences between branch vertices

    def verify(self, host: LabeledMultigraph) -> bool:
        """Check the subdivision structurally against the host graph, without networkx."""
        pairs = {frozenset((e.u, e.v)) for e in host.edges if not e.is_loop}
        branch = set(self.branch_vertices)
        inner_seen: set = set()
        ends = set()
        for path in self.paths:
            if len(path) < 2 or path[0] not in branch or path[-1] not in branch:
                return False
            for a, b in zip(path, path[1:]):
                if frozenset((a, b)) not in pairs:
                    return False
            inner = path[1:-1]
            if any(v in branch or v in inner_seen for v in inner) or len(set(inner)) != len(inner):
                return False
            inner_seen.update(inner)
            end = frozenset((path[0], path[-1]))
            if len(end) != 2 or end in ends:
                return False
            ends.add(end)
        if self.kind == "K5":
            return len(branch) == 5 and len(ends) == 10
        if self.kind == "K33":
            if len(branch) != 6 or len(ends) != 9:
                return False
            nbrs: dict = {v: [] for v in branch}
            for end in ends:
                a, b = tuple(end)
                nbrs[a].append(b)
                nbrs[b].append(a)
            root = self.branch_vertices[0]
            side = {root: 0}
            dq = deque([root])
            while dq:
                x = dq.popleft()
                for y in nbrs[x]:
                    if y not in side:
                        side[y] = 1 - side[x]
                        dq.append(y)
                    elif side[y] == side[x]:
                        return False
            if len(side) != 6:
                return False
            return sorted(Counter(side.values()).values()) == [3, 3]
        return False

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "branch_vertices": [str(v) for v in self.branch_vertices],
            "paths": [[str(v) for v in path] for path in self.paths],
        }


def _witness_from_subgraph(K: nx.Graph) -> KuratowskiWitness:
    branch = [v for v in K.nodes if K.degree(v) >= 3]
    kind = "K5" if len(branch) == 5 else "K33"
    bset = set(branch)
    paths = []
    seen_edges: set = set()
    for b in branch:
        for nb in K.neighbors(b):
            if frozenset((b, nb)) in seen_edges:
                continue
            path = [b, nb]
            prev, cur = b, nb
            while cur not in bset:
                nxt = next(x for x in K.neighbors(cur) if x != prev)
                prev, cur = cur, nxt
                path.append(cur)
            for a, c in zip(path, path[1:]):
                seen_edges.add(frozenset((a, c)))
            paths.append(tuple(path))
    return KuratowskiWitness(kind, tuple(branch), tuple(paths))


def is_planar(g: LabeledMultigraph) -> tuple[bool, KuratowskiWitness | None]:
    """Planarity of the simplified graph; a verified Kuratowski subdivision when it fails."""
    planar, cert = nx.check_planarity(g.simple(), counterexample=True)
    if planar:
        return True, None
    w = _witness_from_subgraph(cert)
    if not w.verify(g):
        raise AssertionError("extracted Kuratowski witness failed verification")
    return False, w


def is_three_connected(g: LabeledMultigraph) -> bool:
    G = g.simple()
    return G.number_of_nodes() >= 4 and nx.node_connectivity(G) >= 3


# --- minors -----------------------------------------------------------------------


@dataclass(frozen=True)
class MinorOp:
    kind: str  # "delete_edge" | "contract_edge" | "remove_loops"
    u: Hashable = None
    v: Hashable = None

    @classmethod
    def coerce(cls, op) -> "MinorOp":
        if isinstance(op, MinorOp):
            return op
        if isinstance(op, str):
            return cls(op)
        return cls(*op)


def minor_reduce(g: LabeledMultigraph, script: Iterable) -> LabeledMultigraph:
    """Replay a deletion/contraction script.

    Edges are named by their original endpoints; after a contraction the
    absorbed vertex is an alias of the survivor. Contracting an edge whose ends
    already coincide deletes that loop.
    """
    verts = list(g.vertices)
    edges = list(g.edges)
    alias: dict = {}

    def find(x):
        while x in alias:
            x = alias[x]
        return x

    def take(u, v) -> Edge:
        a, b = find(u), find(v)
        for i, e in enumerate(edges):
            if e.joins(a, b):
                return edges.pop(i)
        raise KeyError(f"no edge between {u} and {v} (currently {a}, {b})")

    for raw in script:
        op = MinorOp.coerce(raw)
        if op.kind == "delete_edge":
            take(op.u, op.v)
        elif op.kind == "contract_edge":
            e = take(op.u, op.v)
            a, b = find(e.u), find(e.v)
            if a != b:
                alias[b] = a
                verts.remove(b)
                edges = [
                    Edge(a if x.u == b else x.u, a if x.v == b else x.v, x.provenance) for x in edges
                ]
        elif op.kind == "remove_loops":
            edges = [e for e in edges if not e.is_loop]
        else:
            raise ValueError(f"unknown minor operation {op.kind!r}")
    return LabeledMultigraph(tuple(verts), tuple(edges))


# --- spherical embeddings -----------------------------------------------------------


class EmbeddingBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SphericalEmbedding:
    graph: LabeledMultigraph
    sigma: tuple[int, ...]  # next dart in the rotation at the tail of each dart
    faces: tuple[tuple[int, ...], ...]
    census: tuple[tuple[int, int], ...] = field(default=())  # (face length, count)

    def tail(self, d: int):
        e = self.graph.edges[d >> 1]
        return e.u if d % 2 == 0 else e.v

    def head(self, d: int):
        return self.tail(d ^ 1)

    def rotation(self) -> dict:
        out: dict = {}
        seen: set = set()
        for d in range(len(self.sigma)):
            if d in seen:
                continue
            cyc = [d]
            seen.add(d)
            x = self.sigma[d]
            while x != d:
                cyc.append(x)
                seen.add(x)
                x = self.sigma[x]
            out[self.tail(d)] = tuple(cyc)
        return out

    def face_vertices(self, face: Sequence[int]) -> list:
        return [self.tail(d) for d in face]

    def face_relators(self, face: Sequence[int]) -> Counter:
        return Counter(self.graph.edges[d >> 1].provenance[0] for d in face)

    def census_dict(self) -> dict[int, int]:
        return dict(self.census)

    def euler_characteristic(self) -> int:
        used = {v for e in self.graph.edges for v in (e.u, e.v)}
        return len(used) - len(self.graph.edges) + len(self.faces)

    def to_json(self) -> dict:
        return {
            "rotation": {str(v): [int(d) for d in cyc] for v, cyc in self.rotation().items()},
            "faces": [[str(v) for v in self.face_vertices(f)] for f in self.faces],
            "census": {str(k): v for k, v in self.census},
        }


def _faces(sigma: Sequence[int]) -> list[tuple[int, ...]]:
    seen = [False] * len(sigma)
    faces = []
    for d in range(len(sigma)):
        if seen[d]:
            continue
        orbit = []
        x = d
        while not seen[x]:
            seen[x] = True
            orbit.append(x)
            x = sigma[x ^ 1]
        faces.append(tuple(orbit))
    return faces


def _map_code(sigma: Sequence[int], root: int) -> tuple[int, ...]:
    label = {root: 0}
    order = [root]
    code = []
    i = 0
    while i < len(order):
        d = order[i]
        i += 1
        for nb in (sigma[d], d ^ 1):
            if nb not in label:
                label[nb] = len(order)
                order.append(nb)
            code.append(label[nb])
    return tuple(code)


def _canonical_key(sigma: Sequence[int], reflect: bool) -> tuple:
    inv = [0] * len(sigma)
    for d, s in enumerate(sigma):
        inv[s] = d
    comps: list[tuple] = []
    seen: set = set()
    for d in range(len(sigma)):
        if d in seen:
            continue
        comp = set()
        stack = [d]
        while stack:
            x = stack.pop()
            if x in comp:
                continue
            comp.add(x)
            stack.extend((sigma[x], x ^ 1))
        seen |= comp
        best = min(_map_code(sigma, r) for r in comp)
        if reflect:
            best = min(best, min(_map_code(inv, r) for r in comp))
        comps.append(best)
    return tuple(sorted(comps))


def _labelled_key(sigma: Sequence[int], reflect: bool) -> tuple:
    key = tuple(sigma)
    if reflect:
        inv = [0] * len(sigma)
        for d, x in enumerate(sigma):
            inv[x] = d
        key = min(key, tuple(inv))
    return key


def enumerate_spherical_embeddings(
    g: LabeledMultigraph,
    up_to_reflection: bool = True,
    budget: int | None = None,
    limit: int | None = None,
    labelled: bool = False,
) -> list[SphericalEmbedding]:
    """All genus-0 rotation systems of g, up to automorphism (and reflection).

    Vertices receive rotations in BFS order from a vertex of maximum degree. A
    partial rotation system fixes part of the face permutation; the search is
    cut when closed faces plus open face chains cannot reach ``E - V + 2c``.
    ``budget`` caps the number of partial rotation systems visited; ``limit``
    stops after that many distinct embeddings. With ``labelled=True`` two
    rotation systems count as the same only if they are equal (or mirror
    images when ``up_to_reflection``); graph automorphisms are not quotiented,
    which matters when parallel edges carry different relator corners.
    """
    budget = DEFAULT_EMBED_BUDGET if budget is None else budget
    E = len(g.edges)
    if E == 0:
        return []
    out_darts: dict = {v: [] for v in g.vertices}
    for i, e in enumerate(g.edges):
        out_darts[e.u].append(2 * i)
        out_darts[e.v].append(2 * i + 1)
    active = [v for v in g.vertices if out_darts[v]]
    deg = {v: len(out_darts[v]) for v in active}

    # BFS order per component, each starting from a max-degree vertex
    adj: dict = {v: [] for v in active}
    for e in g.edges:
        adj[e.u].append(e.v)
        adj[e.v].append(e.u)
    order: list = []
    placed: set = set()
    components = 0
    for start in sorted(active, key=lambda v: -deg[v]):
        if start in placed:
            continue
        components += 1
        placed.add(start)
        dq = deque([start])
        while dq:
            v = dq.popleft()
            order.append(v)
            for w in adj[v]:
                if w not in placed:
                    placed.add(w)
                    dq.append(w)
    target = E - len(active) + 2 * components

    choices = []
    for idx, v in enumerate(order):
        ds = out_darts[v]
        rots = [(ds[0],) + rest for rest in permutations(ds[1:])]
        if idx == 0 and up_to_reflection and not labelled and len(ds) >= 3:
            rots = [r for r in rots if r[1:] <= r[:0:-1]]
        choices.append(rots)

    D = 2 * E
    sigma = [-1] * D
    start_of_end = list(range(D))
    end_of_start = list(range(D))
    state = {"closed": 0, "open": D, "nodes": 0}
    found: dict = {}

    def link(a: int, b: int, undo: list) -> None:
        s = start_of_end[a]
        if s == b:
            state["closed"] += 1
            undo.append(None)
        else:
            e = end_of_start[b]
            undo.append((e, start_of_end[e], s, end_of_start[s]))
            start_of_end[e] = s
            end_of_start[s] = e
        state["open"] -= 1

    def unlink(rec) -> None:
        if rec is None:
            state["closed"] -= 1
        else:
            e, se, s, es = rec
            start_of_end[e] = se
            end_of_start[s] = es
        state["open"] += 1

    class _Stop(Exception):
        pass

    def dfs(depth: int) -> None:
        if depth == len(order):
            if state["closed"] == target:
                key = _labelled_key(sigma, up_to_reflection) if labelled else _canonical_key(sigma, up_to_reflection)
                if key not in found:
                    found[key] = tuple(sigma)
                    if limit is not None and len(found) >= limit:
                        raise _Stop
            return
        for rot in choices[depth]:
            state["nodes"] += 1
            if state["nodes"] > budget:
                raise EmbeddingBudgetExceeded(f"more than {budget} partial rotation systems")
            undo: list = []
            L = len(rot)
            for j in range(L):
                x, nxt = rot[j], rot[(j + 1) % L]
                sigma[x] = nxt
                link(x ^ 1, nxt, undo)
            if state["closed"] + state["open"] >= target:
                dfs(depth + 1)
            for rec in reversed(undo):
                unlink(rec)
            for x in rot:
                sigma[x] = -1

    try:
        dfs(0)
    except _Stop:
        pass

    result = []
    for key in sorted(found):
        sig = found[key]
        faces = _faces(sig)
        census = tuple(sorted(Counter(len(f) for f in faces).items()))
        result.append(SphericalEmbedding(g, sig, tuple(faces), census))
    return result


# --- DOT export ---------------------------------------------------------------------


def to_dot(g: LabeledMultigraph, embedding: SphericalEmbedding | None = None, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in g.vertices:
        lines.append(f'  "{v}";')
    for i, e in enumerate(g.edges):
        lab = f' [label="r{e.provenance[0]}.{e.provenance[1]}"]' if e.provenance else ""
        lines.append(f'  "{e.u}" -- "{e.v}"{lab};  // e{i}')
    if embedding is not None:
        for j, f in enumerate(embedding.faces):
            walk = " ".join(str(v) for v in embedding.face_vertices(f))
            lines.append(f"  // face {j} ({len(f)}): {walk}")
    lines.append("}")
    return "\n".join(lines) + "\n"
