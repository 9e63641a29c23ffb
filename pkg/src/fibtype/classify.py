"""Decision rules for 3-manifold-group and 3-manifold-spine status of G_n(m,k).

Rules apply in a fixed order: split off d = gcd(n,m,k), treat the degenerate
word m = k, move to an H(n,m') form when k or m-k is a unit mod n, and
otherwise use the k = n/2 criterion. ``cross_check`` recomputes whatever the
verdict claims with the computational modules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd

from .abelian import AbelianInvariants, abelianization
from .coset import EnumerationLimits, EnumerationOverflow, enumerate_cosets
from .presentations import (
    ALT_FIBONACCI_WORD,
    ALT_SIERADSKI_WORD,
    CyclicPresentation,
    FibTypeParams,
    halve_even_presentation,
    make_fib_presentation,
    reduce_gcd,
    same_relator_sets,
    to_h_form,
)
from .spine import (
    GateViolation,
    build_alt_fibonacci_polyhedron,
    build_alt_sieradski_polyhedron,
    build_h_n1_polyhedron,
    closed_manifold_gate,
    corner_multiplicity_obstruction,
    nonplanar_branch_obstruction,
    sphere_assembly_obstruction,
    verify_face_pairing,
)
from .whitehead import enumerate_spherical_embeddings, is_planar, whitehead_graph

__all__ = [
    "Structure",
    "GroupStatus",
    "SpineStatus",
    "Rule",
    "Verdict",
    "CheckResult",
    "CrossCheckReport",
    "CrossCheckMismatch",
    "classify",
    "classify_group",
    "classify_spine",
    "cross_check",
    "cyclic_order_formula",
    "spine_yes_h_forms",
]


@dataclass(frozen=True)
class Structure:
    kind: str  # trivial | cyclic | sieradski | fibonacci | free-product
    order: int | None = None
    n: int | None = None
    factors: tuple["Structure", ...] = ()

    def label(self) -> str:
        if self.kind == "trivial":
            return "trivial"
        if self.kind == "cyclic":
            return f"cyclic({self.order})"
        if self.kind == "sieradski":
            return f"Sieradski({self.n})"
        if self.kind == "fibonacci":
            base = f"Fibonacci({self.n})"
            return f"{base}, order {self.order}" if self.order else base
        if self.kind == "free-product":
            return "free-product(" + ", ".join(f.label() for f in self.factors) + ")"
        raise ValueError(self.kind)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "label": self.label()}
        if self.order is not None:
            out["order"] = self.order
        if self.n is not None:
            out["n"] = self.n
        if self.factors:
            out["factors"] = [f.to_json() for f in self.factors]
        return out


TRIVIAL = Structure("trivial", order=1)


def cyclic(s: int) -> Structure:
    return TRIVIAL if s == 1 else Structure("cyclic", order=s)


@dataclass(frozen=True)
class GroupStatus:
    status: str  # yes | no | unknown
    structure: Structure | None = None

    def to_json(self) -> dict:
        out: dict = {"status": self.status}
        if self.structure is not None:
            out["structure"] = self.structure.to_json()
        return out


@dataclass(frozen=True)
class SpineStatus:
    status: str  # yes | no
    family: str | None = None  # S3 | sieradski | fibonacci | wedge

    def to_json(self) -> dict:
        out: dict = {"status": self.status}
        if self.family:
            out["family"] = self.family
        return out


@dataclass(frozen=True)
class Rule:
    rule: str
    quote: str


# rule id -> anchor text; statements are written as conditions, not prose
RULES = {
    "gcd-split": "G_n(m,k) is the free product of d = gcd(n,m,k) copies of G_{n/d}(m/d,k/d)",
    "free-product": "a free product is a 3-manifold group iff every factor is",
    "wedge": "a wedge of presentation complexes is a spine iff every summand is",
    "degenerate-word": "m = k: the defining word freely reduces to x_0, the group is trivial",
    "h-form": "k or m-k is a unit mod n: G_n(m,k) is isomorphic to H(n,m')",
    "h-exception": "H(9,4), H(9,7): 3-manifold group status open",
    "h-zero": "H(n,0) is cyclic of order 2^n - 1",
    "h-one": "H(n,1) is trivial",
    "h-half-plus-one": "H(2t-2,t), t >= 3, is cyclic of order 2^(t-1) + 1",
    "h-fib-small": "H(5,3) = F(2,5) = Z_11 and H(7,4) = F(2,7) = Z_29",
    "h-fibonacci": "H(n,n-1) = F(2,n), a 3-manifold group iff n is even or n in {3,5,7}",
    "h-sieradski": "H(n,2) = S(2,n), a 3-manifold group",
    "h-not-manifold": "remaining H(n,m) are not 3-manifold groups",
    "fib-odd": "F(2,n), n >= 9 odd, is not a 3-manifold group",
    "k-half-yes": "(m,k) = 1 and 2k = 0 or 2(m-k) = 0 mod n: cyclic of order 2^(n/2) - (-1)^(m+n/2)",
    "k-half-no": "outside that condition G_n(m,k) is not a 3-manifold group",
    "spine-exception": "H(9,4), H(9,7) Whitehead graphs contract to K_{3,3}",
    "spine-S3": "H(n,1) is a spine of S^3",
    "spine-sieradski": "S(2,n), n >= 2, is a spine",
    "spine-fibonacci": "F(2,n) is a spine iff n = 3 or n is even",
    "nonspine-corner": "H(n,0), n >= 3: a 4-gon corner carries one relator three times",
    "nonspine-k-half": "k = n/2 form: non-planar Whitehead graph or no sphere assembly",
    "nonspine-fibonacci": "F(2,5) and F(2,7) are not spines",
    "nonspine-group": "not a 3-manifold group, hence not a spine",
}

def _rule(rid: str) -> Rule:
    return Rule(rid, RULES[rid])


@dataclass(frozen=True)
class Verdict:
    params: FibTypeParams
    normal_form: dict
    group: GroupStatus
    spine: SpineStatus
    justification: tuple[Rule, ...] = ()
    obstruction_params: tuple | None = None  # (kind, params) used by cross_check

    def to_json(self) -> dict:
        return {
            "params": list(self.params.as_tuple()),
            "normal_form": self.normal_form,
            "group_status": self.group.to_json(),
            "spine_status": self.spine.to_json(),
            "justification": [{"rule": r.rule, "quote": r.quote} for r in self.justification],
        }


def cyclic_order_formula(n: int, m: int) -> int:
    return 2 ** (n // 2) - (-1) ** (m + n // 2)


def spine_yes_h_forms(n: int) -> set[int]:
    """Values m' (mod n) for which H(n,m') is a spine."""
    out = {1 % n, 2 % n}
    if n == 3 or n % 2 == 0:
        out.add((n - 1) % n)
    return out


def _h_group(n: int, m: int) -> tuple[GroupStatus, list[str]]:
    if (n, m) in {(9, 4), (9, 7)}:
        return GroupStatus("unknown"), ["h-exception"]
    if m == 0:
        return GroupStatus("yes", cyclic(2**n - 1)), ["h-zero"]
    if m == 1:
        return GroupStatus("yes", TRIVIAL), ["h-one"]
    if n % 2 == 0 and n >= 4 and m == n // 2 + 1:
        return GroupStatus("yes", cyclic(2 ** (n // 2) + 1)), ["h-half-plus-one"]
    if (n, m) in {(5, 3), (7, 4)}:
        return GroupStatus("yes", cyclic(11 if n == 5 else 29)), ["h-fib-small"]
    if m == n - 1:
        if n in (5, 7):
            return GroupStatus("yes", cyclic(11 if n == 5 else 29)), ["h-fibonacci", "h-fib-small"]
        if n == 3:
            return GroupStatus("yes", Structure("fibonacci", order=8, n=3)), ["h-fibonacci"]
        if n % 2 == 0:
            return GroupStatus("yes", Structure("fibonacci", n=n)), ["h-fibonacci"]
        return GroupStatus("no"), ["h-fibonacci", "fib-odd"]
    if m == 2:
        return GroupStatus("yes", Structure("sieradski", n=n)), ["h-sieradski"]
    if n % 2 == 1 and m == (n + 1) // 2:
        # H(2t-1,t) = F(2,2t-1)
        return GroupStatus("no"), ["h-fibonacci", "fib-odd"]
    return GroupStatus("no"), ["h-not-manifold"]


def _h_spine(n: int, m: int) -> tuple[SpineStatus, list[str], tuple | None]:
    if (n, m) in {(9, 4), (9, 7)}:
        return SpineStatus("no"), ["spine-exception"], ("nonplanar-graph", (n, m, 1))
    if m == 1 % n:
        return SpineStatus("yes", "S3"), ["spine-S3"], ("polyhedron-h1", (n, 1, 1))
    if m == n - 1 and (n == 3 or n % 2 == 0):
        return SpineStatus("yes", "fibonacci"), ["spine-fibonacci"], ("polyhedron-fibonacci", (n, 1, 2))
    if m == 2 % n:
        return SpineStatus("yes", "sieradski"), ["spine-sieradski"], ("polyhedron-sieradski", (n, 2, 1))
    if m == 0:
        return SpineStatus("no"), ["nonspine-corner"], ("corner", (n, 0, 1))
    if n % 2 == 0 and n >= 6 and m == n // 2 + 1:
        # H(n, n/2+1) = G_n(n/2+1, n/2) after the flip
        return SpineStatus("no"), ["nonspine-k-half"], ("k-half", (n, m, n // 2))
    if (n, m) in {(5, 3), (7, 4), (5, 4), (7, 6)}:
        return SpineStatus("no"), ["nonspine-fibonacci"], None
    return SpineStatus("no"), ["nonspine-group"], None


def _classify_reduced(p: FibTypeParams) -> Verdict:
    n, m, k = p.as_tuple()
    if m == k:
        hf = (n, 1 % n)
        nf = {"d": 1, "reduced": [n, m, k], "h_form": list(hf), "route": "degenerate"}
        sp, srules, obs = _h_spine(*hf)
        rules = ["degenerate-word"] + srules
        return Verdict(p, nf, GroupStatus("yes", TRIVIAL), sp, tuple(map(_rule, rules)), obs)
    hf = to_h_form(p)
    if hf is not None:
        route = "direct" if gcd(n, k) == 1 else "flip"
        nf = {"d": 1, "reduced": [n, m, k], "h_form": list(hf), "route": route}
        g, grules = _h_group(*hf)
        sp, srules, obs = _h_spine(*hf)
        return Verdict(p, nf, g, sp, tuple(map(_rule, ["h-form"] + grules + srules)), obs)
    nf = {"d": 1, "reduced": [n, m, k], "h_form": None, "route": "k-half"}
    if gcd(m, k) == 1 and ((2 * k) % n == 0 or (2 * (m - k)) % n == 0):
        s = cyclic_order_formula(n, m)
        return Verdict(
            p,
            nf,
            GroupStatus("yes", cyclic(s)),
            SpineStatus("no"),
            (_rule("k-half-yes"), _rule("nonspine-k-half")),
            ("k-half", (n, m, n // 2)),
        )
    return Verdict(
        p, nf, GroupStatus("no"), SpineStatus("no"), (_rule("k-half-no"), _rule("nonspine-group")), None
    )


def classify(p: FibTypeParams | tuple) -> Verdict:
    """Group and spine verdict for G_n(m,k)."""
    if not isinstance(p, FibTypeParams):
        p = FibTypeParams(*p)
    d, q = reduce_gcd(p)
    if d == 1:
        return _classify_reduced(p)
    inner = _classify_reduced(q)
    nf = dict(inner.normal_form)
    nf["d"] = d
    if inner.group.status == "yes":
        fs = inner.group.structure
        structure = TRIVIAL if fs == TRIVIAL else Structure("free-product", factors=(fs,) * d)
        group = GroupStatus("yes", structure)
    else:
        group = GroupStatus(inner.group.status)
    spine = SpineStatus("yes", "wedge") if inner.spine.status == "yes" else SpineStatus("no")
    rules = (_rule("gcd-split"), _rule("free-product"), _rule("wedge")) + inner.justification
    return Verdict(p, nf, group, spine, rules, inner.obstruction_params)


def classify_group(p: FibTypeParams | tuple) -> Verdict:
    return classify(p)


def classify_spine(p: FibTypeParams | tuple) -> Verdict:
    return classify(p)


# --- cross-checking ---------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class CrossCheckReport:
    params: tuple
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {"params": list(self.params), "passed": self.passed, "checks": [c.to_json() for c in self.checks]}


class CrossCheckMismatch(AssertionError):
    def __init__(self, report: CrossCheckReport):
        bad = [c.name for c in report.checks if not c.passed]
        super().__init__(f"classification disagrees with computation for {report.params}: {bad}")
        self.report = report


def _expected_abelian(structure: Structure) -> AbelianInvariants | None:
    if structure.kind == "trivial":
        return AbelianInvariants()
    if structure.kind == "cyclic":
        return AbelianInvariants((structure.order,))
    if structure.kind == "fibonacci" and structure.n == 3:
        return AbelianInvariants((2, 2))
    # named families: the abelianization of the family's own defining presentation
    if structure.kind == "sieradski":
        return abelianization(make_fib_presentation(FibTypeParams(structure.n, 2 % structure.n, 1 % structure.n)))
    if structure.kind == "fibonacci":
        n = structure.n
        return abelianization(make_fib_presentation(FibTypeParams(n, (n - 1) % n, 1 % n)))
    return None


def _check_order(v: Verdict, limits: EnumerationLimits) -> list[CheckResult]:
    st = v.group.structure
    pres = make_fib_presentation(v.params)
    out = []
    if st.kind == "free-product":
        f = _expected_abelian(st.factors[0])
        if f is not None:
            want = AbelianInvariants(
                tuple(sorted(_merge_torsion([f.torsion] * len(st.factors)))), f.free_rank * len(st.factors)
            )
            got = abelianization(pres)
            out.append(CheckResult("abelianization", got == want, {"expected": str(want), "computed": str(got)}))
        return out
    want = _expected_abelian(st)
    if want is not None:
        got = abelianization(pres)
        out.append(CheckResult("abelianization", got == want, {"expected": str(want), "computed": str(got)}))
    if st.order is not None:
        table = enumerate_cosets(pres.to_general(), (), limits, strategy="felsch")
        if not table.is_complete:
            raise EnumerationOverflow(table)
        out.append(
            CheckResult(
                "order",
                table.index == st.order,
                {"expected": st.order, "enumerated": table.index, "peak_cosets": table.peak_cosets},
            )
        )
    return out


def _merge_torsion(parts) -> list[int]:
    # invariant factors of a direct sum of cyclic groups of these orders
    from .abelian import smith_normal_form

    orders = [d for part in parts for d in part]
    if not orders:
        return []
    diag = [[orders[i] if i == j else 0 for j in range(len(orders))] for i in range(len(orders))]
    return list(smith_normal_form(diag)[0].torsion)


def _check_obstruction(v: Verdict) -> list[CheckResult]:
    return [CheckResult(c.name, c.passed, dict(c.detail)) for c in _obstruction_checks(*v.obstruction_params)]


@lru_cache(maxsize=256)
def _obstruction_checks(kind: str, params: tuple) -> tuple[CheckResult, ...]:
    return tuple(_run_obstruction(kind, params))


def _run_obstruction(kind: str, params: tuple) -> list[CheckResult]:
    p = FibTypeParams(*params)
    pres = make_fib_presentation(p)
    if kind == "nonplanar-graph":
        closed_manifold_gate(pres)
        planar, witness = is_planar(whitehead_graph(pres))
        return [CheckResult("non-planar", not planar, {"witness": witness.to_json() if witness else None})]
    if kind == "corner":
        closed_manifold_gate(pres)
        embs = enumerate_spherical_embeddings(whitehead_graph(pres))
        found = [corner_multiplicity_obstruction(e, pres) for e in embs]
        ok = bool(embs) and all(f is not None for f in found)
        return [CheckResult("corner-multiplicity", ok, {"embeddings": len(embs)})]
    if kind == "k-half":
        n, m, k = p.as_tuple()
        if gcd(m + n // 2, n) == 1:
            ob = nonplanar_branch_obstruction(p)
        else:
            ob = sphere_assembly_obstruction(p)
        return [CheckResult(ob.kind, True, {"params": list(params)})]
    if kind.startswith("polyhedron"):
        return _check_polyhedron(kind, p)
    raise ValueError(kind)


def _check_polyhedron(kind: str, p: FibTypeParams) -> list[CheckResult]:
    n = p.n
    if kind == "polyhedron-h1":
        if n < 2:
            return [CheckResult("polyhedron", True, {"skipped": "n = 1 handled by citation"})]
        cert = verify_face_pairing(build_h_n1_polyhedron(n), make_fib_presentation(FibTypeParams(n, 1, 1)))
        return [CheckResult("polyhedron", cert.ok, cert.to_json())]
    if n % 2 or n < 6:
        return [CheckResult("polyhedron", True, {"skipped": "no builder for this n"})]
    half = halve_even_presentation(make_fib_presentation(p))
    word = ALT_SIERADSKI_WORD if kind == "polyhedron-sieradski" else ALT_FIBONACCI_WORD
    alt = CyclicPresentation(n // 2, word)
    same = same_relator_sets(half.relators(), alt.relators())
    build = build_alt_sieradski_polyhedron if kind == "polyhedron-sieradski" else build_alt_fibonacci_polyhedron
    cert = verify_face_pairing(build(n // 2), alt)
    return [
        CheckResult("halving", same, {"alt_word": word.to_text()}),
        CheckResult("polyhedron", cert.ok, cert.to_json()),
    ]


def cross_check(
    v: Verdict,
    budget: EnumerationLimits | None = None,
    orders: bool = True,
    obstructions: bool = True,
) -> CrossCheckReport:
    """Recompute what the verdict claims; raise ``CrossCheckMismatch`` on any disagreement.

    Cyclic and other finite claims are checked by coset enumeration and the
    abelianization. Spine-No verdicts with an implemented obstruction run it
    behind the odd-abelianization gate; spine-Yes verdicts run the polyhedron
    verifier where a builder exists. Enumeration overflow propagates.
    """
    limits = budget or EnumerationLimits()
    checks: list[CheckResult] = []
    if v.spine.status == "yes" and v.group.status != "yes":
        checks.append(CheckResult("consistency", False, {"reason": "spine yes but group not yes"}))
    if orders and v.group.status == "yes" and v.group.structure is not None:
        checks += _check_order(v, limits)
    if obstructions and v.obstruction_params is not None:
        # obstruction parameters always name the (factor) presentation they apply to
        try:
            checks += _check_obstruction(v)
        except GateViolation as exc:
            checks.append(CheckResult("gate", False, {"reason": str(exc)}))
    report = CrossCheckReport(v.params.as_tuple(), checks)
    if not report.passed:
        raise CrossCheckMismatch(report)
    return report
