"""Group-law verification of a presentation by first-order model checking.

Each law is a sentence decided on the automata.  The spot check at the end
computes ``[x_r x_k^-1, x_s x_k^-1]`` twice, once with the presentation's
arithmetic and once with the symbolic oracle, and compares.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

from . import nil2
from .automata import Budget
from .errors import AutostructError
from .logic import decide, with_commutator
from .presentations import Presentation, commutator, encode

SPOT_TRIPLES = ((0, 1, 2), (1, 2, 3))

TOTALITY = "all a. all b. ex c. M(a,b,c)"
FUNCTIONALITY = "all a. all b. all c. all d. ((M(a,b,c) & M(a,b,d)) -> c = d)"
IDENTITY = "all a. (M(a,e,a) & M(e,a,a))"
INVERSES = "all a. ex b. (M(a,b,e) & M(b,a,e))"
ASSOCIATIVITY = (
    "all a. all b. all c. all d. all f. all g. all h. "
    "((M(a,b,d) & M(d,c,f) & M(b,c,g) & M(a,g,h)) -> f = h)"
)
CLASS_TWO = "all a. all b. all c. all t. all s. ((comm(a,b,t) & M(t,c,s)) -> M(c,t,s))"
COMMUTATIVITY = "all a. all b. all c. (M(a,b,c) -> M(b,a,c))"
INV_RELATION = "all a. all b. ((inv(a,b) -> M(a,b,e)) & (M(a,b,e) -> inv(a,b)))"


def exponent_sentence(p: int) -> str:
    """``all a. a^p = e`` spelled with p - 2 intermediate powers."""
    if p == 2:
        return "all a. M(a,a,e)"
    names = [f"t{i}" for i in range(1, p - 1)]
    chain = [f"M(a,a,{names[0]})"]
    chain += [f"M({names[i]},a,{names[i + 1]})" for i in range(len(names) - 1)]
    chain.append(f"M({names[-1]},a,e)")
    quants = " ".join(f"ex {n}." for n in names)
    return f"all a. {quants} ({' & '.join(chain)})"


@dataclass
class Check:
    name: str
    expected: object
    actual: object = None
    passed: bool = False
    seconds: float = 0.0
    detail: str = ""


@dataclass
class Report:
    presentation: str
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"presentation": self.presentation, "ok": self.ok,
                "checks": [asdict(c) for c in self.checks]}

    def format_text(self, timings: bool = False) -> str:
        lines = [f"verify {self.presentation}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = f"  {status}  {c.name:<14} expected={c.expected} actual={c.actual}"
            if c.detail:
                line += f"  {c.detail}"
            if timings:
                line += f"  ({c.seconds:.2f}s)"
            lines.append(line)
        lines.append("all checks passed" if self.ok else "some checks FAILED")
        return "\n".join(lines)


def _run(report: Report, name: str, expected, thunk, detail: str = "") -> None:
    check = Check(name, expected, detail=detail)
    start = time.perf_counter()
    try:
        check.actual = thunk()
        check.passed = expected is None or check.actual == expected
    except AutostructError as exc:
        check.actual = f"error: {exc}"
    check.seconds = time.perf_counter() - start
    report.checks.append(check)


def spot_value(pres: Presentation, k: int, r: int, s: int) -> tuple[str, str]:
    """``[x_r x_k^-1, x_s x_k^-1]`` by the presentation and by the oracle."""
    g = encode(pres, [(f"x{r}", 1), (f"x{k}", -1)])
    h = encode(pres, [(f"x{s}", 1), (f"x{k}", -1)])
    automaton = commutator(pres, g, h)
    og = nil2.from_word(pres.p, [(f"x{r}", 1), (f"x{k}", -1)])
    oh = nil2.from_word(pres.p, [(f"x{s}", 1), (f"x{k}", -1)])
    oracle = nil2.quotient(nil2.oracle_comm(og, oh), pres.kind, pres)
    return automaton, oracle


def verify_presentation(pres: Presentation, budget: Budget | None = None) -> Report:
    """Decide the group laws and run the oracle spot check; never raises."""
    report = Report(pres.name)

    def law(name, sentence, expected=True, on=None):
        _run(report, name, expected, lambda: decide(on or pres, sentence, budget), sentence)

    law("totality", TOTALITY)
    law("functionality", FUNCTIONALITY)
    law("identity", IDENTITY)
    law("inverse", INVERSES)
    if "inv" in pres.relations:
        law("inv-relation", INV_RELATION)
    law("associativity", ASSOCIATIVITY)
    law("exponent-p", exponent_sentence(pres.p))
    try:
        with_comm = with_commutator(pres, budget=budget)
    except AutostructError as exc:
        report.checks.append(Check("class-2", True, f"error: {exc}", False))
    else:
        law("class-2", CLASS_TWO, on=with_comm)
    expected = {"fp": True, "gp": False, "hp": False}.get(pres.kind)
    law("commutativity", COMMUTATIVITY, expected)

    if pres.kind in ("fp", "gp", "hp"):
        for k, r, s in SPOT_TRIPLES:
            name = f"spot({k},{r},{s})"
            check = Check(name, None)
            start = time.perf_counter()
            try:
                value, oracle = spot_value(pres, k, r, s)
                check.expected = oracle
                check.actual = value
                nontrivial = pres.kind == "fp" or value != pres.identity
                check.passed = value == oracle and nontrivial
                check.detail = "matches oracle" + ("" if pres.kind == "fp" else ", not e")
            except AutostructError as exc:
                check.actual = f"error: {exc}"
            check.seconds = time.perf_counter() - start
            report.checks.append(check)
    return report
