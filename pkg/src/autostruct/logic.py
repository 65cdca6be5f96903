"""First-order formulas over automatic presentations and their compilation.

Grammar (quantifiers bind weakest, then ``->``, ``|``, ``&``, ``!``)::

    f    := 'all' var '.' f | 'ex' var '.' f | f '->' f | f '|' f | f '&' f
          | '!' f | '(' f ')' | atom
    atom := name '(' term {',' term} ')' | term '=' term

A term is a variable or a constant of the presentation's signature; an
identifier bound by an enclosing quantifier is always a variable.

Compilation turns a formula into a :class:`DefinableSet`: an automaton with
one track per free variable, tracks in alphabetical variable order.  The
formula is first put into negation normal form so complements are only
taken of atoms and of universally quantified blocks.  Conjunctions under an
existential block are joined pairwise, and each bound variable is projected
away as soon as no remaining conjunct mentions it.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, replace

from .automata import (
    DEFAULT_BUDGET,
    PAD,
    Budget,
    MultiTrackAutomaton,
    complement,
    epsilon_automaton,
    empty_automaton,
    finite_language,
    join,
    minimize,
    padded_track,
    project,
    rename_tracks,
    union,
)
from .errors import (
    AlphabetMismatch,
    ArityError,
    BudgetExceeded,
    DuplicateName,
    FormulaSyntaxError,
    NotASentence,
    UnknownSymbol,
)
from .presentations import Presentation, Signature, singleton

# ---------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple

    def __str__(self):
        return f"{self.name}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Eq:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Not:
    body: object

    def __str__(self):
        return f"!{_wrap(self.body)}"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Implies:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} -> {self.right})"


@dataclass(frozen=True)
class Exists:
    var: str
    body: object

    def __str__(self):
        return f"(ex {self.var}. {self.body})"


@dataclass(frozen=True)
class Forall:
    var: str
    body: object

    def __str__(self):
        return f"(all {self.var}. {self.body})"


def _wrap(f) -> str:
    s = str(f)
    return s if isinstance(f, (Rel, Not)) or s.startswith("(") else f"({s})"


def free_vars(f) -> frozenset:
    if isinstance(f, Rel):
        return frozenset(t.name for t in f.args if isinstance(t, Var))
    if isinstance(f, Eq):
        return frozenset(t.name for t in (f.left, f.right) if isinstance(t, Var))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or, Implies)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(->)|([A-Za-z_][A-Za-z0-9_]*)|([().,=|&!])|(#[^\n]*))")
_KEYWORDS = {"all", "ex"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    out = []
    pos = 0
    line, line_start = 1, 0
    while True:
        while pos < len(text) and text[pos].isspace():
            if text[pos] == "\n":
                line += 1
                line_start = pos + 1
            pos += 1
        if pos >= len(text):
            out.append(_Tok("eof", "", line, pos - line_start + 1))
            return out
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        start = m.start(m.lastindex)
        col = start - line_start + 1
        if m.group(1):
            out.append(_Tok("->", "->", line, col))
        elif m.group(2):
            word = m.group(2)
            out.append(_Tok(word if word in _KEYWORDS else "ident", word, line, col))
        elif m.group(3):
            out.append(_Tok(m.group(3), m.group(3), line, col))
        pos = m.end()


class _Parser:
    def __init__(self, text: str, signature: Signature | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = signature

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self, kind: str) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != kind:
            want = "identifier" if kind == "ident" else repr(kind)
            got = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise FormulaSyntaxError(f"expected {want}, found {got}", tok.line, tok.col)
        self.i += 1
        return tok

    def parse(self):
        f = self.formula()
        self.take("eof")
        return f

    def formula(self):
        tok = self.peek()
        if tok.kind in ("all", "ex"):
            self.i += 1
            var = self.take("ident").text
            self.take(".")
            body = self.formula()
            return Forall(var, body) if tok.kind == "all" else Exists(var, body)
        left = self.disjunction()
        if self.peek().kind == "->":
            self.i += 1
            return Implies(left, self.formula())
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.peek().kind == "|":
            self.i += 1
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.unary()
        while self.peek().kind == "&":
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self):
        tok = self.peek()
        if tok.kind == "!":
            self.i += 1
            return Not(self.unary())
        if tok.kind == "(":
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        if tok.kind in ("all", "ex"):
            return self.formula()
        return self.atom()

    def atom(self):
        name = self.take("ident")
        if self.peek().kind == "(":
            self.i += 1
            args = [Var(self.take("ident").text)]
            while self.peek().kind == ",":
                self.i += 1
                args.append(Var(self.take("ident").text))
            self.take(")")
            if self.sig is not None:
                if name.text not in self.sig.relations:
                    raise UnknownSymbol(f"unknown relation {name.text!r} at line {name.line}, column {name.col}")
                arity = self.sig.relations[name.text]
                if arity != len(args):
                    raise ArityError(
                        f"{name.text} takes {arity} arguments, got {len(args)} "
                        f"(line {name.line}, column {name.col})"
                    )
            return Rel(name.text, tuple(args))
        if self.peek().kind == "=":
            self.i += 1
            right = self.take("ident")
            return Eq(Var(name.text), Var(right.text))
        tok = self.peek()
        raise FormulaSyntaxError(
            f"expected '(' or '=' after {name.text!r}", tok.line, tok.col
        )


def parse_formula(text: str, signature: Signature | None = None):
    """Parse formula text; with a signature, check relations and resolve constants."""
    f = _Parser(text, signature).parse()
    if signature is not None:
        f = resolve(f, signature)
    return f


def resolve(f, signature: Signature, bound: frozenset = frozenset()):
    """Turn unbound identifiers naming signature constants into :class:`Const`."""

    def term(t):
        if isinstance(t, Var) and t.name not in bound and signature.is_constant(t.name):
            return Const(t.name)
        return t

    if isinstance(f, Rel):
        if f.name not in signature.relations:
            raise UnknownSymbol(f"unknown relation {f.name!r}")
        if signature.relations[f.name] != len(f.args):
            raise ArityError(f"{f.name} takes {signature.relations[f.name]} arguments, got {len(f.args)}")
        return Rel(f.name, tuple(term(t) for t in f.args))
    if isinstance(f, Eq):
        return Eq(term(f.left), term(f.right))
    if isinstance(f, Not):
        return Not(resolve(f.body, signature, bound))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(resolve(f.left, signature, bound), resolve(f.right, signature, bound))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, resolve(f.body, signature, bound | {f.var}))
    raise TypeError(f"not a formula: {f!r}")


def nnf(f, negate: bool = False):
    """Negation normal form: implications removed, negations only on atoms."""
    if isinstance(f, (Rel, Eq)):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.body, not negate)
    if isinstance(f, And):
        cls = Or if negate else And
        return cls(nnf(f.left, negate), nnf(f.right, negate))
    if isinstance(f, Or):
        cls = And if negate else Or
        return cls(nnf(f.left, negate), nnf(f.right, negate))
    if isinstance(f, Implies):
        if negate:
            return And(nnf(f.left), nnf(f.right, True))
        return Or(nnf(f.left, True), nnf(f.right))
    if isinstance(f, Exists):
        return (Forall if negate else Exists)(f.var, nnf(f.body, negate))
    if isinstance(f, Forall):
        return (Exists if negate else Forall)(f.var, nnf(f.body, negate))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# compilation


@dataclass(frozen=True, eq=False)
class DefinableSet:
    """Automaton whose track i carries the value of ``variables[i]``."""

    automaton: MultiTrackAutomaton
    variables: tuple

    @property
    def arity(self) -> int:
        return len(self.variables)


def _flatten(f, cls) -> list:
    if isinstance(f, cls):
        return _flatten(f.left, cls) + _flatten(f.right, cls)
    return [f]


class _Compiler:
    def __init__(self, pres: Presentation, budget: Budget):
        self.pres = pres
        self.budget = budget
        self.fresh = itertools.count()
        self.track = padded_track(pres.domain)
        self.domain = pres.domain

    # -- helpers ----------------------------------------------------------

    def _new_name(self) -> str:
        return f"#{next(self.fresh)}"

    def _min(self, aut):
        return minimize(aut, self.budget)

    def _check_width(self, width: int, what: str) -> None:
        if width > self.budget.max_tracks:
            raise BudgetExceeded(f"{what} needs {width} tracks; the limit is {self.budget.max_tracks}")

    def labelled(self, aut, names) -> DefinableSet:
        self._check_width(len(names), "an atom")
        order = sorted(range(len(names)), key=lambda i: names[i])
        return DefinableSet(rename_tracks(aut, order), tuple(names[i] for i in order))

    def join(self, a: DefinableSet, b: DefinableSet) -> DefinableSet:
        self._check_width(len(set(a.variables) | set(b.variables)), "a conjunction")
        aut, names = join(a.automaton, a.variables, b.automaton, b.variables, self.budget)
        return DefinableSet(self._min(aut), names)

    def project(self, ds: DefinableSet, names) -> DefinableSet:
        aut, variables = ds.automaton, list(ds.variables)
        changed = False
        for n in names:
            if n in variables:
                aut = project(aut, variables.index(n))
                variables.remove(n)
                changed = True
        if changed:
            aut = self._min(aut)
        return DefinableSet(aut, tuple(variables))

    def domain_set(self, name: str) -> DefinableSet:
        return DefinableSet(self.domain, (name,))

    def extend(self, ds: DefinableSet, names) -> DefinableSet:
        """Cylindrify onto more variables, each ranging over the domain."""
        for n in sorted(set(names) - set(ds.variables)):
            ds = self.join(ds, self.domain_set(n))
        return ds

    def negate(self, ds: DefinableSet) -> DefinableSet:
        aut = complement(ds.automaton, [self.track] * ds.arity, self.budget)
        return DefinableSet(self._min(aut), ds.variables)

    def truth(self, value: bool) -> DefinableSet:
        alphabet = self.domain.alphabet.with_tracks(0)
        return DefinableSet(epsilon_automaton(alphabet) if value else empty_automaton(alphabet), ())

    # -- atoms ------------------------------------------------------------

    def equality(self, a: str, b: str) -> DefinableSet:
        if a == b:
            return self.domain_set(a)
        rows = tuple({(x[0], x[0]): t for x, t in row.items()} for row in self.domain.delta)
        aut = MultiTrackAutomaton(self.domain.alphabet.with_tracks(2), rows,
                                  self.domain.initial, self.domain.accepting)
        return self.labelled(aut, (a, b))

    def constant(self, var: str, const: str) -> DefinableSet:
        return DefinableSet(singleton(self.pres, self.pres.constant(const)), (var,))

    def atom(self, f) -> DefinableSet:
        if isinstance(f, Eq):
            left, right = f.left, f.right
            if isinstance(left, Const) and isinstance(right, Const):
                return self.truth(self.pres.constant(left.name) == self.pres.constant(right.name))
            if isinstance(left, Const):
                left, right = right, left
            if isinstance(right, Const):
                return self.constant(left.name, right.name)
            return self.equality(left.name, right.name)
        try:
            aut = self.pres.relations[f.name]
        except KeyError:
            raise UnknownSymbol(f"unknown relation {f.name!r}") from None
        if aut.tracks != len(f.args):
            raise ArityError(f"{f.name} takes {aut.tracks} arguments, got {len(f.args)}")
        names, extra = [], []
        for t in f.args:
            if isinstance(t, Var) and t.name not in names:
                names.append(t.name)
            else:
                fresh = self._new_name()
                names.append(fresh)
                extra.append((fresh, t))
        ds = self.labelled(aut, names)
        for fresh, t in extra:
            side = self.equality(fresh, t.name) if isinstance(t, Var) else self.constant(fresh, t.name)
            ds = self.project(self.join(ds, side), [fresh])
        return ds

    # -- connectives ------------------------------------------------------

    def compile(self, f) -> DefinableSet:
        if isinstance(f, (Rel, Eq)):
            return self.atom(f)
        if isinstance(f, Not):
            return self.negate(self.compile(f.body))
        if isinstance(f, And):
            return self.conjoin([self.compile(g) for g in _flatten(f, And)], set())
        if isinstance(f, Or):
            parts = [self.compile(g) for g in _flatten(f, Or)]
            names = set().union(*(d.variables for d in parts))
            parts = [self.extend(d, names) for d in parts]
            aut = parts[0].automaton
            for d in parts[1:]:
                aut = union(aut, d.automaton)
            return DefinableSet(self._min(aut), parts[0].variables)
        if isinstance(f, Exists):
            names, body = _quantifier_block(f, Exists)
            if isinstance(body, And):
                parts = [self.compile(g) for g in _flatten(body, And)]
                return self.conjoin(parts, names)
            return self.project(self.compile(body), names)
        if isinstance(f, Forall):
            names, body = _quantifier_block(f, Forall)
            inner = nnf(body, negate=True)
            for n in reversed(names):
                inner = Exists(n, inner)
            return self.negate(self.compile(inner))
        raise TypeError(f"not a formula: {f!r}")

    def conjoin(self, parts: list, eliminate) -> DefinableSet:
        """Join conjuncts, projecting ``eliminate`` variables as early as possible."""
        eliminate = set(eliminate)

        def local(i, pool):
            others = set()
            for j, d in enumerate(pool):
                if j != i:
                    others.update(d.variables)
            return [v for v in pool[i].variables if v in eliminate and v not in others]

        parts = list(parts)
        parts = [self.project(d, local(i, parts)) for i, d in enumerate(parts)]
        while len(parts) > 1:
            best = None
            for i in range(len(parts)):
                for j in range(i + 1, len(parts)):
                    a, b = parts[i], parts[j]
                    names = set(a.variables) | set(b.variables)
                    rest = set()
                    for k, d in enumerate(parts):
                        if k not in (i, j):
                            rest.update(d.variables)
                    after = len([v for v in names if not (v in eliminate and v not in rest)])
                    shared = len(set(a.variables) & set(b.variables))
                    key = (len(names), after, -shared, a.automaton.n_states * b.automaton.n_states, i, j)
                    if best is None or key < best[0]:
                        best = (key, i, j)
            _, i, j = best
            joined = self.join(parts[i], parts[j])
            parts = [d for k, d in enumerate(parts) if k not in (i, j)] + [joined]
            parts[-1] = self.project(joined, local(len(parts) - 1, parts))
        result = parts[0] if parts else self.truth(True)
        return self.project(result, [v for v in result.variables if v in eliminate])


def _quantifier_block(f, cls):
    names = []
    while isinstance(f, cls):
        if f.var not in names:
            names.append(f.var)
        f = f.body
    return names, f


def _prepare(pres: Presentation, f):
    if isinstance(f, str):
        f = parse_formula(f, pres.signature)
    else:
        f = resolve(f, pres.signature)
    return f


def compile_formula(pres: Presentation, f, budget: Budget | None = None) -> DefinableSet:
    """Automaton of the satisfying assignments of ``f`` (text or syntax tree)."""
    f = _prepare(pres, f)
    budget = budget or DEFAULT_BUDGET
    return _Compiler(pres, budget).compile(nnf(f))


compile = compile_formula


def decide(pres: Presentation, sentence, budget: Budget | None = None) -> bool:
    """Truth value of a closed formula in the presented group."""
    f = _prepare(pres, sentence)
    free = free_vars(f)
    if free:
        raise NotASentence(f"free variables remain: {', '.join(sorted(free))}")
    ds = _Compiler(pres, budget or DEFAULT_BUDGET).compile(nnf(f))
    aut = ds.automaton
    return not aut.initial.isdisjoint(aut.accepting)


def register_predicate(pres: Presentation, name: str, ds: DefinableSet) -> Presentation:
    """Presentation extended with ``name`` as a relation symbol (copy-on-extend)."""
    if not _IDENT.fullmatch(name) or name in _KEYWORDS:
        raise ValueError(f"{name!r} is not a valid relation name")
    if name in pres.relations or name in pres.signature.relations:
        raise DuplicateName(f"relation {name!r} already exists")
    if not ds.automaton.alphabet.same_letters(pres.alphabet):
        raise AlphabetMismatch("definable set uses a different alphabet")
    if ds.arity == 0:
        raise ValueError("predicates need at least one argument")
    relations = dict(pres.relations)
    relations[name] = ds.automaton
    return replace(pres, relations=relations, signature=pres.signature.with_relation(name, ds.arity),
                   _cache={})


def define(pres: Presentation, name: str, text: str, variables=None,
           budget: Budget | None = None) -> Presentation:
    """Compile ``text`` and register it under ``name``.

    ``variables`` fixes the argument order (default: alphabetical).
    """
    ds = compile_formula(pres, text, budget)
    if variables is not None:
        variables = tuple(variables)
        if sorted(variables) != sorted(ds.variables):
            raise ValueError(f"{variables} are not the free variables {ds.variables}")
        perm = [ds.variables.index(v) for v in variables]
        ds = DefinableSet(rename_tracks(ds.automaton, perm), variables)
    return register_predicate(pres, name, ds)


COMMUTATOR_FORMULA = (
    "ex ai. ex bi. ex s. ex t. "
    "(M(ai,a,e) & M(bi,b,e) & M(ai,bi,s) & M(a,b,t) & M(s,t,c))"
)


def with_commutator(pres: Presentation, name: str = "comm", budget: Budget | None = None) -> Presentation:
    """Register ``name(a, b, c)`` :<=> ``c = a^-1 b^-1 a b``."""
    return define(pres, name, COMMUTATOR_FORMULA, ("a", "b", "c"), budget)


def language(ds: DefinableSet, pres: Presentation, limit: int = 10_000) -> list:
    """The tuples of element strings in a finite definable set."""
    out = []
    for word in finite_language(ds.automaton, limit):
        out.append(tuple(
            pres.from_word([sym[i] for sym in word if sym[i] != PAD]) for i in range(ds.arity)
        ))
    return sorted(out)
