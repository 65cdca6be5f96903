"""Buchi automata over synchronous infinite words, and the pro-p completion of H_p.

Only what the completion needs is provided: membership of ultimately
periodic (lasso) words, products, emptiness with a witness lasso, and the
safety automata for multiplication and inversion.  There is no
complementation, so there is no full first-order theory over infinite words.
"""
from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .automata import PAD, Alphabet, Symbol, explore
from .errors import AlphabetMismatch, FormatError, NotInDomain
from .presentations import Presentation, _check_prime, hp_core_step, hp_result_letter, is_canonical


@dataclass(frozen=True, eq=False)
class BuchiAutomaton:
    """Same storage as a finite automaton, read on infinite words (no PAD)."""

    alphabet: Alphabet
    delta: tuple
    initial: frozenset
    accepting: frozenset

    @classmethod
    def build(cls, alphabet, n_states, initial, accepting, transitions):
        rows = [dict() for _ in range(n_states)]
        for src, sym, dst in transitions:
            sym = tuple(sym)
            if not (0 <= src < n_states and 0 <= dst < n_states):
                raise ValueError(f"transition {src}->{dst} uses an undeclared state")
            _check_letters(alphabet, sym)
            rows[src].setdefault(sym, set()).add(dst)
        initial, accepting = frozenset(initial), frozenset(accepting)
        for q in initial | accepting:
            if not 0 <= q < n_states:
                raise ValueError(f"state {q} is not declared")
        delta = tuple({s: tuple(sorted(t)) for s, t in row.items()} for row in rows)
        return cls(alphabet, delta, initial, accepting)

    @classmethod
    def from_finite(cls, aut) -> "BuchiAutomaton":
        return cls(aut.alphabet, aut.delta, aut.initial, aut.accepting)

    @property
    def tracks(self) -> int:
        return self.alphabet.tracks

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @cached_property
    def deterministic(self) -> bool:
        return len(self.initial) == 1 and all(len(t) == 1 for row in self.delta for t in row.values())

    @property
    def n_transitions(self) -> int:
        return sum(len(t) for row in self.delta for t in row.values())

    def transitions(self):
        for q, row in enumerate(self.delta):
            for sym, targets in row.items():
                for t in targets:
                    yield q, sym, t

    def step(self, states: Iterable[int], sym: Symbol) -> frozenset:
        out = set()
        for q in states:
            out.update(self.delta[q].get(sym, ()))
        return frozenset(out)

    def __repr__(self):
        return (f"BuchiAutomaton(p={self.alphabet.p}, tracks={self.tracks}, "
                f"states={self.n_states}, accepting={len(self.accepting)})")


def _check_letters(alphabet: Alphabet, sym) -> None:
    if len(sym) != alphabet.tracks:
        raise AlphabetMismatch(f"symbol {sym} has {len(sym)} tracks, expected {alphabet.tracks}")
    for x in sym:
        if x is PAD or not 0 <= x < alphabet.size:
            raise AlphabetMismatch(f"letter {x!r} is not in the alphabet")


@dataclass(frozen=True)
class LassoWord:
    """The infinite word ``prefix + loop + loop + ...``."""

    prefix: tuple
    loop: tuple

    def __post_init__(self):
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")
        widths = {len(s) for s in self.prefix + self.loop}
        if len(widths) > 1:
            raise ValueError("lasso symbols have different track counts")
        if any(x is PAD for s in self.prefix + self.loop for x in s):
            raise ValueError("lasso words cannot contain PAD")

    @property
    def tracks(self) -> int:
        return len(self.loop[0])

    def letter(self, n: int) -> Symbol:
        if n < len(self.prefix):
            return self.prefix[n]
        return self.loop[(n - len(self.prefix)) % len(self.loop)]

    def unrolled(self, times: int = 2) -> "LassoWord":
        return LassoWord(self.prefix, self.loop * times)

    def shifted(self) -> "LassoWord":
        """Same word with the first loop iteration moved into the prefix."""
        return LassoWord(self.prefix + self.loop, self.loop)


# ---------------------------------------------------------------------------
# membership and emptiness


def _sccs(nodes: Sequence, succ) -> list[list]:
    """Tarjan's algorithm, iterative."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def _accepting_cycle(starts, succ, is_accepting) -> bool:
    seen = set(starts)
    queue = deque(starts)
    while queue:
        v = queue.popleft()
        for w in succ(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    for comp in _sccs(sorted(seen), succ):
        if not any(is_accepting(v) for v in comp):
            continue
        if len(comp) > 1 or comp[0] in succ(comp[0]):
            return True
    return False


def _accepts_deterministic(b: BuchiAutomaton, w: LassoWord) -> bool:
    """Follow the single run until a (state, loop position) pair repeats."""
    (q,) = b.initial
    for sym in w.prefix:
        t = b.delta[q].get(sym)
        if not t:
            return False
        q = t[0]
    n = len(w.loop)
    first_seen: dict = {}
    trail = []
    i = 0
    while (q, i) not in first_seen:
        first_seen[(q, i)] = len(trail)
        trail.append(q)
        t = b.delta[q].get(w.loop[i])
        if not t:
            return False
        q, i = t[0], (i + 1) % n
    return any(x in b.accepting for x in trail[first_seen[(q, i)]:])


def accepts_lasso(b: BuchiAutomaton, w: LassoWord) -> bool:
    """Whether some run on ``w`` visits an accepting state infinitely often."""
    if w.tracks != b.tracks:
        raise AlphabetMismatch(f"lasso has {w.tracks} tracks, automaton has {b.tracks}")
    for sym in w.prefix + w.loop:
        _check_letters(b.alphabet, sym)
    if b.deterministic:
        return _accepts_deterministic(b, w)
    current = b.initial
    for sym in w.prefix:
        current = b.step(current, sym)
        if not current:
            return False
    n = len(w.loop)

    def succ(node):
        q, i = node
        return [(t, (i + 1) % n) for t in b.delta[q].get(w.loop[i], ())]

    return _accepting_cycle([(q, 0) for q in sorted(current)], succ,
                            lambda node: node[0] in b.accepting)


def intersect(a: BuchiAutomaton, b: BuchiAutomaton) -> BuchiAutomaton:
    """Product with a phase bit: phase 0 waits for ``a``, phase 1 for ``b``."""
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch("Buchi automata over different alphabets")

    def successors(key):
        q1, q2, phase = key
        if phase == 0 and q1 in a.accepting:
            nxt = 1
        elif phase == 1 and q2 in b.accepting:
            nxt = 0
        else:
            nxt = phase
        row2 = b.delta[q2]
        for sym, t1s in a.delta[q1].items():
            for t1 in t1s:
                for t2 in row2.get(sym, ()):
                    yield sym, (t1, t2, nxt)

    starts = [(q1, q2, 0) for q1 in sorted(a.initial) for q2 in sorted(b.initial)]
    aut = explore(a.alphabet, starts, successors,
                  lambda key: key[2] == 0 and key[0] in a.accepting)
    return BuchiAutomaton.from_finite(aut)


def _path(b: BuchiAutomaton, sources: Iterable[int], target) -> list | None:
    """Shortest symbol path (lexicographic tie-break) from sources to target."""
    prev: dict = {}
    queue = deque()
    for q in sorted(sources):
        if q not in prev:
            prev[q] = None
            queue.append(q)
    while queue:
        q = queue.popleft()
        for sym in sorted(b.delta[q]):
            for t in b.delta[q][sym]:
                if t == target and q in prev:
                    path = [sym]
                    while prev[q] is not None:
                        q, s = prev[q]
                        path.append(s)
                    return path[::-1]
                if t not in prev:
                    prev[t] = (q, sym)
                    queue.append(t)
    return None


def buchi_witness(b: BuchiAutomaton) -> LassoWord | None:
    """A lasso accepted by ``b``, or None when the language is empty."""
    seen = set(b.initial)
    queue = deque(sorted(b.initial))
    order = []
    while queue:
        q = queue.popleft()
        order.append(q)
        for sym in sorted(b.delta[q]):
            for t in b.delta[q][sym]:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)

    def succ(q):
        return [t for ts in b.delta[q].values() for t in ts]

    good = set()
    for comp in _sccs(sorted(seen), succ):
        if len(comp) > 1 or comp[0] in succ(comp[0]):
            good.update(q for q in comp if q in b.accepting)
    for q in order:
        if q in good:
            if q in b.initial:
                prefix = []
            else:
                prefix = _path(b, b.initial, q)
            loop = _path(b, [q], q)
            return LassoWord(tuple(prefix), tuple(loop))
    return None


def is_empty_buchi(b: BuchiAutomaton) -> bool:
    return buchi_witness(b) is None


# ---------------------------------------------------------------------------
# the completion of H_p


@dataclass(frozen=True, eq=False)
class BuchiPresentation:
    """Domain and relation automata on infinite (alpha, gamma) letter streams."""

    name: str
    p: int
    domain: BuchiAutomaton
    relations: dict

    @property
    def alphabet(self) -> Alphabet:
        return self.domain.alphabet

    @property
    def M(self) -> BuchiAutomaton:
        return self.relations["M"]


def _safety(alphabet: Alphabet, start, successors) -> BuchiAutomaton:
    return BuchiAutomaton.from_finite(explore(alphabet, [start], successors, lambda _: True))


def hat_multiplication(p: int) -> BuchiAutomaton:
    """Deterministic all-accepting automaton for the graph of multiplication."""
    _check_prime(p, odd=True)
    alphabet = Alphabet(p, 3, width=2)
    letters = range(alphabet.size)

    def successors(core):
        for l1 in letters:
            for l2 in letters:
                l3 = hp_result_letter(p, core, l1, l2)
                nxt = hp_core_step(p, core, (l1, l2, l3))
                if nxt is not None:
                    yield (l1, l2, l3), nxt

    return _safety(alphabet, (True, 0), successors)


def hat_inverse(p: int) -> BuchiAutomaton:
    """``inv(g, h)``: alpha' = -alpha, gamma'_k = -gamma_k + alpha_k * sum_{i<k} alpha_i."""
    _check_prime(p, odd=True)
    alphabet = Alphabet(p, 2, width=2)

    def successors(state):
        first, s = state
        for a in range(p):
            for g in ([0] if first else range(p)):
                a2, g2 = (-a) % p, (-g + a * s) % p
                yield (a * p + g, a2 * p + g2), (False, (s + a) % p)

    return _safety(alphabet, (True, 0), successors)


def hat_domain(p: int) -> BuchiAutomaton:
    _check_prime(p, odd=True)
    alphabet = Alphabet(p, 1, width=2)

    def successors(first):
        for a in range(p):
            for g in ([0] if first else range(p)):
                yield (a * p + g,), False

    return _safety(alphabet, True, successors)


def make_hp_hat(p: int) -> BuchiPresentation:
    return BuchiPresentation(
        f"H^_{p}", p, hat_domain(p), {"M": hat_multiplication(p), "inv": hat_inverse(p)}
    )


def embed(hp: Presentation, elements: Sequence[str]) -> LassoWord:
    """Finite H_p elements extended by zeros, as one lasso over their tracks."""
    words = []
    for s in elements:
        if not is_canonical(hp, s):
            raise NotInDomain(f"{s!r} is not a canonical element of {hp.name}")
        words.append(hp.to_word(s))
    n = max((len(w) for w in words), default=0)
    prefix = tuple(tuple(w[i] if i < len(w) else 0 for w in words) for i in range(n))
    return LassoWord(prefix, ((0,) * len(words),))


def finite_embedding_check(hp: Presentation, m_hat: BuchiAutomaton, triple: Sequence[str]) -> bool:
    """Verdict of ``m_hat`` on the zero-extended triple."""
    if hp.kind != "hp" or hp.p != m_hat.alphabet.p:
        raise AlphabetMismatch("the embedding check needs the matching H_p presentation")
    return accepts_lasso(m_hat, embed(hp, triple))


# ---------------------------------------------------------------------------
# lasso text syntax: one coordinate is "u(v)^w", "v^w" or a finite "u" (zero tail);
# coordinates of one element are joined by "|"

_COORD = re.compile(r"^([0-9a-z]*)(?:\(([0-9a-z]+)\)\^w|\^w)?$")


def parse_coordinate(text: str, p: int) -> tuple[tuple, tuple]:
    text = text.strip()
    m = _COORD.match(text)
    if not m or (text.endswith("^w") and not m.group(2) and not m.group(1)):
        raise FormatError(f"bad lasso coordinate {text!r}")
    if m.group(2) is not None:
        prefix, loop = m.group(1), m.group(2)
    elif text.endswith("^w"):
        prefix, loop = "", m.group(1)
    else:
        prefix, loop = m.group(1), "0"
    try:
        digits = [int(c, 36) for c in prefix + loop]
    except ValueError:
        raise FormatError(f"bad lasso coordinate {text!r}") from None
    if any(d >= p for d in digits):
        raise FormatError(f"digit out of range in {text!r}")
    return tuple(digits[:len(prefix)]), tuple(digits[len(prefix):])


def _lasso_merge(parts: Sequence[tuple[tuple, tuple]], combine) -> tuple[tuple, tuple]:
    n = max(len(u) for u, _ in parts)
    period = 1
    for _, v in parts:
        period = period * len(v) // math.gcd(period, len(v))

    def at(part, i):
        u, v = part
        return u[i] if i < len(u) else v[(i - len(u)) % len(v)]

    prefix = tuple(combine([at(q, i) for q in parts]) for i in range(n))
    loop = tuple(combine([at(q, i) for q in parts]) for i in range(n, n + period))
    return prefix, loop


def parse_element_lasso(text: str, p: int, width: int) -> tuple[tuple, tuple]:
    """One element as a 1-track (prefix, loop) pair of packed letters."""
    text = text.strip()
    if text == "e":
        text = "|".join(["0^w"] * width)
    coords = text.split("|")
    if len(coords) != width:
        raise FormatError(f"expected {width} coordinates separated by '|' in {text!r}")
    parts = [parse_coordinate(c, p) for c in coords]

    def pack(ds):
        x = 0
        for d in ds:
            x = x * p + d
        return x

    return _lasso_merge(parts, pack)


def parse_lasso(elements: Sequence[str], p: int, width: int) -> LassoWord:
    """A tuple of element lassos, e.g. ``["1^w|0^w", "1^w|0^w", "2^w|(012)^w"]``."""
    parts = [parse_element_lasso(t, p, width) for t in elements]
    return LassoWord(*_lasso_merge(parts, tuple))


def _shortest(u: str, v: str) -> tuple[str, str]:
    """Smallest prefix and primitive loop denoting the same infinite word."""
    for d in range(1, len(v) + 1):
        if len(v) % d == 0 and v[:d] * (len(v) // d) == v:
            v = v[:d]
            break
    while u and u[-1] == v[-1]:
        u, v = u[:-1], v[-1] + v[:-1]
    return u, v


def format_lasso(w: LassoWord, p: int, width: int) -> list[str]:
    """Per-track text of a lasso, inverse of :func:`parse_lasso`."""
    from .presentations import DIGITS

    out = []
    for track in range(w.tracks):
        coords = []
        for c in range(width):
            shift = p ** (width - 1 - c)

            def digit(sym):
                return DIGITS[(sym[track] // shift) % p]

            u, v = _shortest("".join(digit(s) for s in w.prefix),
                             "".join(digit(s) for s in w.loop))
            coords.append(f"{u}({v})^w" if u or len(v) > 1 else f"{v}^w")
        out.append("|".join(coords))
    return out
