"""Multi-track synchronous finite automata.

A k-track word is the convolution of k strings: position ``i`` carries the
tuple of the i-th letters, and a track whose string is already exhausted
carries :data:`PAD`.  Automata store transitions sparsely, one dictionary per
state mapping a symbol tuple to the tuple of successor states, so the full
product alphabet ``(letters + 1) ** tracks`` is never materialized.

Every operation here returns a fresh automaton; inputs are never mutated.
"""
from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from operator import itemgetter
from typing import Callable, Hashable, Iterable, Iterator, Sequence

from .errors import (
    AlphabetMismatch,
    BudgetExceeded,
    InvalidDigit,
    NotPrime,
    TrackOutOfRange,
)


class _Pad(int):
    """Blank letter for exhausted tracks; compares greater than every letter."""

    def __new__(cls):
        return super().__new__(cls, 1 << 30)

    def __repr__(self):
        return "_"

    __str__ = __repr__

    def __reduce__(self):
        return (_pad, ())


def _pad():
    return PAD


PAD = _Pad()

Symbol = tuple
Word = tuple


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class Alphabet:
    """Letters ``0 .. p**width - 1`` on each of ``tracks`` tracks, plus PAD.

    ``width`` > 1 packs several base-p digits into one letter (most
    significant first); the H_p presentation uses width 2 for (alpha, gamma).
    """

    p: int
    tracks: int
    width: int = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise NotPrime(f"{self.p} is not prime")
        if self.tracks < 0:
            raise ValueError("track count must be non-negative")
        if self.width < 1:
            raise ValueError("width must be positive")

    @cached_property
    def size(self) -> int:
        return self.p ** self.width

    @property
    def letters(self) -> range:
        return range(self.size)

    def with_tracks(self, tracks: int) -> "Alphabet":
        return Alphabet(self.p, tracks, self.width)

    def same_letters(self, other: "Alphabet") -> bool:
        return self.p == other.p and self.width == other.width


@dataclass(frozen=True)
class Budget:
    """Resource guards; exceeding any of them raises BudgetExceeded."""

    max_subsets: int = 1_000_000
    max_tracks: int = 7

    @classmethod
    def from_env(cls, **overrides) -> "Budget":
        """Read ``AUTOSTRUCT_BUDGET`` (``subsets=N,tracks=K`` or a bare N)."""
        values = {}
        raw = os.environ.get("AUTOSTRUCT_BUDGET", "").strip()
        if raw:
            for part in raw.split(","):
                part = part.strip()
                if not part:
                    continue
                if "=" in part:
                    key, _, val = part.partition("=")
                    key = key.strip()
                    if key in ("subsets", "states", "max_subsets", "max_states"):
                        values["max_subsets"] = int(val)
                    elif key in ("tracks", "max_tracks"):
                        values["max_tracks"] = int(val)
                    else:
                        raise ValueError(f"unknown budget key {key!r}")
                else:
                    values["max_subsets"] = int(part)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True, eq=False)
class MultiTrackAutomaton:
    """Possibly nondeterministic automaton over an :class:`Alphabet`.

    States are ``0 .. n_states - 1``.  ``delta[q]`` maps a symbol (a tuple of
    ``tracks`` letters or PAD) to a sorted tuple of successors.  Constructors
    in this module only ever produce languages of valid convolutions.
    """

    alphabet: Alphabet
    delta: tuple
    initial: frozenset
    accepting: frozenset

    @classmethod
    def build(cls, alphabet, n_states, initial, accepting, transitions):
        """Validated constructor from ``(src, symbol, dst)`` triples."""
        rows = [dict() for _ in range(n_states)]
        for src, sym, dst in transitions:
            sym = tuple(sym)
            if not (0 <= src < n_states and 0 <= dst < n_states):
                raise ValueError(f"transition {src}->{dst} uses an undeclared state")
            _check_symbol(alphabet, sym)
            rows[src].setdefault(sym, set()).add(dst)
        initial = frozenset(initial)
        accepting = frozenset(accepting)
        for q in initial | accepting:
            if not 0 <= q < n_states:
                raise ValueError(f"state {q} is not declared")
        delta = tuple({s: tuple(sorted(t)) for s, t in row.items()} for row in rows)
        return cls(alphabet, delta, initial, accepting)

    @property
    def tracks(self) -> int:
        return self.alphabet.tracks

    @property
    def n_states(self) -> int:
        return len(self.delta)

    @property
    def states(self) -> range:
        return range(len(self.delta))

    @cached_property
    def deterministic(self) -> bool:
        if len(self.initial) != 1:
            return False
        return all(len(t) == 1 for row in self.delta for t in row.values())

    @property
    def n_transitions(self) -> int:
        return sum(len(t) for row in self.delta for t in row.values())

    def transitions(self) -> Iterator[tuple[int, Symbol, int]]:
        for q, row in enumerate(self.delta):
            for sym, targets in row.items():
                for t in targets:
                    yield q, sym, t

    def step(self, states: Iterable[int], sym: Symbol) -> frozenset:
        out = set()
        for q in states:
            out.update(self.delta[q].get(sym, ()))
        return frozenset(out)

    def run(self, word: Sequence[Symbol]) -> frozenset:
        current = self.initial
        for sym in word:
            current = self.step(current, sym)
            if not current:
                break
        return current

    def accepts_word(self, word: Sequence[Symbol]) -> bool:
        return bool(self.run(word) & self.accepting)

    def __repr__(self):
        return (
            f"MultiTrackAutomaton(p={self.alphabet.p}, tracks={self.tracks}, "
            f"states={self.n_states}, transitions={self.n_transitions})"
        )


def _check_symbol(alphabet: Alphabet, sym: Symbol) -> None:
    if len(sym) != alphabet.tracks:
        raise AlphabetMismatch(f"symbol {sym} does not have {alphabet.tracks} tracks")
    for x in sym:
        if x != PAD and not 0 <= x < alphabet.size:
            raise InvalidDigit(f"letter {x} out of range for p={alphabet.p}")


def _same_alphabet(a: MultiTrackAutomaton, b: MultiTrackAutomaton) -> None:
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch(f"{a.alphabet} != {b.alphabet}")


# ---------------------------------------------------------------------------
# convolution


def convolve(words: Sequence[Sequence[int]], p: int | None = None, width: int = 1) -> Word:
    """Convolve a tuple of letter strings into one padded multi-track word.

    Strings of digit characters are accepted for convenience.
    """
    seqs = [_letters(w) for w in words]
    if p is not None:
        limit = p ** width
        for seq in seqs:
            for x in seq:
                if not 0 <= x < limit:
                    raise InvalidDigit(f"letter {x} out of range for p={p}")
    n = max((len(s) for s in seqs), default=0)
    return tuple(
        tuple(s[i] if i < len(s) else PAD for s in seqs) for i in range(n)
    )


def deconvolve(word: Sequence[Symbol], tracks: int | None = None) -> tuple:
    """Inverse of :func:`convolve`: returns one letter tuple per track."""
    if tracks is None:
        tracks = len(word[0]) if word else 0
    out = [[] for _ in range(tracks)]
    for sym in word:
        for i, x in enumerate(sym):
            if x != PAD:
                out[i].append(x)
    return tuple(tuple(o) for o in out)


def _letters(w) -> tuple:
    if isinstance(w, str):
        try:
            return tuple(int(c, 36) for c in w)
        except ValueError as exc:
            raise InvalidDigit(f"bad digit in {w!r}") from exc
    return tuple(w)


def accepts(a: MultiTrackAutomaton, words: Sequence) -> bool:
    """True iff the convolution of ``words`` is accepted by ``a``."""
    if len(words) != a.tracks:
        raise AlphabetMismatch(f"expected {a.tracks} tracks, got {len(words)}")
    word = convolve(words, a.alphabet.p, a.alphabet.width)
    return a.accepts_word(word)


# ---------------------------------------------------------------------------
# generic construction


def explore(
    alphabet: Alphabet,
    initial: Iterable[Hashable],
    successors: Callable[[Hashable], Iterable[tuple[Symbol, Hashable]]],
    is_accepting: Callable[[Hashable], bool],
    limit: int | None = None,
) -> MultiTrackAutomaton:
    """Build the reachable part of an implicitly given automaton.

    States are arbitrary hashable keys, numbered in breadth-first discovery
    order.  ``successors(key)`` yields ``(symbol, target_key)`` pairs.
    """
    ids: dict = {}
    order: list = []
    for key in initial:
        if key not in ids:
            ids[key] = len(order)
            order.append(key)
    init = frozenset(range(len(order)))
    rows = []
    i = 0
    while i < len(order):
        key = order[i]
        i += 1
        row: dict = {}
        for sym, tgt in successors(key):
            t = ids.get(tgt)
            if t is None:
                t = ids[tgt] = len(order)
                order.append(tgt)
                if limit is not None and len(order) > limit:
                    raise BudgetExceeded(
                        f"automaton construction exceeded {limit} states"
                    )
            row.setdefault(sym, set()).add(t)
        rows.append({s: tuple(sorted(t)) if len(t) > 1 else (next(iter(t)),) for s, t in row.items()})
    accepting = frozenset(ids[k] for k in order if is_accepting(k))
    return MultiTrackAutomaton(alphabet, tuple(rows), init, accepting)


def empty_automaton(alphabet: Alphabet) -> MultiTrackAutomaton:
    return MultiTrackAutomaton(alphabet, ({},), frozenset({0}), frozenset())


def epsilon_automaton(alphabet: Alphabet) -> MultiTrackAutomaton:
    """Accepts only the empty word (for 0 tracks: the 'true' automaton)."""
    return MultiTrackAutomaton(alphabet, ({},), frozenset({0}), frozenset({0}))


def valid_convolutions(alphabet: Alphabet) -> MultiTrackAutomaton:
    """Recognizer of every valid k-track convolution."""
    k = alphabet.tracks
    track = padded_track(universal_track(alphabet))
    return product_universe(alphabet, [track] * k)


def universal_track(alphabet: Alphabet) -> MultiTrackAutomaton:
    """1-track DFA accepting every string of letters."""
    a1 = alphabet.with_tracks(1)
    row = {(x,): (0,) for x in a1.letters}
    return MultiTrackAutomaton(a1, (row,), frozenset({0}), frozenset({0}))


def padded_track(track: MultiTrackAutomaton) -> MultiTrackAutomaton:
    """Extend a 1-track DFA with a PAD tail: accepts ``w PAD^n`` for w in L."""
    if track.tracks != 1:
        raise AlphabetMismatch("padded_track expects a 1-track automaton")
    track = track if track.deterministic else determinize(track)
    tail = track.n_states
    rows = [dict(r) for r in track.delta]
    for q in track.accepting:
        rows[q][(PAD,)] = (tail,)
    rows.append({(PAD,): (tail,)})
    return MultiTrackAutomaton(
        track.alphabet, tuple(rows), track.initial, track.accepting | {tail}
    )


def product_universe(alphabet: Alphabet, tracks: Sequence[MultiTrackAutomaton]) -> MultiTrackAutomaton:
    """Materialize the product of padded 1-track DFAs (one per track)."""
    k = len(tracks)
    if k != alphabet.tracks:
        raise AlphabetMismatch("one padded track automaton per track required")
    all_pad = (PAD,) * k
    rows_of = [[[(s[0], t[0]) for s, t in sorted(r.items())] for r in tr.delta] for tr in tracks]

    def succ(key):
        options = [rows_of[i][q] for i, q in enumerate(key)]
        for combo in itertools.product(*options):
            sym = tuple(c[0] for c in combo)
            if sym == all_pad:
                continue
            yield sym, tuple(c[1] for c in combo)

    init = tuple(next(iter(tr.initial)) for tr in tracks)
    return explore(alphabet, [init], succ,
                   lambda key: all(q in tracks[i].accepting for i, q in enumerate(key)))


# ---------------------------------------------------------------------------
# determinization and minimization


def determinize(a: MultiTrackAutomaton, budget: Budget | None = None) -> MultiTrackAutomaton:
    """Subset construction over the symbols actually present."""
    if a.deterministic:
        return a
    limit = (budget or DEFAULT_BUDGET).max_subsets
    delta = a.delta

    def succ(subset):
        moves: dict = {}
        for q in subset:
            for sym, targets in delta[q].items():
                bucket = moves.get(sym)
                if bucket is None:
                    moves[sym] = set(targets)
                else:
                    bucket.update(targets)
        for sym in sorted(moves):
            yield sym, frozenset(moves[sym])

    acc = a.accepting
    return explore(a.alphabet, [frozenset(a.initial)], succ,
                   lambda s: not acc.isdisjoint(s), limit=limit)


def _trim(a: MultiTrackAutomaton) -> tuple[list[int], dict[int, int]]:
    """States both reachable and co-reachable, in ascending order."""
    seen = set(a.initial)
    queue = deque(a.initial)
    while queue:
        q = queue.popleft()
        for targets in a.delta[q].values():
            for t in targets:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
    back: dict[int, list[int]] = {}
    for q in seen:
        for targets in a.delta[q].values():
            for t in targets:
                back.setdefault(t, []).append(q)
    live = set(q for q in a.accepting if q in seen)
    queue = deque(live)
    while queue:
        q = queue.popleft()
        for s in back.get(q, ()):
            if s not in live:
                live.add(s)
                queue.append(s)
    keep = sorted(live)
    return keep, {q: i for i, q in enumerate(keep)}


def minimize(a: MultiTrackAutomaton, budget: Budget | None = None) -> MultiTrackAutomaton:
    """Canonical minimal DFA with the rejecting sink left implicit.

    Nondeterministic input is determinized first.  Partition refinement is
    Hopcroft's algorithm on the trimmed partial DFA: the implicit sink is its
    own block and never needs to act as a splitter.  States of the result
    are numbered breadth-first from the initial state, visiting symbols in
    sorted order, so equal languages give identical automata.
    """
    d = determinize(a, budget)
    keep, index = _trim(d)
    if not keep or next(iter(d.initial)) not in index:
        return empty_automaton(d.alphabet)
    n = len(keep)
    rows = []
    for q in keep:
        rows.append({s: index[t[0]] for s, t in d.delta[q].items() if t[0] in index})
    inverse: list[list[tuple]] = [[] for _ in range(n)]
    for q, row in enumerate(rows):
        for sym, t in row.items():
            inverse[t].append((sym, q))

    block_of = [0] * n
    acc = [index[q] for q in d.accepting if q in index]
    acc_set = set(acc)
    rej = [q for q in range(n) if q not in acc_set]
    blocks: list[set] = []
    for part in (acc, rej):
        if part:
            bid = len(blocks)
            blocks.append(set(part))
            for q in part:
                block_of[q] = bid
    waiting = list(range(len(blocks)))
    in_waiting = set(waiting)
    while waiting:
        splitter = waiting.pop()
        in_waiting.discard(splitter)
        by_symbol: dict = {}
        for t in blocks[splitter]:
            for sym, src in inverse[t]:
                by_symbol.setdefault(sym, set()).add(src)
        for sources in by_symbol.values():
            touched: dict[int, list[int]] = {}
            for q in sources:
                touched.setdefault(block_of[q], []).append(q)
            for bid, members in touched.items():
                block = blocks[bid]
                if len(members) == len(block):
                    continue
                inside = set(members)
                outside = block - inside
                small, large = (inside, outside) if len(inside) <= len(outside) else (outside, inside)
                blocks[bid] = large
                new = len(blocks)
                blocks.append(small)
                for q in small:
                    block_of[q] = new
                waiting.append(new)
                in_waiting.add(new)

    start = block_of[index[next(iter(d.initial))]]
    rep = [next(iter(b)) for b in blocks]
    order = {start: 0}
    queue = deque([start])
    out_rows = []
    while queue:
        b = queue.popleft()
        row = {}
        for sym in sorted(rows[rep[b]]):
            tb = block_of[rows[rep[b]][sym]]
            if tb not in order:
                order[tb] = len(order)
                queue.append(tb)
            row[sym] = (order[tb],)
        out_rows.append(row)
    accepting = frozenset(order[b] for b in order if rep[b] in acc_set)
    return MultiTrackAutomaton(d.alphabet, tuple(out_rows), frozenset({0}), accepting)


# ---------------------------------------------------------------------------
# Boolean operations


def complement(
    a: MultiTrackAutomaton,
    within: Sequence[MultiTrackAutomaton] | None = None,
    budget: Budget | None = None,
) -> MultiTrackAutomaton:
    """Complement relative to a product universe of padded track languages.

    ``within`` defaults to the valid-convolution language; the model checker
    passes the padded domain automaton for each track instead.  The universe
    is walked lazily together with the determinized input, so only reachable
    product states are built.
    """
    k = a.tracks
    if within is None:
        within = [padded_track(universal_track(a.alphabet))] * k
    if len(within) != k:
        raise AlphabetMismatch("one universe automaton per track required")
    d = determinize(a, budget)
    limit = (budget or DEFAULT_BUDGET).max_subsets
    rows_of = [[[(s[0], t[0]) for s, t in sorted(r.items())] for r in tr.delta] for tr in within]
    all_pad = (PAD,) * k
    ddelta = d.delta
    sink = -1

    def succ(key):
        us, q = key
        row = ddelta[q] if q != sink else None
        for combo in itertools.product(*[rows_of[i][u] for i, u in enumerate(us)]):
            sym = tuple(c[0] for c in combo)
            if sym == all_pad:
                continue
            nq = sink
            if row is not None:
                t = row.get(sym)
                if t is not None:
                    nq = t[0]
            yield sym, (tuple(c[1] for c in combo), nq)

    def accepting(key):
        us, q = key
        if q != sink and q in d.accepting:
            return False
        return all(u in within[i].accepting for i, u in enumerate(us))

    init = (tuple(next(iter(tr.initial)) for tr in within), next(iter(d.initial)))
    return explore(a.alphabet, [init], succ, accepting, limit=limit)


_TAIL = -1


def join(
    a: MultiTrackAutomaton,
    a_names: Sequence,
    b: MultiTrackAutomaton,
    b_names: Sequence,
    budget: Budget | None = None,
) -> tuple[MultiTrackAutomaton, tuple]:
    """Intersection of two automata whose tracks are labelled by names.

    The result has one track per distinct name, in sorted name order; tracks
    shared by name must agree letter by letter.  An operand whose words are
    shorter than the combined word continues in an implicit all-PAD tail
    once it has accepted.
    """
    if not a.alphabet.same_letters(b.alphabet):
        raise AlphabetMismatch(f"{a.alphabet} vs {b.alphabet}")
    if len(a_names) != a.tracks or len(b_names) != b.tracks:
        raise AlphabetMismatch("track name count does not match track count")
    names = tuple(sorted(set(a_names) | set(b_names)))
    k = len(names)
    alphabet = a.alphabet.with_tracks(k)
    limit = (budget or DEFAULT_BUDGET).max_subsets
    a_pos = {n: i for i, n in enumerate(a_names)}
    b_pos = {n: i for i, n in enumerate(b_names)}
    na = len(a_names)
    shared = [n for n in a_names if n in b_pos]
    key_a = [a_pos[n] for n in shared]
    key_b = [b_pos[n] for n in shared]
    sources = [a_pos[n] if n in a_pos else na + b_pos[n] for n in names]
    if k == 0:
        merge = lambda sa, sb: ()  # noqa: E731
    elif k == 1:
        src = sources[0]
        merge = lambda sa, sb: ((sa + sb)[src],)  # noqa: E731
    else:
        getter = itemgetter(*sources)
        merge = lambda sa, sb: getter(sa + sb)  # noqa: E731
    if not key_a:
        proj_a = lambda s: ()  # noqa: E731
        proj_b = proj_a
    elif len(key_a) == 1:
        ia, ib = key_a[0], key_b[0]
        proj_a = lambda s: (s[ia],)  # noqa: E731
        proj_b = lambda s: (s[ib],)  # noqa: E731
    else:
        ga, gb = itemgetter(*key_a), itemgetter(*key_b)
        proj_a, proj_b = ga, gb
    pad_a = (PAD,) * na
    pad_b = (PAD,) * b.tracks
    all_pad = (PAD,) * k

    def options(aut, q, pad):
        if q == _TAIL:
            return [(pad, (_TAIL,))]
        opts = list(aut.delta[q].items())
        if q in aut.accepting:
            opts.append((pad, (_TAIL,)))
        return opts

    b_index: dict = {}

    def b_options(q):
        idx = b_index.get(q)
        if idx is None:
            idx = {}
            for sb, tb in options(b, q, pad_b):
                idx.setdefault(proj_b(sb), []).append((sb, tb))
            b_index[q] = idx
        return idx

    def succ(key):
        qa, qb = key
        idx = b_options(qb)
        for sa, ta in options(a, qa, pad_a):
            matches = idx.get(proj_a(sa))
            if not matches:
                continue
            for sb, tb in matches:
                sym = merge(sa, sb)
                if sym == all_pad:
                    continue
                for x in ta:
                    for y in tb:
                        yield sym, (x, y)

    def accepting(key):
        qa, qb = key
        return (qa == _TAIL or qa in a.accepting) and (qb == _TAIL or qb in b.accepting)

    init = [(x, y) for x in sorted(a.initial) for y in sorted(b.initial)]
    return explore(alphabet, init, succ, accepting, limit=limit), names


def union(a: MultiTrackAutomaton, b: MultiTrackAutomaton) -> MultiTrackAutomaton:
    """Disjoint-union NFA (same alphabet)."""
    _same_alphabet(a, b)
    off = a.n_states
    rows = list(a.delta)
    for row in b.delta:
        rows.append({s: tuple(t + off for t in ts) for s, ts in row.items()})
    return MultiTrackAutomaton(
        a.alphabet,
        tuple(rows),
        a.initial | frozenset(q + off for q in b.initial),
        a.accepting | frozenset(q + off for q in b.accepting),
    )


def intersect(a: MultiTrackAutomaton, b: MultiTrackAutomaton, budget: Budget | None = None) -> MultiTrackAutomaton:
    _same_alphabet(a, b)
    names = tuple(range(a.tracks))
    return join(a, names, b, names, budget)[0]


def combine(a: MultiTrackAutomaton, b: MultiTrackAutomaton, mode: str,
            budget: Budget | None = None) -> MultiTrackAutomaton:
    """Boolean combination: ``mode`` is ``and``, ``or`` or ``and_not``."""
    _same_alphabet(a, b)
    if mode == "and":
        return intersect(a, b, budget)
    if mode == "or":
        return union(a, b)
    if mode == "and_not":
        return intersect(a, complement(b, budget=budget), budget)
    raise ValueError(f"unknown combine mode {mode!r}")


def project(a: MultiTrackAutomaton, track: int) -> MultiTrackAutomaton:
    """Existentially quantify one track away.

    Transitions whose remaining letters are all PAD can only occur after
    every remaining track has ended; they are folded into acceptance
    (padding saturation), so witnesses longer than the other tracks count.
    """
    k = a.tracks
    if not 0 <= track < k:
        raise TrackOutOfRange(f"track {track} not in 0..{k - 1}")
    rest = k - 1
    all_pad = (PAD,) * rest
    tail_moves: list[set] = [set() for _ in a.states]
    rows = []
    for q, row in enumerate(a.delta):
        new: dict = {}
        for sym, targets in row.items():
            s = sym[:track] + sym[track + 1:]
            if s == all_pad:
                tail_moves[q].update(targets)
                continue
            bucket = new.get(s)
            if bucket is None:
                new[s] = set(targets)
            else:
                bucket.update(targets)
        rows.append({s: tuple(sorted(t)) for s, t in new.items()})
    # states that reach acceptance through tail moves only
    back: dict[int, list[int]] = {}
    for q, ts in enumerate(tail_moves):
        for t in ts:
            back.setdefault(t, []).append(q)
    accepting = set(a.accepting)
    queue = deque(accepting)
    while queue:
        q = queue.popleft()
        for s in back.get(q, ()):
            if s not in accepting:
                accepting.add(s)
                queue.append(s)
    return MultiTrackAutomaton(a.alphabet.with_tracks(rest), tuple(rows), a.initial, frozenset(accepting))


def cylindrify(a: MultiTrackAutomaton, track: int,
               universe: MultiTrackAutomaton | None = None) -> MultiTrackAutomaton:
    """Insert an unconstrained track at position ``track``.

    ``universe`` optionally restricts the new track to a 1-track language.
    """
    k = a.tracks
    if not 0 <= track <= k:
        raise TrackOutOfRange(f"insert position {track} not in 0..{k}")
    if universe is None:
        universe = universal_track(a.alphabet)
    # label old tracks by their final positions so join keeps the order
    names = [i if i < track else i + 1 for i in range(k)]
    out, order = join(a, names, universe, [track])
    assert order == tuple(range(k + 1))
    return out


def rename_tracks(a: MultiTrackAutomaton, perm: Sequence[int]) -> MultiTrackAutomaton:
    """New automaton whose track ``i`` is old track ``perm[i]``."""
    if sorted(perm) != list(range(a.tracks)):
        raise TrackOutOfRange(f"{perm} is not a permutation of the tracks")
    if list(perm) == list(range(a.tracks)):
        return a
    g = itemgetter(*perm)
    if a.tracks == 1:
        return a
    rows = tuple({g(s): t for s, t in row.items()} for row in a.delta)
    return MultiTrackAutomaton(a.alphabet, rows, a.initial, a.accepting)


# ---------------------------------------------------------------------------
# queries


def reachable(a: MultiTrackAutomaton) -> set:
    seen = set(a.initial)
    queue = deque(a.initial)
    while queue:
        q = queue.popleft()
        for targets in a.delta[q].values():
            for t in targets:
                if t not in seen:
                    seen.add(t)
                    queue.append(t)
    return seen


def is_empty(a: MultiTrackAutomaton) -> bool:
    return reachable(a).isdisjoint(a.accepting)


def witness(a: MultiTrackAutomaton) -> Word | None:
    """Shortest accepted word, ties broken by symbol order (PAD last)."""
    back: dict[int, list[int]] = {}
    for q, row in enumerate(a.delta):
        for targets in row.values():
            for t in targets:
                back.setdefault(t, []).append(q)
    dist = {q: 0 for q in a.accepting}
    queue = deque(a.accepting)
    while queue:
        q = queue.popleft()
        for s in back.get(q, ()):
            if s not in dist:
                dist[s] = dist[q] + 1
                queue.append(s)
    starts = [q for q in a.initial if q in dist]
    if not starts:
        return None
    remaining = min(dist[q] for q in starts)
    current = {q for q in starts if dist[q] == remaining}
    word = []
    while remaining > 0:
        best = None
        best_targets: set = set()
        for q in current:
            for sym, targets in a.delta[q].items():
                good = [t for t in targets if dist.get(t) == remaining - 1]
                if not good:
                    continue
                if best is None or sym < best:
                    best = sym
                    best_targets = set(good)
                elif sym == best:
                    best_targets.update(good)
        word.append(best)
        current = best_targets
        remaining -= 1
    return tuple(word)


def equivalent(a: MultiTrackAutomaton, b: MultiTrackAutomaton, budget: Budget | None = None) -> bool:
    """Language equality: both difference languages are empty."""
    _same_alphabet(a, b)
    da, db = determinize(a, budget), determinize(b, budget)
    sink = -1
    start = (next(iter(da.initial)), next(iter(db.initial)))
    seen = {start}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        ax = x != sink and x in da.accepting
        by = y != sink and y in db.accepting
        if ax != by:
            return False
        rx = da.delta[x] if x != sink else {}
        ry = db.delta[y] if y != sink else {}
        for sym in set(rx) | set(ry):
            tx = rx.get(sym)
            ty = ry.get(sym)
            nxt = (tx[0] if tx else sink, ty[0] if ty else sink)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return True


def enumerate_words(alphabet: Alphabet, max_len: int) -> Iterator[Word]:
    """Every valid convolution of length <= max_len (brute force)."""
    k = alphabet.tracks
    letters = list(alphabet.letters) + [PAD]
    all_pad = (PAD,) * k

    def rec(prefix, ended):
        yield tuple(prefix)
        if len(prefix) == max_len:
            return
        per_track = [[PAD] if e else letters for e in ended]
        for sym in itertools.product(*per_track):
            if sym == all_pad:
                continue
            prefix.append(sym)
            yield from rec(prefix, tuple(x == PAD for x in sym))
            prefix.pop()

    yield from rec([], (False,) * k)


def finite_language(a: MultiTrackAutomaton, limit: int = 10_000) -> list:
    """All accepted words, provided the language is finite and small."""
    live = set(_trim(a)[0]) if a.n_states else set()
    words = []
    on_path: set = set()

    def rec(q, prefix):
        if q in on_path:
            raise ValueError("language is infinite")
        if q in a.accepting:
            words.append(tuple(prefix))
            if len(words) > limit:
                raise BudgetExceeded(f"more than {limit} words")
        on_path.add(q)
        for sym in sorted(a.delta[q]):
            for t in a.delta[q][sym]:
                if t in live:
                    prefix.append(sym)
                    rec(t, prefix)
                    prefix.pop()
        on_path.discard(q)

    for q in sorted(a.initial):
        if q in live:
            rec(q, [])
    return sorted(set(words))
