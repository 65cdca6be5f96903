"""Text formats: ``.aut`` / ``.baut`` automata, DOT export, ``.pres`` manifests.

``.aut`` is line based::

    p 3
    tracks 2
    states 4
    initial 0
    accepting 2 3
    trans 0 (1,_) 2        # PAD written as _

An optional ``width w`` line declares packed letters (the H_p encoding uses
width 2, letters ``0 .. p**2 - 1``).  ``.baut`` adds ``kind buchi`` and
forbids ``_``.  ``#`` starts a comment.  Writers emit transitions sorted by
source, symbol and target, so a canonical automaton always serializes to the
same bytes.
"""
from __future__ import annotations

import json
import os
import re

from .automata import PAD, Alphabet, MultiTrackAutomaton
from .buchi import BuchiAutomaton
from .errors import FormatError, PresentationMismatch

_TRANS = re.compile(r"^\(([^)]*)\)$")


def _symbol_text(sym) -> str:
    return "(" + ",".join("_" if x is PAD else str(x) for x in sym) + ")"


def write_aut(aut, comments=()) -> str:
    """Serialize a finite or Buchi automaton."""
    buchi = isinstance(aut, BuchiAutomaton)
    lines = [f"# {c}" for c in comments]
    if buchi:
        lines.append("kind buchi")
    lines.append(f"p {aut.alphabet.p}")
    lines.append(f"tracks {aut.alphabet.tracks}")
    if aut.alphabet.width != 1:
        lines.append(f"width {aut.alphabet.width}")
    lines.append(f"states {aut.n_states}")
    lines.append("initial " + " ".join(map(str, sorted(aut.initial))))
    lines.append("accepting " + " ".join(map(str, sorted(aut.accepting))))
    for q in range(aut.n_states):
        row = aut.delta[q]
        for sym in sorted(row):
            for t in row[sym]:
                lines.append(f"trans {q} {_symbol_text(sym)} {t}")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def read_aut(text: str):
    """Parse ``.aut`` or ``.baut`` text; returns the matching automaton type."""
    header: dict = {}
    transitions = []
    kind = "finite"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key, args = parts[0], parts[1:]
        try:
            if key == "kind":
                if args not in (["buchi"], ["finite"]):
                    raise FormatError(f"unknown kind {' '.join(args)!r}", lineno)
                kind = args[0]
            elif key in ("p", "tracks", "width", "states"):
                if len(args) != 1:
                    raise FormatError(f"{key} takes one integer", lineno)
                if key in header:
                    raise FormatError(f"{key} given twice", lineno)
                header[key] = int(args[0])
            elif key in ("initial", "accepting"):
                if key in header:
                    raise FormatError(f"{key} given twice", lineno)
                header[key] = [int(a) for a in args]
            elif key == "trans":
                if len(args) != 3:
                    raise FormatError("expected 'trans <src> (<letters>) <dst>'", lineno)
                m = _TRANS.match(args[1])
                if not m:
                    raise FormatError(f"bad symbol {args[1]!r}", lineno)
                sym = tuple(PAD if x.strip() == "_" else int(x) for x in m.group(1).split(","))
                transitions.append((lineno, int(args[0]), sym, int(args[2])))
            else:
                raise FormatError(f"unknown directive {key!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"expected an integer: {exc}", lineno) from None
    for key in ("p", "tracks", "states", "initial", "accepting"):
        if key not in header:
            raise FormatError(f"missing {key!r} directive")
    try:
        alphabet = Alphabet(header["p"], header["tracks"], header.get("width", 1))
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    cls = BuchiAutomaton if kind == "buchi" else MultiTrackAutomaton
    n = header["states"]
    for lineno, src, sym, dst in transitions:
        if kind == "buchi" and PAD in sym:
            raise FormatError("Buchi automata cannot use '_'", lineno)
        if len(sym) != alphabet.tracks:
            raise FormatError(f"symbol has {len(sym)} letters, expected {alphabet.tracks}", lineno)
        if any(x is not PAD and not 0 <= x < alphabet.size for x in sym):
            raise FormatError(f"letter out of range in {_symbol_text(sym)}", lineno)
        if not (0 <= src < n and 0 <= dst < n):
            raise FormatError("transition uses an undeclared state", lineno)
    try:
        return cls.build(alphabet, n, header["initial"], header["accepting"],
                         [(s, sym, d) for _, s, sym, d in transitions])
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def load_aut(path: str):
    with open(path, encoding="utf-8") as fh:
        return read_aut(fh.read())


def save_aut(aut, path: str, comments=()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_aut(aut, comments))


def to_dot(aut, name: str = "automaton") -> str:
    """Graphviz text; parallel edges are merged with one label per symbol."""
    lines = [f"digraph {json.dumps(name)} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
    for q in range(aut.n_states):
        shape = "doublecircle" if q in aut.accepting else "circle"
        lines.append(f"  {q} [shape={shape}];")
    for q in sorted(aut.initial):
        lines.append(f"  __start -> {q};")
    for q in range(aut.n_states):
        edges: dict = {}
        for sym in sorted(aut.delta[q]):
            for t in aut.delta[q][sym]:
                edges.setdefault(t, []).append(_symbol_text(sym))
        for t, labels in sorted(edges.items()):
            lines.append(f"  {q} -> {t} [label={json.dumps(' '.join(labels))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_presentation(path: str):
    """Load a ``.pres`` JSON manifest.

    Either ``{"group": "gp", "p": 3}`` for a built-in group, or a custom
    presentation ``{"name": ..., "domain": <aut>, "relations": {"M": <aut>},
    "constants": {"e": "..."}}`` where each ``<aut>`` is inline ``.aut`` text
    or ``{"file": "relative/path.aut"}``.
    """
    from .presentations import custom_presentation, make_presentation

    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(data, dict):
        raise FormatError("a .pres file holds a JSON object")
    if "group" in data:
        return make_presentation(data["group"], int(data.get("p", 3)))
    base = os.path.dirname(os.path.abspath(path))

    def automaton(spec):
        if isinstance(spec, str):
            aut = read_aut(spec)
        elif isinstance(spec, dict) and "file" in spec:
            aut = load_aut(os.path.join(base, spec["file"]))
        else:
            raise FormatError(f"cannot read automaton from {spec!r}")
        if isinstance(aut, BuchiAutomaton):
            raise FormatError("presentations need finite automata")
        return aut

    try:
        domain = automaton(data["domain"])
        relations = {n: automaton(s) for n, s in data["relations"].items()}
        constants = dict(data.get("constants", {}))
    except KeyError as exc:
        raise FormatError(f"missing key {exc.args[0]!r}") from None
    if domain.tracks != 1:
        raise PresentationMismatch("the domain automaton must have one track")
    return custom_presentation(data.get("name", os.path.basename(path)), domain, relations,
                               constants, data.get("identity"))
