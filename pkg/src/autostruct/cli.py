"""``autostruct`` command line.

Exit codes: 0 success (``decide``: true, ``lasso``: accept, ``verify``: all
passed), 1 negative verdict or failed verification, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .automata import Budget
from .buchi import accepts_lasso, format_lasso, make_hp_hat, parse_lasso
from .errors import AutostructError
from .formats import load_aut, load_presentation, to_dot, write_aut
from .logic import compile_formula, decide
from .presentations import (
    commutator,
    decode,
    encode,
    format_element,
    format_generator_word,
    inverse,
    make_presentation,
    mul_elements,
    parse_element,
)
from .verify import verify_presentation


class CliError(Exception):
    pass


def _load_group(args):
    group = args.group
    if group.startswith("file:"):
        return load_presentation(group[5:])
    if group == "hp-hat":
        return make_hp_hat(args.p)
    if group not in ("fp", "gp", "hp"):
        raise CliError(f"unknown group {group!r}; use fp, gp, hp, hp-hat or file:<path>")
    return make_presentation(group, args.p)


def _finite_group(args):
    pres = _load_group(args)
    if not hasattr(pres, "signature"):
        raise CliError(f"{args.command} needs a finite presentation, not {args.group}")
    return pres


def _budget(args) -> Budget:
    return Budget.from_env(max_subsets=args.max_states, max_tracks=args.max_tracks)


def _formula(args) -> str:
    text = args.formula_opt if args.formula_opt is not None else args.formula
    if text is None:
        raise CliError("no formula given")
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    return text


def _element(pres, text: str) -> str:
    text = text.strip()
    if text == "e" or text[:1].isdigit() or "|" in text or text == "":
        return parse_element(pres, text)
    return encode(pres, text)


def _describe(pres, s: str) -> dict:
    out = {"element": format_element(pres, s)}
    if pres.kind != "custom":
        out["word"] = format_generator_word(decode(pres, s))
    return out


def _emit(args, text: str, data: dict) -> None:
    out = json.dumps(data, sort_keys=True) if args.format == "json" else text
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out if out.endswith("\n") else out + "\n")
    else:
        print(out)


# ---------------------------------------------------------------------------
# commands


def cmd_decide(args) -> int:
    pres = _finite_group(args)
    text = _formula(args)
    verdict = decide(pres, text, _budget(args))
    _emit(args, "true" if verdict else "false", {"formula": text.strip(), "result": verdict})
    return 0 if verdict else 1


def cmd_define(args) -> int:
    pres = _finite_group(args)
    text = _formula(args)
    ds = compile_formula(pres, text, _budget(args))
    if args.format == "dot":
        body = to_dot(ds.automaton, "definable")
    else:
        comments = [f"group {pres.name}", f"variables {' '.join(ds.variables) or '-'}"]
        body = write_aut(ds.automaton, comments)
    if args.format == "json":
        body = json.dumps({"variables": list(ds.variables), "aut": body}, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return 0


def _arith(args, op) -> int:
    pres = _finite_group(args)
    values = [_element(pres, x) for x in args.elements]
    result = op(pres, *values)
    info = _describe(pres, result)
    text = info["element"] + (f"  (= {info['word']})" if "word" in info else "")
    _emit(args, text, info)
    return 0


def cmd_mul(args) -> int:
    def product(pres, *xs):
        out = pres.identity
        for x in xs:
            out = mul_elements(pres, out, x)
        return out

    if not args.elements:
        raise CliError("mul needs at least one element")
    return _arith(args, product)


def cmd_inv(args) -> int:
    if len(args.elements) != 1:
        raise CliError("inv takes exactly one element")
    return _arith(args, inverse)


def cmd_comm(args) -> int:
    if len(args.elements) != 2:
        raise CliError("comm takes exactly two elements")
    return _arith(args, commutator)


def cmd_verify(args) -> int:
    pres = _finite_group(args)
    report = verify_presentation(pres, _budget(args))
    _emit(args, report.format_text(timings=args.timings), report.to_dict())
    return 0 if report.ok else 1


def cmd_lasso(args) -> int:
    pres = _load_group(args)
    if args.group != "hp-hat":
        raise CliError("lasso queries need --group hp-hat")
    try:
        aut = pres.relations[args.relation]
    except KeyError:
        raise CliError(f"unknown relation {args.relation!r}; have {sorted(pres.relations)}") from None
    if len(args.tracks) != aut.tracks:
        raise CliError(f"{args.relation} takes {aut.tracks} elements, got {len(args.tracks)}")
    word = parse_lasso(args.tracks, pres.p, pres.alphabet.width)
    verdict = accepts_lasso(aut, word)
    _emit(args, "accept" if verdict else "reject",
          {"relation": args.relation, "lasso": format_lasso(word, pres.p, pres.alphabet.width),
           "result": verdict})
    return 0 if verdict else 1


def cmd_dot(args) -> int:
    aut = load_aut(args.path)
    body = to_dot(aut)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="gp", help="fp, gp, hp, hp-hat or file:<path.pres>")
    common.add_argument("-p", type=int, default=3, help="prime (default 3)")
    common.add_argument("--format", choices=("text", "json", "dot"), default="text")
    common.add_argument("-o", "--output", help="write the result to this file")
    common.add_argument("--max-states", type=int, help="determinization subset budget")
    common.add_argument("--max-tracks", type=int, help="largest intermediate track count")

    parser = argparse.ArgumentParser(
        prog="autostruct", description="Automatic presentations of class-2 nilpotent groups."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_text in (("decide", cmd_decide, "decide a first-order sentence"),
                                ("define", cmd_define, "compile a formula to an automaton")):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.add_argument("formula", nargs="?", help="formula text or @file")
        sp.add_argument("-f", "--formula", dest="formula_opt", help="formula text or @file")
        sp.set_defaults(func=fn)

    for name, fn, help_text in (("mul", cmd_mul, "multiply elements"),
                                ("inv", cmd_inv, "invert an element"),
                                ("comm", cmd_comm, "commutator g^-1 h^-1 g h")):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.add_argument("elements", nargs="*", help="element strings or generator words")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("verify", parents=[common], help="check the group laws")
    sp.add_argument("--timings", action="store_true", help="show per-check times")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("lasso", parents=[common], help="membership of ultimately periodic words")
    sp.add_argument("relation", help="relation name, e.g. M")
    sp.add_argument("tracks", nargs="+", help='one element per argument, e.g. "1^w|0^w"')
    sp.set_defaults(func=cmd_lasso)

    sp = sub.add_parser("dot", help="render an .aut/.baut file as Graphviz")
    sp.add_argument("path")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AutostructError, CliError, OSError) as exc:
        print(f"autostruct: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"autostruct: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
