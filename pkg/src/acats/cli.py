"""Command-line front end.

Exit codes: 0 when every check passes, 1 on axiom violations, 2 on input
or usage errors. Reports are tab-delimited lines, or JSON with ``--json``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

from . import io as docio
from .core import (
    ACStructure,
    check_amplitude,
    check_transitivity,
    constant_amplitude,
    epsilon_witness,
    extract_composition,
    is_separated,
    separate,
    validate,
)
from .free import MoveGraphConfig, PathWord, dmax_estimate, verify_embedding, word
from .geometry import PLPath, PLPathSet, check_2metric_axioms, plpath_dmax, two_metric_to_ac
from .metcat import induce_ac, validate_metcat
from .metcor import check_metric, validate_correspondence
from .report import DEFAULT_TOLERANCE, DEFAULT_WITNESS_CAP, ACError, PreconditionError, ValidationReport

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


class Output:
    """Collects records and renders them as tab-delimited text or JSON."""

    def __init__(self, as_json: bool):
        self.as_json = as_json
        self.records: list[list] = []
        self.data: dict = {}

    def row(self, *fields) -> None:
        self.records.append(list(fields))

    def report(self, rep: ValidationReport, key: str = "report") -> None:
        self.data[key] = rep.as_dict()
        self.records.extend([line.split("\t") for line in rep.lines()])

    def emit(self, stream) -> None:
        if self.as_json:
            data = _jsonable(self.data)
            data["records"] = [[_json_val(f) for f in r] for r in self.records]
            stream.write(json.dumps(data, indent=1, sort_keys=True, allow_nan=False) + "\n")
        else:
            for r in self.records:
                stream.write("\t".join(_fmt(f) for f in r) + "\n")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return _json_val(v)


def _json_val(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, (int, float, str)) or v is None:
        return v
    return str(v)


# -- helpers ---------------------------------------------------------------


def _tolerance(args) -> float | None:
    if args.tolerance is not None:
        return args.tolerance
    env = os.environ.get("ACATS_TOLERANCE")
    if env:
        try:
            return float(env)
        except ValueError:
            raise InputError(f"ACATS_TOLERANCE is not a number: {env!r}") from None
    return None


def _load(args, kinds: Sequence[str] | None = None):
    kind, obj, extras = docio.load(args.path, _tolerance(args))
    if getattr(args, "kind", None) and args.kind != kind:
        raise InputError(f"document kind is {kind!r}, expected {args.kind!r}")
    if kinds is not None and kind not in kinds:
        raise InputError(f"{args.path}: kind {kind!r} not supported here (need one of {', '.join(kinds)})")
    return kind, obj, extras


def _as_ac(kind: str, obj, extras: dict) -> tuple[ACStructure, dict | None]:
    """AC view of an ac, metcat or two-metric document."""
    if kind == "ac":
        return obj, extras.get("amplitude")
    if kind == "metcat":
        return induce_ac(obj), None
    if kind == "two-metric":
        return two_metric_to_ac(obj)
    raise InputError(f"kind {kind!r} has no AC structure")


def _resolve_id(ac: ACStructure, token: str):
    for a in ac.arrows:
        if str(a.id) == token:
            return a.id
    raise InputError(f"unknown arrow {token!r}")


def _resolve_object(ac: ACStructure, token: str):
    for x in ac.objects:
        if str(x) == token:
            return x
    raise InputError(f"unknown object {token!r}")


def parse_word(ac: ACStructure, text: str) -> PathWord:
    """``f,g`` or ``(f,g)``; the empty word at ``x`` is ``()_x``."""
    text = text.strip()
    if text.startswith("()_"):
        return word(ac, (), _resolve_object(ac, text[3:]))
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    tokens = [t.strip() for t in text.split(",")] if text else []
    if not tokens or any(not t for t in tokens):
        raise InputError(f"cannot parse word {text!r}")
    return word(ac, [_resolve_id(ac, t) for t in tokens])


def _parse_alpha(ac: ACStructure, spec: str | None, amplitude: dict | None):
    if spec is None:
        return None
    if spec == "amplitude":
        if amplitude is None:
            raise InputError("document has no amplitude")
        return amplitude
    if spec.startswith("amplitude/"):
        if amplitude is None:
            raise InputError("document has no amplitude")
        try:
            c = float(spec.split("/", 1)[1])
        except ValueError:
            raise InputError(f"bad --alpha {spec!r}") from None
        if not c > 0:
            raise InputError("--alpha divisor must be positive")
        return {k: v / c for k, v in amplitude.items()}
    try:
        return constant_amplitude(ac, float(spec))
    except ValueError:
        raise InputError(f"--alpha must be a number, 'amplitude' or 'amplitude/<c>', got {spec!r}") from None


# -- subcommands -----------------------------------------------------------


def cmd_validate(args, out: Output) -> int:
    kind, obj, extras = _load(args)
    cap = args.witness_cap
    out.row("kind", kind)
    if kind == "ac":
        rep = validate(obj, witness_cap=cap)
        if "amplitude" in extras:
            rep.merge(check_amplitude(obj, extras["amplitude"], witness_cap=cap), "amplitude.")
    elif kind == "metcat":
        rep = validate_metcat(obj, witness_cap=cap)
    elif kind == "metcor-space":
        rep = check_metric(obj)
    elif kind == "correspondence":
        rep = ValidationReport(witness_cap=cap)
        rep.merge(check_metric(obj.source), "source.")
        rep.merge(check_metric(obj.target), "target.")
        rep.merge(validate_correspondence(obj, k=args.k, functional=args.functional, witness_cap=cap))
    elif kind == "two-metric":
        rep = check_2metric_axioms(obj)
        ac, _ = two_metric_to_ac(obj, check=False)
        rep.merge(validate(ac, witness_cap=cap), "coarse.")
    else:
        rep = ValidationReport(witness_cap=cap)
        for i, p in enumerate(obj.paths):
            rep.tick("endpoints")
            if p.vertices[0] != obj.paths[0].vertices[0] or p.vertices[-1] != obj.paths[0].vertices[-1]:
                rep.add("endpoints", (f"path{i}",), 1.0, 0.0)
    out.report(rep)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_dmax(args, out: Output) -> int:
    kind, obj, extras = _load(args, ("ac", "metcat", "two-metric", "plpath"))
    tol = _tolerance(args) or DEFAULT_TOLERANCE
    if kind == "plpath":
        if len(obj.paths) < 2:
            raise InputError("plpath document needs two paths")
        a, b = obj.paths[0], obj.paths[1]
        L = args.max_len if args.max_len is not None else max(len(a.vertices), len(b.vertices)) + 1
        cfg = MoveGraphConfig(L, tol)
        est = plpath_dmax(None, a, b, cfg, obj.extra_points or None)
        out.row("from", "path0")
        out.row("to", "path1")
        out.row("max_len", cfg.max_len)
        out.row("dmax", est.value)
        out.row("kind", est.kind)
        out.data.update(dmax=est.value, kind=est.kind, max_len=cfg.max_len)
        return EXIT_OK
    ac, _ = _as_ac(kind, obj, extras)
    cfg = MoveGraphConfig(4 if args.max_len is None else args.max_len, ac.tolerance)
    code = EXIT_OK
    if args.from_ is not None or args.to is not None:
        if args.from_ is None or args.to is None:
            raise InputError("--from and --to go together")
        a, b = parse_word(ac, args.from_), parse_word(ac, args.to)
        if (a.src, a.dst) != (b.src, b.dst):
            raise InputError(f"{a} and {b} do not have the same endpoints")
        if max(len(a), len(b)) > cfg.max_len:
            raise InputError(f"--max-len {cfg.max_len} is shorter than the query words")
        est = dmax_estimate(ac, a, b, cfg)
        out.row("from", str(a))
        out.row("to", str(b))
        out.row("max_len", cfg.max_len)
        out.row("dmax", est.value)
        out.row("kind", est.kind)
        out.data.update({"from": str(a), "to": str(b), "dmax": est.value, "kind": est.kind, "max_len": cfg.max_len})
    elif not args.verify:
        raise InputError("give --from/--to or --verify")
    if args.verify:
        rep = verify_embedding(ac, cfg)
        out.report(rep, "verify")
        code = EXIT_OK if rep.passed else EXIT_FAIL
    return code


def cmd_gen(args, out: Output) -> int:
    from . import generators as gen

    tol = _tolerance(args)
    if args.what in ("random-metcat", "planar-2metric") and args.params:
        raise InputError(f"{args.what} takes no positional parameters")
    if args.what == "finite-example":
        if len(args.params) not in (2, 3):
            raise InputError("finite-example takes u v [phi]")
        try:
            u, v, *rest = map(float, args.params)
        except ValueError:
            raise InputError("finite-example parameters must be numbers") from None
        if not all(math.isfinite(x) for x in [u, v, *rest]):
            raise InputError("finite-example parameters must be finite")
        obj = gen.finite_example(u, v, rest[0] if rest else 1.0)
    elif args.what == "random-metcat":
        size = 4 if args.size is None else args.size
        if not 1 <= size <= 8:
            raise InputError("--size must be between 1 and 8")
        obj = gen.random_metcat(args.seed, max_objects=size)
    elif args.what == "planar-2metric":
        size = 5 if args.size is None else args.size
        if size < 0:
            raise InputError("--size must be nonnegative")
        obj = gen.planar_2metric(args.seed, size)
    elif args.what == "plpath-pair":
        if len(args.params) not in (1, 2):
            raise InputError("plpath-pair takes POLYGON [SPLIT]")
        split = None
        if len(args.params) == 2:
            try:
                split = int(args.params[1])
            except ValueError:
                raise InputError("split must be an integer") from None
        a, b = gen.plpath_pair(args.params[0], split)
        obj = PLPathSet((PLPath(tuple(map(tuple, a))), PLPath(tuple(map(tuple, b)))))
    out.raw = docio.dumps(obj, tol)
    return EXIT_OK


def cmd_yoneda(args, out: Output) -> int:
    from .yoneda import yoneda_image

    kind, obj, extras = _load(args, ("ac", "metcat", "two-metric"))
    ac, _ = _as_ac(kind, obj, extras)
    u = _resolve_object(ac, args.base)
    img = yoneda_image(ac, u, co=args.co)
    out.row("base", u)
    out.row("variant", "co" if args.co else "covariant")
    for x in ac.objects:
        sp = img.spaces[x]
        out.row("object", x, len(sp), ",".join(map(str, sp.points)))
    for a in ac.arrows:
        c = img.arrows[a.id]
        out.row("arrow", a.id, f"{len(c.source)}x{len(c.target)}",
                ";".join(",".join(_fmt(float(v)) for v in r) for r in c.values))
    rep = ValidationReport(witness_cap=args.witness_cap)
    tol = ac.tolerance
    for f, g, h, d in ac.triples():
        dv = img.defect(f, g, h)
        rep.tick("defect_bound")
        if dv > d + tol:
            rep.add("defect_bound", (f, g, h), dv, d)
    out.report(rep)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_quotient(args, out: Output) -> int:
    kind, obj, extras = _load(args, ("ac", "metcat", "two-metric"))
    ac, _ = _as_ac(kind, obj, extras)
    q, mapping = separate(ac)
    out.row("separated", is_separated(ac))
    out.row("arrows", len(ac.arrows), len(q.arrows))
    for a in ac.arrows:
        out.row("class", a.id, mapping[a.id])
    out.data["mapping"] = {str(k): _json_val(v) for k, v in mapping.items()}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(docio.dumps(q))
        out.row("written", args.out)
    return EXIT_OK


def cmd_compose(args, out: Output) -> int:
    kind, obj, extras = _load(args, ("ac", "metcat", "two-metric"))
    ac, _ = _as_ac(kind, obj, extras)
    eps, wit = epsilon_witness(ac)
    out.row("epsilon", eps)
    if wit is not None:
        out.row("epsilon_witness", *wit)
    try:
        table = extract_composition(ac)
    except PreconditionError as e:
        out.row("status", "FAIL")
        out.row("reason", str(e))
        out.data.update(passed=False, reason=str(e), epsilon=eps)
        return EXIT_FAIL
    out.row("status", "PASS")
    for (f, g), h in table.items():
        out.row("compose", f, g, h)
    out.data.update(passed=True, epsilon=eps,
                    compose=[[_json_val(f), _json_val(g), _json_val(h)] for (f, g), h in table.items()])
    return EXIT_OK


def cmd_transitivity(args, out: Output) -> int:
    kind, obj, extras = _load(args, ("ac", "metcat", "two-metric"))
    ac, amp = _as_ac(kind, obj, extras)
    alpha = _parse_alpha(ac, args.alpha, amp)
    rep = check_transitivity(ac, alpha, side=args.side, witness_cap=args.witness_cap)
    out.report(rep)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_region(args, out: Output) -> int:
    from .region import sweep

    tol = _tolerance(args) or DEFAULT_TOLERANCE
    if args.step <= 0 or args.max < 0:
        raise InputError("need --step > 0 and --max >= 0")
    sw = sweep(args.max, args.step, args.phi, tol)
    out.row("grid", len(sw.us), len(sw.vs), args.step)
    out.row("accepted", int(sw.accepted.sum()))
    bad = sw.mismatches(tol) if args.phi == 1.0 else []
    if args.phi == 1.0:
        out.row("mismatches", len(bad))
        for u, v in bad:
            out.row("mismatch", u, v)
    if args.points:
        for i, u in enumerate(sw.us):
            for j, v in enumerate(sw.vs):
                out.row("point", float(u), float(v), int(sw.accepted[i, j]))
    if args.plot:
        from .plotting import plot_region

        plot_region(sw, args.plot)
        out.row("figure", args.plot)
    out.data.update(accepted=int(sw.accepted.sum()), mismatches=[list(m) for m in bad])
    return EXIT_OK if not bad else EXIT_FAIL


# -- parser ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INPUT)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=None,
                        help=f"comparison tolerance (default: document value, ACATS_TOLERANCE, {DEFAULT_TOLERANCE})")
    common.add_argument("--json", action="store_true", help="machine-readable report")
    common.add_argument("--witness-cap", type=int, default=DEFAULT_WITNESS_CAP)

    p = _Parser(prog="acats", description="Check and compute with finite AC structures.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="check the axioms for a document's kind")
    s.add_argument("path")
    s.add_argument("--kind", choices=docio.KINDS)
    s.add_argument("--k", type=float, default=1.0, help="contraction constant for correspondences")
    s.add_argument("--functional", action="store_true", help="also check the functionality condition")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("dmax", parents=[common], help="maximal functorial distance between words")
    s.add_argument("path")
    s.add_argument("--from", dest="from_", metavar="WORD")
    s.add_argument("--to", metavar="WORD")
    s.add_argument("--max-len", type=int, default=None)
    s.add_argument("--verify", action="store_true", help="compare against d on every composable triple")
    s.set_defaults(func=cmd_dmax)

    s = sub.add_parser("gen", parents=[common], help="write a generated document to stdout")
    s.add_argument("what", choices=("finite-example", "random-metcat", "planar-2metric", "plpath-pair"))
    s.add_argument("params", nargs="*")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--size", type=int, default=None)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("yoneda", parents=[common], help="Yoneda image at a base object")
    s.add_argument("path")
    s.add_argument("--base", required=True)
    s.add_argument("--co", action="store_true", help="use the contravariant version")
    s.set_defaults(func=cmd_yoneda)

    s = sub.add_parser("quotient", parents=[common], help="identify arrows at distance 0")
    s.add_argument("path")
    s.add_argument("--out", help="write the quotient document here")
    s.set_defaults(func=cmd_quotient)

    s = sub.add_parser("compose", parents=[common], help="extract the composition of a 0-categoric structure")
    s.add_argument("path")
    s.set_defaults(func=cmd_compose)

    s = sub.add_parser("transitivity", parents=[common], help="check alpha-transitivity")
    s.add_argument("path")
    s.add_argument("--alpha", default=None, help="number, 'amplitude' or 'amplitude/<c>' (default 1)")
    s.add_argument("--side", choices=("left", "right", "both"), default="both")
    s.set_defaults(func=cmd_transitivity)

    s = sub.add_parser("region", parents=[common], help="sweep (u, v) for the one-object example")
    s.add_argument("--max", type=float, default=2.5)
    s.add_argument("--step", type=float, default=0.05)
    s.add_argument("--phi", type=float, default=1.0)
    s.add_argument("--points", action="store_true", help="list every grid point")
    s.add_argument("--plot", metavar="PNG", help="render the sweep to an image file")
    s.set_defaults(func=cmd_region)
    return p


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    out = Output(args.json)
    out.raw = None
    try:
        code = args.func(args, out)
    except (InputError, docio.DocumentError) as e:
        stderr.write(f"acats: error: {e}\n")
        return EXIT_INPUT
    except PreconditionError as e:
        stderr.write(f"acats: precondition: {e}\n")
        return EXIT_INPUT
    except ACError as e:
        stderr.write(f"acats: error: {e}\n")
        return EXIT_INPUT
    if out.raw is not None:
        stdout.write(out.raw)
    else:
        out.emit(stdout)
    return code


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
