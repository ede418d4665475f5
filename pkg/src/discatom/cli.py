"""Command-line front end.

Exit codes: 0 success, 1 property failure, 2 parse/format error,
3 switching-term failure, 4 size cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from . import __version__
from .algebra import (
    AlgebraFormatError,
    CapExceeded,
    SwitchingTermError,
    VarietyPresentation,
    all_subalgebras,
    enumerate_congruences,
    load_algebra,
    subalgebra,
    validate_algebra,
    verify_switching_term,
)
from .fixtures import fixture_names, load_fixture
from .free import DEFAULT_MAX_ELEMENTS, build_free_algebra, element_of_term
from .preorder import PreorderSpec, is_atomic, strict_pairs, verify_preorder
from .synthesis import (
    DiagramFormula,
    audit_compilation,
    compile_to_equation,
    coordinate_diagram,
    synthesize_cover,
)
from .terms import SWITCH_VARS, TermError, parse_term, print_term

EXIT_OK, EXIT_PROPERTY, EXIT_PARSE, EXIT_SWITCH, EXIT_CAP = 0, 1, 2, 3, 4


@dataclass
class SessionConfig:
    paths: list[str] = field(default_factory=list)
    fixture: str | None = None
    switch: str | None = None
    generators: int = 1
    le_lhs: str | None = None
    le_rhs: str | None = None
    order: str | None = None
    max_elements: int = DEFAULT_MAX_ELEMENTS
    max_subalgebra_size: int = 16
    max_congruence_size: int = 8
    output: str = "human"

    def __post_init__(self):
        if self.generators < 1:
            raise ValueError("--generators must be at least 1")
        for cap in (self.max_elements, self.max_subalgebra_size, self.max_congruence_size):
            if cap <= 0:
                raise ValueError("size caps must be positive")

    @classmethod
    def from_args(cls, args) -> SessionConfig:
        return cls(
            paths=list(getattr(args, "files", []) or []),
            fixture=args.fixture,
            switch=args.switch,
            generators=getattr(args, "generators", 1),
            le_lhs=getattr(args, "le_lhs", None),
            le_rhs=getattr(args, "le_rhs", None),
            order=getattr(args, "order", None),
            max_elements=args.max_elements,
            max_subalgebra_size=args.max_subalgebra_size,
            max_congruence_size=args.max_congruence_size,
            output=args.output,
        )

    def presentation(self) -> VarietyPresentation:
        if self.fixture:
            fx = load_fixture(self.fixture)
            if not self.paths and self.switch is None:
                return fx.presentation
            gens = fx.presentation.generators
        else:
            gens = ()
        if self.paths:
            gens = tuple(load_algebra(p) for p in self.paths)
        if not gens:
            raise UsageError("give algebra files or --fixture")
        switch_text = self.switch
        if switch_text is None:
            if not self.fixture:
                raise UsageError("--switch is required with algebra files")
            switch_text = load_fixture(self.fixture).switch_text
        switch = parse_term(switch_text, gens[0].signature, SWITCH_VARS)
        return VarietyPresentation(gens, switch)

    def preorder(self, vp: VarietyPresentation) -> PreorderSpec:
        if self.le_lhs is not None or self.le_rhs is not None:
            if self.le_lhs is None or self.le_rhs is None:
                raise UsageError("--le-lhs and --le-rhs go together")
            return PreorderSpec.parse(self.le_lhs, self.le_rhs, vp.signature)
        if self.fixture:
            fx = load_fixture(self.fixture)
            name = self.order or next(iter(fx.order_texts))
            if name not in fx.order_texts:
                raise UsageError(f"fixture {fx.name} has no order {name!r}; known: {', '.join(fx.order_texts)}")
            return fx.order(name)
        raise UsageError("give --le-lhs/--le-rhs or --fixture with --order")


class UsageError(ValueError):
    pass


def _emit(cfg: SessionConfig, human_lines: list[str], structured: dict, block: bool = False) -> None:
    """Human text, structured JSON, or (for certificates) both."""
    if cfg.output == "structured":
        print(json.dumps(structured, indent=2))
        return
    print("\n".join(human_lines))
    if block:
        print("--- structured ---")
        print(json.dumps(structured, indent=2))


# ---------------------------------------------------------------- commands

def cmd_validate(cfg: SessionConfig) -> int:
    targets = []
    if cfg.fixture:
        fx = load_fixture(cfg.fixture)
        targets = [(g.name, g) for g in fx.presentation.generators]
        switch_text = cfg.switch or fx.switch_text
    else:
        switch_text = cfg.switch
    status = EXIT_OK
    lines, results = [], []
    for path in cfg.paths:
        try:
            targets.append((path, load_algebra(path)))
        except AlgebraFormatError as exc:
            lines.append(f"{path}: parse error: {exc}")
            results.append({"source": path, "valid": False, "errors": [str(exc)]})
            status = max(status, EXIT_PARSE)
    for source, alg in targets:
        entry = {"source": source, "algebra": alg.name, "size": alg.size}
        report = validate_algebra(alg)
        entry["valid"] = report.ok
        entry["errors"] = report.violations
        if not report.ok:
            lines.append(f"{source}: invalid")
            lines.extend(f"  {v}" for v in report.violations)
            status = max(status, EXIT_PARSE)
            results.append(entry)
            continue
        line = f"{source}: {alg.name} ok ({alg.size} elements, {len(alg.signature.symbols)} operations)"
        if switch_text is not None:
            switch = parse_term(switch_text, alg.signature, SWITCH_VARS)
            ok, bad = verify_switching_term(alg, switch)
            entry["switching"] = ok
            if ok:
                line += f"; switching term verified on {alg.size ** 4} tuples"
            else:
                tup, value = bad
                entry["counterexample"] = {"x": tup[0], "y": tup[1], "u": tup[2], "v": tup[3], "value": value}
                line += f"; switching term FAILS at (x,y,u,v)={tup}: got {value}"
                status = EXIT_SWITCH if status in (EXIT_OK, EXIT_SWITCH) else status
        lines.append(line)
        results.append(entry)
    _emit(cfg, lines, {"results": results, "exit": status})
    return status


def cmd_build_free(cfg: SessionConfig, dump: bool = False) -> int:
    vp = cfg.presentation()
    fa = build_free_algebra(vp, cfg.generators, cfg.max_elements)
    X = fa.variables
    names = ",".join(g.name for g in vp.generators)
    lines = [f"free algebra on {{{', '.join(X.names)}}} over {names}: {fa.size} elements",
             f"coordinates: {len(fa.coordinates)}"]
    lines += [f"  term size {s}: +{n}" for s, n in fa.layers]
    dumped = []
    if dump:
        for i in range(fa.size):
            vec = "[" + ",".join(str(int(v)) for v in fa.values[i]) + "]"
            text = print_term(fa.witness(i), X)
            lines.append(f"{i} {vec} {text}")
            dumped.append({"index": i, "values": [int(v) for v in fa.values[i]], "witness": text})
    structured = {
        "generators": [g.name for g in vp.generators],
        "variables": list(X.names),
        "coordinates": len(fa.coordinates),
        "elements": fa.size,
        "layers": [{"term_size": s, "new": n} for s, n in fa.layers],
    }
    if dump:
        structured["dump"] = dumped
    _emit(cfg, lines, structured)
    return EXIT_OK


def _preorder_report_dict(report) -> dict:
    return {
        "reflexive": report.reflexive,
        "transitive": report.transitive,
        "antisymmetric": report.antisymmetric,
        "counterexamples": {k: list(v) for k, v in report.counterexamples.items()},
    }


def cmd_check_preorder(cfg: SessionConfig) -> int:
    vp = cfg.presentation()
    spec = cfg.preorder(vp)
    fa = build_free_algebra(vp, cfg.generators, cfg.max_elements)
    report = verify_preorder(spec, fa)
    lines = [f"F has {fa.size} elements",
             f"reflexive: {report.reflexive}", f"transitive: {report.transitive}",
             f"antisymmetric: {report.antisymmetric}"]
    for law, cex in report.counterexamples.items():
        lines.append(f"  {law} counterexample: {cex}")
    lines.append("pre-order: yes" if report.is_preorder else "pre-order: NO")
    _emit(cfg, lines, {"elements": fa.size, **_preorder_report_dict(report), "preorder": report.is_preorder})
    return EXIT_OK if report.is_preorder else EXIT_PROPERTY


def _element(fa, text: str):
    return element_of_term(fa, parse_term(text, fa.signature, fa.variables))


def cmd_find_cover(cfg: SessionConfig, alpha: str, beta: str) -> int:
    vp = cfg.presentation()
    spec = cfg.preorder(vp)
    fa = build_free_algebra(vp, cfg.generators, cfg.max_elements)
    a, b = _element(fa, alpha), _element(fa, beta)
    cert = synthesize_cover(fa, spec, a, b)
    data = cert.to_dict(fa)
    X = fa.variables
    lines = [
        f"alpha = {data['alpha']}  (element {a.index})",
        f"beta  = {data['beta']}  (element {b.index})",
        f"separating coordinate {cert.coordinate}: {fa.coordinate_label(cert.coordinate)}",
        f"A = {data['subalgebra']}, h(alpha) = {cert.A.embedding[cert.h(a.index)]}, "
        f"h(beta) = {cert.A.embedding[cert.h(b.index)]}, cover c = {data['c']}",
        "representatives: " + ", ".join(f"{k} -> {v}" for k, v in data["rho"].items()),
        f"diagram: {len(cert.eta.equations)} equations, {len(cert.eta.disequations)} disequations",
        f"compiled with {cert.pair.strategy}: |delta| = {cert.pair.delta.size}, |epsilon| = {cert.pair.epsilon.size}",
        f"gamma term size {cert.gamma_term.size}; gamma is element {cert.gamma.index} = "
        f"{print_term(cert.gamma.witness, X)}",
    ]
    for name, value in cert.checks.as_dict().items():
        lines.append(f"  {name}: {value}")
    _emit(cfg, lines, data, block=True)
    return EXIT_OK if cert.checks.passed else EXIT_PROPERTY


def cmd_atomic_check(cfg: SessionConfig, oracle: bool = True, synthesis: bool = True) -> int:
    vp = cfg.presentation()
    spec = cfg.preorder(vp)
    fa = build_free_algebra(vp, cfg.generators, cfg.max_elements)
    X = fa.variables
    report = verify_preorder(spec, fa)
    pairs = strict_pairs(spec, fa)
    lines = [f"F has {fa.size} elements; {len(pairs)} strict pairs"]
    out = {"elements": fa.size, "preorder": _preorder_report_dict(report), "strict_pairs": len(pairs)}
    if not report.is_preorder:
        lines.append(f"relation is not a pre-order: {report.counterexamples}")
        _emit(cfg, lines, out)
        return EXIT_PROPERTY
    status = EXIT_OK
    if oracle:
        atomic, cex = is_atomic(spec, fa)
        out["oracle"] = {"atomic": atomic, "counterexample": list(cex) if cex else None}
        lines.append(f"oracle: {'atomic' if atomic else f'NOT atomic, interval {cex}'}")
        if not atomic:
            status = EXIT_PROPERTY
    if synthesis:
        certs, failures = [], 0
        for a, b in pairs:
            cert = synthesize_cover(fa, spec, a, b)
            ok = cert.checks.passed
            failures += not ok
            certs.append({"alpha": a, "beta": b, "coordinate": cert.coordinate,
                          "c": cert.A.embedding[cert.c], "gamma": cert.gamma.index, "passed": ok})
            lines.append(f"  {print_term(fa.witness(a), X)} < {print_term(fa.witness(b), X)}: "
                         f"cover {print_term(cert.gamma.witness, X)} via coordinate {cert.coordinate} "
                         f"{'ok' if ok else 'FAILED'}")
        out["synthesis"] = {"atomic": failures == 0, "failures": failures, "certificates": certs}
        lines.append(f"synthesis: {len(pairs) - failures}/{len(pairs)} certificates verified")
        if failures:
            status = EXIT_PROPERTY
    if oracle and synthesis:
        agree = out["oracle"]["atomic"] == out["synthesis"]["atomic"]
        out["agree"] = agree
        lines.append(f"oracle and synthesis agree: {agree}")
        if not agree:
            status = EXIT_PROPERTY
    _emit(cfg, lines, out)
    return status


def parse_diagram(text: str, sig, variables) -> DiagramFormula:
    """Lines ``<term> = <term>`` or ``<term> != <term>``; ``#`` starts a comment."""
    eqs, neqs = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "!=" in line:
            left, right = line.split("!=", 1)
            target = neqs
        elif "=" in line:
            left, right = line.split("=", 1)
            target = eqs
        else:
            raise AlgebraFormatError("expected '<term> = <term>' or '<term> != <term>'", lineno)
        try:
            target.append((parse_term(left, sig, variables), parse_term(right, sig, variables)))
        except TermError as exc:
            raise AlgebraFormatError(str(exc), lineno) from None
    return DiagramFormula(tuple(eqs), tuple(neqs))


def cmd_compile_formula(cfg: SessionConfig, coordinate: int | None, eta_path: str | None) -> int:
    vp = cfg.presentation()
    fa = build_free_algebra(vp, cfg.generators, cfg.max_elements)
    X = fa.variables
    out: dict = {}
    if eta_path is not None:
        with open(eta_path, encoding="utf-8") as fh:
            eta = parse_diagram(fh.read(), vp.signature, X)
        pair = compile_to_equation(eta, vp)
        audit = None
    else:
        if coordinate is None or not 0 <= coordinate < len(fa.coordinates):
            raise UsageError(f"--coordinate must be in 0..{len(fa.coordinates) - 1}")
        data = coordinate_diagram(fa, coordinate)
        eta, pair = data.eta, data.pair
        audit = audit_compilation(fa, data, vp.si_inventory(cfg.max_subalgebra_size))
        out["coordinate"] = fa.coordinate_label(coordinate)
    eqs, neqs = eta.render(X)
    out.update({
        "eta_equations": eqs,
        "eta_disequations": neqs,
        "strategy": pair.strategy,
        "delta": print_term(pair.delta, X),
        "epsilon": print_term(pair.epsilon, X),
    })
    lines = [f"diagram: {len(eqs)} equations, {len(neqs)} disequations",
             f"strategy: {pair.strategy}",
             f"delta = {out['delta']}", f"epsilon = {out['epsilon']}"]
    status = EXIT_OK
    if audit is not None:
        out["audit"] = {"assignments": audit.assignments, "eta_true": audit.eta_true,
                        "escapes": audit.escapes, "ok": audit.ok}
        lines.append(f"audit over SI members: {audit.assignments} assignments, "
                     f"{audit.eta_true} satisfy the diagram, {audit.escapes} degenerate escapes, "
                     f"{'ok' if audit.ok else 'VIOLATIONS'}")
        if not audit.ok:
            status = EXIT_PROPERTY
    _emit(cfg, lines, out)
    return status


def cmd_subalgebras(cfg: SessionConfig) -> int:
    vp = cfg.presentation()
    lines, out = [], []
    status = EXIT_OK
    for g in vp.generators:
        entry = {"generator": g.name, "subuniverses": []}
        lines.append(f"{g.name}:")
        for universe in all_subalgebras(g, cfg.max_subalgebra_size):
            B = subalgebra(g, universe)
            congs = enumerate_congruences(B, cfg.max_congruence_size)
            simple = len(congs) == 2 or B.size == 1
            if B.size >= 2 and len(congs) != 2:
                status = EXIT_PROPERTY
            entry["subuniverses"].append({"elements": list(universe), "congruences": len(congs)})
            lines.append(f"  {{{', '.join(map(str, universe))}}}: {len(congs)} congruences"
                         f"{'' if simple else ' (NOT simple)'}")
        out.append(entry)
    _emit(cfg, lines, {"generators": out})
    return status


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("files", nargs="*", help="algebra files (one per generator)")
    common.add_argument("--fixture", choices=fixture_names(), help="use a bundled fixture")
    common.add_argument("--switch", help="switching term over x y u v")
    common.add_argument("--max-elements", type=int, default=DEFAULT_MAX_ELEMENTS)
    common.add_argument("--max-subalgebra-size", type=int, default=16)
    common.add_argument("--max-congruence-size", type=int, default=8)
    common.add_argument("--output", choices=("human", "structured"), default="human")

    free = argparse.ArgumentParser(add_help=False)
    free.add_argument("-m", "--generators", type=int, default=1, help="number of free generators")

    order = argparse.ArgumentParser(add_help=False)
    order.add_argument("--le-lhs", help="left term of the defining equation, over x y")
    order.add_argument("--le-rhs", help="right term of the defining equation, over x y")
    order.add_argument("--order", help="named pre-order of the fixture")

    parser = argparse.ArgumentParser(prog="discatom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check algebra files and the switching term")
    p = sub.add_parser("build-free", parents=[common, free], help="materialise the free algebra")
    p.add_argument("--dump", action="store_true", help="print every element with its witness")
    sub.add_parser("check-preorder", parents=[common, free, order], help="verify the relation on F")
    p = sub.add_parser("find-cover", parents=[common, free, order], help="synthesise one cover term")
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p = sub.add_parser("atomic-check", parents=[common, free, order], help="covers for all strict pairs")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--oracle-only", action="store_true")
    group.add_argument("--synthesis-only", action="store_true")
    p = sub.add_parser("compile-formula", parents=[common, free], help="diagram to single equation")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--coordinate", type=int)
    src.add_argument("--eta", help="file of '<term> = <term>' / '<term> != <term>' lines")
    sub.add_parser("subalgebras", parents=[common], help="subuniverses and congruence counts")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = SessionConfig.from_args(args)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "build-free":
            return cmd_build_free(cfg, args.dump)
        if args.command == "check-preorder":
            return cmd_check_preorder(cfg)
        if args.command == "find-cover":
            return cmd_find_cover(cfg, args.alpha, args.beta)
        if args.command == "atomic-check":
            return cmd_atomic_check(cfg, oracle=not args.synthesis_only, synthesis=not args.oracle_only)
        if args.command == "compile-formula":
            return cmd_compile_formula(cfg, args.coordinate, args.eta)
        if args.command == "subalgebras":
            return cmd_subalgebras(cfg)
    except (AlgebraFormatError, TermError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SwitchingTermError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SWITCH
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
