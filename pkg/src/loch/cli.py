"""Command-line front end (``loch``).

Exit codes: 0 success, 1 validation failure (JSON report on stdout),
2 malformed input or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import os
import sys
from pathlib import Path

from . import io
from .errors import (ClassificationError, ConsistencyAlarm, InvalidIndex, LochError, MalformedInput,
                     PreconditionError, Report, ValidationError, Violation)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _report(check: str, report: Report, extra: dict | None = None) -> int:
    data = {"check": check, "ok": report.ok}
    if report.violation is not None:
        data["violation"] = report.violation.to_dict()
    data.update(extra or {})
    sys.stdout.write(io.dumps(data))
    return 0 if report.ok else 1


def _params(args):
    from .hata import IfsParams, parse_complex
    try:
        return IfsParams(parse_complex(args.c))
    except ValueError as exc:
        raise MalformedInput(str(exc)) from None


def _check_paths(args) -> None:
    src, dst = getattr(args, "input", None), getattr(args, "out", None)
    if src and dst and Path(src).resolve() == Path(dst).resolve():
        raise MalformedInput("input and output paths must differ")


# --------------------------------------------------------------------------
# hata


def cmd_hata_gen(args) -> int:
    from .hata import branch_table_csv, enumerate_branches
    _emit(branch_table_csv(enumerate_branches(_params(args), args.n)), args.out)
    return 0


def cmd_hata_svg(args) -> int:
    from .hata import generate_approximation, render_svg
    svg = render_svg(generate_approximation(_params(args), args.n), samples=args.samples)
    if args.out:
        Path(args.out).write_bytes(svg)
    else:
        sys.stdout.write(svg.decode("utf-8"))
    return 0


def cmd_hata_system(args) -> int:
    from .hata import build_inductive_system, format_complex
    p = _params(args)
    hs = build_inductive_system(args.variant, p, args.depth)
    extra = {"variant": args.variant, "c": format_complex(p.c), "depth": args.depth,
             "branches": [b.name for b in hs.branches]}
    data = io.measure_system_to_json(hs.system, hs.chain, extra)
    if args.samples:
        from .measure import discretize_system
        l2 = discretize_system(hs.system, args.samples)
        data["l2"] = io.hilbert_system_to_json(l2.hilbert, hs.chain)
    _emit(io.dumps(data), args.out)
    return 0


# --------------------------------------------------------------------------
# verify


def cmd_verify_coherence(args) -> int:
    from .operator import coherence_verdicts
    system, codomain, blocks, _ = io.operator_blocks_from_json(io.read_json(args.input),
                                                               Path(args.input).parent)
    v = coherence_verdicts(blocks, system, codomain)
    if not v.agree:
        raise ConsistencyAlarm("restriction and block-diagonal criteria disagree")
    worst = max(v.restriction.details["residuals"].values(), default=0.0)
    return _report("coherence", v.restriction, {"max_residual": worst})


def cmd_verify_representing(args) -> int:
    from .hilbert import check_representing
    data = io.read_json(args.input)
    if "l2" in data and "index" in data and "nodes" in data:
        data = data["l2"]
    system, _ = io.hilbert_system_from_json(data)
    rep = check_representing(system, tol=args.tol_check)
    return _report("representing", rep, {"max_commutator": rep.details.get("max", 0.0)})


def cmd_verify_measure(args) -> int:
    from .measure import system_report
    system, chain = io.measure_system_from_json(io.read_json(args.input))
    rep = system_report(system)
    if rep.ok and chain is not None:
        from .order import is_sequentially_finite
        rep = is_sequentially_finite(system.index, chain)
    return _report("measure", rep)


# --------------------------------------------------------------------------
# spectrum and models


def _load_operator(path: str, system_path: str | None = None):
    from .operator import validate_coherent
    data = io.read_json(path)
    system = chain = None
    if system_path is not None:
        system, chain = io.hilbert_system_from_json(io.read_json(system_path))
    dom, cod, blocks, ch = io.operator_blocks_from_json(data, Path(path).parent, system)
    return validate_coherent(blocks, dom, cod), (chain if chain is not None else ch)


def cmd_spectrum(args) -> int:
    from .operator import spectrum
    op, _ = _load_operator(args.input)
    sp = spectrum(op)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "nodes"])
    for z in sp.points:
        w.writerow([format(z.real, ".17g"), format(z.imag, ".17g"),
                    ";".join(io.id_str(lam) for lam in sp.nodes[z])])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_model_build(args) -> int:
    from .spectral import check_multiplicity_model, multiplicity_model
    op, chain = _load_operator(args.input, args.system)
    model = multiplicity_model(op, chain)
    _emit(io.dumps(io.multiplicity_model_to_json(model)), args.out)
    rep = check_multiplicity_model(model)
    if not rep.ok:
        return _report("model", rep)
    return 0


def cmd_model_verify(args) -> int:
    res = io.verify_model_json(io.read_json(args.input))
    tol = 1e-9
    ok = (res["residual"] <= tol and res["unitarity"] <= 1e-12 and res["dimension_ok"] and res["sup_ok"])
    v = None
    if not ok:
        tag = ("conjugation" if res["residual"] > tol else "unitary" if res["unitarity"] > 1e-12
               else "dimension" if not res["dimension_ok"] else "sup-bound")
        v = Violation(tag, "model does not reproduce the operator", (), None)
    return _report("model", Report(ok, v), {"residual": res["residual"], "unitarity": res["unitarity"],
                                            "dimension_ok": res["dimension_ok"], "sup_ok": res["sup_ok"]})


def cmd_suite(args) -> int:
    from .acceptance import run_suite
    results = run_suite(args.seed)
    for r in results:
        print(r.line)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return 0 if passed == len(results) else 1


# --------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="loch", description="Locally Hilbert space laboratory.")
    p.add_argument("--threads", type=int, default=1, help="worker threads for per-node eigen-solves")
    p.add_argument("--tol", type=_positive, help="override LOCH_TOLERANCE (default 1e-10)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    hata = sub.add_parser("hata", help="Hata set approximations").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name, fn in (("gen", cmd_hata_gen), ("svg", cmd_hata_svg), ("system", cmd_hata_system)):
        q = hata.add_parser(name)
        q.add_argument("--c", default="0.3+0.4i", help="IFS parameter as RE+IMi")
        q.set_defaults(func=fn)
        if name == "system":
            q.add_argument("--variant", choices=["linear", "branch-indexed", "branch-union"],
                           default="linear")
            q.add_argument("--depth", type=int, required=True)
            q.add_argument("--samples", type=int, default=0,
                           help="also emit the discretized L2 system with this many samples per segment")
        else:
            q.add_argument("--n", type=int, required=True)
        if name == "svg":
            q.add_argument("--samples", type=int, default=None)
        q.add_argument("--out")

    verify = sub.add_parser("verify", help="validate inputs").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    for name, fn in (("coherence", cmd_verify_coherence), ("representing", cmd_verify_representing),
                     ("measure", cmd_verify_measure)):
        q = verify.add_parser(name)
        q.add_argument("--in", dest="input", required=True)
        if name == "representing":
            q.add_argument("--tol-check", type=_positive, default=1e-10)
        q.set_defaults(func=fn)

    q = sub.add_parser("spectrum", help="spectrum of an operator net")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_spectrum)

    model = sub.add_parser("model", help="multiplicity / functional models").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    q = model.add_parser("build")
    q.add_argument("--in", dest="input", required=True)
    q.add_argument("--system", help="Hilbert system file (with chain witness) overriding the operator's")
    q.add_argument("--out")
    q.set_defaults(func=cmd_model_build)
    q = model.add_parser("verify")
    q.add_argument("--in", dest="input", required=True)
    q.set_defaults(func=cmd_model_verify)

    q = sub.add_parser("suite", help="run the acceptance suite")
    q.add_argument("--seed", type=int, default=42)
    q.set_defaults(func=cmd_suite)
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is not None:
        os.environ["LOCH_TOLERANCE"] = repr(args.tol)
    from .operator import set_threads
    set_threads(args.threads)
    try:
        _check_paths(args)
        return args.func(args)
    except (MalformedInput, InvalidIndex) as exc:
        sys.stderr.write(f"loch: malformed input: {exc}\n")
        return 2
    except (ValidationError, PreconditionError) as exc:
        v = exc.violation or Violation("precondition", str(exc))
        return _report(args.command, Report(False, v))
    except (ClassificationError, ConsistencyAlarm, LochError) as exc:
        tag = "classification" if isinstance(exc, ClassificationError) else "consistency"
        return _report(args.command, Report(False, Violation(tag, str(exc))))


def main(argv=None) -> None:
    raise SystemExit(run(argv))


if __name__ == "__main__":
    main()
