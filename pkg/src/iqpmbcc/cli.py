"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 size-limit error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import compiler, engine, oracle, postselect, runtime
from .circuit import Angle, BitString, parse_circuit, serialize_circuit
from .distribution import (
    OutcomeDistribution,
    format_distribution,
    format_histogram,
    format_probability,
    parse_distribution,
    total_variation_distance,
)
from .errors import IqpError, ParseError, PostselectionFailed, SizeLimitError

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_SIZE = 3


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{path}: no such file")
    return p.read_text(encoding="utf-8")


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _bits(value: str | None, flag: str = "--x") -> BitString:
    if value is None:
        raise UsageError(f"{flag} is required")
    try:
        return BitString.from_str(value)
    except ValueError:
        raise UsageError(f"{flag} {value!r} is not a bit string") from None


def _load_circuit(path: str):
    return parse_circuit(_read(path), path)


def _load_pattern(path: str):
    return compiler.parse_pattern(_read(path), path)


def _load_dist(path: str) -> OutcomeDistribution:
    return parse_distribution(_read(path), path)


def _first_word(text: str) -> str:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            return line.split()[0]
    return ""


def _side_outputs(args, dist: OutcomeDistribution, title: str, reference=None) -> None:
    if getattr(args, "histogram", None):
        Path(args.histogram).write_text(format_histogram(dist), encoding="utf-8")
    if getattr(args, "figure", None):
        from .report import plot_distribution

        plot_distribution(dist, args.figure, title=title, reference=reference)


def cmd_simulate(args) -> int:
    circuit = _load_circuit(args.input)
    x = _bits(args.x)
    if args.oracle:
        dist = oracle.simulate_iqp_dense(circuit, x)
    else:
        dist = engine.output_distribution(circuit, x)
    _emit(format_distribution(dist), args.output)
    _side_outputs(args, dist, f"{Path(args.input).name}, x={x}")
    return EXIT_OK


def _sample_header(seed: int, count: int, **extra) -> str:
    fields = " ".join(f"{k}={v}" for k, v in extra.items())
    return f"# sampler={engine.SAMPLER_ID} seed={seed} count={count} {fields}".rstrip() + "\n"


def cmd_sample(args) -> int:
    circuit = _load_circuit(args.input)
    x = _bits(args.x)
    draws = engine.sample(circuit, x, args.seed, args.count)
    _emit(_sample_header(args.seed, args.count) + "".join(f"{b}\n" for b in draws), args.output)
    if args.figure:
        from .report import plot_distribution

        idx = np.array([b.to_int() for b in draws])
        emp = postselect.empirical_distribution(idx, circuit.q)
        plot_distribution(
            emp, args.figure, title=f"{args.count} samples", reference=engine.output_distribution(circuit, x),
            reference_label="exact", label="empirical",
        )
    return EXIT_OK


def cmd_compile(args) -> int:
    pattern = compiler.compile_to_pattern(_load_circuit(args.input))
    _emit(compiler.serialize_pattern(pattern), args.output)
    return EXIT_OK


def cmd_pattern_to_iqp(args) -> int:
    circuit = compiler.pattern_to_iqp(_load_pattern(args.input))
    _emit(serialize_circuit(circuit), args.output)
    return EXIT_OK


def _mbcc_instance(args) -> runtime.MbccInstance:
    if args.input is None and args.manifest is None:
        raise UsageError("mbcc needs --input (pattern or resource file) and/or --manifest")
    if args.input is None:
        return runtime.load_manifest(Path(args.manifest))
    text = _read(args.input)
    kind = _first_word(text)
    if kind == "pattern":
        pattern = compiler.parse_pattern(text, args.input)
        resource = runtime.resource_from_pattern(pattern)
        if args.manifest is None:
            return runtime.MbccInstance(resource, runtime.processor_from_pattern(pattern, _bits(args.x)))
    elif kind == "dist":
        resource = runtime.ResourceDistribution(parse_distribution(text, args.input), f"file {args.input}")
        if args.manifest is None:
            raise UsageError("a resource file needs --manifest for the processor")
    else:
        raise ParseError("expected a pattern or distribution file", 1, args.input)
    manifest = runtime.parse_manifest(_read(args.manifest), args.manifest, Path(args.manifest).parent)
    return runtime.MbccInstance(resource, manifest.processor)


def cmd_mbcc(args) -> int:
    inst = _mbcc_instance(args)
    if args.exact:
        dist = runtime.exact_mbcc_distribution(inst)
        _emit(format_distribution(dist), args.output)
        _side_outputs(args, dist, "MBCC push-forward")
        return EXIT_OK
    outs = inst.run_many(args.seed, args.count)
    header = _sample_header(args.seed, args.count, polls=inst.polls)
    _emit(header + "".join(f"{b}\n" for b in outs), args.output)
    return EXIT_OK


def cmd_postselect(args) -> int:
    circuit = _load_circuit(args.input)
    x = _bits(args.x)
    if args.post is None:
        raise UsageError("--post is required")
    try:
        spec = postselect.PostselectionSpec.parse(args.post)
    except ValueError as exc:
        raise UsageError(f"--post: {exc}") from None
    if args.count is None:
        res = postselect.postselect(engine.output_distribution(circuit, x), spec)
        kept = ",".join(map(str, res.kept))
        head = (
            f"# post={spec} event_probability={format_probability(res.probability)} kept={kept}\n"
            "# conditioning generalises all-zeros post-selection to arbitrary required values\n"
        )
        _emit(head + format_distribution(res.dist), args.output)
        _side_outputs(args, res.dist, f"post-selected on {spec}")
        return EXIT_OK
    runs = postselect.postselected_samples(circuit, x, spec, args.seed, args.count, args.max_tries)
    header = _sample_header(args.seed, args.count, post=spec, total_tries=sum(r.tries for r in runs))
    _emit(header + "".join(f"{r.outcome} tries={r.tries}\n" for r in runs), args.output)
    return EXIT_OK


def _parse_angles(text: str) -> list[Angle]:
    try:
        return [Angle.parse(tok.strip()) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"--angles: {exc}") from None


def cmd_gadget_search(args) -> int:
    angles = _parse_angles(args.angles)
    w = postselect.find_nonlinear_gadget(angles, args.max_qubits, args.max_gates, args.inputs)
    if w is None:
        _emit("found=false\n", args.output)
        return EXIT_OK
    replay = postselect.replay_gadget(w)
    pairs = [
        ("found", "true"),
        ("qubits", str(w.circuit.q)),
        ("inputs", str(w.circuit.n)),
        ("gates", str(len(w.circuit.gates))),
        ("post", str(w.spec)),
        ("output", str(w.output)),
        ("truth_table", "".join(map(str, w.truth_table))),
        ("event_probabilities", ",".join(format_probability(p) for p in w.event_probabilities)),
        ("replay_truth_table", "".join(map(str, replay.truth_table))),
        ("replay_output_probabilities", ",".join(format_probability(p) for p in replay.output_probabilities)),
        ("candidates_checked", str(w.candidates_checked)),
        ("note", "output position and post-selected set are designated by the search, not fixed to the last qubit"),
    ]
    text = "".join(f"{k}={v}\n" for k, v in pairs)
    text += "".join(f"circuit: {line}\n" for line in serialize_circuit(w.circuit).splitlines())
    _emit(text, args.output)
    if args.circuit_out:
        Path(args.circuit_out).write_text(serialize_circuit(w.circuit), encoding="utf-8")
    if args.figure:
        from .report import plot_truth_table

        plot_truth_table(w.truth_table, w.event_probabilities, w.circuit.n, args.figure, title=f"post {w.spec}")
    return EXIT_OK


def _read_samples(path: str, k: int) -> np.ndarray:
    out = []
    for lineno, raw in enumerate(_read(path).splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word = line.split()[0]
        if len(word) != k or any(c not in "01" for c in word):
            raise ParseError(f"sample {word!r} is not a {k}-bit string", lineno, path)
        out.append(int(word, 2))
    if not out:
        raise ParseError("no samples", None, path)
    return np.array(out, dtype=np.int64)


def cmd_verify(args) -> int:
    exact = _load_dist(args.against)
    if args.samples:
        report = postselect.goodness_of_fit(_read_samples(args.samples, exact.k), exact, args.alpha)
        ok = report.passed and (args.tol is None or report.tvd <= args.tol)
        lines = report.as_pairs() + [("tol", "none" if args.tol is None else f"{args.tol:g}")]
        _emit(report.to_text() + "".join(f"{k}={v}\n" for k, v in lines), args.output)
        if args.figure:
            from .report import plot_distribution

            emp = postselect.empirical_distribution(_read_samples(args.samples, exact.k), exact.k)
            plot_distribution(emp, args.figure, title="samples vs exact", reference=exact,
                              reference_label="exact", label="empirical")
        return EXIT_OK if ok else EXIT_VERIFY
    if args.input is None:
        raise UsageError("verify needs --input <dist> or --samples <file>")
    dist = _load_dist(args.input)
    if dist.k != exact.k:
        raise UsageError(f"{args.input} has k={dist.k}, {args.against} has k={exact.k}")
    tol = 1e-10 if args.tol is None else args.tol
    tvd = total_variation_distance(dist, exact)
    ok = tvd <= tol
    _emit(f"tvd={tvd:.15g}\ntol={tol:g}\nresult={'pass' if ok else 'fail'}\n", args.output)
    if args.figure:
        from .report import plot_distribution

        plot_distribution(dist, args.figure, title=f"TVD {tvd:.3g}", reference=exact, reference_label=args.against,
                          label=args.input)
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iqpmbcc", description="IQP* circuits, MBQC patterns and MBCC runs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, x=False, seed=False, figure=False, histogram=False):
        p.add_argument("--input", "-i", help="input file")
        p.add_argument("--output", "-o", help="output file (default stdout)")
        if x:
            p.add_argument("--x", help="input bit string")
        if seed:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--count", type=int, default=1)
        if histogram:
            p.add_argument("--histogram", metavar="PATH", help="write '<bitstring> <probability>' rows for every outcome")
        if figure:
            p.add_argument("--figure", metavar="PATH", help="render a figure (png/pdf/svg)")
        return p

    p = common(sub.add_parser("simulate", help="exact output distribution"), x=True, figure=True, histogram=True)
    p.add_argument("--oracle", action="store_true", help="use the dense reference simulator")
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("sample", help="seeded samples"), x=True, seed=True, figure=True)
    p.set_defaults(func=cmd_sample)

    common(sub.add_parser("compile", help="circuit -> measurement pattern")).set_defaults(func=cmd_compile)
    common(sub.add_parser("pattern-to-iqp", help="measurement pattern -> IQP* circuit")).set_defaults(
        func=cmd_pattern_to_iqp
    )

    p = common(sub.add_parser("mbcc", help="run or push forward an MBCC instance"), x=True, seed=True, figure=True,
               histogram=True)
    p.add_argument("--manifest", help="processor manifest (resource, matrix, offset)")
    p.add_argument("--exact", action="store_true", help="emit the exact push-forward table")
    p.set_defaults(func=cmd_mbcc)

    p = common(sub.add_parser("postselect", help="condition outcomes on fixed bit values"), x=True, figure=True,
               histogram=True)
    p.add_argument("--post", help="<index>=<bit>,... (0-based positions)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, help="repetition runs instead of the exact table")
    p.add_argument("--max-tries", type=int, default=1000)
    p.set_defaults(func=cmd_postselect)

    p = sub.add_parser("gadget-search", help="search for a post-selected non-linear gadget")
    p.add_argument("--output", "-o")
    p.add_argument("--angles", default=",".join(f"pi*{k}/8" for k in range(1, 17)))
    p.add_argument("--max-qubits", type=int, default=4)
    p.add_argument("--max-gates", type=int, default=8)
    p.add_argument("--inputs", type=int, default=2)
    p.add_argument("--circuit-out", help="also write the witness circuit file")
    p.add_argument("--figure", metavar="PATH")
    p.set_defaults(func=cmd_gadget_search)

    p = common(sub.add_parser("verify", help="compare distributions or test samples"), figure=True)
    p.add_argument("--against", required=True, help="exact distribution file")
    p.add_argument("--samples", help="samples file (one bit string per line)")
    p.add_argument("--tol", type=float, help="TVD tolerance")
    p.add_argument("--alpha", type=float, default=0.01, help="chi-square significance level")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    prog = f"iqpmbcc {args.command}"
    try:
        if getattr(args, "count", None) is not None and args.count < 1:
            raise UsageError("--count must be positive")
        if args.command in ("simulate", "sample", "compile", "pattern-to-iqp", "postselect") and args.input is None:
            raise UsageError("--input is required")
        return args.func(args)
    except SizeLimitError as exc:
        print(f"{prog}: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except PostselectionFailed as exc:
        print(f"{prog}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (UsageError, ParseError, IqpError, ValueError) as exc:
        print(f"{prog}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
