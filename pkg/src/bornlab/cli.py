"""Command-line entry point.

Subcommands: ``derive``, ``prob``, ``check``, ``fit`` and ``sample``.
Exit codes: 0 success, 2 usage/validation error, 3 expectation failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from bornlab import __version__
from bornlab.additivity import (
    born_lattice_measure,
    check_full_additivity,
    check_lattice_axioms,
    check_orthogonal_additivity,
    odd_power_measure,
)
from bornlab.errors import ValidationError
from bornlab.fit import (
    TAU_C,
    TAU_FIT,
    TOL_RANK,
    MeasureSample,
    Verdict,
    classify,
    fit_gudder,
    general_support,
    slice_support,
)
from bornlab.io import dumps_samples, read_samples
from bornlab.measure import GudderFunctional, born_probability, derive_measure
from bornlab.pauli import (
    TOL_UNIT,
    as_unit_bloch,
    hilbert_schmidt_inner,
    overlap_probability,
    projector_from_bloch,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_EXPECTATION = 3


class UsageError(Exception):
    pass


def parse_vector(text: str, size: int) -> np.ndarray:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as comma-separated numbers") from None
    if len(vals) != size:
        raise UsageError(f"expected {size} comma-separated numbers, got {len(vals)}")
    if not all(np.isfinite(vals)):
        raise UsageError(f"non-finite component in {text!r}")
    return np.array(vals)


def parse_unit(text: str) -> np.ndarray:
    v = parse_vector(text, 3)
    try:
        return as_unit_bloch(v)
    except ValidationError as exc:
        raise UsageError(f"{exc} (vectors are not renormalized; tolerance {TOL_UNIT:g})") from None


def parse_target(text: str) -> tuple[str, object]:
    """``born``, ``gudder:c,k0,k1,k2,k3`` or ``counterexample[:m]``."""
    name, _, arg = text.partition(":")
    if name == "born" and not arg:
        return "born", None
    if name == "gudder":
        vals = parse_vector(arg, 5)
        return "gudder", GudderFunctional(vals[0], vals[1:])
    if name == "counterexample":
        try:
            m = int(arg) if arg else 3
        except ValueError:
            raise UsageError(f"bad exponent in target {text!r}") from None
        try:
            odd_power_measure([0.0, 0.0, 1.0], m)
        except ValidationError as exc:
            raise UsageError(str(exc)) from None
        return "counterexample", m
    raise UsageError(f"unknown target {text!r}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and any(isinstance(x, (dict, list)) for x in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        val = " ".join(repr(x) for x in obj) if isinstance(obj, list) else obj
        yield prefix[:-1], val


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for key, val in _flatten(report):
        w.writerow([key, json.dumps(val) if not isinstance(val, str) else val])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


def envelope(command: str, config: dict, body: dict) -> dict:
    return {"tool": "bornlab", "version": __version__, "command": command, "config": config, **body}


def _config(args, *keys) -> dict:
    return {k: getattr(args, k) for k in keys}


def cmd_derive(args) -> int:
    n = parse_unit(args.bloch)
    f, trace = derive_measure(n)
    body = {"c": f.c, "k": [float(x) for x in f.k], "trace": trace.to_dict()}
    emit(render(envelope("derive", _config(args, "bloch", "format"), body), args.format), args.out)
    return EXIT_OK


def cmd_prob(args) -> int:
    n_state = parse_unit(args.state)
    n_proj = parse_unit(args.proj)
    p = born_probability(n_state, n_proj)
    trace_form = hilbert_schmidt_inner(projector_from_bloch(n_state), projector_from_bloch(n_proj))
    ket_form = overlap_probability(_ket_from_bloch(n_state), _ket_from_bloch(n_proj))
    defect = max(abs(p - trace_form), abs(p - ket_form), abs(trace_form - ket_form))
    body = {
        "probability": p,
        "trace_form": trace_form,
        "ket_form": ket_form,
        "agreement_defect": defect,
    }
    emit(render(envelope("prob", _config(args, "state", "proj", "format"), body), args.format), args.out)
    return EXIT_OK


def _ket_from_bloch(n: np.ndarray) -> np.ndarray:
    # top eigenvector of the projector; any phase convention gives the same overlaps
    w, v = np.linalg.eigh(projector_from_bloch(n))
    return v[:, np.argmax(w)]


def _spawn(seed: int, k: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(k)]


def _fit_check(rs, values, expect, label, tau_c, tau_fit) -> dict:
    fit = classify(fit_gudder((rs, values)), tau_c, tau_fit)
    ok = expect(fit.verdict)
    return {"name": label, "ok": bool(ok), "report": fit.to_dict()}


def cmd_check(args) -> int:
    kind, payload = parse_target(args.target)
    anchor = parse_unit(args.bloch)
    n, tol, seed = args.samples, args.tol, args.seed
    rngs = _spawn(seed, 4)
    checks = []

    def add(name, report, expect_pass=True):
        checks.append(
            {
                "name": name,
                "expected": "pass" if expect_pass else "fail",
                "ok": report.passed == expect_pass,
                "report": report.to_dict(),
            }
        )

    if kind == "born":
        f, _ = derive_measure(anchor)
        add("orthogonal_additivity", check_orthogonal_additivity(f, n, rngs[0], tol))
        add("full_additivity", check_full_additivity(f, n, rngs[1], tol))
        add("lattice_axioms", check_lattice_axioms(born_lattice_measure(anchor), n, rngs[2], tol))
        rs = slice_support(rngs[3], max(n, 5))
        checks.append(
            _fit_check(rs, f(rs), lambda v: v is Verdict.BORN_LINEAR, "fit_slice", args.tau_c, args.tau_fit)
        )
    elif kind == "gudder":
        f = payload
        add("orthogonal_additivity", check_orthogonal_additivity(f, n, rngs[0], tol))
        rs = general_support(rngs[3], max(n, 5))
        checks.append(
            _fit_check(
                rs, f(rs), lambda v: v is not Verdict.NON_GUDDER, "fit_general", args.tau_c, args.tau_fit
            )
        )
    else:
        p = odd_power_measure(anchor, payload)
        add("lattice_axioms", check_lattice_axioms(p, n, rngs[2], tol))
        rs = slice_support(rngs[3], max(n, 5))
        checks.append(
            _fit_check(
                rs, p(rs[:, 1:]), lambda v: v is Verdict.NON_GUDDER, "fit_slice", args.tau_c, args.tau_fit
            )
        )

    all_ok = all(c["ok"] for c in checks)
    config = _config(args, "target", "bloch", "samples", "seed", "tol", "tau_c", "tau_fit", "format")
    body = {"checks": checks, "all_ok": all_ok}
    emit(render(envelope("check", config, body), args.format), args.out)
    return EXIT_OK if all_ok else EXIT_EXPECTATION


def _generate(target: str, support: str | None, n: int, seed: int, anchor: np.ndarray):
    """Return (rs, values, support) for a generator target string."""
    kind, payload = parse_target(target)
    if support is None:
        support = "slice" if kind == "counterexample" else "general"
    if support not in ("general", "slice"):
        raise UsageError(f"unknown support {support!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    rs = general_support(rng, n) if support == "general" else slice_support(rng, n)
    if kind == "born":
        f, _ = derive_measure(anchor)
        values = f(rs)
    elif kind == "gudder":
        values = payload(rs)
    else:
        if support != "slice":
            raise UsageError("counterexample measures are defined on the slice (1, n) only")
        values = odd_power_measure(anchor, payload)(rs[:, 1:])
    return rs, np.asarray(values, dtype=float), support


def cmd_sample(args) -> int:
    anchor = parse_unit(args.bloch)
    rs, values, _ = _generate(args.generate, args.support, args.samples, args.seed, anchor)
    samples = [MeasureSample(r, v) for r, v in zip(rs, values)]
    emit(dumps_samples(samples, args.format), args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    if (args.input is None) == (args.generate is None):
        raise UsageError("give exactly one of --input or --generate")
    if args.input is not None:
        samples = read_samples(args.input)
        fit = fit_gudder(samples, args.tol_rank)
        source = {"input": args.input}
    else:
        anchor = parse_unit(args.bloch)
        rs, values, support = _generate(args.generate, args.support, args.samples, args.seed, anchor)
        fit = fit_gudder((rs, values), args.tol_rank)
        source = {"generate": args.generate, "support": support, "samples": args.samples,
                  "seed": args.seed, "bloch": args.bloch}
    fit = classify(fit, args.tau_c, args.tau_fit)
    config = {**source, "tol_rank": args.tol_rank, "tau_c": args.tau_c, "tau_fit": args.tau_fit,
              "expect": args.expect, "format": args.format}
    emit(render(envelope("fit", config, {"fit": fit.to_dict()}), args.format), args.out)
    if args.expect == "linear" and fit.verdict is Verdict.NON_GUDDER:
        print("expectation failed: verdict is NonGudder", file=sys.stderr)
        return EXIT_EXPECTATION
    return EXIT_OK


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not (v > 0 and np.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bornlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bornlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="write output to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument("--seed", type=_seed, default=0)
    seeded.add_argument("--bloch", default="0,0,1", help="anchor Bloch vector, e.g. 0,0,1")

    p = sub.add_parser("derive", parents=[common], help="derive the measure anchored at a Bloch vector")
    p.add_argument("--bloch", required=True)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("prob", parents=[common], help="Born probability with three-form cross-check")
    p.add_argument("--state", required=True)
    p.add_argument("--proj", required=True)
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("check", parents=[common, seeded], help="run additivity and axiom suites")
    p.add_argument("--target", default="born", help="born | gudder:c,k0,k1,k2,k3 | counterexample[:m]")
    p.add_argument("--samples", type=_positive_int, default=10000)
    p.add_argument("--tol", type=_positive_float, default=1e-8)
    p.add_argument("--tau-c", type=_positive_float, default=TAU_C)
    p.add_argument("--tau-fit", type=_positive_float, default=TAU_FIT)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fit", parents=[common, seeded], help="fit Gudder parameters and classify")
    p.add_argument("--input", default=None, help="sample file (.json or .csv)")
    p.add_argument("--generate", default=None, help="born | gudder:c,k0,k1,k2,k3 | counterexample[:m]")
    p.add_argument("--support", choices=("general", "slice"), default=None)
    p.add_argument("--samples", type=_positive_int, default=200)
    p.add_argument("--tol", type=_positive_float, default=TOL_RANK, dest="tol_rank",
                   help="relative singular-value cutoff for the design rank")
    p.add_argument("--tau-c", type=_positive_float, default=TAU_C)
    p.add_argument("--tau-fit", type=_positive_float, default=TAU_FIT)
    p.add_argument("--expect", choices=("linear",), default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", parents=[common, seeded], help="write a synthetic sample file")
    p.add_argument("--generate", required=True)
    p.add_argument("--support", choices=("general", "slice"), default=None)
    p.add_argument("--samples", type=_positive_int, default=200)
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ValidationError) as exc:
        print(f"bornlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
