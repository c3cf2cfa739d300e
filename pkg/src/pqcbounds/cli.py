"""Command-line interface: ``pqcbounds <command> [options]``.

Commands
--------
analyze          variance and light-cone bounds of every Pauli term of an observable
sweep            the same (or a gradient variance) over a list of qubit counts
oracle           dense-simulation moments over continuous angles, with z-scores
qgan bound       Monte Carlo check of the discriminator weight bound
qgan profile     induced-observable variance grouped by Pauli weight
counterexamples  run the pathology fixtures and check each claim
replay           re-run the command recorded in a report file

Exit codes
----------
0  success
1  a checked claim failed (qgan bound, counterexamples)
2  usage, file I/O or parse error
3  circuit outside the supported class (``--allow-invalid-class`` overrides)
4  a size cap was exceeded

Every report embeds the tool version, the command line (without ``--out`` and
``--threads``), the resolved configuration and the seed; ``replay`` re-runs it
and reproduces the file byte for byte. The default worker-thread count comes
from ``PQCBOUNDS_THREADS``; it never changes results.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .circuit import (
    CircuitFormatError,
    ParameterizedCircuit,
    build_cartan,
    build_efficient_su2,
    parse_state,
    validate_circuit_class,
)
from .errors import CapExceededError, CircuitClassError
from .estimator import (
    CSV_COLUMNS,
    GRADIENT_COLUMNS,
    SampleSpec,
    estimate_observable,
    estimate_observable_gradient_variance,
    sweep_qubits,
)
from .pauli import Observable, PauliString
from .reporting import make_metadata, read_report, render, render_document

__all__ = [
    "main",
    "build_parser",
    "preset_observable",
    "depth_for",
    "EXIT_OK",
    "EXIT_CHECK_FAILED",
    "EXIT_USAGE",
    "EXIT_INVALID_CLASS",
    "EXIT_CAP",
    "THREADS_ENV",
]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INVALID_CLASS = 3
EXIT_CAP = 4
THREADS_ENV = "PQCBOUNDS_THREADS"

PRESETS = ("local", "global", "mixed")
DEPTH_RULES = ("log", "half", "linear", "fixed")
PROFILE_COLUMNS = ("k", "n_terms", "coeff_sq_sum", "variance", "var_ci_lo", "var_ci_hi", "lower", "upper")
COUNTEREXAMPLE_COLUMNS = ("name", "passed", "claim", "details")
_NOT_REPLAYED = ("--out", "--threads")


class UsageError(Exception):
    """Bad flags, unreadable files or unparsable inputs (exit code 2)."""


# shared helpers --------------------------------------------------------------------

def preset_observable(name: str, n: int) -> Observable:
    """``local``: Z on qubit 0; ``global``: X on every qubit; ``mixed``: their sum."""
    local = PauliString.single(n, 0, "Z")
    glob = PauliString.from_label("X" * n)
    if name == "local":
        return Observable(n, [(1.0, local)])
    if name == "global":
        return Observable(n, [(1.0, glob)])
    if name == "mixed":
        if n == 1:
            raise UsageError("the mixed preset needs at least two qubits")
        return Observable(n, [(1.0, local), (1.0, glob)])
    raise UsageError(f"unknown observable preset {name!r}; choose from {PRESETS}")


def depth_for(rule: str, n: int, fixed: int | None = None) -> int:
    """Circuit depth from a rule: ``log`` = ceil(log2 n), ``half`` = n // 2, ``linear`` = n."""
    if rule == "log":
        return max(1, math.ceil(math.log2(n)))
    if rule == "half":
        return max(1, n // 2)
    if rule == "linear":
        return n
    if rule == "fixed":
        if fixed is None:
            raise UsageError("--depth-rule fixed needs --depth")
        return fixed
    raise UsageError(f"unknown depth rule {rule!r}; choose from {DEPTH_RULES}")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not vals:
        raise UsageError("empty integer list")
    return vals


def _axes(text: str | None) -> tuple[str, str]:
    if text is None:
        return ("Y", "Z")
    parts = tuple(a.strip().upper() for a in text.split(","))
    if len(parts) != 2:
        raise UsageError(f"--axes needs two comma-separated axes, got {text!r}")
    return parts  # type: ignore[return-value]


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _build(ansatz: str, n: int, depth: int, axes: tuple[str, str], entanglement: str | None) -> ParameterizedCircuit:
    try:
        if ansatz == "efficientsu2":
            return build_efficient_su2(n, depth, axes, entanglement or "pairwise")
        if entanglement is not None:
            raise UsageError("--entanglement applies to efficientsu2 only")
        return build_cartan(n, depth, axes)
    except ValueError as exc:
        raise UsageError(f"cannot build {ansatz}: {exc}") from None


def _load_circuit(args) -> ParameterizedCircuit:
    builder = {"--ansatz": args.ansatz, "--n": args.n, "--depth": args.depth,
               "--axes": args.axes, "--entanglement": args.entanglement}
    given = [k for k, v in builder.items() if v is not None]
    if args.circuit is not None:
        if given:
            raise UsageError(f"--circuit conflicts with builder flags {', '.join(given)}")
        try:
            return ParameterizedCircuit.from_json(_read(args.circuit))
        except CircuitFormatError as exc:
            raise UsageError(f"{args.circuit}: {exc}") from None
    missing = [k for k in ("--ansatz", "--n", "--depth") if builder[k] is None]
    if missing:
        raise UsageError(f"give --circuit FILE or all of --ansatz, --n, --depth (missing {', '.join(missing)})")
    return _build(args.ansatz, args.n, args.depth, _axes(args.axes), args.entanglement)


def _parse_term(text: str) -> tuple[float, str]:
    coeff, sep, label = text.partition(":")
    if not sep:
        raise UsageError(f"--term expects COEFF:LABEL, got {text!r}")
    try:
        return float(coeff), label.strip()
    except ValueError:
        raise UsageError(f"--term {text!r}: bad coefficient") from None


def _load_observable(args, n: int) -> Observable:
    sources = [s for s, v in (("--obs", args.obs), ("--obs-preset", args.obs_preset), ("--term", args.term)) if v]
    if len(sources) > 1:
        raise UsageError(f"observable sources conflict: {', '.join(sources)}")
    if not sources:
        raise UsageError("give an observable with --obs FILE, --obs-preset or --term")
    if args.obs:
        try:
            h = Observable.from_text(_read(args.obs))
        except ValueError as exc:
            raise UsageError(f"{args.obs}: {exc}") from None
    elif args.obs_preset:
        h = preset_observable(args.obs_preset, n)
    else:
        try:
            h = Observable.from_labels([_parse_term(t) for t in args.term])
        except ValueError as exc:
            raise UsageError(f"--term: {exc}") from None
    if h.n != n:
        raise UsageError(f"observable acts on {h.n} qubits but the circuit has {n}")
    return h


def _state(text: str, n: int):
    try:
        return parse_state(text, n)
    except ValueError as exc:
        raise UsageError(f"--state {text!r}: {exc}") from None


def _threads(value: int | None) -> int:
    if value is not None:
        if value < 1:
            raise UsageError("--threads must be at least 1")
        return value
    env = os.environ.get(THREADS_ENV)
    if not env:
        return 1
    try:
        t = int(env)
    except ValueError:
        raise UsageError(f"{THREADS_ENV}={env!r} is not an integer") from None
    return max(1, t)


def _sample_spec(args) -> SampleSpec:
    try:
        return SampleSpec(args.samples, args.seed, args.confidence, _threads(args.threads))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _replay_argv(argv: Sequence[str]) -> list[str]:
    """``argv`` without the flags that do not affect results."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a in _NOT_REPLAYED:
            skip = True
            continue
        if any(a.startswith(f + "=") for f in _NOT_REPLAYED):
            continue
        out.append(a)
    return out


def _config(args) -> dict:
    skip = {"func", "out", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, text: str) -> None:
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc.strerror or exc}") from None
    else:
        sys.stdout.write(text)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _summary(rows: list[dict], cols: Sequence[str]) -> None:
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    table = [list(cols)] + [[fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    for row in table:
        _log("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))


def _check_class(c: ParameterizedCircuit, allow_invalid: bool) -> None:
    report = validate_circuit_class(c)
    if report.valid:
        return
    if not allow_invalid:
        raise CircuitClassError(report)
    _log(f"warning: circuit outside the supported class, bounds may not hold:\n{report}")


# commands -------------------------------------------------------------------------

def cmd_analyze(args, argv) -> int:
    c = _load_circuit(args)
    h = _load_observable(args, c.n)
    rho = _state(args.state, c.n)
    spec = _sample_spec(args)
    _check_class(c, args.allow_invalid_class)
    rep = estimate_observable(c, h, rho, spec, allow_invalid=True)
    rows = rep.rows(c.n)
    config = _config(args) | {"n_qubits": c.n, "m": c.m, "observable": h.to_text()}
    _emit(args, render(rows, CSV_COLUMNS, make_metadata("analyze", argv, config, spec.seed), args.format))
    _summary(rows, ("alpha_label", "coeff", "lower", "variance", "upper", "exact"))
    return EXIT_OK


def cmd_sweep(args, argv) -> int:
    n_list = _int_list(args.n_list)
    axes = _axes(args.axes)
    rho_text = args.state
    spec = _sample_spec(args)

    def builder(n: int) -> ParameterizedCircuit:
        c = _build(args.ansatz, n, depth_for(args.depth_rule, n, args.depth), axes, args.entanglement)
        _check_class(c, args.allow_invalid_class)
        return c

    rows: list[dict] = []
    if args.quantity == "variance":
        for n in n_list:
            rows.extend(sweep_qubits(builder, lambda k: preset_observable(args.obs_preset, k),
                                     lambda k: _state(rho_text, k), [n], spec, allow_invalid=True))
            _log(f"n={n} done")
        columns = CSV_COLUMNS
    else:
        for n in n_list:
            c = builder(n)
            rep = estimate_observable_gradient_variance(
                c, preset_observable(args.obs_preset, n), _state(rho_text, n), args.param, spec, allow_invalid=True
            )
            rows.extend(rep.rows(n))
            _log(f"n={n} done")
        columns = GRADIENT_COLUMNS
    config = _config(args) | {"n_values": n_list, "depths": [depth_for(args.depth_rule, n, args.depth) for n in n_list]}
    _emit(args, render(rows, columns, make_metadata("sweep", argv, config, spec.seed), args.format))
    value = "variance" if args.quantity == "variance" else "grad_variance"
    _summary([r for r in rows if r["alpha_label"] == "aggregate"], ("n", value, "n_samples"))
    return EXIT_OK


def cmd_oracle(args, argv) -> int:
    from .oracle import moment_suite

    c = _load_circuit(args)
    h = _load_observable(args, c.n)
    rho = _state(args.state, c.n)
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    rep = moment_suite(c, h, rho, args.samples, args.range_scale, args.seed, args.gradients, args.qubit_cap)
    payload = rep.to_dict() | {"max_abs_z": rep.max_abs_z(), "class_report": str(validate_circuit_class(c))}
    config = _config(args) | {"n_qubits": c.n, "m": c.m, "observable": h.to_text()}
    _emit(args, render_document(make_metadata("oracle", argv, config, args.seed), payload))
    _log(f"loss variance {rep.loss_variance[0]:.6g} +- {rep.loss_variance[1]:.2g}; max |z| = {rep.max_abs_z():.3g}")
    return EXIT_OK


def _discriminator(args):
    from .qgan import DiscriminatorSpec

    builder = {"--layers": args.layers, "--width": args.width, "--gamma": args.gamma,
               "--sigma-out-sq": args.sigma_out_sq, "--n": args.n}
    given = [k for k, v in builder.items() if v is not None]
    if args.spec is not None:
        if given:
            raise UsageError(f"--spec conflicts with builder flags {', '.join(given)}")
        try:
            d = json.loads(_read(args.spec))
            if args.output is not None:
                d["output"] = args.output
            return DiscriminatorSpec.from_dict(d)
        except (ValueError, TypeError) as exc:
            raise UsageError(f"{args.spec}: {exc}") from None
    missing = [k for k in ("--n", "--layers", "--width") if builder[k] is None]
    if missing:
        raise UsageError(f"give --spec FILE or all of --n, --layers, --width (missing {', '.join(missing)})")
    try:
        return DiscriminatorSpec.standard(
            args.n, args.layers, args.width, 0.2 if args.gamma is None else args.gamma,
            args.output or "wasserstein", args.sigma_out_sq,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_qgan_bound(args, argv) -> int:
    from .qgan import WEIGHT_BOUND_COLUMNS, verify_weight_bound

    spec = _discriminator(args)
    if not 0 <= args.qubit < spec.n:
        raise UsageError(f"--qubit {args.qubit} out of range for n={spec.n}")
    if args.draws < 2:
        raise UsageError("--draws must be at least 2")
    res = verify_weight_bound(spec, args.draws, args.qubit, args.seed)
    rows = [res.row()]
    config = _config(args) | {"discriminator": spec.to_dict()}
    _emit(args, render(rows, WEIGHT_BOUND_COLUMNS, make_metadata("qgan bound", argv, config, args.seed), args.format))
    _summary(rows, ("n", "L", "bound", "empirical", "stderr", "pass"))
    return EXIT_OK if res.passed else EXIT_CHECK_FAILED


def cmd_qgan_profile(args, argv) -> int:
    from .qgan import init_discriminator, locality_profile

    spec = _discriminator(args)
    depth = depth_for(args.generator_depth_rule, spec.n, args.generator_depth)
    gen = _build("efficientsu2", spec.n, depth, ("Y", "Z"), None)
    rho = _state(args.state, spec.n)
    sample_spec = _sample_spec(args)
    ks = _int_list(args.k) if args.k else None
    params = init_discriminator(spec, args.seed)
    groups = locality_profile(params, spec, gen, rho, ks, sample_spec)
    rows = [{
        "k": g.k, "n_terms": g.n_terms, "coeff_sq_sum": g.coeff_sq_sum, "variance": g.variance,
        "var_ci_lo": g.variance_ci[0], "var_ci_hi": g.variance_ci[1], "lower": g.lower, "upper": g.upper,
    } for g in groups]
    config = _config(args) | {"discriminator": spec.to_dict(), "generator_depth_resolved": depth}
    _emit(args, render(rows, PROFILE_COLUMNS, make_metadata("qgan profile", argv, config, args.seed), args.format))
    _summary(rows, ("k", "n_terms", "coeff_sq_sum", "variance", "lower", "upper"))
    return EXIT_OK


def cmd_counterexamples(args, argv) -> int:
    from .fixtures import run_counterexamples

    results = run_counterexamples(args.seed)
    rows = [{"name": r.name, "passed": r.passed, "claim": r.claim,
             "details": json.dumps(r.details, sort_keys=True)} for r in results]
    config = _config(args)
    _emit(args, render(rows, COUNTEREXAMPLE_COLUMNS, make_metadata("counterexamples", argv, config, args.seed),
                       args.format))
    for r in results:
        _log(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.claim}")
    n_pass = sum(r.passed for r in results)
    _log(f"{n_pass}/{len(results)} pass")
    return EXIT_OK if n_pass == len(results) else EXIT_CHECK_FAILED


def cmd_replay(args, argv) -> int:
    try:
        meta, _ = read_report(args.report)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read report {args.report}: {exc}") from None
    if meta.get("tool") != "pqcbounds" or "argv" not in meta:
        raise UsageError(f"{args.report}: no replayable metadata")
    if meta.get("version") != __version__:
        _log(f"warning: report written by version {meta.get('version')}, running {__version__}")
    extra = ["--out", args.out] if args.out else []
    if args.threads is not None:
        extra += ["--threads", str(args.threads)]
    return main(list(meta["argv"]) + extra)


# parser ---------------------------------------------------------------------------

def _add_circuit_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("circuit (a file or builder flags, not both)")
    g.add_argument("--circuit", metavar="FILE", help="circuit JSON file")
    g.add_argument("--ansatz", choices=("efficientsu2", "cartan"))
    g.add_argument("--n", type=int, help="number of qubits")
    g.add_argument("--depth", type=int, help="number of entangling repetitions")
    g.add_argument("--axes", help="axes of the two rotation layers, e.g. Y,Z (default)")
    g.add_argument("--entanglement", choices=("pairwise", "linear", "circular"))


def _add_observable_args(p: argparse.ArgumentParser, presets_only: bool = False) -> None:
    g = p.add_argument_group("observable (exactly one source)")
    if presets_only:
        g.add_argument("--obs-preset", choices=PRESETS, required=True)
        return
    g.add_argument("--obs", metavar="FILE", help="observable text file, one '<coeff> <label>' per line")
    g.add_argument("--obs-preset", choices=PRESETS)
    g.add_argument("--term", action="append", metavar="COEFF:LABEL", help="inline term; repeatable")


def _add_sample_args(p: argparse.ArgumentParser, default_samples: int = 10_000) -> None:
    g = p.add_argument_group("sampling")
    g.add_argument("--samples", type=int, default=default_samples)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--confidence", type=float, default=0.95)
    g.add_argument("--threads", type=int, default=None, help=f"worker threads (default ${THREADS_ENV} or 1)")


def _add_output_args(p: argparse.ArgumentParser, formats: Sequence[str] = ("csv", "json")) -> None:
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--format", choices=formats, default=formats[0])


def _add_discriminator_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("discriminator (a spec file or builder flags, not both)")
    g.add_argument("--spec", metavar="FILE", help="discriminator spec JSON")
    g.add_argument("--n", type=int, help="input bits")
    g.add_argument("--layers", type=int, help="hidden layers")
    g.add_argument("--width", type=int, help="hidden layer width")
    g.add_argument("--gamma", type=float, help="leaky-ReLU slope (default 0.2)")
    g.add_argument("--sigma-out-sq", type=float, help="output-layer weight variance (default 4)")
    g.add_argument("--output", choices=("wasserstein", "minmax"), help="output activation (default wasserstein)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqcbounds",
        description="Light-cone variance bounds for parameterized quantum circuits.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="exit codes: 0 ok, 1 check failed, 2 usage/I-O/parse error, 3 invalid circuit class, 4 cap exceeded",
        allow_abbrev=False,
    )
    parser.add_argument("--version", action="version", version=f"pqcbounds {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="variance and bounds for one circuit and observable", allow_abbrev=False)
    _add_circuit_args(p)
    _add_observable_args(p)
    p.add_argument("--state", default="zero", help="zero, plus, mixed or bloch:rx,ry,rz")
    p.add_argument("--allow-invalid-class", action="store_true")
    _add_sample_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="analyze over a list of qubit counts", allow_abbrev=False)
    p.add_argument("--ansatz", choices=("efficientsu2", "cartan"), default="efficientsu2")
    p.add_argument("--n-list", required=True, help="comma-separated qubit counts")
    p.add_argument("--depth-rule", choices=DEPTH_RULES, default="log")
    p.add_argument("--depth", type=int, help="depth for --depth-rule fixed")
    p.add_argument("--axes")
    p.add_argument("--entanglement", choices=("pairwise", "linear", "circular"))
    _add_observable_args(p, presets_only=True)
    p.add_argument("--state", default="zero")
    p.add_argument("--quantity", choices=("variance", "gradient"), default="variance")
    p.add_argument("--param", type=int, default=0, help="parameter index for --quantity gradient")
    p.add_argument("--allow-invalid-class", action="store_true")
    _add_sample_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="dense-simulation moment checks", allow_abbrev=False)
    _add_circuit_args(p)
    _add_observable_args(p)
    p.add_argument("--state", default="zero")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--range-scale", type=float, default=1.0, help="angles uniform on [-a pi, a pi]")
    p.add_argument("--gradients", action="store_true", help="also estimate gradient variances")
    p.add_argument("--qubit-cap", type=int, default=12)
    _add_output_args(p, formats=("json",))
    p.set_defaults(func=cmd_oracle)

    q = sub.add_parser("qgan", help="discriminator observable analysis", allow_abbrev=False)
    qsub = q.add_subparsers(dest="qgan_command", required=True)
    p = qsub.add_parser("bound", help="check the one-local weight bound", allow_abbrev=False)
    _add_discriminator_args(p)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--qubit", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    _add_output_args(p)
    p.set_defaults(func=cmd_qgan_bound)

    p = qsub.add_parser("profile", help="variance of the induced observable by Pauli weight", allow_abbrev=False)
    _add_discriminator_args(p)
    p.add_argument("--generator-depth-rule", choices=DEPTH_RULES, default="log")
    p.add_argument("--generator-depth", type=int)
    p.add_argument("--state", default="zero")
    p.add_argument("--k", help="comma-separated Pauli weights (default: all)")
    _add_sample_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_qgan_profile)

    p = sub.add_parser("counterexamples", help="check every pathology fixture", allow_abbrev=False)
    p.add_argument("--seed", type=int, default=0)
    _add_output_args(p)
    p.set_defaults(func=cmd_counterexamples)

    p = sub.add_parser("replay", help="re-run the command recorded in a report", allow_abbrev=False)
    p.add_argument("report", help="CSV or JSON report written by pqcbounds")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, _replay_argv(argv))
    except UsageError as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE
    except CircuitClassError as exc:
        _log(f"error: circuit outside the supported class\n{exc.report}\n(use --allow-invalid-class to proceed)")
        return EXIT_INVALID_CLASS
    except CapExceededError as exc:
        _log(f"error: {exc}")
        return EXIT_CAP


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
