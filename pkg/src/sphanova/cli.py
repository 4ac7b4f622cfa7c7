"""Command-line interface: test, are, simulate, sample.

Exit codes: 0 on success, 1 on domain errors (bad data, degenerate
estimates), 2 on usage errors.  Machine-readable output (JSON, CSV) goes to
stdout; human-readable summaries go to stderr.  Seeds are always explicit
flags so runs are reproducible by construction.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .anova import pseudo_fvml_test, rank_test
from .dataio import format_vectors_csv, parse_data
from .efficiency import ARE_TABLE_DENSITIES, ARE_TABLE_SCORES, are_homogeneous, are_table
from .errors import ConfigError, SphanovaError
from .harness import ExperimentConfig, run_experiment
from .models import make_tilde_law, parse_model_spec, score_from_model
from .sampling import RngStream, sample_rotsym
from .sphere import as_unit_vector


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphanova",
        description="Location ANOVA tests for directional data on the unit hypersphere.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run a location test on a grouped data file")
    p_test.add_argument("--data", required=True, help="path to a CSV or JSON data file")
    p_test.add_argument("--format", choices=("csv", "json"), default=None)
    p_test.add_argument("--method", choices=("pseudo", "rank"), required=True)
    p_test.add_argument(
        "--scores",
        default=None,
        help="comma-separated model specs, one per group (rank method only)",
    )
    p_test.add_argument("--alpha", type=float, default=0.05)

    p_are = sub.add_parser("are", help="asymptotic relative efficiency computations")
    p_are.add_argument("--score", help="model spec of the score, e.g. fvml:kappa=2")
    p_are.add_argument("--truth", help="model spec of the underlying density")
    p_are.add_argument("--k", type=int, default=3)
    p_are.add_argument(
        "--table1",
        action="store_true",
        help="emit the full 9x7 ARE grid over the built-in catalog as CSV",
    )

    p_sim = sub.add_parser("simulate", help="run a replicated experiment from a config file")
    p_sim.add_argument("--config", required=True, help="JSON or TOML experiment config")
    p_sim.add_argument("--out", default=None, help="write the JSON report here instead of stdout")
    p_sim.add_argument(
        "--keep-stats", action="store_true", help="include raw statistics in the report"
    )

    p_sample = sub.add_parser("sample", help="draw from a rotationally symmetric law")
    p_sample.add_argument("--model", required=True, help="model spec, e.g. fvml:kappa=2")
    p_sample.add_argument("--theta", required=True, help="comma-separated location coordinates")
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--seed", type=int, required=True)
    p_sample.add_argument("--group", default="g1", help="group label for the CSV rows")
    p_sample.add_argument("--out", default=None, help="write CSV here instead of stdout")
    return parser


def _load_config(path: str) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    if path.lower().endswith(".toml"):
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            try:
                import tomli as tomllib  # type: ignore[no-redef]
            except ModuleNotFoundError as exc:
                raise ConfigError(
                    "TOML configs need Python >= 3.11 or the 'tomli' package; "
                    "use a JSON config instead"
                ) from exc
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    return ExperimentConfig.from_dict(data)


def _split_score_specs(text: str) -> list[str]:
    """Split a comma-separated list of model specs.

    Specs themselves contain commas between keys ("logis:a=2,b=1"), so a
    comma only separates specs when the next token introduces a new family
    (contains ':').  Semicolons always separate.
    """
    specs: list[str] = []
    for chunk in text.split(";"):
        for token in chunk.split(","):
            token = token.strip()
            if not token:
                continue
            if ":" in token or not specs:
                specs.append(token)
            else:
                specs[-1] += "," + token
    return specs


def _cmd_test(args) -> int:
    ms = parse_data(args.data, args.format)
    if args.method == "pseudo":
        if args.scores:
            raise ConfigError("--scores applies to the rank method only")
        result = pseudo_fvml_test(ms)
    else:
        if not args.scores:
            raise ConfigError("--method rank requires --scores with one spec per group")
        specs = _split_score_specs(args.scores)
        if len(specs) != ms.m:
            raise ConfigError(f"need {ms.m} score specs, got {len(specs)}")
        scores = [score_from_model(parse_model_spec(s), ms.k) for s in specs]
        result = rank_test(ms, scores)
    record = result.asdict()
    record["alpha"] = args.alpha
    record["reject"] = bool(result.reject(args.alpha))
    print(json.dumps(record, indent=2))
    decision = "reject" if record["reject"] else "do not reject"
    print(
        f"{result.method}: Q = {result.statistic:.6g} on {result.df} df, "
        f"p = {result.p_value:.6g} -> {decision} equal locations at alpha = {args.alpha:g}",
        file=sys.stderr,
    )
    return 0


def _cmd_are(args) -> int:
    if args.table1:
        values = are_table(args.k)
        header = "density," + ",".join(m.spec for m in ARE_TABLE_SCORES)
        print(header)
        for model, row in zip(ARE_TABLE_DENSITIES, values):
            print(model.spec + "," + ",".join(f"{v:.6f}" for v in row))
        return 0
    if not args.score or not args.truth:
        raise ConfigError("provide --score and --truth, or --table1")
    value = are_homogeneous(parse_model_spec(args.score), parse_model_spec(args.truth), args.k)
    print(f"{value:.6f}")
    print(
        f"ARE(rank[{args.score}] / pseudo) under {args.truth}, k={args.k}: {value:.6f}",
        file=sys.stderr,
    )
    return 0


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    report = run_experiment(cfg)
    payload = json.dumps(report.to_dict(include_statistics=args.keep_stats), indent=2)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    print(report.text_table(), file=sys.stderr)
    return 0


def _cmd_sample(args) -> int:
    try:
        theta = as_unit_vector([float(v) for v in args.theta.split(",")], tol=1e-6)
    except ValueError as exc:
        raise ConfigError(f"bad --theta: {exc}") from exc
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    law = make_tilde_law(parse_model_spec(args.model), theta.size)
    draws = sample_rotsym(theta, law, args.n, RngStream(args.seed))
    text = format_vectors_csv(draws, group=args.group)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "test": _cmd_test,
    "are": _cmd_are,
    "simulate": _cmd_simulate,
    "sample": _cmd_sample,
}


def dispatch(argv) -> int:
    """Parse ``argv`` and run the selected subcommand; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except SphanovaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
