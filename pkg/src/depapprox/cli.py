"""Command line front end.

Subcommands::

    depapprox approximate <family> --lambda L --gamma2 G     pmf as CSV (k,mass)
    depapprox moments <model-spec>                           moment summary as JSON
    depapprox bounds <config-file>                           bound report as CSV or JSON
    depapprox sharp-constant --p P --n-list N1,N2,...        sharp constant table as CSV

A model spec is either ``kind:key=value,...`` (list values separated by
``;``) or the path of a YAML file holding ``model`` and its parameters.
Exit status is 0 on success, 2 on usage errors, 3 on parameter domain
errors and 4 on resource or convergence failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import yaml

from .errors import (
    DivergenceError,
    GridTooSmallError,
    NonConvergenceError,
    ParameterDomainError,
    ResourceLimitError,
)
from .harness import (
    FAMILY_NAMES,
    ExperimentConfig,
    estimate_constant,
    evaluate_bounds,
    sharp_constant_experiment,
)
from .measures import FamilyParams, build_family
from .models import make_model
from .moments import summarize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_RESOURCE = 4


def _scalar(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_model_spec(spec: str) -> tuple[str, dict]:
    """``"two_runs:n=100,p=0.05"`` or a YAML file path to ``(kind, params)``."""
    path = Path(spec)
    if path.is_file():
        data = yaml.safe_load(path.read_text())
        if not isinstance(data, dict) or "model" not in data:
            raise ParameterDomainError(f"{spec}: expected a mapping with a 'model' key")
        data = dict(data)
        kind = data.pop("model")
        if "p_vector" in data:
            data["p"] = data.pop("p_vector")
        return kind, data
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ParameterDomainError(f"malformed model parameter {item!r}")
        params[key.strip()] = [_scalar(v) for v in val.split(";")] if ";" in val else _scalar(val)
    return kind.strip(), params


def _finite_or_str(x):
    return x if math.isfinite(x) else str(x)


# -- subcommands -------------------------------------------------------------


def cmd_approximate(args, out) -> int:
    params = FamilyParams(args.lam, args.gamma2, args.truncation_eps, args.max_support)
    m = build_family(args.family, params)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["k", "mass"])
    for k, w in zip(m.support, m.weights):
        writer.writerow([int(k), repr(float(w))])
    return EXIT_OK


def cmd_moments(args, out) -> int:
    kind, params = parse_model_spec(args.model_spec)
    try:
        model = make_model(kind, **params)
    except KeyError as exc:
        raise ParameterDomainError(f"model {kind!r} is missing parameter {exc}") from None
    summary = summarize(model).to_dict()
    summary["model"] = model.describe()
    json.dump(summary, out, indent=2, default=_finite_or_str)
    out.write("\n")
    return EXIT_OK


def cmd_bounds(args, out) -> int:
    config = ExperimentConfig.from_file(args.config)
    if args.format:
        config.output_format = args.format
    if args.workers:
        config.workers = args.workers
    report = evaluate_bounds(config)
    text = report.to_csv() if config.output_format == "csv" else report.to_json()
    target = args.output or config.output
    if target:
        Path(target).write_text(text)
    else:
        out.write(text)
    for s in report.skipped:
        print(f"skipped {s.family} at {s.params}: {s.reason}", file=sys.stderr)
    if args.constants:
        with open(args.constants, "w") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["family", "metric", "constant", "n_rows"])
            for (fam, metric), est in sorted(estimate_constant(report.rows).items()):
                writer.writerow([fam, metric, repr(est.value), est.n_rows])
    return EXIT_OK


def cmd_sharp_constant(args, out) -> int:
    n_list = [int(v) for chunk in args.n_list for v in chunk.split(",") if v]
    rows = sharp_constant_experiment(n_list, args.p, args.truncation_eps)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "p", "lambda", "lambda2", "wasserstein", "value", "deviation", "rate", "regime_ok"])
    for r in rows:
        writer.writerow([
            r.n, r.p, repr(r.lam), repr(r.lam2), repr(r.wasserstein),
            repr(r.value), repr(r.deviation), repr(r.rate), int(r.regime_ok),
        ])
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depapprox", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approximate", help="tabulate an approximating family")
    p.add_argument("family", choices=FAMILY_NAMES)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--gamma2", type=float, default=0.0)
    p.add_argument("--truncation-eps", type=float, default=1e-12)
    p.add_argument("--max-support", type=int, default=None)
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("moments", help="moment summary of a model")
    p.add_argument("model_spec", help="kind:key=value,... or a YAML file")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("bounds", help="evaluate the error bounds over a sweep")
    p.add_argument("config", help="YAML experiment configuration")
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--constants", default=None, help="also write constant estimates to this CSV")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sharp-constant", help="Poisson binomial Wasserstein constant table")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n-list", nargs="+", required=True, help="comma or space separated")
    p.add_argument("--truncation-eps", type=float, default=1e-12)
    p.set_defaults(func=cmd_sharp_constant)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (ResourceLimitError, NonConvergenceError, GridTooSmallError, DivergenceError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ParameterDomainError, ValueError, KeyError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
