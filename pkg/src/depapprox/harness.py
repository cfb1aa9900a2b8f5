"""Bound evaluation over parameter sweeps and empirical constant estimates.

For every sweep point the exact law of the sum is compared with each
requested approximating family under three discrepancies (non-uniform
Kolmogorov, Wasserstein, non-uniform local). Each comparison is divided by
the matching error-bound expression without its unknown absolute constant;
the maximum of that ratio over admissible rows is the empirical constant.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import yaml

from .errors import NonConvergenceError, ParameterDomainError
from .measures import FamilyParams, build_family, poisson
from .metrics import nonuniform_kolmogorov, nonuniform_local, wasserstein_norm
from .models import exact_sum_distribution, make_model, poisson_binomial_model
from .moments import MomentSummary, summarize

__all__ = [
    "FAMILY_NAMES",
    "METRICS",
    "RHS_TEMPLATES",
    "rhs_without_constant",
    "ExperimentConfig",
    "BoundRow",
    "SkippedFamily",
    "BoundReport",
    "evaluate_point",
    "evaluate_bounds",
    "ConstantEstimate",
    "estimate_constant",
    "SharpConstantRow",
    "sharp_constant_experiment",
    "SHARP_CONSTANT",
]

FAMILY_NAMES = ("poisson", "poisson2", "compound", "tp", "nb", "bi")
METRICS = ("kolmogorov", "wasserstein", "local")
SHARP_CONSTANT = 1.0 / math.sqrt(2.0 * math.pi)


# =============================================================================
# RIGHT-HAND SIDES
# =============================================================================

# Each template maps (lam, gamma2, delta_tilde, R0, R1) to the error order.
_Template = Callable[[float, float, float, float, float], float]

RHS_TEMPLATES: dict[tuple[str, str], _Template] = {
    # non-uniform Kolmogorov
    ("poisson", "kolmogorov"): lambda L, g, d, r0, r1: r0 / L,
    ("poisson2", "kolmogorov"): lambda L, g, d, r0, r1: r0**2 / L**2 + r1 / L**1.5,
    ("compound", "kolmogorov"): lambda L, g, d, r0, r1: r1 / L**1.5,
    ("tp", "kolmogorov"): lambda L, g, d, r0, r1: (r1 + abs(g)) / L**1.5 + d / L,
    ("nb", "kolmogorov"): lambda L, g, d, r0, r1: r1 / L**1.5 + g**2 / L**2.5,
    ("bi", "kolmogorov"): lambda L, g, d, r0, r1: r1 / L**1.5 + g**2 / L**2.5,
    # Wasserstein
    ("poisson", "wasserstein"): lambda L, g, d, r0, r1: r0 / L**0.5,
    ("poisson2", "wasserstein"): lambda L, g, d, r0, r1: r0**2 / L**1.5 + r1 / L,
    ("compound", "wasserstein"): lambda L, g, d, r0, r1: r1 / L,
    ("tp", "wasserstein"): lambda L, g, d, r0, r1: (r1 + abs(g)) / L + d / L**0.5,
    ("nb", "wasserstein"): lambda L, g, d, r0, r1: r1 / L + g**2 / L**2,
    ("bi", "wasserstein"): lambda L, g, d, r0, r1: r1 / L + g**2 / L**2,
    # non-uniform local
    ("poisson", "local"): lambda L, g, d, r0, r1: r0 / L**1.5,
    ("poisson2", "local"): lambda L, g, d, r0, r1: r0**2 / L**2.5 + r1 / L**2,
    ("compound", "local"): lambda L, g, d, r0, r1: r1 / L**2,
    ("tp", "local"): lambda L, g, d, r0, r1: (r1 + abs(g)) / L**2 + d / L**1.5,
    ("nb", "local"): lambda L, g, d, r0, r1: r1 / L**2 + g**2 / L**3,
    ("bi", "local"): lambda L, g, d, r0, r1: r1 / L**2 + g**2 / L**3,
}


def rhs_without_constant(family: str, metric: str, summary: MomentSummary) -> float:
    """Error-bound expression for ``(family, metric)`` with the constant dropped."""
    tmpl = RHS_TEMPLATES[family, metric]
    return float(tmpl(summary.lam, summary.gamma2, summary.delta_tilde, summary.r0, summary.r1))


def _lhs(metric: str, exact, approx, lam: float):
    if metric == "kolmogorov":
        return nonuniform_kolmogorov(exact, approx, lam)
    if metric == "wasserstein":
        return wasserstein_norm(exact, approx)
    if metric == "local":
        return nonuniform_local(exact, approx, lam)
    raise ValueError(f"unknown metric {metric!r}")


def _sign_admissible(family: str, gamma2: float) -> bool:
    if family == "nb":
        return gamma2 > 0
    if family == "bi":
        return gamma2 < 0
    return True


# =============================================================================
# CONFIGURATION
# =============================================================================


@dataclass
class ExperimentConfig:
    """A model family, a parameter sweep and the families to compare.

    List-valued entries of ``params`` are swept as a Cartesian product. For
    ``poisson_binomial`` an explicit probability vector goes in
    ``p_vector``; otherwise ``n`` and ``p`` describe identical summands.
    """

    model: str
    params: dict
    families: Sequence[str] = FAMILY_NAMES
    metrics: Sequence[str] = METRICS
    truncation_eps: float = 1e-12
    output_format: str = "csv"
    output: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        unknown = set(self.families) - set(FAMILY_NAMES)
        if unknown:
            raise ValueError(f"unknown families {sorted(unknown)}")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metrics {sorted(unknown)}")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output_format must be 'csv' or 'json'")
        for key, val in self.params.items():
            if key != "p_vector" and isinstance(val, (list, tuple)) and not val:
                raise ValueError(f"sweep range for {key!r} is empty")

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        model = data.pop("model")
        fields = {"families", "metrics", "truncation_eps", "output_format", "output", "workers"}
        kwargs = {k: data.pop(k) for k in list(data) if k in fields}
        return cls(model=model, params=data, **kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: expected a flat mapping of keys to values")
        return cls.from_mapping(data)

    def sweep_points(self) -> list[dict]:
        keys = sorted(self.params)
        axes = []
        for k in keys:
            v = self.params[k]
            if k != "p_vector" and isinstance(v, (list, tuple)):
                axes.append(list(v))
            else:
                axes.append([v])
        return [dict(zip(keys, combo)) for combo in itertools.product(*axes)]


# =============================================================================
# REPORT
# =============================================================================


@dataclass(frozen=True)
class BoundRow:
    model: str
    params: dict
    family: str
    metric: str
    lhs: float
    rhs: float
    ratio: float
    conditions_pass: bool
    argmax_x: Optional[int]
    lam: float
    gamma2: float
    delta_tilde: float
    r0: float
    r1: float
    c0: int
    failed_conditions: tuple = ()

    def key(self):
        params = tuple(
            (k, tuple(v) if isinstance(v, list) else v)
            for k, v in sorted(self.params.items(), key=lambda kv: _param_rank(kv[0]))
        )
        return (self.model, params, FAMILY_NAMES.index(self.family), METRICS.index(self.metric))


@dataclass(frozen=True)
class SkippedFamily:
    model: str
    params: dict
    family: str
    reason: str


_PARAM_ORDER = ("n", "p", "k1", "k2", "p_vector")


def _param_rank(name: str):
    return (_PARAM_ORDER.index(name) if name in _PARAM_ORDER else len(_PARAM_ORDER), name)

_ROW_COLUMNS = (
    "lambda", "gamma2", "delta_tilde", "r0", "r1", "c0",
    "family", "metric", "lhs", "rhs", "ratio", "conditions_pass", "argmax_x", "failed_conditions",
)


@dataclass
class BoundReport:
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def _param_columns(self):
        return sorted({k for r in self.rows for k in r.params}, key=_param_rank)

    def to_csv(self) -> str:
        pcols = self._param_columns()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["model", *pcols, *_ROW_COLUMNS])
        for r in self.rows:
            pvals = [json.dumps(r.params[k]) if isinstance(r.params.get(k), list) else r.params.get(k, "") for k in pcols]
            writer.writerow([
                r.model, *pvals,
                repr(r.lam), repr(r.gamma2), repr(r.delta_tilde), repr(r.r0), repr(r.r1), r.c0,
                r.family, r.metric, repr(r.lhs), repr(r.rhs), repr(r.ratio),
                int(r.conditions_pass), "" if r.argmax_x is None else r.argmax_x,
                ";".join(r.failed_conditions),
            ])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"rows": [asdict(r) for r in self.rows], "skipped": [asdict(s) for s in self.skipped]},
            indent=2,
            default=_json_default,
        )

    def write(self, path, fmt: str = "csv"):
        text = self.to_csv() if fmt == "csv" else self.to_json()
        Path(path).write_text(text)


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


# =============================================================================
# EVALUATION
# =============================================================================


def _model_params(kind: str, point: dict) -> dict:
    params = dict(point)
    if kind == "poisson_binomial" and "p_vector" in params:
        params["p"] = params.pop("p_vector")
        params.pop("n", None)
    return params


def evaluate_point(
    kind: str,
    point: dict,
    families: Sequence[str] = FAMILY_NAMES,
    metrics: Sequence[str] = METRICS,
    truncation_eps: float = 1e-12,
) -> tuple[list, list]:
    """Rows for one sweep point.

    NB rows exist only for ``gamma2 > 0`` and BI rows only for
    ``gamma2 < 0``; other families that cannot be built at this point are
    listed as skipped rather than aborting.
    """
    model = make_model(kind, **_model_params(kind, point))
    summary = summarize(model)
    exact = exact_sum_distribution(model)
    failed = tuple(summary.conditions.failed())
    rows, skipped = [], []
    for fam in families:
        if not _sign_admissible(fam, summary.gamma2):
            skipped.append(SkippedFamily(kind, point, fam, f"inadmissible sign of gamma2 = {summary.gamma2:.6g}"))
            continue
        try:
            approx = build_family(fam, FamilyParams(summary.lam, summary.gamma2, truncation_eps))
        except (ParameterDomainError, NonConvergenceError) as exc:
            skipped.append(SkippedFamily(kind, point, fam, str(exc)))
            continue
        for metric in metrics:
            res = _lhs(metric, exact, approx, summary.lam)
            rhs = rhs_without_constant(fam, metric, summary)
            ratio = res.value / rhs if rhs > 0 else math.inf
            rows.append(BoundRow(
                model=kind, params=point, family=fam, metric=metric,
                lhs=res.value, rhs=rhs, ratio=ratio,
                conditions_pass=summary.conditions.all_pass, argmax_x=res.argmax_x,
                lam=summary.lam, gamma2=summary.gamma2, delta_tilde=summary.delta_tilde,
                r0=summary.r0, r1=summary.r1, c0=summary.c0, failed_conditions=failed,
            ))
    return rows, skipped


def _evaluate_job(args):
    return evaluate_point(*args)


def evaluate_bounds(config: ExperimentConfig) -> BoundReport:
    """Evaluate every (sweep point, family, metric) combination of ``config``.

    With ``config.workers > 1`` sweep points run in a process pool; rows are
    sorted by configuration so the report does not depend on scheduling.
    """
    jobs = [
        (config.model, point, tuple(config.families), tuple(config.metrics), config.truncation_eps)
        for point in config.sweep_points()
    ]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_evaluate_job, jobs))
    else:
        results = [_evaluate_job(j) for j in jobs]
    report = BoundReport()
    for rows, skipped in results:
        report.rows.extend(rows)
        report.skipped.extend(skipped)
    report.rows.sort(key=BoundRow.key)
    return report


@dataclass(frozen=True)
class ConstantEstimate:
    """Largest LHS/RHS ratio over rows whose hypotheses hold."""

    family: str
    metric: str
    value: float
    n_rows: int
    row: Optional[BoundRow] = None
    c0: Optional[int] = None

    @property
    def empty(self) -> bool:
        return self.n_rows == 0


def estimate_constant(rows: Iterable[BoundRow], *, by_c0: bool = False) -> dict:
    """Empirical constant per ``(family, metric)``, optionally per ``c0``.

    Rows with failed hypotheses or a non-finite ratio are ignored; a group
    without usable rows yields an estimate with ``value = nan`` and
    ``n_rows = 0``.
    """
    groups: dict = {}
    for r in rows:
        key = (r.family, r.metric, r.c0) if by_c0 else (r.family, r.metric)
        groups.setdefault(key, []).append(r)
    out = {}
    for key, members in groups.items():
        usable = [r for r in members if r.conditions_pass and math.isfinite(r.ratio)]
        c0 = key[2] if by_c0 else None
        if not usable:
            out[key] = ConstantEstimate(key[0], key[1], math.nan, 0, None, c0)
            continue
        best = max(usable, key=lambda r: r.ratio)
        out[key] = ConstantEstimate(key[0], key[1], best.ratio, len(usable), best, c0)
    return out


# =============================================================================
# SHARP CONSTANT
# =============================================================================


@dataclass(frozen=True)
class SharpConstantRow:
    n: int
    p: float
    lam: float
    lam2: float
    wasserstein: float
    value: float
    deviation: float
    rate: float
    regime_ok: bool


def sharp_constant_experiment(n_list: Sequence[int], p: float, truncation_eps: float = 1e-12) -> list:
    """``sqrt(lam) / lam2 * ||L(W) - Poisson(lam)||_W`` for Bernoulli(p) sums.

    ``deviation`` is the distance to ``1/sqrt(2 pi)`` and ``rate`` the
    reference order ``p + 1/sqrt(lam)``. Rows outside the regime
    ``p <= 1/20, lam >= 1`` are computed but flagged.
    """
    out = []
    for n in n_list:
        n = int(n)
        model = poisson_binomial_model([p] * n)
        exact = exact_sum_distribution(model)
        lam = model.closed_form["lambda"]
        lam2 = model.closed_form["lambda2"]
        w = wasserstein_norm(exact, poisson(FamilyParams(lam, 0.0, truncation_eps))).value
        value = math.sqrt(lam) / lam2 * w
        out.append(SharpConstantRow(
            n=n, p=p, lam=lam, lam2=lam2, wasserstein=w, value=value,
            deviation=abs(value - SHARP_CONSTANT),
            rate=p + 1.0 / math.sqrt(lam),
            regime_ok=bool(p <= 1 / 20 and lam >= 1),
        ))
    return out
