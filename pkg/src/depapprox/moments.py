"""Factorial moments, centered mixed moments and the remainder terms.

All quantities are exact expectations over joint laws of at most three
consecutive summands, computed by enumeration of the hidden chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .measures import delta_tilde
from .models import JointLaw, OneDependentModel, joint_pmf

__all__ = [
    "falling",
    "factorial_moment",
    "centered_mixed_e",
    "e_plus",
    "e_plus_2",
    "e_hat_2",
    "Clause",
    "Conditions",
    "MomentSummary",
    "summarize",
    "remainders",
    "check_conditions",
]

# slack for comparisons such as p**2 <= 1/100 at p = 0.1
_REL_SLACK = 1e-12


def falling(x, j: int):
    """Falling factorial ``x (x-1) ... (x-j+1)``."""
    x = np.asarray(x, dtype=np.float64)
    out = np.ones_like(x)
    for i in range(j):
        out = out * (x - i)
    return out


def factorial_moment(model: OneDependentModel, k: int, j: int) -> float:
    """``E X_k (X_k - 1) ... (X_k - j + 1)``; zero for ``k <= 0``."""
    if k <= 0:
        return 0.0
    law = joint_pmf(model, [k])
    return law.expect(falling(law.column(0), j))


def _mixed(law: JointLaw, sign: float) -> float:
    # prod[i][j] = E Y_{i+1} ... Y_{j+1}, 0-based inclusive
    d = law.dim
    cols = [law.column(i).astype(np.float64) for i in range(d)]
    prod = {}
    for i in range(d):
        acc = np.ones_like(cols[0])
        for j in range(i, d):
            acc = acc * cols[j]
            prod[i, j] = law.expect(acc)
    e = [0.0] * d
    for k in range(d):
        e[k] = prod[0, k] + sign * sum(e[j] * prod[j + 1, k] for j in range(k))
    return e[d - 1]


def centered_mixed_e(law: JointLaw) -> float:
    """Centered mixed moment of the coordinates of ``law``.

    ``E(Y1) = E Y1`` and
    ``E(Y1..Yk) = E Y1...Yk - sum_{j<k} E(Y1..Yj) E Y_{j+1}...Yk``.
    For two coordinates this is the covariance; it vanishes for independent
    coordinates.
    """
    return _mixed(law, -1.0)


def e_plus(law: JointLaw) -> float:
    """The same recursion as :func:`centered_mixed_e` with every sign positive."""
    return _mixed(law, 1.0)


def e_plus_2(law: JointLaw) -> float:
    """``E+(X(X-1), Y) + E+(X, Y(Y-1))`` for a pair law of ``(X, Y)``."""
    ident = lambda v: v  # noqa: E731
    ff = lambda v: falling(v, 2)  # noqa: E731
    return e_plus(law.map([ff, ident])) + e_plus(law.map([ident, ff]))


def e_hat_2(law: JointLaw) -> float:
    """``E(X(X-1), Y, Z) + E(X, Y(Y-1), Z)`` for a triple law of ``(X, Y, Z)``."""
    ident = lambda v: v  # noqa: E731
    ff = lambda v: falling(v, 2)  # noqa: E731
    return centered_mixed_e(law.map([ff, ident, ident])) + centered_mixed_e(law.map([ident, ff, ident]))


# =============================================================================
# CONDITIONS
# =============================================================================


@dataclass(frozen=True)
class Clause:
    """One hypothesis of the error bounds, evaluated on a model."""

    name: str
    passed: bool
    value: float
    threshold: float
    first_violation: Optional[int] = None


@dataclass(frozen=True)
class Conditions:
    clauses: tuple

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.clauses)

    def __getitem__(self, name: str) -> Clause:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list:
        return [c.name for c in self.clauses if not c.passed]

    def to_dict(self) -> dict:
        return {
            c.name: {
                "passed": c.passed,
                "value": c.value,
                "threshold": c.threshold,
                "first_violation": c.first_violation,
            }
            for c in self.clauses
        }


def _le(a, b):
    return a <= b + _REL_SLACK * max(abs(b), 1e-300)


def _per_index_clause(name, values, thresholds):
    bad = [k for k, (v, t) in enumerate(zip(values, thresholds), start=1) if not _le(v, t)]
    worst = int(np.argmax(np.asarray(values) - np.asarray(thresholds)))
    return Clause(name, not bad, float(values[worst]), float(thresholds[worst]), bad[0] if bad else None)


def _conditions(model: OneDependentModel, lam: float, nu: np.ndarray, cov_sum: float) -> Conditions:
    nu1, nu2 = nu[0], nu[1]
    n = model.n
    row_max = model.x_table.max(axis=1)
    sum_nu2 = math.fsum(nu2)
    clauses = (
        _per_index_clause("nu1_le_1/100", nu1, np.full(n, 0.01)),
        _per_index_clause("nu2_le_nu1", nu2, nu1),
        _per_index_clause("abs_x_le_c0", row_max.astype(float), np.full(n, float(model.c0_bound))),
        Clause("lambda_ge_1", lam >= 1.0 - _REL_SLACK, lam, 1.0),
        Clause("sum_nu2_le_lambda/20", _le(sum_nu2, lam / 20), sum_nu2, lam / 20),
        Clause("cov_sum_le_lambda/20", _le(cov_sum, lam / 20), cov_sum, lam / 20),
    )
    return Conditions(clauses)


# =============================================================================
# SUMMARY
# =============================================================================


@dataclass(frozen=True)
class MomentSummary:
    """Moment parameters, remainders and hypothesis checks of a model.

    ``nu[j - 1, k - 1]`` is the ``j``-th factorial moment of ``X_k``.
    """

    lam: float
    variance: float
    gamma2: float
    shift: int
    delta_tilde: float
    nu: np.ndarray = field(repr=False)
    mixed_products: np.ndarray = field(repr=False)
    covariances: np.ndarray = field(repr=False)
    cov_sum: float
    r0: float
    r1: float
    c0: int
    conditions: Conditions = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "variance": self.variance,
            "gamma2": self.gamma2,
            "shift": self.shift,
            "delta_tilde": self.delta_tilde,
            "nu": {f"nu{j + 1}": self.nu[j].tolist() for j in range(3)},
            "cov_sum": self.cov_sum,
            "r0": self.r0,
            "r1": self.r1,
            "c0": self.c0,
            "conditions": self.conditions.to_dict(),
            "conditions_pass": self.conditions.all_pass,
        }


def _triple_key(model: OneDependentModel, k: int):
    first = max(k - 2, 1)
    lo = model.window_start(first)
    hi = model.window_start(k) + model.window
    return (
        k - first,
        model.eta_probs[lo:hi].tobytes(),
        model.x_table[first - 1 : k].tobytes(),
    )


def summarize(model: OneDependentModel) -> MomentSummary:
    """Exact moment summary of ``S_n``.

    The variance uses 1-dependence:
    ``Var S_n = sum Var X_k + 2 sum Cov(X_{k-1}, X_k)``.
    """
    n = model.n
    nu = np.zeros((3, n))
    mixed = np.zeros(n)  # E X_{k-1} X_k
    cov = np.zeros(n)  # Cov(X_{k-1}, X_k)
    e2p = np.zeros(n)
    e3p = np.zeros(n)
    cache = {}
    for k in range(1, n + 1):
        key = _triple_key(model, k)
        if key not in cache:
            law = joint_pmf(model, (k - 2, k - 1, k))
            xk = law.column(2)
            pair = JointLaw(law.values[:, 1:], law.probs)
            cache[key] = (
                [law.expect(falling(xk, j)) for j in (1, 2, 3)],
                law.expect(law.column(1) * xk),
                centered_mixed_e(pair),
                e_plus_2(pair),
                e_plus(law),
            )
        nus, mixed[k - 1], cov[k - 1], e2p[k - 1], e3p[k - 1] = cache[key]
        nu[:, k - 1] = nus
    nu1, nu2, nu3 = nu
    lam = math.fsum(nu1)
    variance = math.fsum(nu2 + nu1 - nu1 * nu1) + 2.0 * math.fsum(cov)
    gamma2 = (variance - lam) / 2.0
    shift, frac = delta_tilde(gamma2)
    cov_sum = math.fsum(np.abs(cov[1:]))

    nu1_lag1 = np.concatenate([[0.0], nu1[:-1]])
    nu1_lag2 = np.concatenate([[0.0, 0.0], nu1[:-2]])[:n]
    r0 = math.fsum(nu2 + nu1**2 + mixed)
    r1 = math.fsum(
        nu1**3 + nu1 * nu2 + nu3 + (nu1_lag2 + nu1_lag1 + nu1) * mixed + e2p + e3p
    )
    return MomentSummary(
        lam=lam,
        variance=variance,
        gamma2=gamma2,
        shift=shift,
        delta_tilde=frac,
        nu=nu,
        mixed_products=mixed,
        covariances=cov,
        cov_sum=cov_sum,
        r0=r0,
        r1=r1,
        c0=model.c0_bound,
        conditions=_conditions(model, lam, nu, cov_sum),
    )


def remainders(model: OneDependentModel) -> tuple[float, float]:
    """The remainder aggregates ``(R0, R1)`` of the model."""
    s = summarize(model)
    return s.r0, s.r1


def check_conditions(model: Union[OneDependentModel, MomentSummary]) -> Conditions:
    """Evaluate the six hypotheses of the error bounds.

    Per-summand clauses report the first violating index. Comparisons allow
    a relative slack of 1e-12 so that boundary cases such as ``p = 0.1`` for
    2-runs are not rejected by rounding.
    """
    summary = model if isinstance(model, MomentSummary) else summarize(model)
    return summary.conditions
