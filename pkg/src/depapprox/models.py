"""1-dependent integer sequences built from a hidden i.i.d. Bernoulli chain.

Each summand ``X_k`` is a function of a contiguous window of ``window``
Bernoulli variables ``eta``. Window ``k`` starts ``stride`` positions after
window ``k - 1``; whenever ``2 * stride >= window`` the windows of ``X_k``
and ``X_{k+2}`` are disjoint, so the sequence is 1-dependent by
construction. Poisson binomial sums (stride 1, window 1), 2-runs (stride 1,
window 2) and blocked (k1, k2)-event counts (stride m, window 2m - 1) all
have this form.

Kernels are tabulated once: ``x_table[k - 1, pattern]`` is the value of
``X_k`` when the window bits, earliest first, are the binary digits of
``pattern`` (least significant bit first).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ParameterDomainError, ResourceLimitError
from .measures import SignedMeasure

__all__ = [
    "OneDependentModel",
    "BlockedModel",
    "JointLaw",
    "model_from_kernel",
    "blocked_model",
    "poisson_binomial_model",
    "two_runs_model",
    "k1k2_events_model",
    "make_model",
    "exact_sum_distribution",
    "brute_force_sum",
    "joint_pmf",
    "joint_triple_pmf",
    "DP_BUDGET",
    "BRUTE_FORCE_MAX_ETA",
]

DP_BUDGET = 10**8
BRUTE_FORCE_MAX_ETA = 24
_ENUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class OneDependentModel:
    """A sum ``S_n = X_1 + ... + X_n`` of 1-dependent chain functionals.

    Attributes
    ----------
    n : int
        Number of summands.
    eta_probs : ndarray
        Success probabilities of the hidden Bernoulli chain, length
        ``(n - 1) * stride + window``.
    window, stride : int
        Window length and step between consecutive windows.
    x_table : ndarray of int, shape (n, 2**window)
        Tabulated kernel.
    c0_bound : int
        Structural bound ``0 <= X_k <= c0_bound``.
    kind : str
        Model family name used in reports.
    params : dict
        Constructor parameters, for reports.
    closed_form : dict
        Known closed-form values (``lambda``, ``gamma2``, ...), if any.
    """

    n: int
    eta_probs: np.ndarray = field(repr=False)
    window: int
    stride: int
    x_table: np.ndarray = field(repr=False)
    c0_bound: int
    kind: str = "generic"
    params: dict = field(default_factory=dict)
    closed_form: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ParameterDomainError("a model needs at least one summand")
        if self.window < 1 or self.stride < 1:
            raise ParameterDomainError("window and stride must be positive")
        if self.stride > self.window or 2 * self.stride < self.window:
            raise ParameterDomainError(
                f"stride {self.stride} and window {self.window} do not give a 1-dependent sequence"
            )
        if self.eta_probs.shape != (self.n_eta,):
            raise ParameterDomainError(f"expected {self.n_eta} chain probabilities, got {self.eta_probs.shape}")
        if np.any((self.eta_probs < 0) | (self.eta_probs > 1)):
            raise ParameterDomainError("chain probabilities must lie in [0, 1]")
        if self.x_table.shape != (self.n, 1 << self.window):
            raise ParameterDomainError("kernel table has the wrong shape")
        if self.x_table.min() < 0 or self.x_table.max() > self.c0_bound:
            raise ParameterDomainError("kernel values must lie in [0, c0_bound]")
        self.eta_probs.flags.writeable = False
        self.x_table.flags.writeable = False

    @property
    def n_eta(self) -> int:
        return (self.n - 1) * self.stride + self.window

    def window_start(self, k: int) -> int:
        """0-based chain position of the first bit in the window of ``X_k``."""
        return (k - 1) * self.stride

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True)
class BlockedModel(OneDependentModel):
    """Sum of m-dependent ``Y_j`` grouped into blocks of ``block_length``.

    ``blocks[i]`` lists the ``Y`` indices summed into ``X_{i+1}``; the last
    block may be shorter than the others.
    """

    block_length: int = 1
    y_indices: tuple = ()
    blocks: tuple = ()


def _bits(pattern: int, width: int) -> tuple:
    return tuple((pattern >> b) & 1 for b in range(width))


def model_from_kernel(
    n: int,
    eta_probs,
    window: int,
    kernel: Callable[[int, tuple], int],
    *,
    stride: int = 1,
    c0_bound: Optional[int] = None,
    kind: str = "generic",
    params: Optional[dict] = None,
    closed_form: Optional[dict] = None,
) -> OneDependentModel:
    """Tabulate ``kernel(k, bits)`` for every summand and window pattern."""
    eta_probs = np.asarray(eta_probs, dtype=np.float64)
    patterns = [_bits(pat, window) for pat in range(1 << window)]
    table = np.array([[kernel(k, bits) for bits in patterns] for k in range(1, n + 1)], dtype=np.int64)
    if c0_bound is None:
        c0_bound = int(table.max())
    return OneDependentModel(
        n, eta_probs, window, stride, table, int(c0_bound), kind, dict(params or {}), dict(closed_form or {})
    )


def blocked_model(
    eta_probs,
    y_window: int,
    y_first: int,
    y_last: int,
    y_kernel: Callable[[tuple], int],
    block_length: int,
    *,
    kind: str = "blocked",
    params: Optional[dict] = None,
    closed_form: Optional[dict] = None,
) -> BlockedModel:
    """Group ``Y_j = y_kernel(eta_{j-y_window+1}, ..., eta_j)`` into blocks.

    ``Y_j`` exists for ``y_first <= j <= y_last`` (1-based chain positions),
    and is ``(y_window - 1)``-dependent. Block ``i`` sums ``block_length``
    consecutive ``Y``s starting at ``y_first``; a ragged final block is kept.
    Position 1 of the model's chain is ``eta_{y_first - y_window + 1}``.
    Chain probabilities beyond ``y_last`` pad the final window and do not
    affect any summand.
    """
    m = int(block_length)
    if m < max(1, y_window - 1):
        raise ParameterDomainError(f"block length {m} too short for window {y_window}")
    if y_first < y_window or y_last < y_first:
        raise ParameterDomainError("invalid range of Y indices")
    y_idx = list(range(y_first, y_last + 1))
    blocks = tuple(tuple(y_idx[i : i + m]) for i in range(0, len(y_idx), m))
    n_blocks = len(blocks)
    window = m + y_window - 1
    n_eta = (n_blocks - 1) * m + window
    eta = np.asarray(eta_probs, dtype=np.float64)
    if eta.ndim == 0:
        eta = np.full(n_eta, float(eta))
    elif eta.size < n_eta:
        # pad positions past y_last; they never enter a kernel
        eta = np.concatenate([eta, np.full(n_eta - eta.size, 0.5)])
    eta = eta[:n_eta]
    first_pos = y_first - y_window + 1  # 1-based chain position of window 1

    def kernel(k, bits):
        start = first_pos + (k - 1) * m
        total = 0
        for j in blocks[k - 1]:
            lo = j - y_window + 1 - start
            total += y_kernel(bits[lo : lo + y_window])
        return total

    model = model_from_kernel(
        n_blocks, eta, window, kernel, stride=m, c0_bound=None, kind=kind, params=params, closed_form=closed_form
    )
    return BlockedModel(
        model.n,
        model.eta_probs,
        model.window,
        model.stride,
        model.x_table,
        model.c0_bound,
        model.kind,
        model.params,
        model.closed_form,
        block_length=m,
        y_indices=tuple(y_idx),
        blocks=blocks,
    )


# =============================================================================
# CONCRETE MODELS
# =============================================================================


def poisson_binomial_model(p: Sequence[float]) -> OneDependentModel:
    """Independent Bernoulli(``p_i``) summands."""
    p = np.atleast_1d(np.asarray(p, dtype=np.float64))
    if p.size == 0:
        raise ParameterDomainError("Poisson binomial needs at least one probability")
    if np.any((p < 0) | (p > 1)):
        raise ParameterDomainError("probabilities must lie in [0, 1]")
    n = p.size
    table = np.tile(np.array([0, 1], dtype=np.int64), (n, 1))
    lam = math.fsum(p)
    lam2 = math.fsum(p * p)
    uniform = bool(np.all(p == p[0]))
    params = {"n": n, "p": float(p[0])} if uniform else {"n": n, "p": [float(v) for v in p]}
    closed = {"lambda": lam, "gamma2": -0.5 * lam2, "lambda2": lam2}
    return OneDependentModel(n, p.copy(), 1, 1, table, 1, "poisson_binomial", params, closed)


def two_runs_model(n: int, p: float) -> OneDependentModel:
    """2-runs statistic ``X_i = eta_i * eta_{i+1}`` on ``n + 1`` Bernoulli(p) bits."""
    if n < 1:
        raise ParameterDomainError("n must be at least 1")
    if not 0 < p < 1:
        raise ParameterDomainError(f"p must lie in (0, 1), got {p}")
    table = np.tile(np.array([0, 0, 0, 1], dtype=np.int64), (n, 1))
    closed = {
        "lambda": n * p**2,
        "gamma2": (n * p**3 * (2 - 3 * p) - 2 * p**3 * (1 - p)) / 2,
    }
    return OneDependentModel(n, np.full(n + 1, float(p)), 2, 1, table, 1, "two_runs", {"n": n, "p": p}, closed)


def k1k2_events_model(n: int, k1: int, k2: int, p: float) -> BlockedModel:
    """Count of k1 failures followed by k2 successes, blocked by ``m = k1 + k2``.

    ``Y_j`` indicates that ``eta_{j-m+1..j-k2}`` are all 0 and
    ``eta_{j-k2+1..j}`` are all 1, for ``j = m..n``. Each block of ``m``
    consecutive ``Y``s contains at most one event, so the block sums are
    1-dependent Bernoulli variables.
    """
    if k1 < 1 or k2 < 1:
        raise ParameterDomainError("k1 and k2 must be positive")
    m = k1 + k2
    if m > n:
        raise ParameterDomainError(f"m = k1 + k2 = {m} exceeds n = {n}")
    if not 0 < p < 1:
        raise ParameterDomainError(f"p must lie in (0, 1), got {p}")
    target = (0,) * k1 + (1,) * k2

    def y_kernel(bits):
        return int(tuple(bits) == target)

    a = (1 - p) ** k1 * p**k2
    n_y = n - m + 1
    spread = n_y * (2 * m - 1) - m * (m - 1)
    n_tilde = n_y**2 / spread
    big_n = int(math.floor(n_tilde))
    closed = {
        "a": a,
        "lambda": n_y * a,
        "gamma2": -(a**2) / 2 * spread,
        "n_tilde": n_tilde,
        "N": big_n,
        "p_bar": n_y * a / big_n if big_n >= 1 else math.inf,
        "r1_scale": n_y * m**2 * a**3,
    }
    return blocked_model(
        float(p), m, m, n, y_kernel, m,
        kind="k1k2", params={"n": n, "k1": k1, "k2": k2, "p": p}, closed_form=closed,
    )


def make_model(kind: str, **params) -> OneDependentModel:
    """Build a model from its kind name and keyword parameters.

    ``poisson_binomial`` takes ``p`` (a list, or a scalar together with
    ``n``); ``two_runs`` takes ``n, p``; ``k1k2`` takes ``n, k1, k2, p``.
    """
    if kind == "poisson_binomial":
        p = params["p"]
        if np.ndim(p) == 0:
            p = [float(p)] * int(params["n"])
        elif "n" in params and len(p) != int(params["n"]):
            raise ParameterDomainError("length of p does not match n")
        return poisson_binomial_model(p)
    if kind == "two_runs":
        return two_runs_model(int(params["n"]), float(params["p"]))
    if kind == "k1k2":
        return k1k2_events_model(int(params["n"]), int(params["k1"]), int(params["k2"]), float(params["p"]))
    raise ValueError(f"unknown model kind {kind!r}")


# =============================================================================
# EXACT SUM DISTRIBUTION
# =============================================================================


def _bit_probs(probs: np.ndarray) -> np.ndarray:
    """Probability of every bit pattern for independent bits (LSB = first)."""
    out = np.ones(1)
    for p in probs:
        out = np.concatenate([out * (1.0 - p), out * p])
    return out


def exact_sum_distribution(model: OneDependentModel, budget: int = DP_BUDGET) -> SignedMeasure:
    """Law of ``S_n`` by dynamic programming over (chain state, partial sum).

    The state after summand ``k`` is the ``window - stride`` chain bits that
    the next window shares with the current one. Two layers are kept;
    trailing sums whose probability has underflowed to zero are dropped.

    Raises
    ------
    ResourceLimitError
        If ``2**window * (max sum + 1)`` exceeds ``budget``.
    """
    w, s = model.window, model.stride
    row_max = model.x_table.max(axis=1)
    max_sum = int(row_max.sum())
    if (1 << w) * (max_sum + 1) > budget:
        raise ResourceLimitError(
            f"DP needs {(1 << w) * (max_sum + 1):.3g} state entries, budget is {budget:.3g}"
        )
    keep = w - s
    n_states = 1 << keep
    eta = model.eta_probs
    table = model.x_table

    first = _bit_probs(eta[:w])
    layer = np.zeros((n_states, max_sum + 1))
    for pat in range(1 << w):
        layer[pat >> s, table[0, pat]] += first[pat]
    length = int(row_max[0]) + 1

    for k in range(1, model.n):
        start = k * s + keep
        new_probs = _bit_probs(eta[start : start + s])
        new_len = length + int(row_max[k])
        nxt = np.zeros((n_states, max_sum + 1))
        for state in range(n_states):
            src = layer[state, :length]
            for nb in range(1 << s):
                pr = new_probs[nb]
                if pr == 0.0:
                    continue
                pat = state | (nb << keep)
                x = table[k, pat]
                nxt[pat >> s, x : x + length] += pr * src
        nz = np.flatnonzero(nxt[:, :new_len].any(axis=0))
        length = int(nz[-1]) + 1 if nz.size else 1
        layer = nxt
    return SignedMeasure(0, layer[:, :length].sum(axis=0))


def brute_force_sum(model: OneDependentModel, max_eta: int = BRUTE_FORCE_MAX_ETA) -> SignedMeasure:
    """Law of ``S_n`` by enumerating every assignment of the hidden chain."""
    count = model.n_eta
    if count > max_eta:
        raise ResourceLimitError(f"{count} chain bits exceed the enumeration limit {max_eta}")
    eta = model.eta_probs
    w, s = model.window, model.stride
    max_sum = int(model.x_table.max(axis=1).sum())
    # exact-rounding sums per value; naive accumulation over 2**24 terms
    # drifts by more than 1e-13
    partial = [[] for _ in range(max_sum + 1)]
    shifts = np.arange(count)
    weights = 1 << np.arange(w)
    for start in range(0, 1 << count, _ENUM_CHUNK):
        codes = np.arange(start, min(start + _ENUM_CHUNK, 1 << count), dtype=np.int64)
        bits = (codes[:, None] >> shifts) & 1
        prob = np.prod(np.where(bits == 1, eta, 1.0 - eta), axis=1)
        total = np.zeros(codes.size, dtype=np.int64)
        for k in range(model.n):
            pat = bits[:, k * s : k * s + w] @ weights
            total += model.x_table[k, pat]
        order = np.argsort(total, kind="stable")
        values, starts = np.unique(total[order], return_index=True)
        for v, chunk in zip(values, np.split(prob[order], starts[1:])):
            partial[v].append(math.fsum(chunk))
    return SignedMeasure(0, [math.fsum(parts) for parts in partial])


# =============================================================================
# JOINT LAWS
# =============================================================================


@dataclass(frozen=True)
class JointLaw:
    """Finite joint law: ``values[i]`` occurs with probability ``probs[i]``."""

    values: np.ndarray
    probs: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def expect(self, arr) -> float:
        return float(np.dot(self.probs, arr))

    def marginal(self, i: int) -> "JointLaw":
        return _collapse(self.values[:, [i]], self.probs)

    def map(self, funcs: Sequence[Callable[[np.ndarray], np.ndarray]]) -> "JointLaw":
        """Law of ``(funcs[0](col 0), funcs[1](col 1), ...)``."""
        cols = [f(self.values[:, i]) for i, f in enumerate(funcs)]
        return JointLaw(np.column_stack(cols), self.probs)


def _collapse(values: np.ndarray, probs: np.ndarray) -> JointLaw:
    uniq, inv = np.unique(values, axis=0, return_inverse=True)
    return JointLaw(uniq, np.bincount(inv.ravel(), weights=probs, minlength=uniq.shape[0]))


def joint_pmf(model: OneDependentModel, indices: Sequence[int]) -> JointLaw:
    """Exact joint law of ``(X_k for k in indices)``.

    Indices ``k <= 0`` denote the constant 0 summand.
    """
    indices = list(indices)
    if any(k > model.n for k in indices):
        raise IndexError(f"summand index beyond n = {model.n}")
    w = model.window
    positions = sorted({model.window_start(k) + b for k in indices if k >= 1 for b in range(w)})
    if not positions:
        return JointLaw(np.zeros((1, len(indices)), dtype=np.int64), np.ones(1))
    where = {pos: i for i, pos in enumerate(positions)}
    probs = _bit_probs(model.eta_probs[positions])
    codes = np.arange(1 << len(positions), dtype=np.int64)
    cols = []
    for k in indices:
        if k < 1:
            cols.append(np.zeros(codes.size, dtype=np.int64))
            continue
        start = model.window_start(k)
        pat = np.zeros(codes.size, dtype=np.int64)
        for b in range(w):
            pat |= ((codes >> where[start + b]) & 1) << b
        cols.append(model.x_table[k - 1, pat])
    return _collapse(np.column_stack(cols), probs)


def joint_triple_pmf(model: OneDependentModel, k: int) -> JointLaw:
    """Joint law of ``(X_{k-2}, X_{k-1}, X_k)`` for ``1 <= k <= n``."""
    if not 1 <= k <= model.n:
        raise IndexError(f"k must lie in [1, {model.n}]")
    return joint_pmf(model, (k - 2, k - 1, k))
