"""Signed measures on the integers and the approximating families.

Every distribution, approximation and difference in the package is a
:class:`SignedMeasure`: an integer offset plus a dense vector of masses.
The constructors in this module build the Poisson law, its second-order
correction, the compound Poisson measure with jumps {1, 2}, the translated
Poisson, negative binomial and binomial laws, all parametrised by the mean
``lam`` and the dispersion parameter ``gamma2 = (Var - mean) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GridTooSmallError, NonConvergenceError, ParameterDomainError

__all__ = [
    "SignedMeasure",
    "FamilyParams",
    "FAMILIES",
    "delta",
    "delta_tilde",
    "poisson",
    "second_order_correction",
    "poisson_second_order",
    "compound_poisson_g",
    "translated_poisson",
    "negative_binomial",
    "negative_binomial_params",
    "binomial_approx",
    "binomial_params",
    "build_family",
    "family_cf",
    "convolve",
    "cdf",
    "cf_eval",
    "invert_cf",
    "max_abs_diff",
]

# power-of-two rescaling keeps the compound Poisson recursion exact
_RESCALE_EXP = 664
_RESCALE = 2.0**-_RESCALE_EXP
_RESCALE_TRIGGER = 1e200

# the normaliser of a truncated pmf includes its tail down to this level
_NORMALISER_TOL = 1e-18
_NORMALISER_STEPS = 100_000

# beyond 2**53 the NB shape and BI trial count lose integer resolution
_MAX_SHAPE = 2.0**53


# =============================================================================
# SIGNED MEASURE
# =============================================================================


@dataclass(frozen=True)
class SignedMeasure:
    """Finitely supported signed measure on the integers.

    ``weights[i]`` is the mass at the integer ``offset + i``. Exact zeros at
    either end are trimmed on construction; the zero measure is stored as a
    single zero weight at offset 0.
    """

    offset: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).ravel()
        if w.size == 0:
            raise ValueError("weights must be nonempty")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        nz = np.flatnonzero(w)
        offset = int(self.offset)
        if nz.size == 0:
            w = np.zeros(1)
            offset = 0
        else:
            offset += int(nz[0])
            w = w[nz[0] : nz[-1] + 1].copy()
        w.flags.writeable = False
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "weights", w)

    # -- basic accessors -----------------------------------------------------

    @property
    def lo(self) -> int:
        return self.offset

    @property
    def hi(self) -> int:
        return self.offset + self.weights.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def is_zero(self) -> bool:
        return self.weights.size == 1 and self.weights[0] == 0.0

    def total_mass(self) -> float:
        return math.fsum(self.weights)

    def abs_mass(self) -> float:
        return math.fsum(np.abs(self.weights))

    def pmf(self, x):
        """Point mass at integer ``x`` (scalar or array)."""
        x = np.asarray(x)
        idx = x - self.offset
        inside = (idx >= 0) & (idx < self.weights.size)
        out = np.where(inside, self.weights[np.clip(idx, 0, self.weights.size - 1)], 0.0)
        return float(out) if out.ndim == 0 else out

    __getitem__ = pmf

    def cdf(self, x):
        return cdf(self, x)

    def cdf_values(self) -> np.ndarray:
        """Cumulative sums ``M(lo), ..., M(hi)``."""
        return np.cumsum(self.weights)

    def mean(self) -> float:
        return float(np.dot(self.support, self.weights))

    def variance(self) -> float:
        k = self.support.astype(np.float64)
        mu = np.dot(k, self.weights) / self.total_mass()
        return float(np.dot((k - mu) ** 2, self.weights))

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.weights >= 0))

    # -- arithmetic ----------------------------------------------------------

    def shift(self, k: int) -> "SignedMeasure":
        return SignedMeasure(self.offset + int(k), self.weights)

    def __neg__(self):
        return SignedMeasure(self.offset, -self.weights)

    def __mul__(self, c):
        return SignedMeasure(self.offset, float(c) * self.weights)

    __rmul__ = __mul__

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        lo, a, b = _aligned(self, other)
        return SignedMeasure(lo, a + b)

    def __sub__(self, other: "SignedMeasure") -> "SignedMeasure":
        lo, a, b = _aligned(self, other)
        return SignedMeasure(lo, a - b)

    def __eq__(self, other):
        if not isinstance(other, SignedMeasure):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.weights, other.weights)

    __hash__ = None


def delta(k: int = 0, mass: float = 1.0) -> SignedMeasure:
    """Point mass ``mass`` at the integer ``k``."""
    return SignedMeasure(k, [mass])


def _aligned(a: SignedMeasure, b: SignedMeasure, pad: int = 0):
    """Both weight vectors on the common grid ``[lo - pad, hi + pad]``."""
    lo = min(a.lo, b.lo) - pad
    hi = max(a.hi, b.hi) + pad
    wa = np.zeros(hi - lo + 1)
    wb = np.zeros(hi - lo + 1)
    wa[a.lo - lo : a.hi - lo + 1] = a.weights
    wb[b.lo - lo : b.hi - lo + 1] = b.weights
    return lo, wa, wb


def max_abs_diff(a: SignedMeasure, b: SignedMeasure) -> float:
    """Largest pointwise difference ``max_x |a{x} - b{x}|``."""
    _, wa, wb = _aligned(a, b)
    return float(np.max(np.abs(wa - wb)))


# =============================================================================
# PARAMETERS
# =============================================================================


@dataclass(frozen=True)
class FamilyParams:
    """Parameters shared by all approximating families.

    Parameters
    ----------
    lam : float
        Mean of the approximated sum, must be positive.
    gamma2 : float
        Half the variance-minus-mean of the approximated sum.
    truncation_eps : float
        Infinite supports are cut once the discarded tail mass is certified
        below this value.
    max_support : int, optional
        Hard cap on the largest retained point. Defaults to ``10 * lam + 200``.
    """

    lam: float
    gamma2: float = 0.0
    truncation_eps: float = 1e-12
    max_support: Optional[int] = None

    def __post_init__(self):
        if not self.truncation_eps > 0:
            raise ParameterDomainError("truncation_eps must be positive")

    @property
    def cap(self) -> int:
        if self.max_support is not None:
            return int(self.max_support)
        return int(math.ceil(10.0 * self.lam + 200))


def _require_positive_lambda(params: FamilyParams):
    if not params.lam > 0:
        raise ParameterDomainError(f"lambda must be positive, got {params.lam}")


def delta_tilde(gamma2: float) -> tuple[int, float]:
    """Split ``-2 * gamma2`` into its integer part and fractional part.

    Returns ``(shift, frac)`` with ``shift + frac == -2 * gamma2`` and
    ``0 <= frac < 1``.
    """
    s = -2.0 * gamma2
    shift = math.floor(s)
    frac = s - shift
    if frac >= 1.0:  # s is a tiny negative number; s - floor(s) rounded up to 1
        shift += 1
        frac = 0.0
    return int(shift), float(frac)


# =============================================================================
# UNIMODAL PMF BUILDER
# =============================================================================


def _unimodal_pmf(mode, log_mode_mass, up_ratio, down_ratio, tail_ratio, eps, cap, hi=None, name="pmf"):
    """Tabulate a unimodal pmf on ``[0, K]`` from its mode.

    ``up_ratio(k)`` is ``w[k+1] / w[k]``, ``down_ratio(k)`` is ``w[k-1] / w[k]``
    and ``tail_ratio(k)`` bounds every ratio ``w[j+1] / w[j]`` with ``j >= k``.
    When ``hi`` is given the support never extends past it. The table is
    normalised to unit mass.
    """
    left = [math.exp(log_mode_mass)]
    w = left[0]
    for k in range(mode, 0, -1):
        w *= down_ratio(k)
        if w == 0.0:
            break
        left.append(w)
    left.reverse()
    lo = mode - (len(left) - 1)

    right = []
    w = left[-1]
    k = mode
    while True:
        if hi is not None and k >= hi:
            break
        rho = tail_ratio(k)
        if rho < 1.0 and w * rho / (1.0 - rho) < eps:
            break
        if k >= cap:
                raise NonConvergenceError(
                    f"{name}: support cap {cap} reached before the tail fell below {eps}",
                    partial_abs_mass=math.fsum(left) + math.fsum(right),
                )
        w *= up_ratio(k)
        k += 1
        right.append(w)
    # The log-gamma seed carries a relative error of order ulp(lgamma(mode)),
    # which can exceed eps for large modes. Normalising removes it; the
    # normaliser runs the recursion past the cut until the remaining tail
    # is negligible, so the retained weights keep their exact values.
    kept = np.array(left + right)
    extra = []
    total = math.fsum(kept)
    while hi is None or k < hi:
        rho = tail_ratio(k)
        if (rho < 1.0 and w * rho / (1.0 - rho) < _NORMALISER_TOL * total) or w == 0.0:
            break
        if len(extra) > _NORMALISER_STEPS:
            break
        w *= up_ratio(k)
        k += 1
        extra.append(w)
    return SignedMeasure(lo, kept / math.fsum([total, *extra]))


# =============================================================================
# FAMILIES
# =============================================================================


def poisson(params: FamilyParams) -> SignedMeasure:
    """Poisson law with mean ``params.lam``, truncated at a certified tail."""
    _require_positive_lambda(params)
    lam = params.lam
    mode = int(math.floor(lam))
    log_mode = -lam + mode * math.log(lam) - math.lgamma(mode + 1)
    return _unimodal_pmf(
        mode,
        log_mode,
        up_ratio=lambda k: lam / (k + 1),
        down_ratio=lambda k: k / lam,
        tail_ratio=lambda k: lam / (k + 1),
        eps=params.truncation_eps,
        cap=params.cap,
        name="poisson",
    )


_SECOND_DIFFERENCE = SignedMeasure(0, [1.0, -2.0, 1.0])


def second_order_correction(params: FamilyParams) -> SignedMeasure:
    """``gamma2`` times the second difference of the Poisson pmf.

    ``Pi_1{k} = gamma2 * (pi{k-2} - 2 pi{k-1} + pi{k})``; its total mass is 0.
    """
    return params.gamma2 * convolve(poisson(params), _SECOND_DIFFERENCE)


def poisson_second_order(params: FamilyParams) -> SignedMeasure:
    """The two-parameter signed approximation ``Pi + Pi_1``."""
    pi = poisson(params)
    return pi + params.gamma2 * convolve(pi, _SECOND_DIFFERENCE)


def compound_poisson_g(params: FamilyParams) -> SignedMeasure:
    """Compound Poisson measure with transform ``exp(lam*z + gamma2*z**2)``.

    Writing the exponent as ``a1*(e^{it}-1) + a2*(e^{2it}-1)`` with
    ``a1 = lam - 2*gamma2`` and ``a2 = gamma2`` gives the recursion
    ``k*g[k] = a1*g[k-1] + 2*a2*g[k-2]`` from ``g[0] = exp(-a1-a2)``. The
    measure is signed whenever ``gamma2 < 0`` or ``a1 < 0``.

    Raises
    ------
    NonConvergenceError
        If ``params.cap`` is reached before the certified absolute tail
        bound drops below ``params.truncation_eps``.
    """
    _require_positive_lambda(params)
    a1 = params.lam - 2.0 * params.gamma2
    a2 = params.gamma2
    log_g0 = -(a1 + a2)
    growth = abs(a1) + 2.0 * abs(a2)
    eps = params.truncation_eps
    cap = params.cap

    vals = np.empty(64)
    vals[0] = 1.0
    log_scale = 0.0
    prev2, prev1 = 0.0, 1.0
    k = 0
    while True:
        rho = growth / (k + 1)
        if rho < 1.0:
            m_k = max(abs(prev1), abs(prev2)) * math.exp(log_g0 + log_scale)
            if 2.0 * m_k * rho / (1.0 - rho) < eps:
                break
        if k >= cap:
            partial = np.abs(vals[: k + 1]) * math.exp(log_g0 + log_scale)
            raise NonConvergenceError(
                f"compound Poisson recursion did not converge within {cap} points "
                f"(lam={params.lam}, gamma2={params.gamma2})",
                partial_abs_mass=float(partial.sum()),
            )
        k += 1
        v = (a1 * prev1 + 2.0 * a2 * prev2) / k
        if k >= vals.size:
            vals = np.concatenate([vals, np.empty(vals.size)])
        vals[k] = v
        prev2, prev1 = prev1, v
        if abs(v) > _RESCALE_TRIGGER:
            vals[: k + 1] *= _RESCALE
            prev2 *= _RESCALE
            prev1 *= _RESCALE
            log_scale += _RESCALE_EXP * math.log(2.0)
    vals = vals[: k + 1]
    with np.errstate(divide="ignore"):
        weights = np.sign(vals) * np.exp(np.log(np.abs(vals)) + log_g0 + log_scale)
    return SignedMeasure(0, weights)


def translated_poisson(params: FamilyParams) -> SignedMeasure:
    """Poisson law with rate ``lam + 2*gamma2 + frac`` shifted by ``floor(-2*gamma2)``.

    ``frac`` is the fractional part of ``-2*gamma2``, so the result has mean
    ``lam`` and variance within 1 of ``lam + 2*gamma2``. For ``gamma2 > 0`` the
    shift is negative and part of the mass sits below zero.
    """
    _require_positive_lambda(params)
    shift, _ = delta_tilde(params.gamma2)
    rate = params.lam - shift
    if not rate > 0:
        raise ParameterDomainError(
            f"translated Poisson rate lam + 2*gamma2 + frac = {rate} must be positive"
        )
    cap = params.cap - min(shift, 0)
    base = poisson(FamilyParams(rate, 0.0, params.truncation_eps, cap))
    return base.shift(shift)


def negative_binomial_params(lam: float, gamma2: float) -> tuple[float, float]:
    """Solve ``r(1-q)/q = lam`` and ``r((1-q)/q)**2 = 2*gamma2`` for ``(r, q)``."""
    if not lam > 0:
        raise ParameterDomainError(f"lambda must be positive, got {lam}")
    if not gamma2 > 0:
        raise ParameterDomainError(f"negative binomial needs gamma2 > 0, got {gamma2}")
    q = lam / (lam + 2.0 * gamma2)
    r = lam * lam / (2.0 * gamma2)
    if not r <= _MAX_SHAPE:
        raise ParameterDomainError(f"negative binomial shape r = {r:.6g} is not representable")
    return r, q


def negative_binomial(params: FamilyParams) -> SignedMeasure:
    """Negative binomial law with mean ``lam`` and variance ``lam + 2*gamma2``."""
    r, q = negative_binomial_params(params.lam, params.gamma2)
    one_minus_q = 2.0 * params.gamma2 / (params.lam + 2.0 * params.gamma2)
    mode = int(math.floor((r - 1.0) * one_minus_q / q)) if r > 1.0 else 0

    def ratio(j):
        return (r + j) * one_minus_q / (j + 1)

    def tail_ratio(j):
        return ratio(j) if r >= 1.0 else one_minus_q

    # lgamma(r + mode) - lgamma(r) cancels badly for large r; since
    # r * (1 - q) = lam * q the seed is rewritten in terms of log1p
    log_mode = (
        math.fsum(np.log1p(np.arange(mode) / r))
        + mode * math.log(params.lam * q)
        - math.lgamma(mode + 1)
        - r * math.log1p(2.0 * params.gamma2 / params.lam)
    )
    return _unimodal_pmf(
        mode,
        log_mode,
        up_ratio=ratio,
        down_ratio=lambda j: j / ((r + j - 1) * one_minus_q),
        tail_ratio=tail_ratio,
        eps=params.truncation_eps,
        cap=params.cap,
        name="negative binomial",
    )


def binomial_params(lam: float, gamma2: float) -> tuple[int, float]:
    """``N = floor(lam**2 / (2|gamma2|))`` and ``p = lam / N``."""
    if not lam > 0:
        raise ParameterDomainError(f"lambda must be positive, got {lam}")
    if not gamma2 < 0:
        raise ParameterDomainError(f"binomial approximation needs gamma2 < 0, got {gamma2}")
    n_tilde = lam * lam / (2.0 * abs(gamma2))
    if not n_tilde <= _MAX_SHAPE:
        raise ParameterDomainError(f"binomial N = floor({n_tilde:.6g}) is not representable")
    n = int(math.floor(n_tilde))
    if n < 1:
        raise ParameterDomainError(f"binomial N = floor({n_tilde:.6g}) is 0")
    p = lam / n
    if p > 1.0:
        raise ParameterDomainError(f"binomial p = lam/N = {p:.6g} exceeds 1")
    return n, p


def binomial_approx(params: FamilyParams) -> SignedMeasure:
    """Binomial law ``Bi(N, p)`` with ``N p = lam`` matching ``gamma2 < 0``."""
    n, p = binomial_params(params.lam, params.gamma2)
    if p == 1.0:
        return delta(n)
    odds = p / (1.0 - p)
    mode = min(int(math.floor((n + 1) * p)), n)
    # log C(n, mode) written as a sum of log1p terms, stable for huge n
    log_mode = (
        math.fsum(np.log1p(-np.arange(mode) / n))
        + mode * math.log(n * p)
        - math.lgamma(mode + 1)
        + (n - mode) * math.log1p(-p)
    )

    def ratio(k):
        return (n - k) / (k + 1) * odds

    return _unimodal_pmf(
        mode,
        log_mode,
        up_ratio=ratio,
        down_ratio=lambda k: k / ((n - k + 1) * odds),
        tail_ratio=ratio,
        eps=params.truncation_eps,
        cap=max(params.cap, mode),
        hi=n,
        name="binomial",
    )


FAMILIES: dict[str, Callable[[FamilyParams], SignedMeasure]] = {
    "poisson": poisson,
    "poisson2": poisson_second_order,
    "compound": compound_poisson_g,
    "tp": translated_poisson,
    "nb": negative_binomial,
    "bi": binomial_approx,
}


def build_family(name: str, params: FamilyParams) -> SignedMeasure:
    """Construct the approximating family called ``name``.

    Names are ``poisson``, ``poisson2`` (Poisson plus second-order
    correction), ``compound``, ``tp``, ``nb`` and ``bi``.
    """
    try:
        ctor = FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None
    return ctor(params)


def family_cf(name: str, params: FamilyParams) -> Callable[[np.ndarray], np.ndarray]:
    """Defining Fourier transform of a family, evaluated independently of its pmf."""
    lam, g2 = params.lam, params.gamma2

    def z(t):
        return np.expm1(1j * np.asarray(t, dtype=float))

    if name == "poisson":
        return lambda t: np.exp(lam * z(t))
    if name == "poisson2":
        return lambda t: np.exp(lam * z(t)) * (1.0 + g2 * z(t) ** 2)
    if name == "compound":
        return lambda t: np.exp(lam * z(t) + g2 * z(t) ** 2)
    if name == "tp":
        shift, frac = delta_tilde(g2)
        rate = lam + 2.0 * g2 + frac
        return lambda t: np.exp(shift * 1j * np.asarray(t, dtype=float) + rate * z(t))
    if name == "nb":
        r, q = negative_binomial_params(lam, g2)
        return lambda t: (1.0 - (1.0 - q) * z(t) / q) ** (-r)
    if name == "bi":
        n, p = binomial_params(lam, g2)
        return lambda t: (1.0 + p * z(t)) ** n
    raise ValueError(f"unknown family {name!r}")


# =============================================================================
# OPERATIONS
# =============================================================================


def convolve(a: SignedMeasure, b: SignedMeasure) -> SignedMeasure:
    """Exact discrete convolution ``a * b``."""
    return SignedMeasure(a.offset + b.offset, np.convolve(a.weights, b.weights))


def cdf(m: SignedMeasure, x):
    """``M(x) = sum of m{k} over k <= x`` for scalar or array ``x``."""
    cum = m.cdf_values()
    xs = np.asarray(x, dtype=float)
    idx = np.floor(np.minimum(xs, m.hi)) - m.lo
    out = np.where(xs < m.lo, 0.0, cum[np.clip(idx, 0, cum.size - 1).astype(np.int64)])
    out = np.where(xs >= m.hi, m.total_mass(), out)
    return float(out) if out.ndim == 0 else out


def cf_eval(m: SignedMeasure, t, chunk: int = 1 << 22):
    """Fourier-Stieltjes transform ``sum_k exp(itk) m{k}``."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    k = m.support.astype(float)
    out = np.empty(ts.size, dtype=complex)
    step = max(1, chunk // max(1, k.size))
    for start in range(0, ts.size, step):
        block = ts[start : start + step]
        out[start : start + step] = np.exp(1j * np.outer(block, k)) @ m.weights
    return complex(out[0]) if np.ndim(t) == 0 else out


def invert_cf(cf, grid_size: int = 4096, *, min_index: int = 0, tol: float = 1e-10, cutoff: float = 1e-15):
    """Recover an integer-supported measure from its characteristic function.

    Evaluates ``cf`` on ``grid_size`` equispaced points of ``[0, 2*pi)`` and
    inverts by FFT, placing the result on ``[min_index, min_index + grid_size)``.

    Parameters
    ----------
    cf : callable
        Maps an array of reals to complex values; must be 2*pi periodic.
    grid_size : int
        Power of two, at least twice the support length.
    min_index : int
        Smallest integer of the reconstruction window.
    tol : float
        Largest absolute mass tolerated in the top quarter of the window,
        on top of the FFT round-off level.
    cutoff : float
        End entries below ``cutoff * max|m{k}|`` are trimmed.

    Raises
    ------
    GridTooSmallError
        When mass spills into the top quarter of the window.
    """
    if grid_size < 4 or grid_size & (grid_size - 1):
        raise ValueError("grid_size must be a power of two >= 4")
    t = 2.0 * np.pi * np.arange(grid_size) / grid_size
    vals = np.broadcast_to(np.asarray(cf(t), dtype=complex), t.shape)
    # shift so that index 0 of the window corresponds to min_index
    vals = vals * np.exp(-1j * t * min_index)
    w = np.fft.fft(vals).real / grid_size
    guard = w[3 * grid_size // 4 :]
    # FFT round-off is of order log2(N) * ulp * max|cf|; strongly signed
    # measures have large transforms and must not be mistaken for aliasing
    floor = 4.0 * math.log2(grid_size) * np.finfo(float).eps * float(np.max(np.abs(vals)))
    if np.max(np.abs(guard)) > tol + floor:
        raise GridTooSmallError(
            f"mass {np.max(np.abs(guard)):.3e} in the wrap-around band; grid {grid_size} too small"
        )
    keep = np.flatnonzero(np.abs(w) > cutoff * np.max(np.abs(w)))
    if keep.size == 0:
        return SignedMeasure(0, [0.0])
    return SignedMeasure(min_index + int(keep[0]), w[keep[0] : keep[-1] + 1])
