"""Statistical kernels: average ranks, Spearman's rho, Welch's t-test and the
Student-t tail probability via the regularized incomplete beta function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 100_000


class UndefinedCorrelation(ValueError):
    pass


class DegenerateVariance(ValueError):
    pass


@dataclass(frozen=True)
class CorrelationResult:
    rho: float
    p_value: float
    n: int
    method: str  # "t_approximation" or "permutation"


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    mean_a: float
    mean_b: float


def rank_average_ties(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of the positions they occupy."""
    if len(values) == 0:
        raise ValueError("cannot rank an empty sequence")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("values must be finite")
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    n = len(order)
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        # positions i..j (0-based) -> ranks i+1..j+1
        avg = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


# Stirling series coefficients for log Gamma(z) - [(z - 1/2) log z - z + log sqrt(2 pi)].
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
)


def _stirling_correction(z: float) -> float:
    zz = 1.0 / (z * z)
    term = 1.0 / z
    total = 0.0
    for c in _STIRLING:
        total += c * term
        term *= zz
    return total


def log_beta(a: float, b: float) -> float:
    """log B(a, b), avoiding cancellation between large log-gamma terms."""
    small, big = min(a, b), max(a, b)
    if big < 10.0:
        return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    s = small + big
    if small < 10.0:
        # lgamma(big) - lgamma(s) via Stirling, with the O(big) parts cancelled analytically.
        diff = (
            -(big - 0.5) * math.log1p(small / big)
            - small * math.log(s)
            + small
            + _stirling_correction(big)
            - _stirling_correction(s)
        )
        return math.lgamma(small) + diff
    return (
        _LOG_SQRT_2PI
        + (small - 0.5) * math.log(small / s)
        + big * math.log(big / s)
        - 0.5 * math.log(big)
        + _stirling_correction(small)
        + _stirling_correction(big)
        - _stirling_correction(s)
    )


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    # Modified Lentz evaluation of the incomplete beta continued fraction.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _beta_power_series(a: float, b: float, x: float, log_x: float) -> float:
    # I_x(a, b) = x^a / (a B(a, b)) * sum_k a/(a+k) (1-b)_k x^k / k!
    # Well conditioned for a <= 1, x <= 1/2 and b*x small.
    term = 1.0
    total = 1.0
    k = 0
    while k < _CF_MAX_ITER:
        k += 1
        term *= (k - b) * x / k
        contrib = term * a / (a + k)
        total += contrib
        if abs(contrib) <= _CF_EPS * 0.1 * abs(total) and k > b * x:
            return math.exp(a * log_x - log_beta(a, b)) / a * total
    raise ArithmeticError(f"incomplete beta power series did not converge (a={a}, b={b}, x={x})")


def _betainc(a: float, b: float, x: float, y: float, log_x: float, log_y: float) -> float:
    # The continued fraction is ill-conditioned near its switch point when the
    # other parameter is large; the power series covers that band.
    if a <= 1.0 and x <= 0.5 and b * x <= 5.0:
        return _beta_power_series(a, b, x, log_x)
    if b <= 1.0 and y <= 0.5 and a * y <= 5.0:
        return 1.0 - _beta_power_series(b, a, y, log_y)
    if x > (a + 1.0) / (a + b + 2.0):
        return 1.0 - _betainc(b, a, y, x, log_y, log_x)
    log_front = a * log_x + b * log_y - log_beta(a, b)
    return math.exp(log_front) * _beta_continued_fraction(a, b, x) / a


def betainc_regularized(a: float, b: float, x: float, y: float | None = None) -> float:
    """I_x(a, b). ``y`` may carry 1 - x when it is known more accurately than ``1 - x``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if y is None:
        y = 1.0 - x
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if y == 0.0:
        return 1.0
    return _betainc(a, b, x, y, math.log(x), math.log(y))


def t_tail_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if not (df > 0) or math.isinf(df):
        raise ValueError(f"degrees of freedom must be positive and finite, got {df}")
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    if t == 0.0:
        return 1.0
    t2 = t * t
    # x = df / (df + t^2), 1 - x = t^2 / (df + t^2); logs taken without forming x near 1
    ratio = t2 / df
    if ratio == 0.0:
        return 1.0
    x = 1.0 / (1.0 + ratio)
    y = ratio / (1.0 + ratio)
    log_x = -math.log1p(ratio)
    log_y = math.log(ratio) + log_x
    p = _betainc(df / 2.0, 0.5, x, y, log_x, log_y)
    return min(1.0, max(0.0, p))


def _pearson(a: Sequence[float], b: Sequence[float]) -> float:
    n = len(a)
    ma = math.fsum(a) / n
    mb = math.fsum(b) / n
    da = [v - ma for v in a]
    db = [v - mb for v in b]
    sab = math.fsum(u * v for u, v in zip(da, db))
    saa = math.fsum(u * u for u in da)
    sbb = math.fsum(v * v for v in db)
    if saa == 0.0 or sbb == 0.0:
        raise UndefinedCorrelation("undefined correlation: constant input")
    return max(-1.0, min(1.0, sab / math.sqrt(saa * sbb)))


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman's rho only (Pearson correlation of average ranks)."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} != {len(y)}")
    return _pearson(rank_average_ties(x), rank_average_ties(y))


def _permutation_p(rx: list[float], ry: list[float], rho: float, rounds: int, seed: int) -> float:
    # Canonical argument order so that spearman(x, y) and spearman(y, x) draw the same permutations.
    first, second = sorted((rx, ry))
    a = np.asarray(first) - np.mean(first)
    b = np.asarray(second) - np.mean(second)
    denom = math.sqrt(float(a @ a) * float(b @ b))
    threshold = abs(rho) - 1e-12
    rng = np.random.default_rng(seed)
    batch = 10_000
    hits = 0
    done = 0
    while done < rounds:
        m = min(batch, rounds - done)
        perms = rng.permuted(np.tile(b, (m, 1)), axis=1)
        stats = perms @ a / denom
        hits += int(np.count_nonzero(np.abs(stats) >= threshold))
        done += m
    return (hits + 1) / (rounds + 1)


def spearman(
    x: Sequence[float],
    y: Sequence[float],
    permutation_threshold: int = 10,
    permutation_rounds: int = 100_000,
    seed: int = 0,
) -> CorrelationResult:
    """Spearman's rho with a two-sided p-value.

    rho is the Pearson correlation of average ranks, so ties are handled
    exactly. For ``n > permutation_threshold`` the p-value comes from the
    t approximation with n - 2 degrees of freedom; otherwise from a seeded
    Monte-Carlo permutation test over ``permutation_rounds`` shuffles.
    """
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} != {len(y)}")
    n = len(x)
    if n < 3:
        raise ValueError(f"need at least 3 observations, got {n}")
    rx = rank_average_ties(x)
    ry = rank_average_ties(y)
    rho = _pearson(rx, ry)
    if n > permutation_threshold:
        r = max(-1.0 + 1e-15, min(1.0 - 1e-15, rho))
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        return CorrelationResult(rho, t_tail_two_sided(t, n - 2), n, "t_approximation")
    p = _permutation_p(rx, ry, rho, permutation_rounds, seed)
    return CorrelationResult(rho, p, n, "permutation")


def _mean_var(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, var


def welch_ttest(a: Sequence[float], b: Sequence[float], equal_var: bool = False) -> TTestResult:
    """Two-sided two-sample t-test; Welch's unequal-variance form by default.

    ``equal_var=True`` gives Student's pooled-variance test. Two constant
    groups with the same mean return t = 0, p = 1; with different means
    they raise :class:`DegenerateVariance`.
    """
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError(f"each group needs at least 2 values, got {na} and {nb}")
    ma, va = _mean_var(a)
    mb, vb = _mean_var(b)
    if equal_var:
        df = float(na + nb - 2)
        pooled = ((na - 1) * va + (nb - 1) * vb) / df
        se2 = pooled * (1.0 / na + 1.0 / nb)
    else:
        qa, qb = va / na, vb / nb
        se2 = qa + qb
        df = se2 * se2 / (qa * qa / (na - 1) + qb * qb / (nb - 1)) if se2 > 0 else float(na + nb - 2)
    if se2 == 0.0:
        if ma == mb:
            return TTestResult(0.0, float(na + nb - 2), 1.0, ma, mb)
        raise DegenerateVariance("degenerate variance: both groups constant with different means")
    t = (ma - mb) / math.sqrt(se2)
    return TTestResult(t, df, t_tail_two_sided(t, df), ma, mb)
