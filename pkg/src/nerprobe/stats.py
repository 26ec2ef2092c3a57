"""Run aggregation and the two-tailed paired t-test.

The Student t CDF goes through the regularized incomplete beta function,
evaluated with the modified Lentz continued fraction, so no statistics
package is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateVarianceError, NerProbeError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


@dataclass(frozen=True)
class RunSummary:
    n: int
    mean: float
    sample_sd: float | None
    min: float
    max: float


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: int
    p_two_tailed: float

    def significant(self, alpha: float) -> bool:
        return self.p_two_tailed < alpha


def aggregate(values: Sequence[float]) -> RunSummary:
    xs = [float(v) for v in values]
    if not xs:
        raise NerProbeError("cannot aggregate an empty list")
    n = len(xs)
    if all(x == xs[0] for x in xs):
        return RunSummary(n, xs[0], 0.0 if n > 1 else None, xs[0], xs[0])
    mean = math.fsum(xs) / n
    sd = None
    if n > 1:
        sd = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1))
    # fsum can land a hair outside [min, max] for near-constant input
    mean = min(max(mean, min(xs)), max(xs))
    return RunSummary(n, mean, sd, min(xs), max(xs))


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf2(t: float, df: float) -> float:
    """Two-tailed tail mass P(|T| >= |t|)."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0:
        return 1.0
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def t_cdf(t: float, df: float) -> float:
    if t == 0:
        return 0.5
    tail = 0.5 * t_sf2(t, df)
    return 1.0 - tail if t > 0 else tail


def t_ppf(q: float, df: float) -> float:
    """Inverse of :func:`t_cdf` by bisection."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -t_ppf(1.0 - q, df)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, df) < q:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-tailed paired-sample t-test on ``a[i] - b[i]``.

    Raises :class:`DegenerateVarianceError` when all differences are equal
    and non-zero, since t is undefined there.
    """
    if len(a) != len(b):
        raise NerProbeError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise NerProbeError("paired t-test needs at least two pairs")
    d = [float(x) - float(y) for x, y in zip(a, b)]
    if all(x == 0.0 for x in d):
        # identical samples: no evidence of any difference
        return TTestResult(0.0, n - 1, 1.0)
    mean = math.fsum(d) / n
    var = math.fsum((x - mean) ** 2 for x in d) / (n - 1)
    if var == 0.0 or all(x == d[0] for x in d):
        raise DegenerateVarianceError("differences have zero variance; t is undefined")
    t = mean / math.sqrt(var / n)
    df = n - 1
    return TTestResult(t, df, min(1.0, t_sf2(t, df)))


def delta(reported: float, obtained: float) -> float:
    """Reported minus obtained score."""
    return reported - obtained
