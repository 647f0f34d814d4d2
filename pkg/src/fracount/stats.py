"""Empirical verification: GOF tests, dependence exponents, invariance checks.

Estimators couple time points through a single simulated path per replica
(covariance is a path property), parallelize over derived RNG streams in
fixed replica order, and always test against fully specified laws or
paired samples so the asymptotic critical values stay valid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from . import dist, paths
from .dist import FnbpLaw, FppLaw, GammaLaw, PmfTable, SfppLaw
from .errors import DomainError
from .paths import RngStream

__all__ = [
    "GofResult",
    "ExponentFit",
    "empirical_pmf",
    "tv_distance",
    "chi_square_gof",
    "ks_two_sample",
    "corr_curve",
    "increment_corr_curve",
    "fit_power_exponent",
    "self_similarity_test",
    "renewal_limit_check",
    "increment_independence_check",
    "stationarity_check",
]


@dataclass(frozen=True)
class GofResult:
    """Outcome of a goodness-of-fit test."""

    statistic: float
    p_value: float
    sample_size: int
    dof: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise DomainError("p_value must lie in [0, 1]")

    def passed(self, level=0.01):
        return self.p_value > level


@dataclass(frozen=True)
class ExponentFit:
    """Power-law fit of a decaying curve: value ~ c * t^(-d)."""

    d: float
    intercept: float
    window: tuple
    stderr: float

    @property
    def classification(self):
        if 0.0 < self.d < 1.0:
            return "LRD"
        if 1.0 < self.d < 2.0:
            return "SRD"
        return "other"


def empirical_pmf(samples, n_max=None):
    """Empirical pmf table; mass beyond ``n_max`` goes to the tail."""
    samples = np.asarray(samples)
    if samples.size < 1:
        raise DomainError("empirical_pmf needs samples")
    if n_max is None:
        n_max = int(samples.max())
    clipped = np.minimum(samples, n_max + 1)
    counts = np.bincount(clipped, minlength=n_max + 2)
    probs = counts[: n_max + 1] / samples.size
    tail = counts[n_max + 1] / samples.size
    err = np.sqrt(probs * (1 - probs) / samples.size)
    return PmfTable("empirical", float("nan"), np.arange(n_max + 1), probs, err, tail)


def tv_distance(a: PmfTable, b: PmfTable):
    """Total-variation distance between two tables on a common support."""
    n = min(a.n.size, b.n.size)
    head = 0.5 * float(np.abs(a.probs[:n] - b.probs[:n]).sum())
    tail_a = a.tail_mass + float(a.probs[n:].sum())
    tail_b = b.tail_mass + float(b.probs[n:].sum())
    return head + 0.5 * abs(tail_a - tail_b)


def chi_square_gof(samples, expected: PmfTable, min_expected=5.0):
    """Chi-square GOF against a fully specified table.

    Cells with expected count below ``min_expected`` are pooled from the
    tail inward; the tail mass forms the final cell.
    """
    samples = np.asarray(samples)
    if samples.size < 100:
        raise DomainError("chi_square_gof needs at least 100 samples")
    n_max = expected.n.size - 1
    counts = np.bincount(np.minimum(samples, n_max + 1), minlength=n_max + 2)
    exp_probs = np.concatenate([expected.probs, [max(expected.tail_mass, 0.0)]])
    exp_counts = exp_probs * samples.size
    # pool from the right until every retained cell is large enough
    obs, exp = list(counts.astype(float)), list(exp_counts)
    while len(obs) > 2 and exp[-1] < min_expected:
        exp[-2] += exp[-1]
        obs[-2] += obs[-1]
        del exp[-1], obs[-1]
    keep = [i for i, e in enumerate(exp) if e >= min_expected]
    if len(keep) < 2:
        raise DomainError("too few adequately populated cells")
    pooled_obs = [obs[i] for i in keep] + ([sum(obs[i] for i in range(len(obs)) if i not in keep)] if len(keep) < len(obs) else [])
    pooled_exp = [exp[i] for i in keep] + ([sum(exp[i] for i in range(len(exp)) if i not in keep)] if len(keep) < len(exp) else [])
    pooled_obs = np.asarray(pooled_obs)
    pooled_exp = np.asarray(pooled_exp) * pooled_obs.sum() / samples.size
    stat = float(np.sum((pooled_obs - pooled_exp) ** 2 / pooled_exp))
    dof = len(pooled_obs) - 1
    return GofResult(stat, float(sps.chi2.sf(stat, dof)), samples.size, dof)


def ks_two_sample(x, y):
    """Two-sample Kolmogorov-Smirnov test with asymptotic p-value."""
    x, y = np.asarray(x), np.asarray(y)
    if x.size < 1 or y.size < 1:
        raise DomainError("ks_two_sample needs nonempty samples")
    res = sps.ks_2samp(x, y, method="asymp")
    return GofResult(float(res.statistic), float(res.pvalue), x.size + y.size)


def corr_curve(sampler, s, t_grid, replicas, rng: RngStream, chunk=2048):
    """Correlation of X(s) against X(t) over a grid, path-coupled.

    ``sampler(times, rng, size)`` must return (size, len(times)) values
    coupled along each row.  Replica chunks draw from derived streams in
    fixed order.  Returns a list of (t, correlation, stderr) triples;
    degenerate-variance points get a NaN correlation.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= s):
        raise DomainError("corr_curve requires s < min(t_grid)")
    times = np.concatenate([[s], t_grid])
    blocks = []
    done = 0
    k = 0
    while done < replicas:
        m = min(chunk, replicas - done)
        blocks.append(np.asarray(sampler(times, rng.child(k), m), dtype=float))
        done += m
        k += 1
    vals = np.concatenate(blocks, axis=0)
    x = vals[:, 0]
    out = []
    for j, t in enumerate(t_grid):
        y = vals[:, j + 1]
        sx, sy = x.std(ddof=1), y.std(ddof=1)
        if sx == 0.0 or sy == 0.0:
            out.append((float(t), float("nan"), float("nan")))
            continue
        r = float(np.corrcoef(x, y)[0, 1])
        se = (1.0 - r * r) / math.sqrt(max(vals.shape[0] - 3, 1))
        out.append((float(t), r, se))
    return out


def increment_corr_curve(law: FnbpLaw, delta, s, t_grid, replicas, rng: RngStream,
                         mesh=1.0 / 256.0, chunk=2048):
    """Correlation of increments over ``delta`` at s against later times."""
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= s + delta):
        raise DomainError("increment curve requires min(t_grid) > s + delta")
    wanted = np.concatenate([[s, s + delta], np.ravel([[t, t + delta] for t in t_grid])])
    times = np.unique(wanted)
    col = np.searchsorted(times, wanted)
    blocks = []
    done, k = 0, 0
    while done < replicas:
        m = min(chunk, replicas - done)
        blocks.append(paths.fnbp_values(law, times, rng.child(k), size=m, mesh=mesh))
        done += m
        k += 1
    vals = np.concatenate(blocks, axis=0).astype(float)
    x = vals[:, col[1]] - vals[:, col[0]]
    out = []
    for j, t in enumerate(t_grid):
        y = vals[:, col[2 * j + 3]] - vals[:, col[2 * j + 2]]
        sx, sy = x.std(ddof=1), y.std(ddof=1)
        if sx == 0.0 or sy == 0.0:
            out.append((float(t), float("nan"), float("nan")))
            continue
        r = float(np.corrcoef(x, y)[0, 1])
        se = (1.0 - r * r) / math.sqrt(max(vals.shape[0] - 3, 1))
        out.append((float(t), r, se))
    return out


def fit_power_exponent(curve, window):
    """OLS fit of log(value) on log(t) inside the window.

    Returns the decay exponent d (value ~ c t^-d) with its standard error;
    the classification property separates slow from fast decay.
    """
    lo, hi = window
    pts = [(t, v) for (t, v, *_) in curve if lo <= t <= hi]
    if len(pts) < 5:
        raise DomainError("need at least 5 curve points in the window")
    if any(v <= 0 or not math.isfinite(v) for _, v in pts):
        raise DomainError("window contains nonpositive curve values")
    x = np.log([t for t, _ in pts])
    y = np.log([v for _, v in pts])
    res = sps.linregress(x, y)
    return ExponentFit(-float(res.slope), float(res.intercept), (lo, hi), float(res.stderr))


def self_similarity_test(kind, betas, t, c, samples, rng: RngStream):
    """KS comparison of draws at time c*t against index-scaled draws at t."""
    if c <= 0:
        raise DomainError("c must be positive")
    if kind == "stable":
        b = float(betas)
        x = paths.sample_stable_oneside(b, rng, size=samples) * (c * t) ** (1.0 / b)
        y = paths.sample_stable_oneside(b, rng, size=samples) * t ** (1.0 / b) * c ** (1.0 / b)
    elif kind == "inverse":
        b = float(betas)
        x = paths.inverse_stable_marginal(b, c * t, rng, size=samples)
        y = paths.inverse_stable_marginal(b, t, rng, size=samples) * c**b
    elif kind == "iterated":
        bs = list(betas)
        idx = float(np.prod(bs))
        x = paths.iterated_inverse_marginal(bs, c * t, rng, size=samples)
        y = paths.iterated_inverse_marginal(bs, t, rng, size=samples) * c**idx
    else:
        raise DomainError(f"unknown self-similarity kind: {kind!r}")
    return ks_two_sample(x, y)


def renewal_limit_check(law, t_large, replicas, rng: RngStream):
    """KS of the t^-beta rescaled count against its renewal limit law.

    The limit is lam * E_beta(1) for the inverse-stable-clock process and
    lam * (p/alpha)^beta * E_beta(1) on the gamma clock (the count per
    unit clock time converges to the rate).
    """
    if t_large < 1e3:
        raise DomainError("renewal check needs t_large >= 1e3")
    if isinstance(law, FppLaw):
        b, lam = law.beta, law.lam
        x = paths.fpp_at(t_large, law, rng, size=replicas) / t_large**b
        y = lam * paths.inverse_stable_marginal(b, 1.0, rng, size=replicas)
    elif isinstance(law, FnbpLaw):
        b, lam = law.fpp.beta, law.fpp.lam
        factor = (law.gamma.shape_rate / law.gamma.rate) ** b
        x = paths.fnbp_at(t_large, law, rng, size=replicas) / t_large**b
        y = lam * factor * paths.inverse_stable_marginal(b, 1.0, rng, size=replicas)
    else:
        raise DomainError("renewal check supports FppLaw and FnbpLaw")
    return ks_two_sample(x, y)


def increment_independence_check(process, law, intervals, rng: RngStream,
                                 replicas=100_000, cell=(0, 0)):
    """Joint law of counts on two disjoint intervals versus the product.

    Returns a report with the empirical joint probability of ``cell``, the
    product of the empirical marginals, z-scores, and (for the Polya
    process on unit intervals) the closed-form joint and product values.
    """
    (a1, b1), (a2, b2) = intervals
    if not (a1 < b1 <= a2 < b2):
        raise DomainError("intervals must be disjoint and ordered")
    times = np.array([a1, b1, a2, b2]) if a1 > 0 else np.array([max(a1, 1e-12), b1, a2, b2])
    if process == "polya":
        vals = paths.polya_values(law, times, rng, size=replicas)
    elif process == "sfpp":
        vals = paths.sfpp_values(law, times, rng, size=replicas)
    elif process == "poisson":
        vals = paths.poisson_values(law, times, rng, size=replicas)
    else:
        raise DomainError(f"unknown process: {process!r}")
    inc1 = vals[:, 1] - vals[:, 0]
    inc2 = vals[:, 3] - vals[:, 2]
    n, m = cell
    hit1 = inc1 == n
    hit2 = inc2 == m
    joint = float(np.mean(hit1 & hit2))
    p1, p2 = float(np.mean(hit1)), float(np.mean(hit2))
    product = p1 * p2
    se_joint = math.sqrt(max(joint * (1 - joint), 1e-12) / replicas)
    # delta-method standard error for the difference joint - p1*p2
    g = np.stack([hit1 & hit2, hit1, hit2], axis=0).astype(float)
    cov = np.cov(g)
    grad = np.array([1.0, -p2, -p1])
    se_diff = math.sqrt(max(grad @ cov @ grad, 1e-18) / replicas)
    report = {
        "cell": (int(n), int(m)),
        "joint": joint,
        "product_of_marginals": product,
        "se_joint": se_joint,
        "z_joint_vs_product": (joint - product) / se_diff,
        "replicas": replicas,
    }
    if process == "polya" and np.allclose([b1 - a1, b2 - a2], 1.0):
        al, p = law.rate, law.shape_rate
        from scipy.special import gammaln

        log_joint = (
            -gammaln(n + 1.0)
            - gammaln(m + 1.0)
            + p * math.log(al)
            - gammaln(p)
            + gammaln(n + m + p)
            - (n + m + p) * math.log(al + (b1 - a1) + (b2 - a2))
        )
        log_prod = (
            -gammaln(n + 1.0)
            - gammaln(m + 1.0)
            + 2 * p * math.log(al)
            - 2 * gammaln(p)
            + gammaln(n + p)
            + gammaln(m + p)
            - (n + m + 2 * p) * math.log(al + 1.0)
        )
        report["closed_form_joint"] = math.exp(log_joint)
        report["closed_form_product"] = math.exp(log_prod)
        report["z_joint_vs_closed_form"] = (joint - report["closed_form_joint"]) / se_joint
        report["z_joint_vs_closed_product"] = (joint - report["closed_form_product"]) / se_joint
    return report


def stationarity_check(sampler, delta, t_list, rng: RngStream, replicas=20_000):
    """Pairwise KS between increment samples across base times.

    ``sampler(times, rng, size)`` returns coupled path values; each
    replica contributes one increment per base time from a single path.
    Returns the worst-case pairwise result.
    """
    t_list = sorted(t_list)
    if len(t_list) < 2:
        raise DomainError("need at least two base times")
    times = np.ravel([[max(t, 1e-12), t + delta] for t in t_list])
    vals = np.asarray(sampler(times, rng, replicas), dtype=float)
    incs = [vals[:, 2 * i + 1] - vals[:, 2 * i] for i in range(len(t_list))]
    worst = None
    for i in range(len(incs)):
        for j in range(i + 1, len(incs)):
            res = ks_two_sample(incs[i], incs[j])
            if worst is None or res.p_value < worst.p_value:
                worst = res
    return worst
