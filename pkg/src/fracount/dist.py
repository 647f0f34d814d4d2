"""Analytic one-dimensional laws of the subordinated counting processes.

Pmfs, pgfs, Laplace transforms, moments and covariance structure for the
Poisson, negative binomial, fractional Poisson (Poisson on an inverse
stable clock), fractional negative binomial (the same on a gamma clock),
Polya and space-fractional Polya processes.  Series evaluations carry
reliability flags and fall back to adaptive quadrature where the series
cancel; the gamma law is parameterised by rate ``alpha`` throughout
(density proportional to y^(pt-1) exp(-alpha*y); scale is 1/alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import betaln, gammaln, gammasgn, roots_genlaguerre

from . import specfun
from .errors import ConvergenceDomainError, DomainError, EvaluationError
from .specfun import (
    DEFAULT_CONTROL,
    SeriesControl,
    SeriesValue,
    _is_nonpositive_integer,
    _sum_signed_log_terms,
    incomplete_beta,
    stable_cdf,
    stable_pdf,
)

__all__ = [
    "GammaLaw",
    "FppLaw",
    "FnbpLaw",
    "SfppLaw",
    "PmfTable",
    "poisson_pmf",
    "nb_pmf",
    "log_series_pmf",
    "fpp_pmf",
    "fpp_mean",
    "fpp_var",
    "fpp_cov",
    "fnbp_pmf",
    "gamma_moment",
    "fnbp_mean",
    "fnbp_var",
    "fnbp_cov",
    "polya_pmf",
    "sf_poisson_pmf",
    "sfpp_pmf",
    "sfpp_pgf",
    "lt_gamma_of_inverse",
    "lt_inverse_of_gamma",
    "lt_fnbp",
    "e_beta_mean",
    "inv_stable_pdf",
    "inv_stable_cdf",
    "gamma_pdf",
    "build_pmf_table",
    "overdispersion_gap",
    "overdispersion_lower_bound",
]


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class GammaLaw:
    """Gamma subordinator G(alpha, p*t): rate ``alpha``, shape ``p*t``."""

    rate: float
    shape_rate: float

    def __post_init__(self):
        if self.rate <= 0 or self.shape_rate <= 0:
            raise DomainError("GammaLaw requires rate > 0 and shape_rate > 0")

    @property
    def alpha(self):
        return self.rate

    @property
    def p(self):
        return self.shape_rate


@dataclass(frozen=True)
class FppLaw:
    """Fractional Poisson process: stability order ``beta``, rate ``lam``."""

    beta: float
    lam: float

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise DomainError("FppLaw requires beta in (0, 1]")
        if self.lam <= 0:
            raise DomainError("FppLaw requires lam > 0")

    @property
    def q(self):
        return self.lam / math.gamma(1.0 + self.beta)

    @property
    def d1(self):
        return 2.0 * self.lam**2 / math.gamma(2.0 * self.beta + 1.0)

    @property
    def d2(self):
        b = self.beta
        return b * self.q**2 * math.exp(betaln(b, 1.0 + b))


@dataclass(frozen=True)
class FnbpLaw:
    """Fractional negative binomial process: FPP run on a gamma clock."""

    fpp: FppLaw
    gamma: GammaLaw

    @property
    def series_ok(self):
        """Whether the pmf series converges (lam below rate^beta)."""
        return self.fpp.lam < self.gamma.rate**self.fpp.beta


@dataclass(frozen=True)
class SfppLaw:
    """Space-fractional Polya process: stable clock, gamma-mixed rate."""

    beta: float
    gamma: GammaLaw

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise DomainError("SfppLaw requires beta in (0, 1]")


@dataclass
class PmfTable:
    """Tabulated pmf over n = 0..n_max with an explicit tail mass."""

    law: str
    t: float
    n: np.ndarray
    probs: np.ndarray
    est_errors: np.ndarray
    tail_mass: float
    tail_bound: float | None = None
    method: str = "series"

    def normalization(self):
        return float(np.sum(self.probs) + self.tail_mass)

    def validate(self, tol=1e-6):
        if np.any(self.probs < -tol):
            raise EvaluationError("negative pmf entry", {"law": self.law})
        if abs(self.normalization() - 1.0) > tol:
            raise EvaluationError(
                f"table mass {self.normalization():.12g} != 1 within {tol}",
                {"law": self.law, "t": self.t},
            )
        return self


# ---------------------------------------------------------------------------
# elementary laws


def poisson_pmf(n, t, lam):
    """Poisson pmf (lam*t)^n exp(-lam*t)/n!."""
    if n < 0:
        return 0.0
    if t < 0:
        raise DomainError("poisson_pmf requires t >= 0")
    if t == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(n * math.log(lam * t) - lam * t - gammaln(n + 1.0))


def nb_pmf(n, shape, eta):
    """Negative binomial pmf C(n+shape-1, n) eta^n (1-eta)^shape."""
    if n < 0:
        return 0.0
    if shape <= 0 or not (0.0 < eta < 1.0):
        raise DomainError("nb_pmf requires shape > 0 and eta in (0, 1)")
    return math.exp(
        gammaln(n + shape)
        - gammaln(shape)
        - gammaln(n + 1.0)
        + n * math.log(eta)
        + shape * math.log1p(-eta)
    )


def log_series_pmf(n, eta):
    """Logarithmic series pmf on {1, 2, ...}: -eta^n / (n log(1-eta))."""
    if n < 1:
        return 0.0
    if not (0.0 < eta < 1.0):
        raise DomainError("log_series_pmf requires eta in (0, 1)")
    return -(eta**n) / (n * math.log1p(-eta))


def gamma_pdf(y, law: GammaLaw, t=1.0):
    """Density of G(alpha, p*t) at y > 0."""
    a, pt = law.rate, law.shape_rate * t
    if y <= 0:
        return 0.0
    return math.exp(pt * math.log(a) + (pt - 1.0) * math.log(y) - a * y - gammaln(pt))


# ---------------------------------------------------------------------------
# stable and inverse-stable densities (spectral/Kanter-integral backed)


def inv_stable_pdf(x, t, beta):
    """Density of the inverse stable subordinator at time t, at x > 0."""
    if not (0.0 < beta < 1.0):
        raise DomainError("inv_stable_pdf requires beta in (0, 1)")
    if x <= 0 or t <= 0:
        return 0.0
    return (t / beta) * x ** (-1.0 - 1.0 / beta) * stable_pdf(t * x ** (-1.0 / beta), beta)


def inv_stable_cdf(x, t, beta):
    """CDF of the inverse stable subordinator at time t."""
    if not (0.0 < beta < 1.0):
        raise DomainError("inv_stable_cdf requires beta in (0, 1)")
    if x <= 0:
        return 0.0
    if t <= 0:
        return 1.0
    return 1.0 - stable_cdf(t * x ** (-1.0 / beta), beta)


def _gamma_expect(f, rate, shape, extra_points=()):
    """E[f(Y)] for Y ~ G(rate, shape) by adaptive quadrature.

    Substitutes y = -log(v) so the half-line becomes (0, 1] and the
    exponential weight is absorbed; the transformed integrand is smooth
    away from the endpoints.
    """

    def integrand(v):
        y = -math.log(v)
        return f(y) * math.exp(
            shape * math.log(rate)
            + (shape - 1.0) * math.log(y)
            + (rate - 1.0) * math.log(v)
            - gammaln(shape)
        )

    pts = sorted({math.exp(-y) for y in extra_points if y > 0} | {math.exp(-shape / rate)})
    val, _ = quad(integrand, 0.0, 1.0, points=pts, limit=400, epsabs=1e-12, epsrel=1e-10)
    return val


# ---------------------------------------------------------------------------
# fractional Poisson process


def fpp_pmf(n, t, law: FppLaw, ctl: SeriesControl = DEFAULT_CONTROL):
    """Pmf of the fractional Poisson process.

    Alternating gamma-ratio series in lam * t^beta; on cancellation the
    value is recovered by quadrature of the Poisson pmf against the
    inverse-stable density.
    """
    if t < 0:
        raise DomainError("fpp_pmf requires t >= 0")
    if n < 0:
        return SeriesValue(0.0, 0.0, 0, True, method="closed-form")
    if t == 0.0:
        return SeriesValue(1.0 if n == 0 else 0.0, 0.0, 0, True, method="closed-form")
    b, lam = law.beta, law.lam
    w = lam * t**b
    log_w = math.log(w)

    def term(k):
        lm = (
            n * log_w
            - gammaln(n + 1.0)
            + gammaln(n + k + 1.0)
            - gammaln(k + 1.0)
            + k * log_w
            - gammaln(b * (k + n) + 1.0)
        )
        return lm, (-1) ** k

    sv = _sum_signed_log_terms(term, ctl, raise_on_exhaust=False)
    if sv.reliable:
        return sv
    if b == 1.0:
        return SeriesValue(poisson_pmf(n, t, lam), 0.0, 0, True, method="closed-form")
    if ctl.high_precision:
        return _mp_mixed_series(n, b, w, None, ctl)
    val = _fpp_pmf_quad(n, t, law)
    return SeriesValue(val, max(abs(val) * 1e-9, 1e-13), 0, True, method="quadrature")


@lru_cache(maxsize=200_000)
def _mp_gamma_lin(b, c, m, dps):
    # Gamma(b*m + c) at the given working precision; m indexes shared terms
    import mpmath as mp

    with mp.workdps(dps):
        return mp.gamma(mp.mpf(b) * m + mp.mpf(c))


@lru_cache(maxsize=200_000)
def _mp_fact(m, dps):
    import mpmath as mp

    with mp.workdps(dps):
        return mp.factorial(m)


def _mp_mixed_series(n, b, z, pt, ctl, dps=60):
    """High-precision evaluation of the mixed-Poisson pmf series.

    Sums z^(n+k) (n+k)! R(n+k) (-1)^k / (n! k!) where R(m) is
    Gamma(b*m + pt)/(Gamma(pt) Gamma(b*m + 1)) on a gamma clock and
    1/Gamma(b*m + 1) when ``pt`` is None (inverse-stable clock only).
    The gamma factors depend on n and k only through m = n + k, so they
    are cached across a table sweep.
    """
    import mpmath as mp

    with mp.workdps(dps):
        zz = mp.mpf(z)
        total = mp.mpf(0)
        max_mag = mp.mpf(0)
        power = zz**n
        inv_fact_n = 1 / _mp_fact(n, dps)
        gpt = None if pt is None else _mp_gamma_lin(0.0, pt, 0, dps)
        prev_small = False
        for k in range(ctl.max_terms):
            m = n + k
            num = _mp_fact(m, dps)
            if pt is not None:
                num = num * _mp_gamma_lin(b, pt, m, dps) / gpt
            term = (
                power
                * num
                * inv_fact_n
                / (_mp_fact(k, dps) * _mp_gamma_lin(b, 1.0, m, dps))
            )
            if k % 2:
                term = -term
            total += term
            mag = abs(term)
            max_mag = max(max_mag, mag)
            small = mag <= max(ctl.abs_tol, mp.mpf(10) ** -22 * abs(total))
            if small and prev_small and k >= 2:
                headroom = mp.log10(max_mag / max(abs(total), mp.mpf(10) ** -300))
                if headroom > dps - 18:
                    return _mp_mixed_series(n, b, z, pt, ctl, dps=2 * dps)
                err = max(float(max_mag) * 10.0 ** (2 - dps), abs(float(total)) * 1e-15)
                return SeriesValue(float(total), err, k + 1, True, method="series-hp")
            prev_small = small
            power *= zz
    raise EvaluationError("high-precision series did not converge", {"n": n})


def _fpp_pmf_quad(n, t, law: FppLaw):
    b, lam = law.beta, law.lam
    scale = t**b / math.gamma(1.0 + b)

    def f(x):
        return poisson_pmf(n, x, lam) * inv_stable_pdf(x, t, b)

    hi = (n + 40.0) / lam + 20.0 * scale
    pts = sorted({min(max(n, 0.5) / lam, hi * 0.9), min(scale, hi * 0.9)})
    val, _ = quad(f, 0.0, hi, points=pts, limit=200, epsabs=1e-12, epsrel=1e-9)
    return val


def fpp_mean(t, law: FppLaw):
    """Mean q * t^beta with q = lam / Gamma(1 + beta)."""
    return law.q * t**law.beta


def fpp_var(t, law: FppLaw, form="beta-duplication"):
    """Variance of the FPP in either of its two equivalent forms."""
    b, lam, q = law.beta, law.lam, law.q
    m = q * t**b
    if form == "beta-duplication":
        factor = b * math.exp(betaln(b, 0.5)) / 2.0 ** (2.0 * b - 1.0)
        return m * (1.0 + m * (factor - 1.0))
    if form == "alternative":
        w = lam * t**b
        return m + (w * w / b) * (
            math.exp(-gammaln(2.0 * b)) - math.exp(-gammaln(b) * 2.0) / b
        )
    raise DomainError(f"unknown variance form: {form!r}")


def fpp_cov(s, t, law: FppLaw):
    """Covariance of FPP values at 0 < s <= t."""
    if not (0.0 < s <= t):
        raise DomainError("fpp_cov requires 0 < s <= t")
    b, q = law.beta, law.q
    inc = incomplete_beta(b, 1.0 + b, s / t)
    return (
        q * s**b
        + law.d2 * s ** (2.0 * b)
        + q * q * (b * t ** (2.0 * b) * inc - (s * t) ** b)
    )


# ---------------------------------------------------------------------------
# fractional negative binomial process


def fnbp_pmf(n, t, law: FnbpLaw, ctl: SeriesControl = DEFAULT_CONTROL):
    """Pmf of the FNBP (FPP on an independent gamma clock).

    Uses the gamma-ratio series when lam < rate^beta and the terms stay
    well conditioned; otherwise integrates the FPP pmf against the gamma
    density by adaptive quadrature.
    """
    if t <= 0:
        raise DomainError("fnbp_pmf requires t > 0")
    if n < 0:
        return SeriesValue(0.0, 0.0, 0, True, method="closed-form")
    b, lam = law.fpp.beta, law.fpp.lam
    a, pt = law.gamma.rate, law.gamma.shape_rate * t
    if law.series_ok:
        z = lam / a**b
        log_z = math.log(z)

        def term(k):
            lm = (
                n * log_z
                - gammaln(n + 1.0)
                - gammaln(pt)
                + gammaln(n + 1.0 + k)
                + gammaln(n * b + pt + b * k)
                - gammaln(n * b + 1.0 + b * k)
                - gammaln(k + 1.0)
                + k * log_z
            )
            return lm, (-1) ** k

        sv = _sum_signed_log_terms(term, ctl, raise_on_exhaust=False)
        if sv.reliable:
            return sv
        # terms cancel through ~(z/(1-z))^n of headroom; recover the digits
        # with software high precision before resorting to quadrature
        try:
            return _mp_mixed_series(n, b, z, pt, ctl)
        except (EvaluationError, ImportError):
            pass
    val = _fnbp_pmf_quad(n, t, law, ctl)
    return SeriesValue(val, max(abs(val) * 1e-8, 1e-13), 0, True, method="quadrature")


def _fnbp_pmf_quad(n, t, law: FnbpLaw, ctl):
    """Gamma-weighted quadrature of the FPP pmf, gated by the gamma weight
    so the inner evaluation never recurses where the weight is negligible."""
    from dataclasses import replace

    a, pt = law.gamma.rate, law.gamma.shape_rate * t
    ctl = replace(ctl, high_precision=True)  # keep the inner pmf off nested quadrature

    def integrand(v):
        y = -math.log(v)
        if y <= 0.0:
            return 0.0
        log_w = pt * math.log(a) + (pt - 1.0) * math.log(y) + (a - 1.0) * math.log(v) - gammaln(pt)
        if log_w < -45.0:  # pmf <= 1, so the contribution is below 3e-20
            return 0.0
        return math.exp(log_w) * fpp_pmf(n, y, law.fpp, ctl).value

    pts = [math.exp(-pt / a)]
    val, _ = quad(integrand, 0.0, 1.0, points=pts, limit=60, epsabs=1e-10, epsrel=1e-8)
    return val


def gamma_moment(t, law: GammaLaw, l):
    """Fractional moment E[G(t)^l] = Gamma(pt+l) / (alpha^l Gamma(pt))."""
    if t <= 0:
        raise DomainError("gamma_moment requires t > 0")
    if l <= 0:
        raise DomainError("gamma_moment requires l > 0")
    a, pt = law.rate, law.shape_rate * t
    return math.exp(gammaln(pt + l) - gammaln(pt) - l * math.log(a))


def fnbp_mean(t, law: FnbpLaw):
    """Mean q * E[G(t)^beta]."""
    return law.fpp.q * gamma_moment(t, law.gamma, law.fpp.beta)


def fnbp_var(t, law: FnbpLaw):
    """Variance from the conditional-variance decomposition."""
    b = law.fpp.beta
    m1 = law.fpp.q * gamma_moment(t, law.gamma, b)
    return m1 * (1.0 - m1) + law.fpp.d1 * gamma_moment(t, law.gamma, 2.0 * b)


@lru_cache(maxsize=64)
def _genlaguerre_nodes(npts, alpha):
    x, w = roots_genlaguerre(npts, alpha)
    return x, w


def _cross_expectation(s, t, law: FnbpLaw, npts=96):
    """E[G(t)^(2 beta) * B(beta, 1+beta; G(s)/G(t))] by tensor quadrature
    over the independent increments (G(s), G(t) - G(s)).

    Integration runs on the quantile grid of each increment (Gauss-
    Legendre in probability space), which stays well conditioned at any
    gamma shape, unlike Laguerre weights above shape ~170.
    """
    b = law.fpp.beta
    a, p = law.gamma.rate, law.gamma.shape_rate
    bb = math.exp(betaln(b, 1.0 + b))
    if s == t:
        return bb * gamma_moment(t, law.gamma, 2.0 * b)
    from scipy.special import betainc, roots_legendre
    from scipy.stats import gamma as gamma_rv

    u, w = roots_legendre(npts)
    u = 0.5 * (u + 1.0)
    w = 0.5 * w
    xs = gamma_rv.ppf(u, p * s, scale=1.0 / a)
    ys = gamma_rv.ppf(u, p * (t - s), scale=1.0 / a)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    tot = X + Y
    vals = tot ** (2.0 * b) * betainc(b, 1.0 + b, X / tot) * bb
    return float(np.outer(w, w).ravel() @ vals.ravel())


def fnbp_cov(s, t, law: FnbpLaw, method="quad", rng=None, replicas=200_000):
    """Covariance of FNBP values at 0 < s <= t.

    The cross term couples G(s) and G(t); it is computed by 2-D quadrature
    over the independent increments, or by Monte Carlo when
    ``method='mc'`` (pass an RngStream).
    """
    if not (0.0 < s <= t):
        raise DomainError("fnbp_cov requires 0 < s <= t")
    b, q = law.fpp.beta, law.fpp.q
    es_b = gamma_moment(s, law.gamma, b)
    et_b = gamma_moment(t, law.gamma, b)
    es_2b = gamma_moment(s, law.gamma, 2.0 * b)
    if method == "quad":
        cross = _cross_expectation(s, t, law)
    elif method == "mc":
        if rng is None:
            raise DomainError("fnbp_cov(method='mc') needs an RngStream")
        g = rng.generator
        a, p = law.gamma.rate, law.gamma.shape_rate
        X = g.gamma(p * s, 1.0 / a, size=replicas)
        Y = X if s == t else X + g.gamma(p * (t - s), 1.0 / a, size=replicas)
        from scipy.special import betainc

        bb = math.exp(betaln(b, 1.0 + b))
        vals = Y ** (2.0 * b) * betainc(b, 1.0 + b, np.divide(X, Y)) * bb
        cross = float(np.mean(vals))
    else:
        raise DomainError(f"unknown method: {method!r}")
    return q * es_b + law.fpp.d2 * es_2b - q * q * es_b * et_b + b * q * q * cross


def overdispersion_gap(t, law: FnbpLaw):
    """Var - Mean of the FNBP at time t."""
    return fnbp_var(t, law) - fnbp_mean(t, law)


def overdispersion_lower_bound(t, law: FnbpLaw):
    """(lam * E[G(t)^beta])^2 * Z(beta) with Z > 0 on (0, 1)."""
    b, lam = law.fpp.beta, law.fpp.lam
    z = (math.exp(-gammaln(2.0 * b)) - math.exp(-2.0 * gammaln(b)) / b) / b
    return (lam * gamma_moment(t, law.gamma, b)) ** 2 * z


# ---------------------------------------------------------------------------
# Polya and space-fractional Polya processes


def polya_pmf(n, t, gamma: GammaLaw):
    """Polya pmf: negative binomial with shape p and mean p*t/alpha."""
    if t < 0:
        raise DomainError("polya_pmf requires t >= 0")
    if n < 0:
        return 0.0
    if t == 0.0:
        return 1.0 if n == 0 else 0.0
    return nb_pmf(n, gamma.shape_rate, t / (gamma.rate + t))


def sf_poisson_pmf(n, t, lam, beta, ctl: SeriesControl = DEFAULT_CONTROL):
    """Pmf of the space-fractional Poisson process (Poisson on a stable clock)."""
    if t < 0:
        raise DomainError("sf_poisson_pmf requires t >= 0")
    if n < 0:
        return SeriesValue(0.0, 0.0, 0, True, method="closed-form")
    if t == 0.0:
        return SeriesValue(1.0 if n == 0 else 0.0, 0.0, 0, True, method="closed-form")
    if beta == 1.0:
        return SeriesValue(poisson_pmf(n, t, lam), 0.0, 0, True, method="closed-form")
    w = lam**beta * t
    log_w = math.log(w)

    def term(k):
        arg = beta * k + 1.0 - n
        if _is_nonpositive_integer(arg):
            return -math.inf, 0
        lm = (
            -gammaln(n + 1.0)
            + k * log_w
            - gammaln(k + 1.0)
            + gammaln(beta * k + 1.0)
            - gammaln(arg)
        )
        return lm, (-1) ** (n + k) * int(gammasgn(arg))

    min_terms = int(math.ceil((n + 2) / beta))
    return _sum_signed_log_terms(term, ctl, min_terms=min_terms, raise_on_exhaust=False)


def sfpp_pmf(n, t, law: SfppLaw, ctl: SeriesControl = DEFAULT_CONTROL):
    """Pmf of the space-fractional Polya process.

    For beta < 1 the gamma-mixed series has superexponentially decaying
    terms; the gamma factor in the denominator is sign-tracked, and terms
    sitting on its poles vanish.  beta = 1 reduces to the Polya closed
    form.  An unreliable series falls back to quadrature of the
    space-fractional Poisson pmf against the gamma rate density.
    """
    if t < 0:
        raise DomainError("sfpp_pmf requires t >= 0")
    if n < 0:
        return SeriesValue(0.0, 0.0, 0, True, method="closed-form")
    if t == 0.0:
        return SeriesValue(1.0 if n == 0 else 0.0, 0.0, 0, True, method="closed-form")
    b = law.beta
    a, p = law.gamma.rate, law.gamma.shape_rate
    if b == 1.0:
        return SeriesValue(polya_pmf(n, t, law.gamma), 0.0, 0, True, method="closed-form")
    w = t / a**b
    log_w = math.log(w)

    def term(k):
        arg = b * k + 1.0 - n
        if _is_nonpositive_integer(arg):
            return -math.inf, 0
        lm = (
            -gammaln(n + 1.0)
            - gammaln(p)
            + gammaln(b * k + 1.0)
            + gammaln(b * k + p)
            - gammaln(arg)
            + k * log_w
            - gammaln(k + 1.0)
        )
        return lm, (-1) ** (n + k) * int(gammasgn(arg))

    min_terms = int(math.ceil((n + 2) / b))
    sv = _sum_signed_log_terms(term, ctl, min_terms=min_terms, raise_on_exhaust=False)
    if sv.reliable:
        return sv
    inner_bad = []

    def f(lam):
        v = sf_poisson_pmf(n, t, lam, b, ctl)
        if not v.reliable:
            inner_bad.append(lam)
        return v.value

    val = _gamma_expect(f, a, p)
    if inner_bad:
        raise EvaluationError(
            "sfpp_pmf: series cancelled and quadrature integrand unreliable",
            {"n": n, "t": t, "bad_rates": inner_bad[:5]},
        )
    return SeriesValue(val, max(abs(val) * 1e-8, 1e-13), 0, True, method="quadrature")


def sfpp_pgf(u, t, law: SfppLaw):
    """Pgf of the SFPP at u in [0, 1], by gamma-weighted quadrature.

    The exponent is taken negative so that u = 0 reproduces the n = 0
    pmf; the value at u = 1 is exactly 1.
    """
    if not (0.0 <= u <= 1.0):
        raise DomainError("sfpp_pgf requires u in [0, 1]")
    if u == 1.0 or t == 0.0:
        return 1.0
    b = law.beta
    a, p = law.gamma.rate, law.gamma.shape_rate
    c = t * (1.0 - u) ** b
    return _gamma_expect(lambda lam: math.exp(-(lam**b) * c), a, p)


def sfpp_pgf_shifted(u, t, law: SfppLaw, shape_shift=0.0):
    """Pgf with the gamma shape shifted; used by the pgf evolution checks."""
    if not (0.0 <= u <= 1.0):
        raise DomainError("requires u in [0, 1]")
    b = law.beta
    a, p = law.gamma.rate, law.gamma.shape_rate + shape_shift
    if u == 1.0 or t == 0.0:
        return 1.0
    c = t * (1.0 - u) ** b
    return _gamma_expect(lambda lam: math.exp(-(lam**b) * c), a, p)


# ---------------------------------------------------------------------------
# Laplace transforms distinguishing the two clock compositions


def lt_gamma_of_inverse(s, t, gamma: GammaLaw, beta):
    """LT of the gamma process run on an inverse stable clock.

    Mittag-Leffler of t^beta * p * log(alpha / (alpha + s)); evaluated by
    series, with the completely monotone integral as backstop.
    """
    if s < 0:
        raise DomainError("requires s >= 0")
    if s == 0.0:
        return 1.0
    arg = t**beta * gamma.shape_rate * math.log(gamma.rate / (gamma.rate + s))
    sv = specfun.mittag_leffler(beta, arg)
    if sv.reliable:
        return sv.value
    return specfun.ml_completely_monotone(beta, -arg)


def _lt_inverse_series(z, pt, beta, ctl):
    log_abs = math.log(abs(z))
    sgn = 1 if z > 0 else -1

    def term(k):
        lm = gammaln(beta * k + pt) - gammaln(pt) - gammaln(1.0 + beta * k) + k * log_abs
        return lm, sgn**k

    return _sum_signed_log_terms(term, ctl)


def lt_inverse_of_gamma(s, t, gamma: GammaLaw, beta, ctl: SeriesControl = DEFAULT_CONTROL):
    """LT of the inverse stable subordinator run on a gamma clock."""
    if s < 0:
        raise DomainError("requires s >= 0")
    if s == 0.0:
        return 1.0
    a, pt = gamma.rate, gamma.shape_rate * t
    if s >= a**beta:
        raise ConvergenceDomainError("lt_inverse_of_gamma requires s < rate^beta")
    return _lt_inverse_series(-s / a**beta, pt, beta, ctl).value


def lt_fnbp(s, t, law: FnbpLaw, ctl: SeriesControl = DEFAULT_CONTROL):
    """LT of the FNBP itself, for lam * (1 - e^-s) < rate^beta."""
    if s < 0:
        raise DomainError("requires s >= 0")
    if s == 0.0:
        return 1.0
    b, lam = law.fpp.beta, law.fpp.lam
    a, pt = law.gamma.rate, law.gamma.shape_rate * t
    if lam * (1.0 - math.exp(-s)) >= a**b:
        raise ConvergenceDomainError("lt_fnbp requires lam*(1 - e^-s) < rate^beta")
    z = lam * (math.exp(-s) - 1.0) / a**b
    return _lt_inverse_series(z, pt, b, ctl).value


def e_beta_mean(t, beta):
    """Mean of the inverse stable subordinator, t^beta / Gamma(1 + beta)."""
    if t < 0:
        raise DomainError("requires t >= 0")
    return t**beta / math.gamma(1.0 + beta)


# ---------------------------------------------------------------------------
# tabulation


def _pmf_dispatch(law, n, t, ctl):
    if isinstance(law, FppLaw):
        return fpp_pmf(n, t, law, ctl)
    if isinstance(law, FnbpLaw):
        return fnbp_pmf(n, t, law, ctl)
    if isinstance(law, SfppLaw):
        return sfpp_pmf(n, t, law, ctl)
    if isinstance(law, GammaLaw):
        return SeriesValue(polya_pmf(n, t, law), 0.0, 0, True, method="closed-form")
    raise DomainError(f"no pmf for law {type(law).__name__}")


def _analytic_mean(law, t):
    if isinstance(law, FppLaw):
        return fpp_mean(t, law)
    if isinstance(law, FnbpLaw):
        return fnbp_mean(t, law)
    if isinstance(law, GammaLaw):
        return law.shape_rate * t / law.rate
    return None  # SFPP mean is infinite


def build_pmf_table(law, t, n_max, ctl: SeriesControl = DEFAULT_CONTROL):
    """Tabulate a pmf over n = 0..n_max.

    The tail mass is the monotone remainder toward 1; when the analytic
    mean is finite the Markov bound mean/(n_max+1) is attached as
    ``tail_bound`` for sanity checking.
    """
    ns = np.arange(n_max + 1)
    probs = np.empty(n_max + 1)
    errs = np.empty(n_max + 1)
    methods = set()
    for i, n in enumerate(ns):
        sv = _pmf_dispatch(law, int(n), t, ctl)
        probs[i] = sv.value
        errs[i] = sv.est_error
        methods.add(sv.method)
    tail = max(0.0, 1.0 - float(np.sum(probs)))
    mean = _analytic_mean(law, t)
    bound = None if mean is None else mean / (n_max + 1.0)
    name = type(law).__name__.replace("Law", "").lower()
    method = "quadrature" if "quadrature" in methods else sorted(methods)[0]
    return PmfTable(name, t, ns, probs, errs, tail, tail_bound=bound, method=method)
