"""Reproducible random sampling of the processes and their subordinators.

All draws run through :class:`RngStream`, a counter-based Philox generator
keyed by (seed, stream_id): identical keys and call sequences reproduce
identical output on every platform, and distinct stream ids give
statistically independent streams for parallel ensembles.

One-sided stable variates use the exact Kanter transform of a uniform and
an exponential; inverse-subordinator marginals use the first-passage
identity (t / D)^beta; joint inverse values along a path come from mesh
inversion of a simulated stable path (documented mesh-order bias,
controlled by Kolmogorov-Smirnov calibration against the exact marginal).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dist import FnbpLaw, FppLaw, GammaLaw, SfppLaw
from .errors import DomainError

__all__ = [
    "RngStream",
    "SamplePath",
    "PathConfig",
    "sample_gamma",
    "sample_stable_oneside",
    "inverse_stable_marginal",
    "inverse_stable_at",
    "inverse_stable_path",
    "iterated_inverse_marginal",
    "choose_mesh",
    "fpp_at",
    "fpp_path",
    "fpp_values",
    "fnbp_at",
    "fnbp_paths",
    "fnbp_values",
    "polya_at",
    "polya_path",
    "polya_values",
    "sfpp_at",
    "sfpp_path",
    "sfpp_values",
    "poisson_values",
    "nb_compound_ls",
]

_MIX = 0x9E3779B97F4A7C15  # 64-bit golden-ratio multiplier for stream derivation


@dataclass
class RngStream:
    """Counter-based random stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            key = np.array([self.seed, self.stream_id], dtype=np.uint64)
            self._gen = np.random.Generator(np.random.Philox(key=key))
        return self._gen

    def child(self, k: int) -> "RngStream":
        """Derive an independent stream; used one child per replica block."""
        new_id = (self.stream_id * _MIX + k + 1) % (1 << 64)
        return RngStream(self.seed, new_id)


@dataclass
class SamplePath:
    """A path on a time grid: counting, subordinator or inverse clock."""

    times: np.ndarray
    values: np.ndarray
    kind: str = "counting"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise DomainError("times and values must be matching 1-d arrays")
        if np.any(np.diff(self.times) <= 0) or self.times[0] < 0:
            raise DomainError("times must be strictly increasing and start >= 0")
        if self.kind in ("counting", "subordinator", "inverse-subordinator"):
            if np.any(np.diff(self.values) < 0):
                raise DomainError(f"{self.kind} paths must be nondecreasing")
        if self.kind == "counting":
            v = np.asarray(self.values)
            if np.any(v < 0) or not np.issubdtype(v.dtype, np.integer):
                raise DomainError("counting paths need nonnegative integer values")

    def to_csv(self, fh):
        fh.write("time,value\n")
        for t, v in zip(self.times, self.values):
            fh.write(f"{t!r},{v!r}\n")

    def to_json_records(self):
        return [
            {"time": float(t), "value": float(v)}
            for t, v in zip(self.times, self.values)
        ]


@dataclass
class PathConfig:
    """Grid, mesh and replica settings for path construction."""

    t_max: float = 10.0
    steps: int = 100
    times: np.ndarray | None = None
    mesh: float = 1.0 / 256.0
    replicas: int = 1

    def __post_init__(self):
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if self.mesh <= 0:
            raise DomainError("mesh must be > 0")

    def grid(self):
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return np.linspace(self.t_max / self.steps, self.t_max, self.steps)


# ---------------------------------------------------------------------------
# elementary variates


def sample_gamma(shape, rate, rng: RngStream, size=None):
    """Gamma variates with the stated rate convention (scale = 1/rate)."""
    if np.any(np.asarray(shape) <= 0) or rate <= 0:
        raise DomainError("sample_gamma requires shape > 0 and rate > 0")
    return rng.generator.gamma(shape, 1.0 / rate, size=size)


def sample_stable_oneside(beta, rng: RngStream, size=None):
    """One-sided stable variates D with E[exp(-s D)] = exp(-s^beta).

    Kanter transform: with theta uniform on (0, pi) and E unit exponential,
    D = (sin(beta*theta)/sin(theta)^(1/beta))
        * (sin((1-beta)*theta)/E)^((1-beta)/beta).
    Exact and rejection-free.
    """
    if not (0.0 < beta < 1.0):
        raise DomainError("sample_stable_oneside requires beta in (0, 1)")
    g = rng.generator
    theta = np.pi * g.random(size)
    e = g.standard_exponential(size)
    return (
        np.sin(beta * theta)
        / np.sin(theta) ** (1.0 / beta)
        * (np.sin((1.0 - beta) * theta) / e) ** ((1.0 - beta) / beta)
    )


def inverse_stable_marginal(beta, t, rng: RngStream, size=None):
    """Marginal of the inverse stable clock at time t: (t / D)^beta in law."""
    if not (0.0 < beta <= 1.0):
        raise DomainError("requires beta in (0, 1]")
    if beta == 1.0:
        return np.full(size, float(t)) if size is not None else float(t)
    d = sample_stable_oneside(beta, rng, size=size)
    return (t / d) ** beta


def iterated_inverse_marginal(betas, t, rng: RngStream, size=None):
    """Marginal of the n-fold iterated inverse clock.

    ``betas[0]`` is the outermost clock; conditioning requires applying the
    innermost clock first, then rescaling through the self-similarity law
    x -> x^beta * E_beta(1) at each stage outward.
    """
    if len(betas) == 0:
        raise DomainError("betas must be nonempty")
    x = np.full(size, float(t)) if size is not None else float(t)
    for b in reversed(list(betas)):
        x = inverse_stable_marginal(b, 1.0, rng, size=size) * np.asarray(x) ** b
    return x


# ---------------------------------------------------------------------------
# joint inverse-clock values by mesh inversion of the stable path


def inverse_stable_at(beta, targets, rng: RngStream, mesh=1.0 / 256.0):
    """First-passage values of the inverse clock at given target times.

    ``targets`` is (rows, k) with nondecreasing rows; each row gets its own
    simulated stable path on an s-mesh of width ``mesh``, inverted by
    searchsorted.  The returned values carry an O(mesh)-order bias (the
    passage time is located to half a mesh cell).
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if beta == 1.0:
        return targets.copy()
    if np.any(np.diff(targets, axis=1) < 0):
        raise DomainError("target rows must be nondecreasing")
    rows, _ = targets.shape
    out = np.empty_like(targets)
    g = rng.generator
    step_scale = mesh ** (1.0 / beta)
    chunk = max(1, int(4_000_000 // max(1, _est_steps(targets.max(), beta, mesh))))
    for lo in range(0, rows, chunk):
        hi = min(rows, lo + chunk)
        tchunk = targets[lo:hi]
        n_steps = _est_steps(tchunk.max(), beta, mesh)
        incr = step_scale * _stable_block(beta, g, (hi - lo, n_steps))
        cum = np.cumsum(incr, axis=1)
        # extend rows whose simulated range falls short of their last target
        while np.any(cum[:, -1] <= tchunk[:, -1]):
            extra = step_scale * _stable_block(beta, g, (hi - lo, n_steps))
            cum = np.concatenate([cum, cum[:, -1:] + np.cumsum(extra, axis=1)], axis=1)
        for i in range(hi - lo):
            idx = np.searchsorted(cum[i], tchunk[i], side="right")
            out[lo + i] = (idx + 0.5) * mesh
        out[lo:hi][tchunk <= 0.0] = 0.0
    return out


def _est_steps(t_max, beta, mesh):
    typical = t_max**beta / math.gamma(1.0 + beta)
    return int(math.ceil(max(8.0, 3.0 * typical + 2.0) / mesh))


def _stable_block(beta, g, shape):
    theta = np.pi * g.random(shape)
    e = g.standard_exponential(shape)
    return (
        np.sin(beta * theta)
        / np.sin(theta) ** (1.0 / beta)
        * (np.sin((1.0 - beta) * theta) / e) ** ((1.0 - beta) / beta)
    )


def inverse_stable_path(beta, cfg: PathConfig, rng: RngStream):
    """Inverse-clock path on the configured grid."""
    times = cfg.grid()
    if beta == 1.0:
        return SamplePath(times, times.copy(), kind="inverse-subordinator")
    vals = inverse_stable_at(beta, times[None, :], rng, mesh=cfg.mesh)[0]
    return SamplePath(times, np.maximum.accumulate(vals), kind="inverse-subordinator")


def choose_mesh(beta, t, rng: RngStream, samples=4000, level=0.05, start=1.0 / 64.0):
    """Halve the inversion mesh until the marginal KS test stabilizes.

    Returns the first mesh whose path-based marginal at time ``t`` passes a
    two-sample KS test against the exact marginal sampler at ``level``.
    """
    from scipy.stats import ks_2samp

    mesh = start
    for _ in range(12):
        approx = inverse_stable_at(
            beta, np.full((samples, 1), float(t)), rng, mesh=mesh
        )[:, 0]
        exact = inverse_stable_marginal(beta, t, rng, size=samples)
        if ks_2samp(approx, exact).pvalue > level:
            return mesh
        mesh /= 2.0
    return mesh


# ---------------------------------------------------------------------------
# process marginals and paths


def fpp_at(t, law: FppLaw, rng: RngStream, size=None):
    """Fractional Poisson marginal N(E_beta(t))."""
    if t < 0:
        raise DomainError("requires t >= 0")
    e = inverse_stable_marginal(law.beta, t, rng, size=size)
    return rng.generator.poisson(law.lam * np.asarray(e))


def fpp_values(law: FppLaw, times, rng: RngStream, size=1, mesh=1.0 / 256.0):
    """Coupled FPP values at the given times, one path per row."""
    times = np.asarray(times, dtype=float)
    targets = np.broadcast_to(times, (size, times.size)).copy()
    e = inverse_stable_at(law.beta, targets, rng, mesh=mesh)
    de = np.diff(np.concatenate([np.zeros((size, 1)), e], axis=1), axis=1)
    return np.cumsum(rng.generator.poisson(law.lam * de), axis=1)


def fpp_path(law: FppLaw, cfg: PathConfig, rng: RngStream):
    times = cfg.grid()
    vals = fpp_values(law, times, rng, size=1, mesh=cfg.mesh)[0]
    return SamplePath(times, vals, kind="counting")


def fnbp_at(t, law: FnbpLaw, rng: RngStream, size=None):
    """FNBP marginal: gamma clock, then inverse stable clock, then Poisson."""
    if t <= 0:
        raise DomainError("requires t > 0")
    gshape = law.gamma.shape_rate * t
    gclock = sample_gamma(gshape, law.gamma.rate, rng, size=size)
    if law.fpp.beta == 1.0:
        e = gclock
    else:
        d = sample_stable_oneside(law.fpp.beta, rng, size=size)
        e = (gclock / d) ** law.fpp.beta
    return rng.generator.poisson(law.fpp.lam * np.asarray(e))


def fnbp_values(law: FnbpLaw, times, rng: RngStream, size=1, mesh=1.0 / 256.0):
    """Coupled FNBP values: one gamma path and one inverse path per row."""
    times = np.asarray(times, dtype=float)
    dt = np.diff(np.concatenate([[0.0], times]))
    shapes = law.gamma.shape_rate * dt
    ginc = rng.generator.gamma(shapes, 1.0 / law.gamma.rate, size=(size, times.size))
    gpath = np.cumsum(ginc, axis=1)
    e = inverse_stable_at(law.fpp.beta, gpath, rng, mesh=mesh)
    e = np.maximum.accumulate(e, axis=1)
    de = np.diff(np.concatenate([np.zeros((size, 1)), e], axis=1), axis=1)
    return np.cumsum(rng.generator.poisson(law.fpp.lam * de), axis=1)


def fnbp_paths(law: FnbpLaw, cfg: PathConfig, rng: RngStream):
    """Ensemble of FNBP paths (replica count from the config)."""
    times = cfg.grid()
    vals = fnbp_values(law, times, rng, size=cfg.replicas, mesh=cfg.mesh)
    return [SamplePath(times, row, kind="counting") for row in vals]


def polya_at(t, gamma: GammaLaw, rng: RngStream, size=None):
    """Polya marginal: one gamma rate per draw, then Poisson."""
    if t < 0:
        raise DomainError("requires t >= 0")
    lam = sample_gamma(gamma.shape_rate, gamma.rate, rng, size=size)
    return rng.generator.poisson(lam * t)


def polya_values(gamma: GammaLaw, times, rng: RngStream, size=1):
    """Coupled Polya values; the rate is drawn once per row."""
    times = np.asarray(times, dtype=float)
    dt = np.diff(np.concatenate([[0.0], times]))
    lam = sample_gamma(gamma.shape_rate, gamma.rate, rng, size=(size, 1))
    return np.cumsum(rng.generator.poisson(lam * dt[None, :]), axis=1)


def polya_path(gamma: GammaLaw, cfg: PathConfig, rng: RngStream):
    times = cfg.grid()
    return SamplePath(times, polya_values(gamma, times, rng, size=1)[0], kind="counting")


def sfpp_at(t, law: SfppLaw, rng: RngStream, size=None):
    """SFPP marginal: gamma rate drawn once, Poisson at a stable time."""
    if t < 0:
        raise DomainError("requires t >= 0")
    lam = sample_gamma(law.gamma.shape_rate, law.gamma.rate, rng, size=size)
    if law.beta == 1.0:
        clock = float(t)
    else:
        clock = t ** (1.0 / law.beta) * sample_stable_oneside(law.beta, rng, size=size)
    return rng.generator.poisson(lam * clock)


def sfpp_values(law: SfppLaw, times, rng: RngStream, size=1):
    """Coupled SFPP values; rate drawn once per row, exact stable increments."""
    times = np.asarray(times, dtype=float)
    dt = np.diff(np.concatenate([[0.0], times]))
    lam = sample_gamma(law.gamma.shape_rate, law.gamma.rate, rng, size=(size, 1))
    if law.beta == 1.0:
        dd = np.broadcast_to(dt, (size, times.size))
    else:
        dd = dt ** (1.0 / law.beta) * _stable_block(
            law.beta, rng.generator, (size, times.size)
        )
    return np.cumsum(rng.generator.poisson(lam * dd), axis=1)


def sfpp_path(law: SfppLaw, cfg: PathConfig, rng: RngStream):
    times = cfg.grid()
    return SamplePath(times, sfpp_values(law, times, rng, size=1)[0], kind="counting")


def poisson_values(lam, times, rng: RngStream, size=1):
    """Plain Poisson paths; control case for the dependence tests."""
    times = np.asarray(times, dtype=float)
    dt = np.diff(np.concatenate([[0.0], times]))
    return np.cumsum(rng.generator.poisson(lam * dt, size=(size, times.size)), axis=1)


# ---------------------------------------------------------------------------
# compound-Poisson representation of the negative binomial marginal


def _log_series_cdf(eta, tol=1e-15):
    probs = []
    c = -1.0 / math.log1p(-eta)
    n, cum = 1, 0.0
    while cum < 1.0 - tol and n < 100_000:
        p = c * eta**n / n
        probs.append(p)
        cum += p
        n += 1
    return np.cumsum(np.asarray(probs))


def nb_compound_ls(t, gamma: GammaLaw, lam, rng: RngStream, size=None):
    """NB marginal as a Poisson sum of logarithmic-series variates."""
    if t <= 0:
        raise DomainError("requires t > 0")
    a, p = gamma.rate, gamma.shape_rate
    eta = lam / (a + lam)
    rate = p * t * math.log((lam + a) / a)
    g = rng.generator
    scalar = size is None
    k = np.atleast_1d(g.poisson(rate, size=size))
    cdf = _log_series_cdf(eta)
    draws = 1 + np.searchsorted(cdf, g.random(int(k.sum())))
    out = np.zeros(k.size, dtype=np.int64)
    np.add.at(out, np.repeat(np.arange(k.size), k), draws)
    if scalar:
        return int(out[0])
    return out.reshape(k.shape)
