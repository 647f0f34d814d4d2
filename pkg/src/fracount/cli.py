"""Command-line front end: pmf tables, moments, sampling, verification.

Every command is deterministic given ``--seed`` and emits a metadata block
(parameters, seed, version, evaluation path, tolerances) alongside the
payload.  Exit codes: 0 success, 1 verification failure, 2 usage or
parameter error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, dist, fraccalc, paths, stats
from .dist import FnbpLaw, FppLaw, GammaLaw, SfppLaw
from .errors import ConvergenceDomainError, DomainError
from .paths import PathConfig, RngStream

DEFAULT_SEED = 20140923  # fixed, documented default for reproducible runs

_PROCESSES = ("fpp", "fnbp", "polya", "sfpp")


@dataclass
class RunConfig:
    """Validated run settings shared by all subcommands."""

    process: str = "fnbp"
    beta: float = 0.5
    lam: float = 1.0
    alpha: float = 2.0
    p: float = 1.0
    t: float = 1.0
    t_max: float = 10.0
    steps: int = 100
    n_max: int = 30
    replicas: int = 10_000
    seed: int = DEFAULT_SEED
    fmt: str = "json"
    out: str | None = None
    suite: str = "all"
    tolerances: dict = field(default_factory=dict)

    def law(self):
        if self.process == "fpp":
            return FppLaw(self.beta, self.lam)
        if self.process == "fnbp":
            return FnbpLaw(FppLaw(self.beta, self.lam), GammaLaw(self.alpha, self.p))
        if self.process == "polya":
            return GammaLaw(self.alpha, self.p)
        if self.process == "sfpp":
            return SfppLaw(self.beta, self.gamma_law())
        raise DomainError(f"unknown process {self.process!r}")

    def gamma_law(self):
        return GammaLaw(self.alpha, self.p)

    def metadata(self, **extra):
        md = {
            "process": self.process,
            "parameters": {
                "beta": self.beta,
                "lambda": self.lam,
                "alpha": self.alpha,
                "p": self.p,
            },
            "seed": self.seed,
            "version": __version__,
            "tolerances": self.tolerances,
        }
        md.update(extra)
        return md


def _write(cfg: RunConfig, text):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_pmf(cfg: RunConfig):
    """Tabulate the pmf for n = 0..n_max at time t."""
    law = cfg.law()
    table = dist.build_pmf_table(law, cfg.t, cfg.n_max)
    meta = cfg.metadata(t=cfg.t, evaluation_path=table.method,
                        tail_mass=table.tail_mass, tail_bound=table.tail_bound)
    if cfg.fmt == "csv":
        lines = [f"# {k}: {json.dumps(v)}" for k, v in meta.items()]
        lines.append("n,probability,est_error")
        for n, pr, er in zip(table.n, table.probs, table.est_errors):
            lines.append(f"{int(n)},{pr!r},{er!r}")
        _write(cfg, "\n".join(lines) + "\n")
    else:
        payload = {
            "meta": meta,
            "pmf": [
                {"n": int(n), "probability": float(pr), "est_error": float(er)}
                for n, pr, er in zip(table.n, table.probs, table.est_errors)
            ],
        }
        _write(cfg, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_moments(cfg: RunConfig):
    """Emit mean/variance (and covariance against t/2) at time t."""
    law = cfg.law()
    t = cfg.t
    if cfg.process == "fpp":
        body = {
            "mean": dist.fpp_mean(t, law),
            "variance": dist.fpp_var(t, law, "alternative"),
            "covariance": {"s": t / 2, "t": t, "value": dist.fpp_cov(t / 2, t, law)},
        }
    elif cfg.process == "fnbp":
        body = {
            "mean": dist.fnbp_mean(t, law),
            "variance": dist.fnbp_var(t, law),
            "covariance": {"s": t / 2, "t": t, "value": dist.fnbp_cov(t / 2, t, law)},
            "overdispersion_gap": dist.overdispersion_gap(t, law),
        }
    elif cfg.process == "polya":
        eta = t / (cfg.alpha + t)
        mean = cfg.p * t / cfg.alpha
        body = {"mean": mean, "variance": mean / (1.0 - eta)}
    elif cfg.process == "sfpp":
        body = {"mean": None, "note": "mean is infinite for this process"}
    _write(cfg, json.dumps({"meta": cfg.metadata(t=t), "moments": body}, indent=2) + "\n")
    return 0


def cmd_sample(cfg: RunConfig):
    """Write sampled paths, one file per replica (CSV or JSON)."""
    law = cfg.law()
    rng = RngStream(cfg.seed, 0)
    pcfg = PathConfig(t_max=cfg.t_max, steps=cfg.steps, replicas=cfg.replicas)
    outputs = []
    for k in range(cfg.replicas):
        child = rng.child(k)
        if cfg.process == "fpp":
            path = paths.fpp_path(law, pcfg, child)
        elif cfg.process == "fnbp":
            path = paths.fnbp_paths(law, PathConfig(cfg.t_max, cfg.steps, replicas=1), child)[0]
        elif cfg.process == "polya":
            path = paths.polya_path(law, pcfg, child)
        else:
            path = paths.sfpp_path(law, pcfg, child)
        outputs.append(path)
    meta = cfg.metadata(t_max=cfg.t_max, steps=cfg.steps, replicas=cfg.replicas)
    if cfg.fmt == "csv":
        chunks = []
        for i, path in enumerate(outputs):
            rows = "\n".join(f"{t!r},{int(v)}" for t, v in zip(path.times, path.values))
            chunks.append(f"# replica: {i}\ntime,value\n{rows}")
        header = "\n".join(f"# {k}: {json.dumps(v)}" for k, v in meta.items())
        _write(cfg, header + "\n" + "\n".join(chunks) + "\n")
    else:
        payload = {"meta": meta, "paths": [p.to_json_records() for p in outputs]}
        _write(cfg, json.dumps(payload, indent=2) + "\n")
    return 0


# ---------------------------------------------------------------------------
# verification suites (1:1 with the acceptance categories)


def _check(name, passed, value, tolerance, **details):
    entry = {"name": name, "passed": bool(passed), "value": value, "tolerance": tolerance}
    entry.update(details)
    return entry


def _suite_series(cfg: RunConfig):
    checks = []
    g = GammaLaw(2.0, 1.0)
    v = dist.lt_inverse_of_gamma(1.0, 1.0, g, 0.5)
    target = 2.0 - math.sqrt(2.0)
    checks.append(_check("lt-inverse-of-gamma-closed-form", abs(v - target) < 1e-9,
                         v, 1e-9, target=target))
    w = dist.lt_gamma_of_inverse(1.0, 1.0, g, 0.5)
    target_w = 0.6675667331048070  # exp(log(3/2)^2) * erfc(log(3/2))
    checks.append(_check("lt-gamma-of-inverse-erf-value", abs(w - target_w) < 1e-9,
                         w, 1e-9, target=target_w))
    checks.append(_check("lt-composition-discrimination", abs(v - w) > 0.05,
                         abs(v - w), 0.05))
    # beta = 1 reductions
    fpp1 = FppLaw(1.0, cfg.lam)
    dev = max(abs(dist.fpp_pmf(n, cfg.t, fpp1).value - dist.poisson_pmf(n, cfg.t, cfg.lam))
              for n in range(51))
    checks.append(_check("fpp-beta1-poisson-reduction", dev < 1e-10, dev, 1e-10))
    fn1 = FnbpLaw(FppLaw(1.0, 1.0), g)
    dev = max(abs(dist.fnbp_pmf(n, cfg.t, fn1).value
                  - dist.nb_pmf(n, g.shape_rate * cfg.t, 1.0 / 3.0)) for n in range(51))
    checks.append(_check("fnbp-beta1-nb-reduction", dev < 1e-10, dev, 1e-10))
    # normalization at one representative point
    fn = FnbpLaw(FppLaw(0.5, 1.0), g)
    total = sum(dist.fnbp_pmf(n, 1.0, fn).value for n in range(60))
    checks.append(_check("fnbp-normalization", abs(total - 1.0) < 1e-8, total, 1e-8))
    # variance forms and constants
    worst = 0.0
    for b in np.arange(0.05, 0.96, 0.05):
        law = FppLaw(float(b), 1.3)
        v1 = dist.fpp_var(1.7, law, "beta-duplication")
        v2 = dist.fpp_var(1.7, law, "alternative")
        worst = max(worst, abs(v1 - v2) / max(abs(v1), 1.0))
    checks.append(_check("fpp-variance-form-equivalence", worst < 1e-10, worst, 1e-10))
    worst = max(abs(FppLaw(float(b), 1.0).d1 - 2.0 * FppLaw(float(b), 1.0).d2)
                for b in np.arange(0.05, 0.96, 0.05))
    checks.append(_check("d1-equals-2d2", worst < 1e-12, worst, 1e-12))
    return checks


def _suite_pde(cfg: RunConfig):
    checks = []
    g = GammaLaw(2.0, 1.0)
    fpp = FppLaw(0.6, 1.0)
    rep = fraccalc.residual_fpp_equation(0, 1.0, fpp, fraccalc.MeshSpec(128))
    checks.append(_check("fpp-caputo-residual", rep.max_relative() < 1e-4,
                         rep.max_relative(), 1e-4))
    rep = fraccalc.residual_polya_ode(3, 1.0, g)
    checks.append(_check("polya-ode-residual", rep.max_relative() < 1e-10,
                         rep.max_relative(), 1e-10))
    sf = SfppLaw(0.5, g)
    rep = fraccalc.residual_sfpp_time_pde(0, 1.0, sf, k=1)
    checks.append(_check("sfpp-time-pde-residual", rep.max_relative() < 1e-6,
                         rep.max_relative(), 1e-6))
    rep = fraccalc.residual_sfpp_pgf_pde(0.5, 1.0, sf)
    checks.append(_check("sfpp-pgf-pde-residual", rep.max_relative() < 1e-7,
                         rep.max_relative(), 1e-7))
    rep = fraccalc.residual_gamma_rl_pde(1.0, 1.0, g, 1.5, fraccalc.MeshSpec(64))
    checks.append(_check("gamma-rl-pde-residual", rep.max_relative() < 1e-4,
                         rep.max_relative(), 1e-4))
    fn = FnbpLaw(FppLaw(0.5, 1.0), g)
    rep = fraccalc.residual_fnbp_lambda_pde(1, 1.0, fn, r=1)
    checks.append(_check("fnbp-rate-pde-residual", rep.max_relative() < 1e-5,
                         rep.max_relative(), 1e-5))
    return checks


def _suite_similarity(cfg: RunConfig):
    checks = []
    rng = RngStream(cfg.seed, 11)
    n = cfg.replicas
    res = stats.self_similarity_test("stable", 0.5, 1.0, 3.0, n, rng.child(0))
    checks.append(_check("stable-self-similarity", res.passed(0.01), res.p_value, 0.01))
    res = stats.self_similarity_test("inverse", 0.5, 1.0, 4.0, n, rng.child(1))
    checks.append(_check("inverse-self-similarity", res.passed(0.01), res.p_value, 0.01))
    res = stats.self_similarity_test("iterated", (0.7, 0.8), 1.0, 2.0, n, rng.child(2))
    checks.append(_check("iterated-self-similarity", res.passed(0.01), res.p_value, 0.01))
    res = stats.renewal_limit_check(FppLaw(0.7, 1.0), 1000.0, n, rng.child(3))
    checks.append(_check("fpp-renewal-limit", res.passed(0.01), res.p_value, 0.01))
    fn = FnbpLaw(FppLaw(0.7, 1.0), GammaLaw(2.0, 1.0))
    res = stats.renewal_limit_check(fn, 1000.0, n, rng.child(4))
    checks.append(_check("fnbp-renewal-limit", res.passed(0.01), res.p_value, 0.01))
    sf = SfppLaw(0.5, GammaLaw(2.0, 1.0))
    res = stats.stationarity_check(
        lambda ts, r, m: paths.sfpp_values(sf, ts, r, size=m), 1.0, [0.0, 2.0, 5.0],
        rng.child(5), replicas=min(n, 20_000))
    checks.append(_check("sfpp-stationary-increments", res.passed(0.01), res.p_value, 0.01))
    law = FppLaw(0.5, 1.0)
    res = stats.stationarity_check(
        lambda ts, r, m: paths.fpp_values(law, ts, r, size=m, mesh=1.0 / 128),
        1.0, [0.0, 5.0], rng.child(6), replicas=min(n, 8000))
    checks.append(_check("fpp-nonstationarity-detected", res.p_value < 0.01,
                         res.p_value, 0.01))
    rep = stats.increment_independence_check(
        "polya", GammaLaw(2.0, 1.0), [(1.0, 2.0), (2.0, 3.0)], rng.child(7),
        replicas=max(n, 50_000))
    ok = abs(rep["z_joint_vs_closed_form"]) < 4.0 and rep["z_joint_vs_closed_product"] > 6.0
    checks.append(_check("polya-dependent-increments", ok,
                         rep["z_joint_vs_closed_form"], 4.0, report=rep))
    return checks


def _suite_dependence(cfg: RunConfig):
    checks = []
    rng = RngStream(cfg.seed, 23)
    g = GammaLaw(2.0, 1.0)
    fn = FnbpLaw(FppLaw(0.5, 1.0), g)
    grid = np.geomspace(50.0, 1000.0, 10)
    curve = stats.corr_curve(
        lambda ts, r, m: paths.fnbp_values(fn, ts, r, size=m, mesh=1.0 / 64),
        1.0, grid, max(cfg.replicas, 10_000), rng.child(0))
    fit = stats.fit_power_exponent(curve, (50.0, 1000.0))
    checks.append(_check("fnbp-lrd-exponent", abs(fit.d - 0.5) < 0.15, fit.d, 0.15,
                         window=list(fit.window), stderr=fit.stderr,
                         classification=fit.classification))
    return checks


_SUITES = {
    "series": _suite_series,
    "pde": _suite_pde,
    "similarity": _suite_similarity,
    "dependence": _suite_dependence,
}


def cmd_verify(cfg: RunConfig):
    """Run a verification suite; exit 0 iff every check passes."""
    names = list(_SUITES) if cfg.suite == "all" else [cfg.suite]
    if any(nm not in _SUITES for nm in names):
        raise DomainError(f"unknown suite {cfg.suite!r}; choose from {list(_SUITES)} or 'all'")
    checks = []
    for nm in names:
        checks.extend(_SUITES[nm](cfg))
    passed = all(c["passed"] for c in checks)
    report = {"meta": cfg.metadata(suite=cfg.suite), "passed": passed, "checks": checks}
    _write(cfg, json.dumps(report, indent=2, default=float) + "\n")
    return 0 if passed else 1


def build_parser():
    ap = argparse.ArgumentParser(
        prog="fracount",
        description="Fractional Poisson / negative binomial / Polya process toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("pmf", cmd_pmf),
        ("moments", cmd_moments),
        ("sample", cmd_sample),
        ("verify", cmd_verify),
    ):
        p = sub.add_parser(name, help=fn.__doc__)
        p.set_defaults(func=fn)
        p.add_argument("--process", choices=_PROCESSES, default="fnbp")
        p.add_argument("--beta", type=float, default=0.5)
        p.add_argument("--lambda", dest="lam", type=float, default=1.0)
        p.add_argument("--alpha", type=float, default=2.0)
        p.add_argument("--p", type=float, default=1.0)
        p.add_argument("--t", type=float, default=1.0)
        p.add_argument("--t-max", dest="t_max", type=float, default=10.0)
        p.add_argument("--steps", type=int, default=100)
        p.add_argument("--n-max", dest="n_max", type=int, default=30)
        p.add_argument("--replicas", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="json")
        p.add_argument("--out", default=None)
        p.add_argument("--suite", default="all",
                       choices=("series", "pde", "similarity", "dependence", "all"))
    return ap


def main(argv=None):
    ap = build_parser()
    ns = ap.parse_args(argv)
    cfg = RunConfig(
        process=ns.process, beta=ns.beta, lam=ns.lam, alpha=ns.alpha, p=ns.p,
        t=ns.t, t_max=ns.t_max, steps=ns.steps, n_max=ns.n_max,
        replicas=ns.replicas, seed=ns.seed, fmt=ns.fmt, out=ns.out, suite=ns.suite,
    )
    try:
        return ns.func(cfg)
    except (DomainError, ConvergenceDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
