"""Fractional Poisson, fractional negative binomial and Polya processes.

Exact one-dimensional laws, moments and covariance structure; reproducible
subordinator-based simulation; numerical verification of the governing
fractional differential and difference equations and of the dependence
structure (long-range dependence of the gamma-clock process, short-range
dependence of its increments).
"""

__version__ = "0.1.0"

from .dist import (
    FnbpLaw,
    FppLaw,
    GammaLaw,
    PmfTable,
    SfppLaw,
    build_pmf_table,
    e_beta_mean,
    fnbp_cov,
    fnbp_mean,
    fnbp_pmf,
    fnbp_var,
    fpp_cov,
    fpp_mean,
    fpp_pmf,
    fpp_var,
    gamma_moment,
    lt_fnbp,
    lt_gamma_of_inverse,
    lt_inverse_of_gamma,
    nb_pmf,
    poisson_pmf,
    polya_pmf,
    sf_poisson_pmf,
    sfpp_pgf,
    sfpp_pmf,
)
from .errors import (
    ConvergenceDomainError,
    DomainError,
    EvaluationError,
    TruncationError,
)
from .fraccalc import MeshSpec, ResidualReport, caputo_deriv, frac_shift_apply, rl_deriv
from .paths import PathConfig, RngStream, SamplePath
from .specfun import (
    SeriesControl,
    SeriesValue,
    WrightParams,
    binom_general,
    digamma,
    gen_wright,
    h22_series,
    incomplete_beta,
    log_gamma_signed,
    m_wright,
    mittag_leffler,
)

__all__ = [name for name in dir() if not name.startswith("_")]
