"""Statistics for individual differences and preset comparisons."""

from .correlation import Correlation, gender_weights, partial_correlation, pearson, weighted_pearson
from .distributions import (betainc, chi2_cdf, chi2_sf, f_cdf, f_sf, gammainc, gammaincc, norm_cdf,
                            norm_ppf, norm_sf, t_cdf, t_sf, t_two_sided)
from .inference import (DegenerateError, TestReport, anova_with_covariate, chi2_independence,
                        kruskal_wallis, paired_t, shapiro_wilk, wilcoxon_signed_rank)
from .mnlogit import multinomial_logit

__all__ = [
    "Correlation", "DegenerateError", "TestReport", "anova_with_covariate", "betainc", "chi2_cdf",
    "chi2_independence", "chi2_sf", "f_cdf", "f_sf", "gammainc", "gammaincc", "gender_weights",
    "kruskal_wallis", "multinomial_logit", "norm_cdf", "norm_ppf", "norm_sf", "paired_t",
    "partial_correlation", "pearson", "shapiro_wilk", "t_cdf", "t_sf", "t_two_sided",
    "weighted_pearson", "wilcoxon_signed_rank",
]
