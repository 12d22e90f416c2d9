"""Reliability audit toolkit for published meta-analyses."""

from pvaudit.stats import PValue, p_from_ratio_ci, std_normal_cdf, std_normal_quantile

__version__ = "0.1.0"

__all__ = ["PValue", "p_from_ratio_ci", "std_normal_cdf", "std_normal_quantile"]
