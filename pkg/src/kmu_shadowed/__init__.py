"""Statistics and diversity performance of kappa-mu shadowed fading channels."""
from .distribution import (KAPPA_ZERO, M_INFINITY, FadingModel, ShadowedParams, SpecialCase,
                           cdf, conditional_pdf, log_pdf, mgf, pdf, special_case)
from .errors import ConvergenceError, DomainError
from .performance import (ModulationSpec, OutageQuery, ber_mrc, ber_mrc_numeric, outage_mrc,
                          outage_mrc_asymptotic, outage_sc, outage_sc_asymptotic)
from .specialfn import DEFAULT_CONTROL, NumericControl
from .summax import (BranchSet, max_cdf, max_pdf, sum_cdf, sum_cdf_asymptotic, sum_cdf_iid,
                     sum_pdf, sum_pdf_asymptotic, sum_pdf_iid)

__version__ = "0.1.0"

__all__ = [
    "KAPPA_ZERO", "M_INFINITY", "FadingModel", "ShadowedParams", "SpecialCase",
    "cdf", "conditional_pdf", "log_pdf", "mgf", "pdf", "special_case",
    "ConvergenceError", "DomainError",
    "ModulationSpec", "OutageQuery", "ber_mrc", "ber_mrc_numeric", "outage_mrc",
    "outage_mrc_asymptotic", "outage_sc", "outage_sc_asymptotic",
    "DEFAULT_CONTROL", "NumericControl",
    "BranchSet", "max_cdf", "max_pdf", "sum_cdf", "sum_cdf_asymptotic", "sum_cdf_iid",
    "sum_pdf", "sum_pdf_asymptotic", "sum_pdf_iid",
]
