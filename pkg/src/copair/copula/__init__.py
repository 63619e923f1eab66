"""Bivariate copula families, rotations, and canonical ML estimation."""

from .core import (
    ROTATIONS,
    CopulaParams,
    copula_cdf,
    copula_logpdf,
    copula_pdf,
    h_function,
    implied_tau,
    rotate,
)
from .estimation import (
    CopulaModel,
    CopulaSelector,
    FittedCopula,
    candidate_specs,
    fit_cml,
    select_model,
)
from .families import FAMILIES, CopulaFamily, tawn_pickands

__all__ = [
    "ROTATIONS",
    "FAMILIES",
    "CopulaFamily",
    "CopulaParams",
    "CopulaModel",
    "CopulaSelector",
    "FittedCopula",
    "candidate_specs",
    "copula_cdf",
    "copula_logpdf",
    "copula_pdf",
    "fit_cml",
    "h_function",
    "implied_tau",
    "rotate",
    "select_model",
    "tawn_pickands",
]
