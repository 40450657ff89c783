"""
Estimators - IoC, IwC and DRE constructions of θ^i and θ^{i|j} with ATE/ATTE composition
"""

from .bundle import NuisanceBundle, NuisanceValues, nuisance_values
from .report import FAMILIES, EstimateReport, FamilyEstimates, full_report
from .theta import (
    ipw_diagnostics,
    theta_dre_conditional,
    theta_ioc,
    theta_ioc_conditional,
    theta_iwc,
    theta_iwc_conditional,
)

__all__ = [
    'FAMILIES',
    'EstimateReport',
    'FamilyEstimates',
    'NuisanceBundle',
    'NuisanceValues',
    'full_report',
    'ipw_diagnostics',
    'nuisance_values',
    'theta_dre_conditional',
    'theta_ioc',
    'theta_ioc_conditional',
    'theta_iwc',
    'theta_iwc_conditional',
]
