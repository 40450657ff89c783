"""
credit-impact-bench - orthogonal-score treatment effect estimation for multi-level interventions
"""
__version__ = "0.1.0"
