"""Bounds on interventional distributions of two discrete variables under a discrete latent confounder."""

__version__ = "0.1.0"

from .distributions import Kind, l1_distance, marginals, product_distribution, validate
from .model import CausalModel, honest, interventional, is_compatible, is_independent_of_x, observational

__all__ = [
    "__version__",
    "CausalModel",
    "Kind",
    "honest",
    "interventional",
    "is_compatible",
    "is_independent_of_x",
    "l1_distance",
    "marginals",
    "observational",
    "product_distribution",
    "validate",
]
