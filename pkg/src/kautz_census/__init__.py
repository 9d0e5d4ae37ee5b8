"""Exact per-edge girth censuses of Kautz digraphs."""

__version__ = "0.1.0"

from .oracle import DeltaRow, Spectrum, delta_census, rho_census, sigma_census, verify_identities
from .words import EdgeRef, GraphParams

__all__ = [
    "DeltaRow",
    "EdgeRef",
    "GraphParams",
    "Spectrum",
    "delta_census",
    "rho_census",
    "sigma_census",
    "verify_identities",
]
