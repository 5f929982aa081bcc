"""LULU operators and the Discrete Pulse Transform on integer fields over Z^d windows."""

from .dpt import DptResult, Layer, Pulse, decompose, decompose_naive, extract_layer, reconstruct, spectrum
from .field import ScalarField, extremal_zones, flat_zones
from .lattice import DOMAIN_ONLY, FACET, FULL, OUTSIDE, ZERO_PADDED, Lattice
from .lulu import l_n_fast, l_n_oracle, p_n, u_n_fast, u_n_oracle

__all__ = [
    "DOMAIN_ONLY",
    "DptResult",
    "FACET",
    "FULL",
    "Lattice",
    "Layer",
    "OUTSIDE",
    "Pulse",
    "ScalarField",
    "ZERO_PADDED",
    "decompose",
    "decompose_naive",
    "extract_layer",
    "extremal_zones",
    "flat_zones",
    "l_n_fast",
    "l_n_oracle",
    "p_n",
    "reconstruct",
    "spectrum",
    "u_n_fast",
    "u_n_oracle",
]
