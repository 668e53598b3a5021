"""stitlab: simulation and analytic verification of iteration-stable random
tessellations in dimensions 1-3."""

__version__ = "0.1.0"
