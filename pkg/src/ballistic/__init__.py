"""Monte Carlo toolkit for percolated cluster-state lattices built from
3-photon GHZ states fused by boosted Type-II gates."""

__version__ = "0.1.0"
