"""Numerical laboratory for probing Bayesian inversion pitfalls.

Submodules:

- ``units``:        rational-exponent physical unit signatures
- ``densities``:    box-supported densities, coordinate changes, pushforward
- ``forward``:      forward relations and graph restriction
- ``conditioning``: curve conditioning, slab limits, the chart contradiction
- ``hierarchical``: discrete-hyperparameter toy posterior and its acausality
- ``transdim``:     evidences, Bayes factors, the two worked examples
- ``oracle``:       quadrature / Monte Carlo / Metropolis / reversible jump
- ``verification``: the analytic-vs-oracle regression suite
- ``cli``:          the ``bplab`` command
"""

from . import (conditioning, configio, densities, forward, hierarchical,
               oracle, transdim, units, verification)

__all__ = ["conditioning", "configio", "densities", "forward", "hierarchical",
           "oracle", "transdim", "units", "verification"]
