"""L2 geometry of Bayesian inference.

Priors, likelihoods and posteriors are treated as vectors in L2 over the
parameter space; the package computes their norms, angles and compatibility
(kappa) through closed conjugate-family forms, an adaptive quadrature oracle
and Monte Carlo estimators, and exposes the lot through a CLI and a small
HTTP service.
"""

__version__ = "0.1.0"
