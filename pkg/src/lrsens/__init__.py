"""
Likelihood-ratio estimators of steady-state parametric sensitivities for stochastic reaction
networks, with an exact finite-state oracle for validation.
"""
__version__ = "0.1.0"
