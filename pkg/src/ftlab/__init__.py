"""Simulation lab for model-based harvest control.

Builds stochastic population models, solves the induced Markov decision
problems, scores probabilistic forecasts, runs belief-updating management
loops, and simulates a partially observed multispecies harvest problem.
"""

__version__ = "0.1.0"
