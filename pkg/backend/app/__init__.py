"""Outage and handover probabilities of Poisson cellular networks."""

__version__ = "0.1.0"
