"""Moran forest: samplers, exact laws, bijections and Monte Carlo checks."""
