"""Exact entropy-optimal random variate generation from finite-precision CDFs."""
