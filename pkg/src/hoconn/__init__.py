"""Exact symbolic calculus for higher order connections on vector bundles over R^n."""

__version__ = "0.1.0"
