"""Saliency-reweighted face preprocessing and a from-scratch CNN harness."""

__version__ = "0.1.0"
