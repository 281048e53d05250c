"""Centrality-constrained graph embedding."""
