"""Sentence-level metric providers for correlation analysis."""
