"""Specify, validate, render and chart replication changes in families of experiments."""

__version__ = "0.1.0"
