"""Conventional digital transceivers used as comparison baselines."""
