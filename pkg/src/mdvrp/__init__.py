"""Approximation algorithms for capacitated vehicle routing with multiple depots."""
