"""Verification workbench for topological filters, uniformities and
metric-space derivatives at desk scale."""

__version__ = "0.1.0"
