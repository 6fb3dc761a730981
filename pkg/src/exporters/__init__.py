"""Exporters package for report workbooks."""
