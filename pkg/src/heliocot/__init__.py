"""Relate MODIS cloud optical thickness to sky-camera circumsolar luminance."""
__version__ = "0.1.0"
