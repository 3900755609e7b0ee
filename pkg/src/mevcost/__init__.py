"""Cost of MEV over transaction orderings: exact enumeration, bounds and graph spectra."""

__version__ = "0.1.0"
