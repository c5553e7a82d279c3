"""lorentzfigs: desk-scale figure rendering from softlorentz output files.

Consumes only the documented CSV/JSON interfaces (series.csv, series_n.csv,
events.csv, fits.json, papcompare.csv, manifest.json); never imports the
simulator.
"""

__version__ = "0.1.0"
