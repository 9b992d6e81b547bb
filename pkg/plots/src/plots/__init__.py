"""Figures from badapprox CSV outputs.

The package reads the three documented CSV schemas (records, samples,
profile) and renders them as PNG files; it never imports the measurement
package itself.
"""

from .figures import PlotJob, PlotKind, plot_profile, plot_records, plot_samples
from .io import SchemaError, read_profile, read_records, read_samples

__all__ = [
    "PlotJob",
    "PlotKind",
    "SchemaError",
    "plot_profile",
    "plot_records",
    "plot_samples",
    "read_profile",
    "read_records",
    "read_samples",
]
