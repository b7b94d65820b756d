"""fatoulab: boundary dynamics of multiply connected Fatou components, at desk scale."""

__version__ = "0.1.0"

from . import (  # noqa: F401
    blaschke,
    circle_dynamics,
    covering,
    errors,
    harmonic,
    histograms,
    map_zoo,
    renderer,
    rng,
)
