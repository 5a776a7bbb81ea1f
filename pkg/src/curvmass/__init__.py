"""Mass-type invariants of rotationally symmetric 3-manifolds with a cosmological constant."""

__version__ = "0.1.0"
