"""catamp: qubit-oscillator simulator for fast cat-state amplification and
pi-pulse rephasing, with an exact analytic frame for the small-qubit-frequency
limit and a full Schroedinger-equation oracle."""

__version__ = "0.1.0"

from . import analysis, fock, frame, model, propagator, protocols  # noqa: F401
