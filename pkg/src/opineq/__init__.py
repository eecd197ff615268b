"""opineq: desk-scale numerical verification of relativistic operator
inequalities, 2D hydrogen spectra, Kato's diamagnetic inequality, and
quantum-dot excess-charge bounds."""

__version__ = "0.1.0"
