"""In-circuit differential-mode impedance extraction with a single inductive probe."""

__version__ = "0.1.0"
