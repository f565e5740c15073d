"""Two weakly coupled Kerr oscillators with two-quantum dissipation."""

__version__ = "0.1.0"
