"""Time-harmonic Maxwell scattering by a biperiodic inhomogeneous layer on a
perfectly conducting plate, with a truncated exact boundary condition."""

__version__ = "0.1.0"
