"""Jackson-type approximation operators on spherical caps."""

__version__ = "0.1.0"
