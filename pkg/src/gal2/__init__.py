"""gal2: GF(2) linear algebra, finite 2-group cohomology, 2-adic square classes."""

__version__ = "0.1.0"
