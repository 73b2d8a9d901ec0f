"""Oriented-circle geometry on the 2-sphere.

Circle polyhedra, their hyperbolic polygon links, and congruence
certification, with a bridge from convex polyhedra in the Klein ball.
"""

__version__ = "0.1.0"
