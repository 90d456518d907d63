"""Exact jet-level computations with map-germs.

Equivalence groups and their filtered subgroups, tangent frames,
unipotent exp/log, descent of witnesses from a field extension to the
base field, and reduction to polynomial systems.  All arithmetic is
exact; see the module table in README.md for the layout.
"""

__version__ = "0.1.0"
