"""Finite map-graded linear categories over Q, verified mechanically.

The package represents finite categories, map-graded linear categories and
bimodules with explicit rational structure constants, and checks the classical
constructions on them exactly: nerves and covers, descent glueing, tensor and
Hom of bimodules, Hochschild complexes with their restriction maps, support,
localization and Mayer-Vietoris sequences, arrow categories, and Grothendieck
constructions of pseudofunctors.
"""

__version__ = "0.1.0"
