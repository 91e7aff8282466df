"""Simulation library for a driven Majorana-nanowire/cavity quantum bus.

Subpackages cover the tight-binding nanowire model and its disorder
ensembles, the perturbative splitting analysis, the reduction of the
driven junction to a Jaynes-Cummings bus, Lindblad open-system
transfer dynamics, and collective GHZ-state generation, plus a CSV/JSON
experiment CLI tying them together.
"""

__version__ = "0.1.0"
