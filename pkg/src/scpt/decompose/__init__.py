"""Scaffolds, junction trees, fragment edit distance and MCS."""

from __future__ import annotations

from scpt.decompose.ged import EditVerdict, LabeledTree, dfged_le1, exhaustive_tree_ged, tree_code
from scpt.decompose.jtree import JTNode, JunctionTree, junction_tree
from scpt.decompose.mcs import DEFAULT_BUDGET, MCSResult, mcs_ratio
from scpt.decompose.scaffold import Scaffold, murcko_scaffold, scaffold_molecule

__all__ = [
    "DEFAULT_BUDGET",
    "EditVerdict",
    "JTNode",
    "JunctionTree",
    "LabeledTree",
    "MCSResult",
    "Scaffold",
    "dfged_le1",
    "exhaustive_tree_ged",
    "junction_tree",
    "mcs_ratio",
    "murcko_scaffold",
    "scaffold_molecule",
    "tree_code",
]
