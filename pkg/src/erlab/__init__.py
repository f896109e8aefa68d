"""Desk-scale lab for stepping-up hypergraph constructions.

Modules: bitdelta (delta structure and its regularity checkers), coloring
(three-colored pair palettes, packing, union bound), h4 (the rule-defined
4-graph and hypergraph handles), stepup (the generic uniformity lift),
search (clique and independence search with brute-force oracles), extract
(layered maxima scaffolds and verified K5 extraction), cli (front end).
"""

__version__ = "0.1.0"
