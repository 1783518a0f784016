"""Decide whether a switched stochastic system can be driven to consensus.

A set of stochastic matrices admits a consensus-reaching switching sequence
iff some product has a positive column.  This package decides that in
polynomial time via the digraph of pairs, builds explicit words, simulates
the resulting systems, and generates hard instances from 3-SAT.
"""

__version__ = "0.1.0"

from .matset import (MatrixSet, Word, ZeroPattern, dominates, load, loads,  # noqa: E402
                     pattern_product, positive_column, product, validate_set)
from .pairgraph import build_pair_digraph, decide_column_primitive  # noqa: E402
from .synth import (intree_decide, length_bounds, shortest_word_bruteforce,  # noqa: E402
                    synthesize_word)
