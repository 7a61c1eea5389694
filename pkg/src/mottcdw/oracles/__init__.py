"""Brute-force ground truths: lattice combinatorics and exact diagonalisation."""
from .fock import (EDResult, FockBasis, MatrixElementReport, distorted_q_states,
                   exact_diagonalize, matrix_element_check, projected_hamiltonian)
from .lattice import LatticeGraph, complete_bipartite, dimer, rectangle, ring
from .normalization import (NormalizationTable, aq_by_matching, aq_by_operator,
                            aq_distorted, matching_profile)
from .occupations import landau_table, min_pair_count, min_pair_count_joint

__all__ = [
    "EDResult", "FockBasis", "LatticeGraph", "MatrixElementReport", "NormalizationTable",
    "aq_by_matching", "aq_by_operator", "aq_distorted", "complete_bipartite", "dimer",
    "distorted_q_states", "exact_diagonalize", "landau_table", "matching_profile",
    "matrix_element_check", "min_pair_count", "min_pair_count_joint",
    "projected_hamiltonian", "rectangle", "ring",
]
