"""
When eigenvectors run out
=========================

Sparse directed graphs often have adjacency matrices that cannot be
diagonalized. This script shows the smallest example, then measures how common
the problem is on random digraphs.
"""

import numpy as np

from gstlab import adjacency, erdos_renyi, is_defective
from gstlab.experiments import SurveyConfig, defective_survey
from gstlab.graph import from_edges
from gstlab.spectral import eigenvector_rank

# A directed path 0 -> 1 -> 2 is a single nilpotent Jordan block: the
# eigenvalue 0 has algebraic multiplicity 3 but only one eigenvector.
A = adjacency(from_edges(3, [(0, 1), (1, 2)]))
rep = is_defective(A)
print("path graph clusters:", [(c.algebraic, c.geometric) for c in rep.clusters])
print("eigenvector rank:", eigenvector_rank(A), "of", A.shape[0])

# The same thing happens at scale. At p = 2/N nearly every graph is defective
# and the eigenvector matrix loses rank.
A = adjacency(erdos_renyi(100, 2 / 100, seed=1))
rep = is_defective(A)
print(f"\nER graph N=100 p=2/N: defective={rep.is_defective}, missing eigenvectors={rep.deficiency}")
print("eigenvector rank:", eigenvector_rank(A))

# A small survey over edge densities (desk scale; the CLI runs the full grid).
table = defective_survey(SurveyConfig(sizes=(60,), factors=(2, 4, 6, 8), trials=40, seed=0))
print()
for line in table.to_csv().splitlines():
    if not line.startswith("#"):
        print(line)
