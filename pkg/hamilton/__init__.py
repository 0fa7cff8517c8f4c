"""Hamilton Folder

The one dimensional strain Hamiltonian and the tools that inspect its level sets.

StrainHamiltonian (Class): H(p, x, c) bound to a coefficient pair and slope m
BranchRoots (Class): Lower and upper roots of H = μ at a set of positions
quasiconvex (Module): Quasiconvexity checker with a violating witness
"""
