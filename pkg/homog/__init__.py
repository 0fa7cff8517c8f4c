"""Homog Folder

Effective Hamiltonian of the strain G-equation by two independent routes.

effective (Module): Branch averages P±(μ), their inverses and the assembled H̄(p, c)
corrector (Module): Sub-linear correctors of the cell problem and their residual
discount (Module): Vanishing discount solver on a monotone finite difference grid
tablebook (Module): BranchBook, storage for (μ, P+, P-) tables
"""
