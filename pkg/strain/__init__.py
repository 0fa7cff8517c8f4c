"""Strain Folder

Strain effect on the effective Hamiltonian h(c) = H̄(m, n, c) of a shear flow.

curve (Module): StrainCurve over a grid of Markstein numbers with Lipschitz and decrease checks
quench (Module): Quench threshold, quench check and the quenching witness
identity (Module): Cell problem positivity and the c differentiated cell identity
theorem (Module): Sandwich and strict reduction report across c, with the m = 0 and n = 0 edges
"""
