"""Field Folder

Collection of classes and functions that describe the stationary ergodic shear flow
v(x) and the coefficient pair (k, s) of the one dimensional strain Hamiltonian.

FieldSpec (Class): Model tag, amplitudes, frequencies and seed of a shear flow
FieldRealization (Class): Closed form evaluators for v and v' of one sample path
FieldPair (Class): The (k, s) coefficients, shear built or hand supplied
"""
