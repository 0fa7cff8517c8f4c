"""Front Folder

Direct two dimensional simulation of the strain G-equation under a periodic shear flow.

FrontState (Class): Periodic perturbation of the linear level set and its grid
SpeedBook (Class): Storage for the mean front shift and the measured flame speed
"""
