"""Numerical toolkit for symplectic reduction of symmetric Hamiltonian systems.

The package builds concrete finite-dimensional scenarios (point particles,
planar and spatial rotations, rigid bodies, magnetic cotangent bundles) and
turns the classical reduction statements about them into machine-checkable
residual bounds: Noether conservation, momentum-map linear algebra, cocycles
and affine actions, point and orbit reduction, the shifting equivalence,
reconstruction of dynamics, and the singular (stratified) case.
"""

__version__ = "0.1.0"
