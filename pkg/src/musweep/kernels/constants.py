"""Tolerances and tags shared by both kernel implementations."""

#: relative imaginary-part tolerance for "positive real eigenvalue"
TAU_IMAG = 1e-9
#: realness tolerance on roots of the edge polynomial (relative to 1 + |root|)
ROOT_TOL = 1e-7
#: realness tolerance on t = a(alpha)/c(alpha) at an accepted root
RATIO_TOL = 1e-6
#: edge polynomial treated as identically zero below this relative size
DEGENERATE_TOL = 1e-12
#: realness tolerance on eigenvalues of the resolvent-crossing matrix,
#: relative to 1 + its spectral radius; generous on purpose (a false positive
#: only loosens the bound)
CROSSING_TOL = 1e-6

#: upper-bound tags
PERTURBATION = 0
COARSE = 1
TAG_NAMES = {PERTURBATION: "perturbation", COARSE: "coarse-norm"}
