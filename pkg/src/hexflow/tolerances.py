"""Numeric tolerances and guard constants, kept in one place.

All values are chosen for IEEE-754 double precision.
"""

# Minimum per-edge margin cos(a_i + a_j) + eta accepted by the geometric
# kernel.  Points closer to the admissibility boundary are rejected so that
# sinh(l) stays bounded away from zero.
ADMISSIBILITY_EPS = 1e-12

# Residual allowed in the hexagon cosine law after a metric is built.
COSINE_LAW_TOL = 1e-12

# Relative spread allowed between the three cyclic evaluations of the
# hexagon area-like invariant A = sinh(l_ij) sinh(l_ik) sinh(th_i).
A_SYMMETRY_RTOL = 1e-10

# |J - J^T| allowed in angle Jacobians, relative to max(1, ||J||_inf).
JACOBIAN_SYMMETRY_TOL = 1e-10

# Central-difference step and the relative agreement demanded between
# closed-form Jacobians and their finite-difference oracles.
FD_STEP = 1e-6
FD_REL_TOL = 1e-5

# Relative agreement demanded between the closed-form determinant of the
# length Jacobian and the determinant of its finite-difference counterpart.
DET_REL_TOL = 1e-6

# Residual allowed in the diagonal row identity
# J_ii = J_ij cosh(l_ij) + J_ik cosh(l_ik) for zero edge weights.
ZERO_WEIGHT_IDENTITY_TOL = 1e-9

# Agreement between the two edge-length parameterizations (angle form vs
# log-scale form) under a = arctan(e^-u).
LENGTH_FORMS_RTOL = 1e-12

# Gauss-Legendre line integrals: initial node count, node cap, and the
# relative change between successive estimates that counts as converged.
QUAD_INIT_NODES = 16
QUAD_MAX_NODES = 1024
QUAD_REL_TOL = 1e-10

# Agreement demanded between straight and dog-leg evaluations of path
# integrals of closed 1-forms.
PATH_INDEPENDENCE_TOL = 1e-8
