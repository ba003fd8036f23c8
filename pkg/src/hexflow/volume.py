"""Relative volume of the hyperbolic pyramid over a right-angled hexagon.

With the edge weights of a face held fixed, the volume of the associated
truncated pyramid is a function of the three corner dihedral angles alone,
and its differential is -(1/2) (th_i da_i + th_j da_j + th_k da_k).  Only
volume differences against a chart's base point are computed; the absolute
normalization would require decomposing the truncated polytope and is out of
scope.  The Hessian is -(1/2) times the angle Jacobian, hence negative
definite under the structure condition: the volume is strictly concave in
the dihedral angles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hexagon import CornerAlpha, FaceEta, face_jacobian_closed, face_metric
from .quadrature import line_integral


@dataclass(frozen=True)
class PyramidChart:
    """Fixed weights (hyper-ideal vertex positions) plus an admissible base
    point at which the relative volume vanishes."""

    eta: FaceEta
    base_alpha: CornerAlpha

    def __post_init__(self):
        face_metric(self.base_alpha, self.eta)  # raises NotAdmissible if bad


def relative_volume(chart: PyramidChart, a: CornerAlpha) -> float:
    """V(a) - V(base): minus half the line integral of th . da along the
    straight segment from the base point (admissible by convexity)."""
    start = np.array(chart.base_alpha.as_tuple())
    end = np.array(a.as_tuple())
    d = end - start
    if not np.any(d):
        return 0.0
    face_metric(a, chart.eta)  # endpoint admissibility check

    def integrand(t: float) -> float:
        m = face_metric(CornerAlpha(*(start + t * d)), chart.eta)
        return float(np.dot(m.angles, d))

    return -0.5 * line_integral(integrand)


def volume_gradient(chart: PyramidChart, a: CornerAlpha) -> np.ndarray:
    """Gradient of the relative volume: -(1/2) times the boundary arcs."""
    m = face_metric(a, chart.eta)
    return -0.5 * np.array(m.angles)


def volume_hessian(chart: PyramidChart, a: CornerAlpha) -> np.ndarray:
    """Hessian of the relative volume: -(1/2) times the angle Jacobian.
    All eigenvalues are negative under the structure condition."""
    m = face_metric(a, chart.eta)
    return -0.5 * face_jacobian_closed(a, chart.eta, m)
