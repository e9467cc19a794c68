"""Transport along integral curves and neighborhood-wide flat frames.

Along an integral curve the frame equation is a linear matrix ODE,
integrated with the classical fixed-step fourth-order scheme.  For flat
linear connections the same equations integrate consistently in every
direction, yielding one frame that kills the components on a whole grid;
curvature is exactly the obstruction.
"""

import numpy as np

from normframes import (
    Chart,
    Connection,
    Const,
    CurveSpec,
    FrameField,
    GridSpec,
    NotFlatError,
    Symbol,
    VectorField,
    constancy_check,
    flat_frame_neighborhood,
    holonomicity_check,
    transport_along_curve,
)
from normframes.expr import Sym, cos, sin

polar = Chart(("r", "theta"), ((1.0, 2.0), (0.0, 1.6)))
r, theta = polar.symbols
gamma = np.empty((2, 2, 2), dtype=object)
gamma[...] = Const(0.0)
gamma[0, 1, 1] = -Sym(r)
gamma[1, 0, 1] = 1 / Sym(r)
gamma[1, 1, 0] = 1 / Sym(r)
euclid = Connection(FrameField.coordinate(polar), gamma)

# transport around the unit circle: the solution is a rotation matrix
circle = CurveSpec((Const(1.0), Sym(Symbol("s"))), (0.0, np.pi / 2), 0.0, 1e-3)
angular = VectorField(euclid.frame, [Const(0.0), Const(1.0)])
moved = transport_along_curve(euclid, angular, circle, np.eye(2))
s_end = moved.s_values[-1]
expected = np.array([[np.cos(s_end), np.sin(s_end)], [-np.sin(s_end), np.cos(s_end)]])
print("transport vs closed-form rotation:",
      float(np.max(np.abs(moved.matrices[-1] - expected))))

# a frame on the whole box: exists because the connection is flat
grid = GridSpec((21, 21), box=((1.0, 2.0), (0.0, 1.0)))
flat_frame = flat_frame_neighborhood(euclid, grid, h=1e-3)
print("components residual on the grid:", flat_frame.gamma_prime_residual)
print("path-independence audit:        ", flat_frame.path_audit_deviation)

# it is the Cartesian frame in polar clothing, hence holonomic
verdict = holonomicity_check(flat_frame)
print("holonomic:", verdict.holonomic, "| max commutator:", verdict.max_commutator)

# two seeds differ by exactly the constant seed ratio
second = flat_frame_neighborhood(euclid, grid, b0=np.array([[2.0, 1.0], [0.0, 1.0]]), h=1e-3)
relation = constancy_check(flat_frame, second)
print("relating transform constant:", relation.constant)
print(relation.matrix)

# the sphere refuses: curvature is the integrability obstruction
sphere = Chart(("theta", "phi"), ((0.4, 2.7), (0.0, 6.2)))
th, _ = sphere.symbols
g = np.empty((2, 2, 2), dtype=object)
g[...] = Const(0.0)
g[0, 1, 1] = -(sin(Sym(th)) * cos(Sym(th)))
g[1, 0, 1] = cos(Sym(th)) / sin(Sym(th))
g[1, 1, 0] = cos(Sym(th)) / sin(Sym(th))
sphere_conn = Connection(FrameField.coordinate(sphere), g)
try:
    flat_frame_neighborhood(sphere_conn, GridSpec((5, 5)), h=1e-2)
except NotFlatError as err:
    print("sphere rejected with obstruction:", err.obstruction_norm)
