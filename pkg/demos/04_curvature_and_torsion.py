"""Curvature and torsion, computed two independent ways and compared.

Closed component formulas on one side; brute-force operator evaluation
(D_X D_Y - D_Y D_X - D_[X,Y], and D_X Y - D_Y X - [X,Y]) on the other.
Their agreement is the library's standing self-check.
"""

import numpy as np

from normframes import (
    Chart,
    Connection,
    Const,
    FrameField,
    TensorField,
    curvature_matrix,
    curvature_operator_oracle,
    curvature_tensor,
    is_flat,
    is_torsion_free,
    torsion_tensor,
    torsion_vector,
)
from normframes.expr import Sym, cos, sin

# The unit sphere: curvature shows up in R^1_{212} = sin^2(theta).
sphere = Chart(("theta", "phi"), ((0.4, 2.7), (0.0, 6.2)))
th, ph = sphere.symbols
g = np.empty((2, 2, 2), dtype=object)
g[...] = Const(0.0)
g[0, 1, 1] = -(sin(Sym(th)) * cos(Sym(th)))
g[1, 0, 1] = cos(Sym(th)) / sin(Sym(th))
g[1, 1, 0] = cos(Sym(th)) / sin(Sym(th))
sphere_conn = Connection(FrameField.coordinate(sphere), g)

at = np.array([np.pi / 4, 0.3])
tensor = curvature_tensor(sphere_conn)
print("sphere R^1_{212} at theta=pi/4:", tensor.evaluate_at(at)[0, 1, 0, 1])

e1 = sphere_conn.frame.coordinate_vector(0)
e2 = sphere_conn.frame.coordinate_vector(1)
matrix_form = curvature_matrix(sphere_conn, e1, e2)
operator = curvature_operator_oracle(sphere_conn, e1, e2, TensorField.from_vector(e2))
print("matrix-form column:", matrix_form.evaluate_at(at)[:, 1])
print("operator route:    ", operator.to_vector().at(at))

print("sphere flat?        ", bool(is_flat(sphere_conn)))
print("sphere torsion-free?", bool(is_torsion_free(sphere_conn)))

# A flat connection with torsion: Gamma^1_{12} = 1 on the plane.
plane = Chart(("x1", "x2"), ((-0.5, 0.5), (-0.5, 0.5)))
gt = np.empty((2, 2, 2), dtype=object)
gt[...] = Const(0.0)
gt[0, 0, 1] = Const(1.0)
torsion_conn = Connection(FrameField.coordinate(plane), gt)

print("fixture flat?        ", bool(is_flat(torsion_conn)))
print("fixture torsion-free?", bool(is_torsion_free(torsion_conn)))
t = torsion_tensor(torsion_conn)
print("T^1_{12} =", t.components[0, 0, 1], "  T^1_{21} =", t.components[0, 1, 0])
pair = torsion_vector(
    torsion_conn,
    torsion_conn.frame.coordinate_vector(0),
    torsion_conn.frame.coordinate_vector(1),
)
print("T(E_1, E_2) components:", [str(c) for c in pair.components])
