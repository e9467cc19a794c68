"""Frames over a chart, their anholonomy, and vector-field commutators.

The orthonormal polar frame (d_r, (1/r) d_theta) is the classic example of
an anholonomic frame: its two legs fail to commute by a 1/r factor.
"""

import numpy as np

from normframes import Chart, Const, FrameField, VectorField, commutator
from normframes.expr import Sym

polar = Chart(("r", "theta"), ((1.0, 2.0), (0.0, 1.5)))
r, theta = polar.symbols

coord = FrameField.coordinate(polar)
orth = FrameField(polar, [[Const(1.0), Const(0.0)], [Const(0.0), 1 / Sym(r)]])

# E_2 = (1/r) d_theta, so E_2(theta) = 1/r:
print("E_2(theta) =", orth.frame_derivative(1, Sym(theta)))

# The structure functions C^i_{jk} of [E_j, E_k] = C^i_{jk} E_i.
anhol = orth.anholonomy()
print("C at (1.5, 0.3):")
print(anhol.evaluate_at([1.5, 0.3]))
print("coordinate frame is holonomic:", coord.anholonomy().is_zero)

# Commutators of concrete fields, in either frame, agree as geometric
# objects: push both to coordinate components and compare.
x_coord = VectorField(coord, [Sym(r), Const(0.0)])
y_coord = VectorField(coord, [Const(0.0), Const(1.0)])
x_orth = VectorField(orth, [Sym(r), Const(0.0)])
y_orth = VectorField(orth, [Const(0.0), Sym(r)])

brk_coord = commutator(x_coord, y_coord)
brk_orth = commutator(x_orth, y_orth)
pt = np.array([1.2, 0.7])
print("[X,Y] coordinate components, computed in the coordinate frame:",
      brk_coord.coordinate_components_at(pt))
print("[X,Y] coordinate components, computed in the orthonormal frame:",
      brk_orth.coordinate_components_at(pt))
