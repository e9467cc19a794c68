"""Curvature and torsion: component forms, tensors, and operator oracles.

Two independent routes exist for each quantity and the test suite keeps
them in agreement: the closed component expressions (used by verdicts and
the CLI) and brute-force operator evaluation through the derivation action
(used as ground truth).  Sign conventions follow the component formulas
verbatim; recorded signs on the fixtures are outputs, never inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import matops
from .expr import Const, Expr, simplify
from .geometry import (
    FrameField,
    TensorField,
    VectorField,
    commutator,
    vanishes_on_chart,
)
from .derivation import (
    Connection,
    Derivation,
    FrameMatrix,
    VariantError,
    apply_derivation,
    w_of,
)

IDENTITY_TOL = 1e-10
VERDICT_SEED = 42


class CurvatureMatrixForm(FrameMatrix):
    """(R(X,Y))^i_k for a fixed pair of fields, as a matrix of Exprs."""


@dataclass
class CurvatureTensor:
    frame: FrameField
    components: np.ndarray = field(repr=False)  # object array (n, n, n, n), R^i_{jkl}

    def evaluate_at(self, point) -> np.ndarray:
        return matops.evaluate_array(self.components, self.frame.chart.assignment(point))


@dataclass
class TorsionTensor:
    frame: FrameField
    components: np.ndarray = field(repr=False)  # object array (n, n, n), T^i_{kl}

    def evaluate_at(self, point) -> np.ndarray:
        return matops.evaluate_array(self.components, self.frame.chart.assignment(point))


def curvature_matrix(deriv: Derivation, x: VectorField, y: VectorField) -> CurvatureMatrixForm:
    """X(W_Y) - Y(W_X) + W_X W_Y - W_Y W_X - W_{[X,Y]}."""
    frame = deriv.frame
    w_x = w_of(deriv, x).entries
    w_y = w_of(deriv, y).entries
    x_wy = x.apply_to_matrix(w_y)
    y_wx = y.apply_to_matrix(w_x)
    comm = matops.matmul(w_x, w_y)
    comm = matops.matadd(comm, matops.map_exprs(lambda e: -e, matops.matmul(w_y, w_x)))
    w_brk = w_of(deriv, commutator(x, y)).entries
    total = matops.matadd(x_wy, matops.map_exprs(lambda e: -e, y_wx))
    total = matops.matadd(total, comm)
    total = matops.matadd(total, matops.map_exprs(lambda e: -e, w_brk))
    return CurvatureMatrixForm(frame, matops.simplify_all(total))


def torsion_vector(deriv: Derivation, x: VectorField, y: VectorField) -> VectorField:
    """(W_X)^i_l Y^l - (W_Y)^i_l X^l - C^i_{kl} X^k Y^l."""
    frame = deriv.frame
    n = frame.dimension
    w_x = w_of(deriv, x).entries
    w_y = w_of(deriv, y).entries
    C = frame.anholonomy()
    comps = []
    for i in range(n):
        acc: Expr = Const(0.0)
        for l in range(n):
            acc = acc + w_x[i, l] * y.components[l] - w_y[i, l] * x.components[l]
        if not C.is_zero:
            for k in range(n):
                for l in range(n):
                    acc = acc - C.entry(i, k, l) * x.components[k] * y.components[l]
        comps.append(simplify(acc))
    return VectorField(frame, comps)


def curvature_tensor(deriv: Connection) -> CurvatureTensor:
    """R^i_{jkl} = -E_l(G^i_{jk}) + E_k(G^i_{jl}) - G^m_{jk} G^i_{ml}
    + G^m_{jl} G^i_{mk} - G^i_{jm} C^m_{kl}, with G the connection array."""
    if not isinstance(deriv, Connection):
        raise VariantError("the curvature tensor requires the connection variant")
    frame = deriv.frame
    n = frame.dimension
    g = deriv.gamma
    C = frame.anholonomy()
    out = np.empty((n, n, n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    acc: Expr = -frame.frame_derivative(l, g[i, j, k])
                    acc = acc + frame.frame_derivative(k, g[i, j, l])
                    for m in range(n):
                        acc = acc - g[m, j, k] * g[i, m, l] + g[m, j, l] * g[i, m, k]
                    if not C.is_zero:
                        for m in range(n):
                            acc = acc - g[i, j, m] * C.entry(m, k, l)
                    out[i, j, k, l] = simplify(acc)
    return CurvatureTensor(frame, out)


def torsion_tensor(deriv: Connection) -> TorsionTensor:
    """T^i_{kl} = -(G^i_{kl} - G^i_{lk}) - C^i_{kl}."""
    if not isinstance(deriv, Connection):
        raise VariantError("the torsion tensor requires the connection variant")
    frame = deriv.frame
    n = frame.dimension
    g = deriv.gamma
    C = frame.anholonomy()
    out = np.empty((n, n, n), dtype=object)
    for i in range(n):
        for k in range(n):
            for l in range(n):
                acc: Expr = -(g[i, k, l] - g[i, l, k])
                if not C.is_zero:
                    acc = acc - C.entry(i, k, l)
                out[i, k, l] = simplify(acc)
    return TorsionTensor(frame, out)


def curvature_operator_oracle(
    deriv: Derivation, x: VectorField, y: VectorField, z: TensorField
) -> TensorField:
    """Brute-force D_X D_Y - D_Y D_X - D_{[X,Y]} applied to a tensor field."""
    dxy = apply_derivation(deriv, x, apply_derivation(deriv, y, z))
    dyx = apply_derivation(deriv, y, apply_derivation(deriv, x, z))
    dbrk = apply_derivation(deriv, commutator(x, y), z)
    out = np.empty(z.components.shape, dtype=object)
    for idx in np.ndindex(z.components.shape):
        out[idx] = simplify(dxy.components[idx] - dyx.components[idx] - dbrk.components[idx])
    return TensorField(deriv.frame, z.p, z.q, out)


def torsion_operator_oracle(deriv: Derivation, x: VectorField, y: VectorField) -> VectorField:
    """Brute-force D_X Y - D_Y X - [X,Y]."""
    dxy = apply_derivation(deriv, x, TensorField.from_vector(y)).to_vector()
    dyx = apply_derivation(deriv, y, TensorField.from_vector(x)).to_vector()
    brk = commutator(x, y)
    return VectorField(
        deriv.frame,
        [
            simplify(a - b - c)
            for a, b, c in zip(dxy.components, dyx.components, brk.components)
        ],
    )


@dataclass
class IntegrabilityReport:
    """Residual of the transport compatibility identity at sample points.

    residual(p) = [X,Y](A)(p) + (R(X,Y)(p) + W_{[X,Y]}(p)) A(p); the
    obstruction norm is the largest |R(X,Y)| entry seen, which does not
    depend on A.
    """

    points: np.ndarray
    residuals: np.ndarray  # (count, n, n)
    max_residual: float
    obstruction_norm: float


def integrability_residual(
    deriv: Derivation,
    x: VectorField,
    y: VectorField,
    transform,
    points: Optional[Sequence] = None,
) -> IntegrabilityReport:
    frame = deriv.frame
    chart = frame.chart
    if points is None:
        pts = chart.sample_points()
    else:
        pts = np.array([chart.point(p) for p in points])
    r_form = curvature_matrix(deriv, x, y)
    brk = commutator(x, y)
    w_brk = w_of(deriv, brk).entries
    a = transform.entries
    brk_a = brk.apply_to_matrix(a)
    residuals = np.empty((len(pts), frame.dimension, frame.dimension))
    obstruction = 0.0
    for row, pt in enumerate(pts):
        assignment = chart.assignment(pt)
        r_val = matops.evaluate_array(r_form.entries, assignment)
        w_val = matops.evaluate_array(w_brk, assignment)
        a_val = matops.evaluate_array(a, assignment)
        brk_a_val = matops.evaluate_array(brk_a, assignment)
        residuals[row] = brk_a_val + (r_val + w_val) @ a_val
        obstruction = max(obstruction, float(np.max(np.abs(r_val))))
    return IntegrabilityReport(
        points=pts,
        residuals=residuals,
        max_residual=float(np.max(np.abs(residuals))) if len(pts) else 0.0,
        obstruction_norm=obstruction,
    )


@dataclass
class Verdict:
    """A boolean decision plus the residual that justifies it."""

    value: bool
    max_residual: float
    tol: float

    def __bool__(self) -> bool:
        return self.value


def _probe_pairs(frame: FrameField, seed: int) -> list[tuple[VectorField, VectorField]]:
    """Frame-field pairs plus seeded random polynomial fields."""
    from .derivation import _seeded_affine_fields

    n = frame.dimension
    base = [frame.coordinate_vector(i) for i in range(n)]
    pairs = [(base[i], base[j]) for i in range(n) for j in range(i + 1, n)]
    rng = np.random.default_rng(seed)
    rand = _seeded_affine_fields(frame, rng, 4)
    pairs.extend(
        [(rand[0], rand[1]), (rand[1], rand[2]), (rand[2], rand[3]), (rand[3], rand[0])]
    )
    return pairs


def is_flat(deriv: Derivation, seed: int = VERDICT_SEED, tol: float = IDENTITY_TOL) -> Verdict:
    """Identity-test the curvature over the chart's sample cloud.

    Connections test the full tensor; other variants probe the matrix form
    over a deterministic family of field pairs.
    """
    if isinstance(deriv, Connection):
        tensor = curvature_tensor(deriv)
        ok, worst = vanishes_on_chart(tensor.components.flat, deriv.chart, tol=tol, seed=seed)
        return Verdict(ok, worst, tol)
    worst = 0.0
    for x, y in _probe_pairs(deriv.frame, seed):
        form = curvature_matrix(deriv, x, y)
        _, value = vanishes_on_chart(form.entries.flat, deriv.chart, tol=tol, seed=seed)
        worst = max(worst, value)
    return Verdict(worst <= tol, worst, tol)


def is_torsion_free(
    deriv: Derivation, seed: int = VERDICT_SEED, tol: float = IDENTITY_TOL
) -> Verdict:
    if isinstance(deriv, Connection):
        tensor = torsion_tensor(deriv)
        ok, worst = vanishes_on_chart(tensor.components.flat, deriv.chart, tol=tol, seed=seed)
        return Verdict(ok, worst, tol)
    worst = 0.0
    for x, y in _probe_pairs(deriv.frame, seed):
        vec = torsion_vector(deriv, x, y)
        _, value = vanishes_on_chart(vec.components, deriv.chart, tol=tol, seed=seed)
        worst = max(worst, value)
    return Verdict(worst <= tol, worst, tol)
