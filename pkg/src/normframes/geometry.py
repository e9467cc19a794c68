"""Charts, frame fields, vector/tensor fields and the anholonomy object.

A chart is a single coordinate patch with a sampling box; every identity
verdict in the library ("vanishes identically", "frame nondegenerate") is
decided by evaluation on a deterministic pseudo-random sample of points
drawn from that box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import matops
from .expr import (
    COORDINATE,
    Const,
    Expr,
    Symbol,
    coordinate_symbols,
    differentiate,
    evaluate,
    free_symbols,
    parse_expr,
    simplify,
)

IDENTITY_TOL = 1e-10
DEGENERACY_TOL = 1e-12
DEFAULT_SAMPLES = 64
DEFAULT_SEED = 42


class GeometryError(Exception):
    pass


class DegenerateFrameError(GeometryError):
    """The frame matrix is singular (|det| below threshold) at a sample point."""


@dataclass(frozen=True)
class Chart:
    """A coordinate chart: names plus a closed sampling box per coordinate."""

    coordinates: tuple[str, ...]
    domain: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(set(self.coordinates)) != len(self.coordinates):
            raise ValueError("coordinate names must be distinct")
        if len(self.domain) != len(self.coordinates):
            raise ValueError("one domain interval per coordinate is required")
        for lo, hi in self.domain:
            if not hi > lo:
                raise ValueError("domain intervals must have positive length")

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    @property
    def symbols(self) -> tuple[Symbol, ...]:
        return coordinate_symbols(self.coordinates)

    def symbol_table(self) -> dict[str, Symbol]:
        return {s.name: s for s in self.symbols}

    def parse(self, source: str) -> Expr:
        return parse_expr(source, self.symbols)

    def point(self, value) -> np.ndarray:
        """Normalize a point given as a sequence or a name->value mapping."""
        if isinstance(value, Mapping):
            missing = [c for c in self.coordinates if c not in value]
            if missing:
                raise ValueError(f"point is missing coordinates {missing}")
            arr = np.array([float(value[c]) for c in self.coordinates])
        else:
            arr = np.asarray(value, dtype=float)
            if arr.shape != (self.dimension,):
                raise ValueError(
                    f"expected {self.dimension} coordinates, got shape {arr.shape}"
                )
        return arr

    def assignment(self, point) -> dict[str, float]:
        pt = self.point(point)
        return dict(zip(self.coordinates, pt))

    def contains(self, point) -> bool:
        pt = self.point(point)
        return all(lo <= v <= hi for v, (lo, hi) in zip(pt, self.domain))

    def sample_points(self, count: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lo = np.array([a for a, _ in self.domain])
        hi = np.array([b for _, b in self.domain])
        return lo + rng.random((count, self.dimension)) * (hi - lo)


def vanishes_on_chart(
    exprs: Iterable[Expr],
    chart: Chart,
    tol: float = IDENTITY_TOL,
    count: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
) -> tuple[bool, float]:
    """Probabilistic identity test: evaluate on the chart's sample cloud.

    Returns (verdict, max |value| observed).
    """
    worst = 0.0
    points = chart.sample_points(count, seed)
    flat = list(exprs)
    for pt in points:
        assignment = chart.assignment(pt)
        for e in flat:
            worst = max(worst, abs(evaluate(e, assignment)))
    return worst <= tol, worst


class FrameField:
    """A frame E_i = B^a_i d/dx^a given by an invertible matrix of Exprs.

    Rows of ``matrix`` are coordinate (a) indices, columns are frame (i)
    indices.  Nondegeneracy is enforced on the chart's sample cloud at
    construction time.
    """

    def __init__(self, chart: Chart, matrix=None, _validate: bool = True):
        self.chart = chart
        n = chart.dimension
        if matrix is None:
            self.matrix = matops.identity_exprs(n)
            self._is_identity = True
        else:
            self.matrix = matops.expr_matrix(matrix) if not isinstance(matrix, np.ndarray) else matrix
            if self.matrix.shape != (n, n):
                raise ValueError(f"frame matrix must be {n}x{n}")
            self._is_identity = all(
                self.matrix[i, j] == Const(1.0 if i == j else 0.0)
                for i in range(n)
                for j in range(n)
            )
        for idx in np.ndindex(self.matrix.shape):
            bad = [s for s in free_symbols(self.matrix[idx]) if s.kind != COORDINATE]
            if bad:
                raise ValueError(f"frame entries must be coordinate-only, found {bad}")
        self._inverse_exprs = None
        self._anholonomy = None
        if _validate and not self._is_identity:
            self._check_nondegenerate()

    @classmethod
    def coordinate(cls, chart: Chart) -> "FrameField":
        return cls(chart)

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @property
    def is_coordinate(self) -> bool:
        return self._is_identity

    def _check_nondegenerate(self):
        for pt in self.chart.sample_points():
            det = np.linalg.det(self.evaluate_at(pt))
            if abs(det) <= DEGENERACY_TOL:
                raise DegenerateFrameError(
                    f"frame determinant {det!r} at {pt.tolist()} is below {DEGENERACY_TOL}"
                )

    def evaluate_at(self, point) -> np.ndarray:
        return matops.evaluate_array(self.matrix, self.chart.assignment(point))

    def inverse_at(self, point) -> np.ndarray:
        mat = self.evaluate_at(point)
        det = np.linalg.det(mat)
        if abs(det) <= DEGENERACY_TOL:
            raise DegenerateFrameError(f"singular frame at {np.asarray(point).tolist()}")
        return np.linalg.inv(mat)

    def inverse_exprs(self) -> np.ndarray:
        """Symbolic inverse B^i_a (adjugate form, n <= 4)."""
        if self._inverse_exprs is None:
            if self._is_identity:
                self._inverse_exprs = matops.identity_exprs(self.dimension)
            else:
                self._inverse_exprs = matops.inverse(self.matrix)
        return self._inverse_exprs

    def frame_derivative(self, i: int, f: Expr) -> Expr:
        """E_i(f) = sum_a B^a_i df/dx^a.  Frame index i is 0-based."""
        syms = self.chart.symbols
        acc: Expr = Const(0.0)
        for a in range(self.dimension):
            df = differentiate(f, syms[a])
            acc = acc + self.matrix[a, i] * df
        return simplify(acc)

    def coordinate_vector(self, i: int) -> "VectorField":
        """The i-th frame field E_i, as a vector field in this frame."""
        comps = [Const(1.0 if j == i else 0.0) for j in range(self.dimension)]
        return VectorField(self, comps)

    def anholonomy(self) -> "AnholonomyObject":
        if self._anholonomy is None:
            self._anholonomy = anholonomy_coefficients(self)
        return self._anholonomy


def frame_derivative(frame: FrameField, i: int, f: Expr) -> Expr:
    return frame.frame_derivative(i, f)


class VectorField:
    """X = X^i E_i with coordinate-only component Exprs."""

    def __init__(self, frame: FrameField, components):
        self.frame = frame
        n = frame.dimension
        comps = []
        for c in components:
            e = c if isinstance(c, Expr) else Const(float(c))
            bad = [s for s in free_symbols(e) if s.kind != COORDINATE]
            if bad:
                raise ValueError(f"vector components must be coordinate-only, found {bad}")
            comps.append(e)
        if len(comps) != n:
            raise ValueError(f"expected {n} components")
        self.components = tuple(comps)

    @property
    def chart(self) -> Chart:
        return self.frame.chart

    def at(self, point) -> np.ndarray:
        assignment = self.chart.assignment(point)
        return np.array([evaluate(c, assignment) for c in self.components])

    def coordinate_components_at(self, point) -> np.ndarray:
        """Components against d/dx^a, i.e. B X; frame-independent data."""
        return self.frame.evaluate_at(point) @ self.at(point)

    def apply_to(self, f: Expr) -> Expr:
        """X(f) = X^k E_k(f)."""
        acc: Expr = Const(0.0)
        for k in range(self.frame.dimension):
            acc = acc + self.components[k] * self.frame.frame_derivative(k, f)
        return simplify(acc)

    def apply_to_matrix(self, matrix: np.ndarray) -> np.ndarray:
        return matops.map_exprs(self.apply_to, matrix)

    def __add__(self, other: "VectorField") -> "VectorField":
        _require_same_frame(self, other)
        return VectorField(
            self.frame,
            [simplify(a + b) for a, b in zip(self.components, other.components)],
        )

    def scaled(self, factor) -> "VectorField":
        f = factor if isinstance(factor, Expr) else Const(float(factor))
        return VectorField(self.frame, [simplify(f * c) for c in self.components])


def _require_same_frame(a, b):
    if a.frame is not b.frame:
        raise ValueError("fields must live in the same frame")


@dataclass
class TensorField:
    """Type (p,q) tensor; components stored densely, upper indices first."""

    frame: FrameField
    p: int
    q: int
    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.frame.dimension
        rank = self.p + self.q
        comps = np.asarray(self.components, dtype=object)
        if rank == 0:
            comps = comps.reshape(())
        expected = (n,) * rank
        if comps.shape != expected:
            comps = comps.reshape(expected)
        self.components = comps

    @classmethod
    def scalar(cls, frame: FrameField, f: Expr) -> "TensorField":
        arr = np.empty((), dtype=object)
        arr[()] = f
        return cls(frame, 0, 0, arr)

    @classmethod
    def from_vector(cls, x: VectorField) -> "TensorField":
        arr = np.empty(x.frame.dimension, dtype=object)
        for i, c in enumerate(x.components):
            arr[i] = c
        return cls(x.frame, 1, 0, arr)

    @classmethod
    def covector(cls, frame: FrameField, components) -> "TensorField":
        arr = np.empty(frame.dimension, dtype=object)
        for i, c in enumerate(components):
            arr[i] = c if isinstance(c, Expr) else Const(float(c))
        return cls(frame, 0, 1, arr)

    def to_vector(self) -> VectorField:
        if (self.p, self.q) != (1, 0):
            raise ValueError("only (1,0) tensors convert to vector fields")
        return VectorField(self.frame, list(self.components))

    def evaluate_at(self, point) -> np.ndarray:
        return matops.evaluate_array(self.components, self.frame.chart.assignment(point))


class AnholonomyObject:
    """Structure functions C^i_{jk} of a frame: [E_j, E_k] = C^i_{jk} E_i.

    Antisymmetry in (j,k) is exact by construction: the (k,j) entry is the
    negation of the (j,k) entry node.
    """

    def __init__(self, frame: FrameField, coefficients: np.ndarray):
        self.frame = frame
        self.coefficients = coefficients  # object array, shape (n, n, n)

    def entry(self, i: int, j: int, k: int) -> Expr:
        return self.coefficients[i, j, k]

    def evaluate_at(self, point) -> np.ndarray:
        return matops.evaluate_array(self.coefficients, self.frame.chart.assignment(point))

    @property
    def is_zero(self) -> bool:
        return all(
            self.coefficients[idx] == Const(0.0)
            for idx in np.ndindex(self.coefficients.shape)
        )


def anholonomy_coefficients(frame: FrameField) -> AnholonomyObject:
    """C^i_{jk} = B^i_a (E_j(B^a_k) - E_k(B^a_j)), exact antisymmetry."""
    n = frame.dimension
    C = np.empty((n, n, n), dtype=object)
    zero = Const(0.0)
    if frame.is_coordinate:
        C[...] = zero
        return AnholonomyObject(frame, C)
    inv = frame.inverse_exprs()
    for i in range(n):
        for j in range(n):
            C[i, j, j] = zero
    for j in range(n):
        for k in range(j + 1, n):
            # commutator of E_j and E_k in coordinate components
            for i in range(n):
                acc: Expr = zero
                for a in range(n):
                    diff = frame.frame_derivative(j, frame.matrix[a, k]) - \
                        frame.frame_derivative(k, frame.matrix[a, j])
                    acc = acc + inv[i, a] * diff
                acc = simplify(acc)
                C[i, j, k] = acc
                C[i, k, j] = zero if acc == zero else -acc
    return AnholonomyObject(frame, C)


def commutator(x: VectorField, y: VectorField) -> VectorField:
    """[X,Y]^i = X(Y^i) - Y(X^i) + C^i_{jk} X^j Y^k."""
    _require_same_frame(x, y)
    frame = x.frame
    n = frame.dimension
    C = frame.anholonomy()
    comps = []
    for i in range(n):
        acc: Expr = x.apply_to(y.components[i]) - y.apply_to(x.components[i])
        if not C.is_zero:
            for j in range(n):
                for k in range(n):
                    acc = acc + C.entry(i, j, k) * x.components[j] * y.components[k]
        comps.append(simplify(acc))
    return VectorField(frame, comps)


def compose_frame(frame: FrameField, transform_entries: np.ndarray) -> FrameField:
    """New frame E_i' = A^i_{i'} E_i, i.e. B' = B A as coordinate matrices."""
    return FrameField(frame.chart, matops.matmul(frame.matrix, transform_entries))


def change_vector_frame(x: VectorField, transform) -> VectorField:
    """Push components through a symbolic frame change: X^{i'} = (A^{-1})^{i'}_i X^i."""
    if hasattr(transform, "inverse_entries"):
        entries = transform.entries
        inv = transform.inverse_entries()
        target = transform.composed_frame()
    else:
        entries = transform
        inv = matops.inverse(entries)
        target = compose_frame(x.frame, entries)
    n = x.frame.dimension
    comps = []
    for ip in range(n):
        acc: Expr = Const(0.0)
        for i in range(n):
            acc = acc + inv[ip, i] * x.components[i]
        comps.append(simplify(acc))
    return VectorField(target, comps)
