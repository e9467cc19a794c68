"""Derivations of the tensor algebra and their component matrices.

A derivation D assigns to each vector field X an operator D_X acting on
tensor fields.  Its components in a frame are the matrix W_X defined by
D_X E_j = (W_X)^i_j E_i; for a linear connection W_X = Gamma_k X^k.  Four
variants are supported:

* :class:`Connection` -- coefficients Gamma^i_{jk} (k is the direction leg),
* :class:`LieType`    -- D_X is the Lie derivative along X,
* :class:`WTemplate`  -- W given directly as expressions in the coordinates,
  the component symbols X1..Xn and the frame derivatives dX[i,j],
* :class:`STemplate`  -- the (1,1)-tensor part S_X given as a template, with
  W_X assembled as (S_X)^i_j - E_j(X^i) + C^i_{kj} X^k.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matops
from .expr import (
    COORDINATE,
    Const,
    Expr,
    Sym,
    Symbol,
    component_symbols,
    frame_derivative_symbol,
    free_symbols,
    simplify,
    substitute,
)
from .geometry import (
    Chart,
    DEGENERACY_TOL,
    DegenerateFrameError,
    FrameField,
    TensorField,
    VectorField,
    commutator,
    compose_frame,
)

PROBE_SEED = 42
PROBE_TOL = 1e-9
PROBE_PAIRS = 8


class DerivationError(Exception):
    pass


class VariantError(DerivationError):
    """Operation applied to the wrong derivation variant."""


class FrameMatrix:
    """An n x n matrix of coordinate-only Exprs attached to a frame."""

    def __init__(self, frame: FrameField, entries):
        self.frame = frame
        self.entries = (
            entries if isinstance(entries, np.ndarray) else matops.expr_matrix(entries)
        )
        n = frame.dimension
        if self.entries.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix")

    def evaluate_at(self, point) -> np.ndarray:
        return matops.evaluate_array(self.entries, self.frame.chart.assignment(point))

    def simplified(self) -> "FrameMatrix":
        return FrameMatrix(self.frame, matops.simplify_all(self.entries))


# The W matrix of a derivation for a fixed field is just a FrameMatrix;
# the alias keeps call sites readable.
WMatrix = FrameMatrix


class SymbolicTransform:
    """Invertible matrix A^i_{i'} of Exprs over a chart; a frame change.

    ``frame`` is the source frame; the transformed frame is E_{i'} =
    A^i_{i'} E_i.  Invertibility is checked on the chart's sample cloud.
    """

    def __init__(self, frame: FrameField, entries, _validate: bool = True):
        self.frame = frame
        self.entries = (
            entries if isinstance(entries, np.ndarray) else matops.expr_matrix(entries)
        )
        n = frame.dimension
        if self.entries.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix")
        self._inverse = None
        self._composed = None
        if _validate:
            for pt in frame.chart.sample_points():
                det = np.linalg.det(self.evaluate_at(pt))
                if abs(det) <= DEGENERACY_TOL:
                    raise DegenerateFrameError(
                        f"transform is singular at {pt.tolist()} (det={det!r})"
                    )

    @classmethod
    def identity(cls, frame: FrameField) -> "SymbolicTransform":
        return cls(frame, matops.identity_exprs(frame.dimension), _validate=False)

    @classmethod
    def constant(cls, frame: FrameField, values) -> "SymbolicTransform":
        return cls(frame, matops.constant_exprs(values), _validate=False)

    def evaluate_at(self, point) -> np.ndarray:
        return matops.evaluate_array(self.entries, self.frame.chart.assignment(point))

    def inverse_entries(self) -> np.ndarray:
        if self._inverse is None:
            self._inverse = matops.inverse(self.entries)
        return self._inverse

    def composed_frame(self) -> FrameField:
        if self._composed is None:
            self._composed = compose_frame(self.frame, self.entries)
        return self._composed

    def inverse_transform(self) -> "SymbolicTransform":
        """The inverse change, expressed on the composed frame."""
        return SymbolicTransform(self.composed_frame(), self.inverse_entries(), _validate=False)


class Derivation:
    def __init__(self, frame: FrameField):
        self.frame = frame

    @property
    def chart(self) -> Chart:
        return self.frame.chart


class Connection(Derivation):
    """Linear connection with coefficients Gamma^i_{jk} (object array (n,n,n)).

    Index order: i output, j differentiated leg, k direction, so that
    nabla_X E_j = (Gamma^i_{jk} X^k) E_i.
    """

    def __init__(self, frame: FrameField, gamma):
        super().__init__(frame)
        n = frame.dimension
        arr = np.asarray(gamma, dtype=object).reshape((n, n, n))
        out = np.empty((n, n, n), dtype=object)
        for idx in np.ndindex(arr.shape):
            e = arr[idx]
            e = e if isinstance(e, Expr) else Const(float(e))
            bad = [s for s in free_symbols(e) if s.kind != COORDINATE]
            if bad:
                raise ValueError(f"connection coefficients must be coordinate-only: {bad}")
            out[idx] = e
        self.gamma = out

    @classmethod
    def zero(cls, frame: FrameField) -> "Connection":
        n = frame.dimension
        gamma = np.empty((n, n, n), dtype=object)
        gamma[...] = Const(0.0)
        return cls(frame, gamma)

    def gamma_matrix(self, k: int) -> np.ndarray:
        """Gamma_k as an (i, j) matrix of Exprs."""
        return self.gamma[:, :, k].copy()

    def gamma_at(self, point) -> np.ndarray:
        return matops.evaluate_array(self.gamma, self.chart.assignment(point))


class LieType(Derivation):
    """S = 0: D_X is the Lie derivative along X."""


class WTemplate(Derivation):
    """Component matrix given directly as a template over X-symbols."""

    def __init__(self, frame: FrameField, entries):
        super().__init__(frame)
        self.entries = (
            entries if isinstance(entries, np.ndarray) else matops.expr_matrix(entries)
        )
        _check_template_symbols(self.entries, frame)


class STemplate(Derivation):
    """S_X as a template; W_X is assembled through the component formula."""

    def __init__(self, frame: FrameField, entries):
        super().__init__(frame)
        self.entries = (
            entries if isinstance(entries, np.ndarray) else matops.expr_matrix(entries)
        )
        _check_template_symbols(self.entries, frame)


def _check_template_symbols(entries: np.ndarray, frame: FrameField):
    n = frame.dimension
    allowed = set(frame.chart.symbols)
    allowed.update(component_symbols(n))
    allowed.update(frame_derivative_symbol(i, j) for i in range(1, n + 1) for j in range(1, n + 1))
    for idx in np.ndindex(entries.shape):
        for s in free_symbols(entries[idx]):
            if s not in allowed:
                raise ValueError(f"template references undeclared symbol {s.name!r}")


def template_symbols(chart: Chart, n: int) -> dict[str, Symbol]:
    """Symbol table for parsing template entries: coords + X-i + dX[i,j]."""
    table = chart.symbol_table()
    for s in component_symbols(n):
        table[s.name] = s
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            s = frame_derivative_symbol(i, j)
            table[s.name] = s
    return table


def _template_bindings(frame: FrameField, x: VectorField) -> dict[Symbol, Expr]:
    n = frame.dimension
    bindings: dict[Symbol, Expr] = {}
    for i, s in enumerate(component_symbols(n)):
        bindings[s] = x.components[i]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            bindings[frame_derivative_symbol(i, j)] = frame.frame_derivative(
                j - 1, x.components[i - 1]
            )
    return bindings


def _lie_w(frame: FrameField, x: VectorField) -> np.ndarray:
    """-E_j(X^i) + C^i_{kj} X^k, the S = 0 case of the component formula."""
    n = frame.dimension
    C = frame.anholonomy()
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            acc: Expr = -frame.frame_derivative(j, x.components[i])
            if not C.is_zero:
                for k in range(n):
                    acc = acc + C.entry(i, k, j) * x.components[k]
            out[i, j] = simplify(acc)
    return out


def w_of(deriv: Derivation, x: VectorField) -> WMatrix:
    """Component matrix W_X of the derivation for the field X, in D's frame."""
    if x.frame is not deriv.frame:
        raise ValueError("vector field must be given in the derivation's frame")
    frame = deriv.frame
    n = frame.dimension
    if isinstance(deriv, Connection):
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                acc: Expr = Const(0.0)
                for k in range(n):
                    acc = acc + deriv.gamma[i, j, k] * x.components[k]
                out[i, j] = simplify(acc)
        return WMatrix(frame, out)
    if isinstance(deriv, LieType):
        return WMatrix(frame, _lie_w(frame, x))
    if isinstance(deriv, WTemplate):
        bindings = _template_bindings(frame, x)
        out = matops.map_exprs(lambda e: simplify(substitute(e, bindings)), deriv.entries)
        return WMatrix(frame, out)
    if isinstance(deriv, STemplate):
        bindings = _template_bindings(frame, x)
        s_x = matops.map_exprs(lambda e: simplify(substitute(e, bindings)), deriv.entries)
        lie = _lie_w(frame, x)
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = simplify(s_x[i, j] + lie[i, j])
        return WMatrix(frame, out)
    raise VariantError(f"unknown derivation variant {type(deriv).__name__}")


def transform_w(w: WMatrix, x: VectorField, transform: SymbolicTransform) -> WMatrix:
    """Push W through a frame change: W' = A^{-1}(W A + X(A)).

    ``x`` and ``w`` are given in the source frame of ``transform``; the
    result lives in the composed frame.
    """
    if w.frame is not transform.frame:
        raise ValueError("W matrix and transform must share a frame")
    if x.frame is not transform.frame:
        raise ValueError("vector field and transform must share a frame")
    a = transform.entries
    wa = matops.matmul(w.entries, a)
    xa = x.apply_to_matrix(a)
    out = matops.matmul(transform.inverse_entries(), matops.matadd(wa, xa))
    return WMatrix(transform.composed_frame(), out)


def apply_derivation(deriv: Derivation, x: VectorField, t: TensorField) -> TensorField:
    """Componentwise action of D_X on a (p,q) tensor field.

    Each upper index contracts against W_X with a plus sign, each lower
    index with a minus sign; that is the unique choice under which D_X
    commutes with contractions, consistently with the Lie-derivative case.
    """
    if t.frame is not deriv.frame:
        raise ValueError("tensor must be given in the derivation's frame")
    frame = deriv.frame
    n = frame.dimension
    w = w_of(deriv, x).entries
    p, q = t.p, t.q
    out = np.empty(t.components.shape, dtype=object)
    for idx in np.ndindex(t.components.shape):
        acc: Expr = x.apply_to(t.components[idx])
        for a in range(p):
            for k in range(n):
                swapped = list(idx)
                swapped[a], orig = k, idx[a]
                acc = acc + w[orig, k] * t.components[tuple(swapped)]
        for b in range(q):
            for k in range(n):
                swapped = list(idx)
                swapped[p + b], orig = k, idx[p + b]
                acc = acc - w[k, orig] * t.components[tuple(swapped)]
        out[idx] = simplify(acc)
    return TensorField(frame, p, q, out)


def covariant_derivative(deriv: Connection, x: VectorField, y: VectorField) -> VectorField:
    """(nabla_X Y)^i = X(Y^i) + Gamma^i_{jk} Y^j X^k."""
    if not isinstance(deriv, Connection):
        raise VariantError("covariant derivative requires the connection variant")
    frame = deriv.frame
    n = frame.dimension
    comps = []
    for i in range(n):
        acc: Expr = x.apply_to(y.components[i])
        for j in range(n):
            for k in range(n):
                acc = acc + deriv.gamma[i, j, k] * y.components[j] * x.components[k]
        comps.append(simplify(acc))
    return VectorField(frame, comps)


def connection_sigma(deriv: Connection, x: VectorField, y: VectorField) -> VectorField:
    """Sigma_X(Y) = nabla_X(Y) - [X,Y]; the S-map that characterizes nabla."""
    nab = covariant_derivative(deriv, x, y)
    brk = commutator(x, y)
    return VectorField(
        deriv.frame,
        [simplify(a - b) for a, b in zip(nab.components, brk.components)],
    )


def symmetrize_connection(deriv: Connection) -> Connection:
    """Connection built from the symmetric part of the coefficients."""
    if not isinstance(deriv, Connection):
        raise VariantError("symmetrization requires the connection variant")
    n = deriv.frame.dimension
    gamma = np.empty((n, n, n), dtype=object)
    half = Const(0.5)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                gamma[i, j, k] = simplify(half * (deriv.gamma[i, j, k] + deriv.gamma[i, k, j]))
    return Connection(deriv.frame, gamma)


def transform_connection(deriv: Connection, transform: SymbolicTransform) -> Connection:
    """Connection coefficients in the composed frame.

    Gamma'^{i'}_{j'k'} = A^{i'}_i A^j_{j'} A^k_{k'} Gamma^i_{jk}
                       + A^{i'}_i A^k_{k'} E_k(A^i_{j'}).
    """
    if not isinstance(deriv, Connection):
        raise VariantError("connection transform requires the connection variant")
    if transform.frame is not deriv.frame:
        raise ValueError("transform must start from the derivation's frame")
    frame = deriv.frame
    n = frame.dimension
    a = transform.entries
    ainv = transform.inverse_entries()
    # E_k(A^i_{j'}) precomputed
    ek_a = np.empty((n, n, n), dtype=object)  # [k][i][j']
    for k in range(n):
        for i in range(n):
            for jp in range(n):
                ek_a[k, i, jp] = frame.frame_derivative(k, a[i, jp])
    gamma = np.empty((n, n, n), dtype=object)
    for ip in range(n):
        for jp in range(n):
            for kp in range(n):
                acc: Expr = Const(0.0)
                for i in range(n):
                    for j in range(n):
                        for k in range(n):
                            acc = acc + ainv[ip, i] * a[j, jp] * a[k, kp] * deriv.gamma[i, j, k]
                for i in range(n):
                    for k in range(n):
                        acc = acc + ainv[ip, i] * a[k, kp] * ek_a[k, i, jp]
                gamma[ip, jp, kp] = simplify(acc)
    return Connection(transform.composed_frame(), gamma)


# ---------------------------------------------------------------------------
# linearity probe


@dataclass
class LinearityVerdict:
    """Outcome of probing whether W_X(x0) has the form Gamma_k X^k(x0)."""

    is_linear: bool
    max_residual: float
    point: np.ndarray
    gammas: Optional[np.ndarray] = None  # (n, n, n) values, [i, j, k]
    witness: Optional[dict] = field(default=None, repr=False)


def _seeded_affine_fields(frame: FrameField, rng, count: int) -> list[VectorField]:
    n = frame.dimension
    syms = frame.chart.symbols
    fields = []
    for _ in range(count):
        comps = []
        for _i in range(n):
            coeffs = rng.uniform(-1.0, 1.0, size=n + 1)
            e: Expr = Const(round(coeffs[0], 6))
            for a in range(n):
                e = e + Const(round(coeffs[a + 1], 6)) * Sym(syms[a])
            comps.append(simplify(e))
        fields.append(VectorField(frame, comps))
    return fields


def _vanishing_fields(frame: FrameField, x0: np.ndarray, rng, extra: int = 2) -> list[VectorField]:
    """Fields guaranteed to vanish at x0: (x^a - x0^a) E_l plus seeded mixes."""
    n = frame.dimension
    syms = frame.chart.symbols
    offsets = [Sym(syms[a]) - Const(float(x0[a])) for a in range(n)]
    fields = []
    for a in range(n):
        for l in range(n):
            comps = [offsets[a] if i == l else Const(0.0) for i in range(n)]
            fields.append(VectorField(frame, comps))
    for _ in range(extra):
        comps = []
        for _i in range(n):
            e: Expr = Const(0.0)
            for a in range(n):
                e = e + Const(round(rng.uniform(-1.0, 1.0), 6)) * offsets[a]
            comps.append(simplify(e))
        fields.append(VectorField(frame, comps))
    return fields


def linearity_probe(
    deriv: Derivation,
    x0,
    seed: int = PROBE_SEED,
    tol: float = PROBE_TOL,
) -> LinearityVerdict:
    """Decide whether the derivation acts as a linear connection at x0.

    Two sampled conditions: (i) W_X(x0) = 0 for probe fields vanishing at
    x0, and (ii) W is additive and homogeneous in X at x0.  On success the
    matrices Gamma_k := W_{E_k}(x0) are extracted.
    """
    frame = deriv.frame
    chart = frame.chart
    x0 = chart.point(x0)
    rng = np.random.default_rng(seed)
    max_residual = 0.0
    witness = None

    for probe in _vanishing_fields(frame, x0, rng):
        w0 = w_of(deriv, probe).evaluate_at(x0)
        residual = float(np.max(np.abs(w0)))
        if residual > max_residual:
            max_residual = residual
            if residual > tol and witness is None:
                witness = {
                    "kind": "vanishing-field",
                    "components": [str(c) for c in probe.components],
                    "residual": residual,
                }

    pairs = _seeded_affine_fields(frame, rng, 2 * PROBE_PAIRS)
    for idx in range(PROBE_PAIRS):
        xf, yf = pairs[2 * idx], pairs[2 * idx + 1]
        a_val = round(rng.uniform(-2.0, 2.0), 6)
        b_val = round(rng.uniform(-2.0, 2.0), 6)
        combined = xf.scaled(a_val) + yf.scaled(b_val)
        w_comb = w_of(deriv, combined).evaluate_at(x0)
        w_x = w_of(deriv, xf).evaluate_at(x0)
        w_y = w_of(deriv, yf).evaluate_at(x0)
        residual = float(np.max(np.abs(w_comb - a_val * w_x - b_val * w_y)))
        if residual > max_residual:
            max_residual = residual
            if residual > tol and witness is None:
                witness = {
                    "kind": "superposition",
                    "components": [str(c) for c in xf.components],
                    "residual": residual,
                }

    if max_residual > tol:
        return LinearityVerdict(False, max_residual, x0, witness=witness)

    n = frame.dimension
    gammas = np.empty((n, n, n), dtype=float)
    for k in range(n):
        w_k = w_of(deriv, frame.coordinate_vector(k)).evaluate_at(x0)
        gammas[:, :, k] = w_k
    return LinearityVerdict(True, max_residual, x0, gammas=gammas)
