"""Component matrices, the transformation law, tensor action, linearity."""

import numpy as np
import pytest

from normframes import (
    Const,
    STemplate,
    SymbolicTransform,
    TensorField,
    VectorField,
    WTemplate,
    apply_derivation,
    change_vector_frame,
    commutator,
    connection_sigma,
    covariant_derivative,
    linearity_probe,
    symmetrize_connection,
    template_symbols,
    torsion_tensor,
    transform_w,
    vanishes_on_chart,
    w_of,
)
from normframes.expr import Sym, evaluate, parse_expr, simplify

from conftest import affine_fields, christoffel_from_metric, polar_metric, sphere_metric


# ---------------------------------------------------------------------------
# fixture coefficients against the metric oracle


def test_polar_coefficients_match_levi_civita_oracle(polar, polar_connection):
    oracle = christoffel_from_metric(polar, polar_metric(polar))
    for pt in polar.sample_points(12, 31):
        asg = polar.assignment(pt)
        for idx in np.ndindex(2, 2, 2):
            assert evaluate(polar_connection.gamma[idx], asg) == pytest.approx(
                evaluate(oracle[idx], asg), abs=1e-12
            )


def test_sphere_coefficients_match_levi_civita_oracle(sphere, sphere_connection):
    oracle = christoffel_from_metric(sphere, sphere_metric(sphere))
    for pt in sphere.sample_points(12, 37):
        asg = sphere.assignment(pt)
        for idx in np.ndindex(2, 2, 2):
            assert evaluate(sphere_connection.gamma[idx], asg) == pytest.approx(
                evaluate(oracle[idx], asg), abs=1e-11
            )


# ---------------------------------------------------------------------------
# w_of


def test_zero_connection_components_vanish(zero_connection, plane):
    x1, _ = plane.symbols
    x = VectorField(zero_connection.frame, [Sym(x1), Const(2.0)])
    w = w_of(zero_connection, x)
    assert all(w.entries[i, j] == Const(0.0) for i in range(2) for j in range(2))


def test_lie_components_hand_case(lie_plane, plane):
    x1, _ = plane.symbols
    x = VectorField(lie_plane.frame, [Sym(x1), Const(0.0)])
    w = w_of(lie_plane, x)
    expected = np.array([[-1.0, 0.0], [0.0, 0.0]])
    for pt in plane.sample_points(6, 41):
        assert np.allclose(w.evaluate_at(pt), expected)


def test_polar_component_matrix_for_angular_field(polar, polar_connection):
    x = VectorField(polar_connection.frame, [Const(0.0), Const(1.0)])
    w = w_of(polar_connection, x)
    for pt in polar.sample_points(8, 43):
        r = pt[0]
        expected = np.array([[0.0, -r], [1.0 / r, 0.0]])
        assert np.max(np.abs(w.evaluate_at(pt) - expected)) <= 1e-13


def test_w_template_instantiation(polar, polar_connection):
    syms = template_symbols(polar, 2)
    entries = [
        ["-r*X2", "-r*X1 + dX[1,2]"],
        ["(1/r)*X2 + dX[2,1]", "(1/r)*X1"],
    ]
    deriv = WTemplate(
        polar_connection.frame, [[parse_expr(e, syms) for e in row] for row in entries]
    )
    r, th = polar.symbols
    x = VectorField(deriv.frame, [Sym(th), Sym(r) * Sym(th)])
    w = w_of(deriv, x)
    for pt in polar.sample_points(6, 47):
        r_v, th_v = pt
        x1_v, x2_v = th_v, r_v * th_v
        # dX[1,2] = E_2(X^1) = d(theta)/dtheta = 1; dX[2,1] = E_1(X^2) = theta
        expected = np.array(
            [
                [-r_v * x2_v, -r_v * x1_v + 1.0],
                [x2_v / r_v + th_v, x1_v / r_v],
            ]
        )
        assert np.max(np.abs(w.evaluate_at(pt) - expected)) <= 1e-12


# ---------------------------------------------------------------------------
# transformation law


def test_transform_by_identity_is_noop(polar, polar_connection):
    frame = polar_connection.frame
    r, th = polar.symbols
    x = VectorField(frame, [Sym(th), Const(1.0)])
    w = w_of(polar_connection, x)
    out = transform_w(w, x, SymbolicTransform.identity(frame))
    for pt in polar.sample_points(6, 53):
        assert np.max(np.abs(out.evaluate_at(pt) - w.evaluate_at(pt))) <= 1e-12


def test_transform_by_constant_is_conjugation(polar, polar_connection):
    frame = polar_connection.frame
    c = np.array([[2.0, 1.0], [0.0, 1.0]])
    transform = SymbolicTransform.constant(frame, c)
    x = VectorField(frame, [Const(1.0), Const(1.0)])
    w = w_of(polar_connection, x)
    out = transform_w(w, x, transform)
    c_inv = np.linalg.inv(c)
    for pt in polar.sample_points(6, 59):
        expected = c_inv @ w.evaluate_at(pt) @ c
        assert np.max(np.abs(out.evaluate_at(pt) - expected)) <= 1e-12


def test_transform_round_trip(polar, polar_connection):
    frame = polar_connection.frame
    r, th = polar.symbols
    entries = [[Sym(r), Const(0.0)], [Sym(th), Const(1.0)]]
    transform = SymbolicTransform(frame, entries)
    x = VectorField(frame, [Sym(th) + 1, Sym(r)])
    w = w_of(polar_connection, x)
    forward = transform_w(w, x, transform)
    x_new = change_vector_frame(x, transform)
    back = transform_w(forward, x_new, transform.inverse_transform())
    rng = np.random.default_rng(61)
    for _ in range(10):
        pt = np.array([rng.uniform(1.0, 2.0), rng.uniform(0.05, 1.5)])
        assert np.max(np.abs(back.evaluate_at(pt) - w.evaluate_at(pt))) <= 1e-10


def test_transform_cocycle_composition(polar, polar_connection):
    frame = polar_connection.frame
    r, th = polar.symbols
    a1 = SymbolicTransform(frame, [[Sym(r), Const(0.0)], [Const(0.0), Const(1.0)]])
    composed_frame = a1.composed_frame()
    a2_entries = [[Const(1.0), Sym(th)], [Const(0.0), Const(2.0)]]
    a2 = SymbolicTransform(composed_frame, a2_entries)
    x = VectorField(frame, [Sym(th) + 1, Sym(r)])
    w = w_of(polar_connection, x)

    step1 = transform_w(w, x, a1)
    x1 = change_vector_frame(x, a1)
    step2 = transform_w(step1, x1, a2)

    from normframes import matops

    product = SymbolicTransform(frame, matops.matmul(a1.entries, np.array(a2_entries, dtype=object)))
    direct = transform_w(w, x, product)
    rng = np.random.default_rng(67)
    for _ in range(10):
        pt = np.array([rng.uniform(1.0, 2.0), rng.uniform(0.05, 1.5)])
        assert np.max(np.abs(step2.evaluate_at(pt) - direct.evaluate_at(pt))) <= 1e-9


# ---------------------------------------------------------------------------
# action on tensors


def test_scalar_action_is_directional_derivative(polar, polar_connection):
    frame = polar_connection.frame
    r, th = polar.symbols
    f = Sym(r) * Sym(th)
    x = VectorField(frame, [Sym(th), Const(1.0)])
    out = apply_derivation(polar_connection, x, TensorField.scalar(frame, f))
    expected = x.apply_to(f)
    for pt in polar.sample_points(6, 71):
        asg = polar.assignment(pt)
        assert evaluate(out.components[()], asg) == pytest.approx(
            evaluate(expected, asg), abs=1e-13
        )


def test_lie_action_on_vector_equals_commutator(lie_plane, plane):
    frame = lie_plane.frame
    x1, x2 = plane.symbols
    x = VectorField(frame, [Sym(x1) * Sym(x2), Const(1.0)])
    y = VectorField(frame, [Sym(x2), Sym(x1)])
    out = apply_derivation(lie_plane, x, TensorField.from_vector(y)).to_vector()
    brk = commutator(x, y)
    rng = np.random.default_rng(73)
    for _ in range(10):
        pt = rng.uniform(-0.9, 0.9, 2)
        assert np.max(np.abs(out.at(pt) - brk.at(pt))) <= 1e-10


def test_zero_connection_action_hand_case(zero_connection, plane):
    frame = zero_connection.frame
    x1, x2 = plane.symbols
    t = VectorField(frame, [Sym(x2), Const(0.0)])
    x = VectorField(frame, [Const(1.0), Const(0.0)])
    out = apply_derivation(zero_connection, x, TensorField.from_vector(t)).to_vector()
    assert [simplify(c) for c in out.components] == [Const(0.0), Const(0.0)]


def test_frame_vector_action_reproduces_w_column(polar, polar_connection):
    # the derivation applied to the j-th frame vector gives column j of W
    frame = polar_connection.frame
    r, th = polar.symbols
    x = VectorField(frame, [Sym(th) + 1, Sym(r)])
    w = w_of(polar_connection, x)
    for j in range(2):
        ej = frame.coordinate_vector(j)
        out = apply_derivation(polar_connection, x, TensorField.from_vector(ej)).to_vector()
        for pt in polar.sample_points(6, 79):
            got = out.at(pt)
            expected = w.evaluate_at(pt)[:, j]
            assert np.max(np.abs(got - expected)) <= 1e-10


def test_leibniz_rule_on_scaled_tensor(polar, polar_connection):
    frame = polar_connection.frame
    r, th = polar.symbols
    f = Sym(th) * Sym(th) + Sym(r)
    x = VectorField(frame, [Sym(th), Const(1.0)])
    y = VectorField(frame, [Const(1.0), Sym(r)])
    t = TensorField.from_vector(y)
    scaled = TensorField.from_vector(y.scaled(f))
    lhs = apply_derivation(polar_connection, x, scaled).to_vector()
    d_t = apply_derivation(polar_connection, x, t).to_vector()
    xf = x.apply_to(f)
    rng = np.random.default_rng(83)
    for _ in range(10):
        pt = np.array([rng.uniform(1.0, 2.0), rng.uniform(0.05, 1.5)])
        asg = polar.assignment(pt)
        rhs = evaluate(xf, asg) * y.at(pt) + evaluate(f, asg) * d_t.at(pt)
        assert np.max(np.abs(lhs.at(pt) - rhs)) <= 1e-9


def test_covector_action_matches_lie_oracle(lie_plane, plane):
    # (L_X w)(Y) = X(w(Y)) - w([X,Y]): fixes the sign of the lower-index sum
    frame = lie_plane.frame
    x1, x2 = plane.symbols
    x = VectorField(frame, [Sym(x1) * Sym(x2), Const(1.0)])
    w_comps = [Sym(x2), Sym(x1) * Sym(x1)]
    omega = TensorField.covector(frame, w_comps)
    out = apply_derivation(lie_plane, x, omega)
    ys = [frame.coordinate_vector(0), frame.coordinate_vector(1)]
    ys += affine_fields(frame, 89, 1)
    rng = np.random.default_rng(97)
    for y in ys:
        pairing = simplify(w_comps[0] * y.components[0] + w_comps[1] * y.components[1])
        x_pairing = x.apply_to(pairing)
        brk = commutator(x, y)
        w_brk = simplify(w_comps[0] * brk.components[0] + w_comps[1] * brk.components[1])
        for _ in range(5):
            pt = rng.uniform(-0.9, 0.9, 2)
            asg = plane.assignment(pt)
            oracle = evaluate(x_pairing, asg) - evaluate(w_brk, asg)
            got = float(out.evaluate_at(pt) @ y.at(pt))
            assert got == pytest.approx(oracle, abs=1e-12)


def test_derivation_commutes_with_contraction(polar, polar_connection):
    frame = polar_connection.frame
    r, th = polar.symbols
    x = VectorField(frame, [Sym(th), Sym(r)])
    y = VectorField(frame, [Const(1.0), Sym(r) * Sym(th)])
    w_comps = [parse_expr("sin(theta)", polar.symbols), Sym(r)]
    omega = TensorField.covector(frame, w_comps)
    d_omega = apply_derivation(polar_connection, x, omega)
    d_y = apply_derivation(polar_connection, x, TensorField.from_vector(y)).to_vector()
    pairing = simplify(w_comps[0] * y.components[0] + w_comps[1] * y.components[1])
    lhs = x.apply_to(pairing)
    for pt in polar.sample_points(10, 101):
        asg = polar.assignment(pt)
        rhs = float(d_omega.evaluate_at(pt) @ y.at(pt)) + float(
            np.array([evaluate(c, asg) for c in w_comps]) @ d_y.at(pt)
        )
        assert evaluate(lhs, asg) == pytest.approx(rhs, abs=1e-12)


# ---------------------------------------------------------------------------
# the sigma map


def test_sigma_of_constant_fields_vanishes_for_zero_connection(zero_connection):
    frame = zero_connection.frame
    x = VectorField(frame, [Const(1.0), Const(2.0)])
    y = VectorField(frame, [Const(3.0), Const(-1.0)])
    sigma = connection_sigma(zero_connection, x, y)
    assert [simplify(c) for c in sigma.components] == [Const(0.0), Const(0.0)]


def test_sigma_with_zero_field_vanishes(polar_connection):
    frame = polar_connection.frame
    zero = VectorField(frame, [Const(0.0), Const(0.0)])
    y = VectorField(frame, [Const(1.0), Const(1.0)])
    sigma = connection_sigma(polar_connection, zero, y)
    assert [simplify(c) for c in sigma.components] == [Const(0.0), Const(0.0)]


def test_sigma_template_reproduces_connection_components(polar, polar_connection):
    # build S_X as a template from the sigma map and compare W matrices
    n = 2
    syms = template_symbols(polar, n)
    gamma = polar_connection.gamma

    def s_entry(i, j):
        e = parse_expr(f"dX[{i + 1},{j + 1}]", syms)
        for k in range(n):
            e = e + gamma[i, j, k] * parse_expr(f"X{k + 1}", syms)
        return simplify(e)

    s_deriv = STemplate(
        polar_connection.frame, [[s_entry(i, j) for j in range(n)] for i in range(n)]
    )
    r, th = polar.symbols
    x = VectorField(polar_connection.frame, [Sym(th) + 1, Sym(r) * Sym(th)])
    w_conn = w_of(polar_connection, x)
    w_sig = w_of(s_deriv, x)
    rng = np.random.default_rng(103)
    for _ in range(10):
        pt = np.array([rng.uniform(1.0, 2.0), rng.uniform(0.05, 1.5)])
        assert np.max(np.abs(w_conn.evaluate_at(pt) - w_sig.evaluate_at(pt))) <= 1e-10


def test_sigma_is_nabla_minus_bracket(polar, polar_connection):
    frame = polar_connection.frame
    r, th = polar.symbols
    x = VectorField(frame, [Sym(th), Const(1.0)])
    y = VectorField(frame, [Sym(r), Sym(th)])
    sigma = connection_sigma(polar_connection, x, y)
    nabla = covariant_derivative(polar_connection, x, y)
    brk = commutator(x, y)
    for pt in polar.sample_points(8, 107):
        assert np.max(np.abs(sigma.at(pt) - (nabla.at(pt) - brk.at(pt)))) <= 1e-12


# ---------------------------------------------------------------------------
# linearity in X


def test_connection_components_linear_in_field(polar, polar_connection):
    frame = polar_connection.frame
    fields = affine_fields(frame, 109, 4)
    rng = np.random.default_rng(113)
    for i in range(0, 4, 2):
        x, y = fields[i], fields[i + 1]
        a, b = rng.uniform(-2, 2, 2)
        combined = x.scaled(a) + y.scaled(b)
        w_c = w_of(polar_connection, combined)
        w_x = w_of(polar_connection, x)
        w_y = w_of(polar_connection, y)
        for pt in polar.sample_points(6, 127):
            got = w_c.evaluate_at(pt)
            expected = a * w_x.evaluate_at(pt) + b * w_y.evaluate_at(pt)
            assert np.max(np.abs(got - expected)) <= 1e-10


def test_linearity_probe_connection_yes(polar, polar_connection):
    verdict = linearity_probe(polar_connection, [1.3, 0.7])
    assert verdict.is_linear
    assert verdict.max_residual <= 1e-9
    expected = polar_connection.gamma_at([1.3, 0.7])
    assert np.max(np.abs(verdict.gammas - expected)) <= 1e-12


def test_linearity_probe_lie_no_with_witness(lie_plane):
    verdict = linearity_probe(lie_plane, [1.0, 0.0])
    assert not verdict.is_linear
    assert verdict.max_residual > 1e-9
    assert verdict.witness is not None
    assert verdict.witness["kind"] == "vanishing-field"


def test_linearity_probe_template_depends_on_point(polar, polar_connection):
    # linear exactly at r=1: the frame-derivative term carries weight (r-1)
    syms = template_symbols(polar, 2)
    entries = [
        ["0", "-r*X2 + (r-1)*dX[1,1]"],
        ["(1/r)*X2", "(1/r)*X1"],
    ]
    deriv = WTemplate(
        polar_connection.frame, [[parse_expr(e, syms) for e in row] for row in entries]
    )
    assert linearity_probe(deriv, [1.0, 0.5]).is_linear
    assert not linearity_probe(deriv, [1.4, 0.5]).is_linear


# ---------------------------------------------------------------------------
# symmetrization


def test_symmetrize_fixed_point(polar, polar_connection):
    out = symmetrize_connection(polar_connection)
    for pt in polar.sample_points(6, 131):
        assert np.max(np.abs(out.gamma_at(pt) - polar_connection.gamma_at(pt))) <= 1e-13


def test_symmetrize_torsion_fixture(torsion_plane):
    out = symmetrize_connection(torsion_plane)
    assert evaluate(out.gamma[0, 0, 1], {"x1": 0.1, "x2": 0.2}) == 0.5
    assert evaluate(out.gamma[0, 1, 0], {"x1": 0.1, "x2": 0.2}) == 0.5


def test_symmetrized_connection_is_torsion_free(torsion_plane):
    out = symmetrize_connection(torsion_plane)
    tensor = torsion_tensor(out)
    ok, worst = vanishes_on_chart(tensor.components.flat, torsion_plane.chart)
    assert ok, worst


def test_symmetrization_preserves_nothing_spurious(torsion_plane):
    # the unsymmetrized fixture does carry torsion
    tensor = torsion_tensor(torsion_plane)
    ok, _ = vanishes_on_chart(tensor.components.flat, torsion_plane.chart)
    assert not ok
