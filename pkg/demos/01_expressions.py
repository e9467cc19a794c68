"""The expression layer: parse, differentiate, evaluate, substitute.

Every component function in the library (frame matrices, connection
coefficients, W/S templates) is one of these expression trees, so this is
the substrate everything else stands on.
"""

import math

from normframes import Chart, parse_expr, differentiate, evaluate, simplify, substitute
from normframes.derivation import template_symbols
from normframes.expr import component_symbols, to_source

chart = Chart(("r", "theta"), ((0.5, 2.0), (0.0, 1.5)))
r, theta = chart.symbols

# Parsing follows a small fixed grammar; unary minus binds looser than ^.
e = parse_expr("-(r^2)*sin(theta)", chart.symbols)
print("parsed:         ", to_source(e))
print("reparses equal: ", parse_expr(to_source(e), chart.symbols) == e)

# Symbolic differentiation is total on the grammar.
d = simplify(differentiate(e, r))
print("d/dr:           ", to_source(d))
print("value at (2, pi/6):", evaluate(d, {"r": 2.0, "theta": math.pi / 6}))

# Evaluation refuses to hand back silent NaNs: poles raise.
try:
    evaluate(parse_expr("1/r", chart.symbols), {"r": 0.0})
except Exception as err:
    print("pole at r=0:    ", err)

# Simplification folds constants and identity patterns, nothing else
# (verdicts downstream are numeric, so no canonicalization is wanted).
messy = parse_expr("0*sin(theta) + r*1 + (2+3)*0", chart.symbols)
print("simplified:     ", to_source(simplify(messy)))

# Templates mention vector components X1, X2 and frame derivatives dX[i,j];
# substitution instantiates them at a concrete field.
syms = template_symbols(chart, 2)
template = parse_expr("-r*X2 + dX[1,2]", syms)
x1, x2 = component_symbols(2)
from normframes.expr import frame_derivative_symbol, Const, Sym

bound = substitute(
    template,
    {
        x1: Sym(theta),
        x2: Const(1.0),
        frame_derivative_symbol(1, 2): Const(0.0),
    },
)
print("instantiated:   ", to_source(simplify(bound)))
