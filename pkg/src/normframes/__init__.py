"""Components, curvature and torsion of tensor-algebra derivations, and
construction of frames in which the components vanish at a point, along an
integral curve, or across a neighborhood.

The expression layer (:mod:`normframes.expr`) supplies the symbolic
substrate; :mod:`normframes.geometry` the charts and frames;
:mod:`normframes.derivation` the component calculus and its transformation
law; :mod:`normframes.curvature` the curvature/torsion forms together with
brute-force operator oracles; :mod:`normframes.frames` the constructive
results with their verifiers; :mod:`normframes.cli` a file-driven front
end producing reproducible reports.
"""

__version__ = "0.1.0"

from .expr import (
    COORDINATE,
    VECTOR_COMPONENT,
    FRAME_DERIVATIVE,
    Const,
    DomainError,
    Expr,
    ExprSyntaxError,
    MissingSymbolError,
    Sym,
    Symbol,
    UnknownSymbolError,
    component_symbols,
    coordinate_symbols,
    differentiate,
    evaluate,
    frame_derivative_symbol,
    free_symbols,
    parse_expr,
    simplify,
    substitute,
    to_source,
)
from .geometry import (
    AnholonomyObject,
    Chart,
    DegenerateFrameError,
    FrameField,
    TensorField,
    VectorField,
    anholonomy_coefficients,
    change_vector_frame,
    commutator,
    compose_frame,
    frame_derivative,
    vanishes_on_chart,
)
from .derivation import (
    Connection,
    Derivation,
    FrameMatrix,
    LieType,
    LinearityVerdict,
    STemplate,
    SymbolicTransform,
    WMatrix,
    WTemplate,
    apply_derivation,
    connection_sigma,
    covariant_derivative,
    linearity_probe,
    symmetrize_connection,
    template_symbols,
    transform_connection,
    transform_w,
    w_of,
)
from .curvature import (
    CurvatureMatrixForm,
    CurvatureTensor,
    IntegrabilityReport,
    TorsionTensor,
    Verdict,
    curvature_matrix,
    curvature_operator_oracle,
    curvature_tensor,
    integrability_residual,
    is_flat,
    is_torsion_free,
    torsion_operator_oracle,
    torsion_tensor,
    torsion_vector,
)
from .frames import (
    ConstancyVerdict,
    ConstructionError,
    CurveError,
    CurveFrame,
    CurveSpec,
    GridFrame,
    GridSpec,
    GridTooCoarseError,
    HolonomicityVerdict,
    NoFrameExistsError,
    NotFlatError,
    NotLinearConnectionError,
    PointFrameResult,
    PointFrameSpec,
    VerificationError,
    constancy_check,
    flat_frame_neighborhood,
    frame_at_point_connection,
    frame_at_point_general,
    frame_at_point_holonomic,
    holonomicity_check,
    identity_seed,
    point_frame_certificate,
    shell_component_growth,
    transport_along_curve,
    transformed_components_max,
)
