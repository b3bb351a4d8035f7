"""Symmetric Weierstrass elliptic functions and a doubly periodic
minimal-surface construction kit: normalized evaluators, certified torus
involutions, path/period integration, and the field-of-catenoids builder
with mesh export and embedding diagnostics."""

from .lattice import Lattice, TorusPoint, TorusShape, classify, equivalent, reduce, reduce_point
from .elliptic import (
    LatticeSumPolicy,
    SymmetricWp,
    build_symmetric_wp,
    compute_c,
    count_degree,
    eval_P,
    eval_P_prime,
    eval_wp,
    eval_wp_prime,
    half_period_values,
    is_pole,
)
from .mobius import (
    MobiusMap,
    TorusInvolution,
    apply,
    compose,
    fixed_points,
    from_three_points,
    induced_involution,
    inverse,
    standard_involution,
)
from .gammafn import (
    GammaFn,
    build_gamma,
    eval_gamma,
    eval_gamma_prime,
    gamma_sq_identity_residual,
    measure_c0,
    q_map,
    rescale_lattice_for_unit_c0,
)
from .minrep import (
    PathSpec,
    PeriodVector,
    WeierstrassData,
    conformality_residual,
    curvature_K,
    forms,
    gauss_map,
    integrate,
    jorge_meeks_degree,
    line_type,
    metric_ds,
    period_vector,
    surface_map,
    symmetry_line_check,
    total_curvature,
)
from .catenoid_field import (
    FieldConfig,
    FieldData,
    build_field_data,
    catenoid_closed_form,
    catenoid_reference,
    embedding_probe,
    end_period_closure,
    lambda_reference_integral,
    mesh_fundamental_domain,
    replicate,
    translation_periods,
    verify_square_torus,
)
from .mesh import SurfaceMesh, write_obj, write_ply

__all__ = [
    "Lattice", "TorusPoint", "TorusShape", "classify", "equivalent", "reduce",
    "reduce_point",
    "LatticeSumPolicy", "SymmetricWp", "build_symmetric_wp", "compute_c",
    "count_degree", "eval_P", "eval_P_prime", "eval_wp", "eval_wp_prime",
    "half_period_values", "is_pole",
    "MobiusMap", "TorusInvolution", "apply", "compose", "fixed_points",
    "from_three_points", "induced_involution", "inverse", "standard_involution",
    "GammaFn", "build_gamma", "eval_gamma", "eval_gamma_prime",
    "gamma_sq_identity_residual", "measure_c0", "q_map",
    "rescale_lattice_for_unit_c0",
    "PathSpec", "PeriodVector", "WeierstrassData", "conformality_residual",
    "curvature_K", "forms", "gauss_map", "integrate", "jorge_meeks_degree",
    "line_type", "metric_ds", "period_vector", "surface_map",
    "symmetry_line_check", "total_curvature",
    "FieldConfig", "FieldData", "build_field_data", "catenoid_closed_form",
    "catenoid_reference", "embedding_probe", "end_period_closure",
    "lambda_reference_integral", "mesh_fundamental_domain", "replicate",
    "translation_periods", "verify_square_torus",
    "SurfaceMesh", "write_obj", "write_ply",
]

__version__ = "0.1.0"
