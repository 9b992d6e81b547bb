"""Measuring how badly linear subspaces approximate integer vectors."""

from .errors import (
    BadApproxError,
    BudgetExceeded,
    ConfigError,
    DegenerateDenominator,
    DimensionError,
    EmptyRange,
    InsufficientData,
    PsiNotValid,
    RankDeficient,
    ShapeError,
    UnsupportedDegree,
    ZeroValueSubject,
)
from .geometry import (
    FormMatrix,
    GraphForm,
    Subspace,
    distance_to_subspace,
    distances_to_subspace,
    graph_subspace,
    orthonormal_subspace,
    principal_angles,
    select_graph_coordinates,
)
from .engine import (
    Best,
    MeasureSweep,
    NormConvention,
    Record,
    RecordTable,
    brute_force_measure,
    count_near_annulus,
    count_near_shell,
    matrix_measure,
    measure,
    measure_sweep,
    neighborhood_lattice_points,
    record_table,
    subspace_measure,
)
from .constructions import (
    BKind,
    ExperimentScenario,
    algebraic_power_line,
    build_scenario,
    golden_line,
    power_root,
    rational_subspace,
    sample_theta,
)
from .exponent import (
    EstimateMethod,
    ExponentEstimate,
    estimate_exponent,
    liminf_profile,
)
from .analytics import (
    AssumptionWarning,
    Classification,
    CoverProfile,
    DecayFunction,
    classify_convergence,
    m_profile,
    mu,
    theorem_bound,
)
from .config import ExperimentConfig, config_from_mapping, load_config, parse_kv_text

__version__ = "0.1.0"
