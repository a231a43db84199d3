"""History-dependent quantum walks and the lattice-gas automata they live in.

The walk models (:mod:`qlgawalk.walks`) evolve sparse first-quantized
states; :mod:`qlgawalk.qlga` evolves finite lattice-gas configurations;
:mod:`qlgawalk.correspondence` maps each walk onto the single-particle
sector of its automaton and checks the two agree. The dense operators in
:mod:`qlgawalk.oracle` are an independent cross-check.
"""

from . import _backend
from .analysis import Distribution, SpreadSeries, emit_csv, position_distribution, spread_series
from .correspondence import (
    Embedding,
    EquivalenceReport,
    check_equivalence,
    embed,
    embedding_for,
    meyer_parameters,
    project,
)
from .errors import (
    LabelCollisionError,
    LabelMismatchError,
    MalformedClassifierError,
    NotUnitaryError,
    RuleError,
    SectorLeakageError,
    TruncationError,
)
from .oracle import DenseOperator, compare_basis_columns, dense_operator, windowed_comparison
from .qlga import CellSpec, Lattice, QlgaRule, configuration, global_step
from .state import LocalUnitary, SparseState, inner_product, max_deviation, norm2, permute, prune, scatter
from .walks import (
    build_2d,
    build_mcgettrick,
    build_particle_history,
    build_site_history,
    build_standard,
    evolve,
    step,
    symmetric_initial,
)

__version__ = "0.1.0"
backend = _backend.name

__all__ = [
    "CellSpec",
    "DenseOperator",
    "Distribution",
    "Embedding",
    "EquivalenceReport",
    "LabelCollisionError",
    "LabelMismatchError",
    "Lattice",
    "LocalUnitary",
    "MalformedClassifierError",
    "NotUnitaryError",
    "QlgaRule",
    "RuleError",
    "SectorLeakageError",
    "SparseState",
    "SpreadSeries",
    "TruncationError",
    "backend",
    "build_2d",
    "build_mcgettrick",
    "build_particle_history",
    "build_site_history",
    "build_standard",
    "check_equivalence",
    "compare_basis_columns",
    "configuration",
    "dense_operator",
    "embed",
    "embedding_for",
    "emit_csv",
    "evolve",
    "global_step",
    "inner_product",
    "max_deviation",
    "meyer_parameters",
    "norm2",
    "permute",
    "position_distribution",
    "project",
    "prune",
    "scatter",
    "spread_series",
    "step",
    "symmetric_initial",
    "windowed_comparison",
]
