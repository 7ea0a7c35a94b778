"""Exact chain-recurrence and shadowing analysis for finite metric systems.

The package decides, at chosen resolutions, which points of a finite
dynamical system are chain recurrent, how they split into components, and
whether coarse pseudo-orbits can be tracked by true orbits (shadowing) or
tracked with eventually vanishing error (slimit shadowing), extracting
concrete counterexample pseudo-orbits when they cannot.
"""

from .chain import (
    ChainDecomposition,
    DeltaGraph,
    DeltaLadder,
    build_delta_graph,
    chain_recurrent_set,
    class_order,
    decompose,
    decomposition_dot,
    decomposition_report,
    hausdorff_distance,
    invariant_core,
    isolated_classes,
    maximal_classes,
    neighborhood,
    omega_cycle,
    reaches,
    refine_ladder,
)
from .errors import (
    BadParams,
    ChainShadowError,
    DomainNotInvariant,
    EmptyDomain,
    EmptySet,
    Inconclusive,
    InvalidSystem,
    KindMismatch,
    NotDecreasing,
    NotFailing,
    NotInvertible,
    TooLarge,
    UnknownGenerator,
    Violation,
)
from .rational import format_rational, parse_rational
from .shadow import (
    MergeSet,
    OracleVerdict,
    OrbitViolation,
    PseudoOrbit,
    ShadowState,
    ShadowVerdict,
    brute_force_oracle,
    check_shadowing_property,
    check_slimit_property,
    extract_witness,
    first_violation,
    is_limit_shadowed,
    is_shadowed,
    merge_sets,
    reachable_shadow_states,
    shadow_sets,
    validate_pseudo_orbit,
)
from .system import (
    FiniteMetricSystem,
    GridSystem1D,
    build_corpus_system,
    cantor_identity,
    discretize,
    doubling,
    far_two_cycles,
    generator_names,
    load_system,
    make_system,
    metric_violations,
    north_south,
    parallel_cycles,
    parse_generator_string,
    rotation,
    shortest_path_metric,
    standard_corpus,
    system_from_json,
    tent,
    validate_system,
)
from .verify import (
    FAILS,
    HOLDS,
    VACUOUS,
    GridEntry,
    HarnessReport,
    SlimitViolation,
    TheoremResult,
    default_grid,
    find_slimit_violation,
    run_harness,
    verify_initial_classes_shadow,
    verify_isolated_implies_shadowing,
    verify_shadowing_class_denseness,
    verify_slimit_implies_shadowing,
)

__version__ = "0.1.0"
