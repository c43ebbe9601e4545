"""rydmis: transferable annealing protocols for maximum independent set on
unit-disk graphs, emulated on driven Rydberg-atom arrays.

The package covers the full workflow: sampling graph families from regular
lattices, embedding them into atomic registers, exact emulation of the
driven dynamics, Bayesian optimization of annealing schedules, transfer of
trained protocols to unseen instances, detection-error modelling and
correction, classical post-processing of sampled solutions, and scaling
analysis of solution quality with graph size.
"""

from .bayesopt import (
    Budget,
    GpConfig,
    GpSurrogate,
    OptimizerState,
    SearchSpace,
    acquisition,
    expected_improvement,
    gp_fit,
    latin_hypercube,
    optimize_loop,
    suggest_next,
)
from .costs import CostSpec, bitstring_cost, cost_pmis, cost_ratio
from .detection import (
    DetectionModel,
    apply_detection_errors,
    correct_distribution,
    detection_matrix,
    truncated_ratio_curve,
)
from .distributions import Distribution, load_distribution_csv, save_distribution_csv
from .embedding import (
    EmbeddingReport,
    Register,
    blockade_radius,
    embed_force_directed,
    embed_on_lattice,
    validate_embedding,
)
from .emulator import (
    GroundState,
    QuantumState,
    adiabatic_time_bound,
    blockade_energy_scale,
    build_hamiltonian,
    evolve,
    evolve_noisy,
    evolve_with_history,
    gap_map,
    ground_state,
    interaction_strength,
    pmis_map,
    sample,
    spectrum_along_schedule,
)
from .gisp import (
    GispInstance,
    Task,
    gisp_to_graph,
    parse_gisp_dataset,
    synthesize_gisp,
)
from .graphs import (
    ConflictGraph,
    LatticeLayout,
    MisLabel,
    UdGraph,
    bitstring_to_index,
    build_unit_disk_graph,
    classify_bitstring,
    generate_lattice,
    index_to_bitstring,
    is_independent_set,
    mis_exact,
    mis_greedy,
    sample_family,
)
from .params import NoiseParams, RydbergParams, mhz, rad_per_us
from .pipeline import (
    FamilyObjective,
    QaoaSpec,
    TailDetuningSpec,
    TrainedProtocol,
    VqaaSpec,
    duration_stretch_curve,
    evaluate_transfer,
    family_cost,
    landscape_scan,
    load_protocol,
    robustness_map,
    save_protocol,
    train_transferable,
)
from .postprocess import (
    extend_greedy_depth_k,
    postprocess_distribution,
    repair_to_is,
)
from .scaling import (
    DecayFitEntry,
    cumulative_misk,
    extrapolate_shots,
    fit_decay,
)
from .schedules import (
    FieldLimits,
    QaoaParams,
    Schedule,
    VqaaParams,
    miscalibrate,
    monotone_cubic_interpolate,
    qaoa_schedule,
    stretch_duration,
    vqaa_schedule,
)

__version__ = "0.1.0"
