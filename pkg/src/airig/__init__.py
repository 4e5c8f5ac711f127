"""airig: averaged iteratively regularized incremental subgradient method
for constrained finite-sum problems, with projected incremental baselines,
a polyhedral QP solver, and a soft-margin SVM benchmark."""

from .baselines import (
    BASELINE_KINDS,
    GradientTable,
    estimate_smoothness,
    run_baseline,
    saga_direction,
    step_prox_iag,
    step_projected_ig,
    step_saga,
    tune_constant_step,
)
from .io import (
    TRACE_HEADER,
    atomic_write_text,
    load_dataset,
    load_instance,
    load_problem,
    polyhedron_from_dict,
    polyhedron_to_dict,
    problem_from_dict,
    problem_to_dict,
    read_trace,
    save_dataset,
    save_instance,
    save_problem,
    write_trace,
)
from .problem import (
    PHI_MODES,
    AgentBlock,
    BoundEstimates,
    BoxSet,
    ProblemSpec,
    estimate_bounds,
    eval_phi_agent,
    eval_phi_total,
    project_box,
    subgrad_phi_agent,
)
from .qp import (
    PolyhedralProjector,
    PolyhedralSet,
    QpError,
    QpInfeasibleError,
    QpNonconvergedError,
    QpSolution,
    QpUnboundedError,
    project_polyhedron,
    projection_calls,
    reset_projection_calls,
    solve_qp,
)
from .rates import (
    RateReport,
    fit_rates,
    infeasibility_bound,
    rate_valid_from,
    suboptimality_bound,
)
from .schedules import ScheduleParams, eta, gamma, harmonic_sum_bounds, min_valid_n
from .solver import (
    AveragingState,
    IterRecord,
    RunHistory,
    cycle,
    run_airig,
    update_average,
)
from .svm import (
    PRESETS,
    SvmDataset,
    SvmInstance,
    build_instance,
    build_preset,
    generate_data,
    preset_config,
    reference_optimum,
    svm_objective,
)

__version__ = "0.1.0"

__all__ = [
    "AgentBlock",
    "AveragingState",
    "BASELINE_KINDS",
    "BoundEstimates",
    "BoxSet",
    "GradientTable",
    "IterRecord",
    "PHI_MODES",
    "PRESETS",
    "PolyhedralProjector",
    "PolyhedralSet",
    "ProblemSpec",
    "QpError",
    "QpInfeasibleError",
    "QpNonconvergedError",
    "QpSolution",
    "QpUnboundedError",
    "RateReport",
    "RunHistory",
    "ScheduleParams",
    "SvmDataset",
    "SvmInstance",
    "TRACE_HEADER",
    "atomic_write_text",
    "build_instance",
    "build_preset",
    "cycle",
    "estimate_bounds",
    "estimate_smoothness",
    "eta",
    "eval_phi_agent",
    "eval_phi_total",
    "fit_rates",
    "gamma",
    "generate_data",
    "harmonic_sum_bounds",
    "infeasibility_bound",
    "load_dataset",
    "load_instance",
    "load_problem",
    "min_valid_n",
    "polyhedron_from_dict",
    "polyhedron_to_dict",
    "preset_config",
    "problem_from_dict",
    "problem_to_dict",
    "project_box",
    "project_polyhedron",
    "projection_calls",
    "rate_valid_from",
    "read_trace",
    "reference_optimum",
    "reset_projection_calls",
    "run_airig",
    "run_baseline",
    "saga_direction",
    "save_dataset",
    "save_instance",
    "save_problem",
    "solve_qp",
    "step_prox_iag",
    "step_projected_ig",
    "step_saga",
    "subgrad_phi_agent",
    "suboptimality_bound",
    "svm_objective",
    "tune_constant_step",
    "update_average",
    "write_trace",
]
