"""Graph node partitioning for subspace-prior sampling and online sensor scheduling."""

from ._gnpart import (
    ConfigError,
    DegenerateSubspace,
    NumericalFailure,
    aopt_objective,
    bandlimited_basis,
    condition_number,
    default_config,
    gen_hd,
    gen_pws,
    gft_basis,
    grad_f,
    hierarchical_partition,
    laplacian,
    learn,
    minimax_reconstruct,
    mse_db,
    objective_f,
    pdca_bipartition,
    prox_g,
    prox_l1_budget,
    random_sensor_graph,
    run_online_experiment,
    run_static_experiment,
    sfrob_partition,
    spectral_clustering,
    srel_partition,
)

__all__ = [
    "ConfigError",
    "DegenerateSubspace",
    "NumericalFailure",
    "aopt_objective",
    "bandlimited_basis",
    "condition_number",
    "default_config",
    "gen_hd",
    "gen_pws",
    "gft_basis",
    "grad_f",
    "hierarchical_partition",
    "laplacian",
    "learn",
    "minimax_reconstruct",
    "mse_db",
    "objective_f",
    "pdca_bipartition",
    "prox_g",
    "prox_l1_budget",
    "random_sensor_graph",
    "run_online_experiment",
    "run_static_experiment",
    "sfrob_partition",
    "spectral_clustering",
    "srel_partition",
]
