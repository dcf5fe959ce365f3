"""Free-fermion annealing dynamics for disordered Ising chains."""

from ._kinkflow import (
    ChainInstance,
    EvolutionOperator,
    NumericError,
    ValidationError,
    __version__,
    anneal_success_probability,
    balanced_c,
    derive_seed,
    embed_balanced,
    embed_canonical,
    estimate_critical_gamma,
    exact_ground_state_probability,
    exact_spectrum,
    gamma_of_s,
    gap_curve,
    griffiths_estimate,
    griffiths_walk,
    ground_state_probability,
    instance_from_json,
    integrate,
    load_instance,
    many_body_spectrum,
    minimum_gap,
    renormalized_fields,
    rescale_lambda,
    s_of_gamma,
    sample_logical,
    save_instance,
    single_particle_energies,
    time_to_solution,
)

__all__ = [
    "ChainInstance",
    "EvolutionOperator",
    "NumericError",
    "ValidationError",
    "__version__",
    "anneal_success_probability",
    "balanced_c",
    "derive_seed",
    "embed_balanced",
    "embed_canonical",
    "estimate_critical_gamma",
    "exact_ground_state_probability",
    "exact_spectrum",
    "gamma_of_s",
    "gap_curve",
    "griffiths_estimate",
    "griffiths_walk",
    "ground_state_probability",
    "instance_from_json",
    "integrate",
    "load_instance",
    "many_body_spectrum",
    "minimum_gap",
    "renormalized_fields",
    "rescale_lambda",
    "s_of_gamma",
    "sample_logical",
    "save_instance",
    "single_particle_energies",
    "time_to_solution",
]
