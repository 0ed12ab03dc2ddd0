"""Constrained Holevo capacities, channel extensions and additivity probes."""

from .channels import (
    Channel,
    ConstraintSet,
    direct_sum_mixture,
    donald_residual,
    holevo_quantity,
    make_channel,
    measurement_channel,
    psi_sub_A,
    tensor_channels,
)
from .errors import HolevoLabError
from .shor import shor_hat, shor_hat_dp, shor_tilde, shor_tilde_dp, tilde_entropy_closed_form
from .solvers import (
    SolverOptions,
    certify_optimal,
    chi_function,
    conjugate_H,
    constrained_capacity,
    eof,
    kkt_certificate,
    min_output_entropy,
    nu_H,
    penalized_capacity,
    wootters_eof,
)
from .spectral import entropy, partial_trace, relative_entropy, trace_distance
from .states import Ensemble, average_state, hjw_ensemble, random_ensemble, random_state

__all__ = [
    "Channel", "ConstraintSet", "Ensemble", "HolevoLabError", "SolverOptions",
    "average_state", "certify_optimal", "chi_function", "conjugate_H", "constrained_capacity",
    "direct_sum_mixture", "donald_residual", "entropy", "eof", "hjw_ensemble", "holevo_quantity",
    "kkt_certificate", "make_channel", "measurement_channel", "min_output_entropy", "nu_H",
    "partial_trace", "penalized_capacity", "psi_sub_A", "random_ensemble", "random_state",
    "relative_entropy", "shor_hat", "shor_hat_dp", "shor_tilde", "shor_tilde_dp", "tensor_channels",
    "tilde_entropy_closed_form", "trace_distance", "wootters_eof",
]
