"""Petri nets with amplitude tokens, marking-dependent weights and protocol models."""

from ._core import (
    Model,
    PetriNet,
    QpnError,
    QuantumMapping,
    blocking_oracle,
    check_invariant,
    empirical_distribution,
    entanglement_net,
    eval_expr,
    exact_measurement_dist,
    format_expr,
    load,
    measurement_net,
    passing_oracle,
    save,
    slaz_net,
    tables,
    zeno_net,
    zeno_oracle,
)

__all__ = [
    "Model",
    "PetriNet",
    "QpnError",
    "QuantumMapping",
    "blocking_oracle",
    "check_invariant",
    "empirical_distribution",
    "entanglement_net",
    "eval_expr",
    "exact_measurement_dist",
    "format_expr",
    "load",
    "measurement_net",
    "passing_oracle",
    "save",
    "slaz_net",
    "tables",
    "zeno_net",
    "zeno_oracle",
]
