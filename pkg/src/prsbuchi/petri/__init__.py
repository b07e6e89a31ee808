"""Petri-net engine for parallel rewrite systems."""
from .engine import (
    DEFAULT_NODE_BUDGET,
    CoverMode,
    FiringSequence,
    ReachMode,
    RunMode,
    RunWitness,
    coverability,
    exact_reachability,
    explore,
    fire_sequence,
    flagged_coverability,
    infinite_run,
    is_bounded,
    karp_miller,
    km_graph,
    km_is_bounded,
    reachable_markings,
    replay_run,
    state_equation_infeasible,
)
from .kernel import BACKEND, OMEGA
from .net import (
    Net,
    Transition,
    accepting_seen_product,
    marking_to_term,
    non_accepting_subnet,
    non_null_non_accepting_product,
    par_brs_to_net,
    term_to_marking,
)

__all__ = [
    "BACKEND", "DEFAULT_NODE_BUDGET", "OMEGA", "CoverMode", "FiringSequence", "Net", "ReachMode",
    "RunMode", "RunWitness", "Transition", "accepting_seen_product", "coverability",
    "exact_reachability", "explore", "fire_sequence", "flagged_coverability", "infinite_run",
    "is_bounded", "karp_miller", "km_graph", "km_is_bounded", "marking_to_term",
    "non_accepting_subnet", "non_null_non_accepting_product", "par_brs_to_net",
    "reachable_markings", "replay_run", "state_equation_infeasible", "term_to_marking",
]
