"""Gathering and broadcasting in radio networks driven by short node labels.

Modules: ``netgraph`` (graphs, instances, generators), ``coloring`` (2-hop
colouring, sibling values), ``cps`` (children-parents schedules),
``gather_oracle`` (centralised plans and labels), ``radio_sim`` (the
collision-model engine), ``runtime`` (node programs) and ``harness``
(experiments, brute force, verification).
"""

from .coloring import sibling_assignment, two_hop_coloring
from .cps import CPAssignment, Schedule, cap_schedule, reduce_assignment, simulate_cps
from .gather_oracle import build_plan, labels_broadcast, labels_ddelta, labels_large_k, labels_small_k
from .labels import decode_label, encode_label, label_bits
from .netgraph import Graph, GatherInstance, bfs_tree, gen_lower_bound, gen_random, load_graph, metrics, source_subtree
from .radio_sim import completion_round, run
from .runtime import ALGORITHMS, execute, prepare

__all__ = [
    "ALGORITHMS",
    "CPAssignment",
    "GatherInstance",
    "Graph",
    "Schedule",
    "bfs_tree",
    "build_plan",
    "cap_schedule",
    "completion_round",
    "decode_label",
    "encode_label",
    "execute",
    "gen_lower_bound",
    "gen_random",
    "label_bits",
    "labels_broadcast",
    "labels_ddelta",
    "labels_large_k",
    "labels_small_k",
    "load_graph",
    "metrics",
    "prepare",
    "reduce_assignment",
    "run",
    "sibling_assignment",
    "simulate_cps",
    "source_subtree",
    "two_hop_coloring",
]
