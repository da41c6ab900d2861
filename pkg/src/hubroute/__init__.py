"""Directional freight routing and simulation for hub networks.

A routing engine that discovers budget-feasible candidate hubs inside an
angular sector toward the destination, a shortest-path baseline, and a
deterministic discrete-event simulator that benchmarks the two routing
modes under a shared truck consolidation protocol.
"""

__version__ = "0.1.0"
