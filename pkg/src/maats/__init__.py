"""Cooperative cable-suspended load transport.

Core pieces: a tension allocator (warm-started SQP with an active-set QP
subsolver), the hierarchical load/position/attitude controllers it feeds,
a rigid-cable multi-UAV plant with a fixed-step RK4 integrator, and a
deterministic closed-loop harness that emits CSV/JSON run artifacts.
"""

__version__ = "0.1.0"
