"""Simulator and optimizer for entanglement-distillation schedules in
equidistant quantum-repeater chains.

The package models a multiplexed two-way repeater protocol: elementary
links are generated in parallel on every segment, then distillation and
entanglement swapping are applied level by level until an end-to-end
pair distribution remains.  Distillation timing is driven either by
local per-level rules or by a precomputed global schedule, and a
Monte-Carlo search finds near-optimal global schedules under the
multiplexing budget.
"""

__version__ = "0.1.0"

ENGINE_VERSION = __version__
