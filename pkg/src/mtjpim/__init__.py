"""mtjpim: step-accurate simulator of an MTJ resistive-divider
processing-in-memory array for row-parallel pattern matching.

Modules
-------
profiles   technology constants (two shipped technology points)
device     cell and divider-gate physics, window solving, variation, wiring
array      the 2-D cell grid and the row-parallel logic step
gates      composite sequences: XOR, full adder, population-count tree
isa        micro/macro instructions, assembler, controller loop
scheduler  preset coalescing and pattern-to-row scheduling policies
kernels    alignment workload and the four benchmark kernels
perf       stage-resolved energy/latency ledgers and derived reports
cli        command-line frontend
"""

from . import array, cli, device, gates, isa, kernels, perf, profiles, scheduler

__all__ = ["array", "cli", "device", "gates", "isa", "kernels", "perf",
           "profiles", "scheduler"]
__version__ = "0.1.0"
