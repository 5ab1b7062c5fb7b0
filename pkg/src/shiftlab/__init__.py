"""Workbench for subshifts over carrier groups Z^d x T with T finite.

Modules:
    groups       exact set calculus on the carrier group
    patterns     finite patterns and occurrence scans
    oracles      local admissibility rules compiled to primitive constraints
    solver       bounded exact extension search, gluing, specification checks
    census       exact count / rank / unrank of admissible blocks
    kshift       maximal K-separated sets and their binary shift
    tilings      multi-scale greedy quasitilings and exact tilings
    marker       grid configurations, marker blocks, almost-admissible gluing
    codec        finite-window block codec between two subshifts
    cli          command line entry points
"""

__version__ = "0.1.0"
