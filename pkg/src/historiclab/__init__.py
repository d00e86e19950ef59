"""Finite-resolution laboratory for non-convergent (historic) ergodic averages.

Modules
-------
avg_core
    Partial averages, oscillation estimates, level sets, Lambda probes and
    empirical measures.
symbolic
    Shifts and SFTs: block-schedule points, cylinders, connectors, cycles,
    rigidity.
systems
    Concrete maps: circle multiplications, Kan's skew product, toral
    automorphisms.
group_avg
    Folner, spherical, Cesaro-spherical and double averages.
sensitivity
    Empirical sensitivity tests, orbit-density diagnostics, the rigid/sensitive
    dichotomy.
harness
    Scenario configs, presets and the ``historiclab`` CLI.
"""

__version__ = "0.1.0"
