"""Optimal insecticide spraying for a woods-spiders-vineyard ecosystem.

Library layout:

* :mod:`agrospray.model` -- dynamics, costates, Hamiltonian, equilibria.
* :mod:`agrospray.integrate` -- fixed-step RK4 state/costate integration
  with terminal-event location (compiled kernel + fallback).
* :mod:`agrospray.solver_fixed` -- fixed-horizon cost minimization by
  forward-backward sweep and projected gradient.
* :mod:`agrospray.solver_mintime` -- minimal-time eradication with
  bang/singular structure diagnostics.
* :mod:`agrospray.scenarios` / :mod:`agrospray.cli` -- presets, CSV/SVG
  emission and the command line.
"""

from .integrate import COMPILED
from .model import (AdjointState, ControlSignal, ModelParams,
                    PopulationState, ProblemKind, ProblemSpec)

__version__ = "1.0.0"

__all__ = ["AdjointState", "COMPILED", "ControlSignal", "ModelParams",
           "PopulationState", "ProblemKind", "ProblemSpec", "__version__"]
