"""Implicit boundary integral simulation of Mullins-Sekerka dynamics.

The heavy lifting lives in the C++ extension ``msibim._core``: signed
distance construction, narrow-band surface quadrature, connected component
labeling, the boundary integral Laplace solves and the coupled time stepper.
"""

from ._core import (
    SimulationError,
    SimState,
    StepReport,
    label_components,
    make_state,
    measure,
    narrow_band,
    preset_names,
    redistance,
    run_preset,
    step,
    surface_quadrature,
)

__all__ = [
    "SimulationError",
    "SimState",
    "StepReport",
    "label_components",
    "make_state",
    "measure",
    "narrow_band",
    "preset_names",
    "redistance",
    "run_preset",
    "step",
    "surface_quadrature",
]

__version__ = "0.1.0"
