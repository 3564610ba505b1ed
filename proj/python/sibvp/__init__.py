"""Straight-inverse solver for stiff two-point boundary value problems."""

try:
    from ._sibvp import (
        Problem,
        SolverError,
        bound_constants,
        custom_problem,
        ms_solve,
        si_march,
        simple_shoot,
        troesch,
        u_step,
        v_step,
    )
except ImportError:  # build-tree layout: extension next to the package
    from _sibvp import (
        Problem,
        SolverError,
        bound_constants,
        custom_problem,
        ms_solve,
        si_march,
        simple_shoot,
        troesch,
        u_step,
        v_step,
    )

__all__ = [
    "Problem",
    "SolverError",
    "bound_constants",
    "custom_problem",
    "ms_solve",
    "si_march",
    "simple_shoot",
    "troesch",
    "u_step",
    "v_step",
]

__version__ = "0.1.0"
