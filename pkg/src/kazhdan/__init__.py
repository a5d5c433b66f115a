"""Property (T) semidefinite programs, exact certificates and spacial arrangements.

Typical use::

    from kazhdan import make_engine, ball, assemble, solve, certify, verify

    g = make_engine("SL", 3)
    problem = assemble(g, ball(g, 2))
    cert = certify(problem, solve(problem))
    assert verify(cert).accepted
"""

from .algebra import AlgebraElement, convolve, element, laplacian, star
from .builder import BuilderError, SdpProblem, assemble, build_support, eliminate_interior, flat_objective
from .certify import (
    Certificate,
    CertificationError,
    CertifyOptions,
    certify,
    correct_element,
    order_unit_correct,
    residual,
    round_to_rational_psd,
    verify,
)
from .geometry import (
    Arrangement,
    GeometryError,
    arrangement_from_dual,
    bound_problem,
    flat_arrangement,
    translation_displacement,
)
from .groups import GroupError, ResourceLimitError, ball, cayley_ball, make_engine
from .harper import harper_curves, harper_sdp_bound
from .sdpa import export_sdpa, import_solution
from .solver import (
    ConstructionFailed,
    PrimalDualSolution,
    SolverOptions,
    gap_report,
    solve,
    strict_feasibility_witnesses,
)
from .symmetry import aut_s_group, build_class_table, canonical_distance_rep, canonical_point_rep, n_subgroup

__version__ = "0.1.0"
