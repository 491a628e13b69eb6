"""Shuffled amalgams of Fuchsian blocks: construction, hypothesis checks, limit sets."""

__version__ = "0.1.0"

from .moebius import INF, MoebiusMap, QQi, Region, lower, strip, upper, xi
from .fuchsian import (
    MarkedGroup, block, genus_cover_group, markov_family, punctured_torus_group,
    verify_boundary_primitive,
)
from .invariance import (
    InvarianceCertificate, Violation, check_precisely_invariant, jorgensen_check,
    min_strip_constant, strip_confinement,
)
from .combiner import (
    CombinedGroup, HypothesisError, amalgamate, conjugate_block, hnn_extend, normal_form,
    ping_pong_certify,
)
from .shuffle import (
    ShufflePlan, assign_primes, build_gamma_k, build_gamma_k_tau, coset_reps, crt_coefficients,
    heights, homeo_classes, make_plan, shuffle_exponents,
)
from .limitset import PointCloud, RasterImage, enumerate_limit_points, rasterize, render_shuffle_figure
from .deform import DeformationReport, verify_deformed_blocks
