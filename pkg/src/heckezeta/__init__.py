"""Selberg zeta functions of cofinite Hecke triangle groups.

The package realizes the Selberg zeta function Z(s) of the Hecke triangle
group with parameter q >= 3 as the Fredholm determinant det(1 - L_{H,s}) of
a nuclear transfer operator attached to an accelerated symbolic dynamics of
the geodesic flow, together with the independent Euler-product oracle over
the primitive length spectrum, the odd/even factorization of the
determinant, zero location on the critical line (Maass cusp form spectral
parameters), operator eigenfunctions, and the finite-term functional
equations of period functions.
"""

from .analytic import Disk, cauchy_coefficients, hurwitz_zeta, principal_power
from .coding import (
    BranchSymbol,
    LengthSpectrumEntry,
    check_bijection,
    enumerate_regular_words,
    fast_step,
    length_spectrum,
    slow_partition,
    slow_step,
    word_to_element,
)
from .determinant import (
    SpectralScan,
    ZeroHit,
    fredholm_det,
    scan_zeros,
    trace_by_matrix,
    trace_by_words,
)
from .errors import (
    BoundaryError,
    BranchCutError,
    ContainmentError,
    DiskConstructionError,
    DomainError,
    HeckeZetaError,
    ModeError,
    PoleError,
)
from .moebius import (
    FixedPointData,
    GroupElement,
    apply_moebius,
    classify,
    conjugated_generators,
    hecke_generators,
    hecke_group,
    weight_action,
)
from .period import (
    FastEigenfunction,
    PeriodSamples,
    extend_from_fundamental,
    extract_eigenfunction,
    slow_residual,
    transport_to_slow,
)
from .transfer import OperatorMatrix, assemble, build_disk_system
from .zeta import euler_product, partition_identity_check, smale_ruelle

__version__ = "0.1.0"
