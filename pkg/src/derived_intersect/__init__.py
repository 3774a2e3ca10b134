"""Exact homological algebra for intersections of linear cycles in affine space."""

__version__ = "0.1.0"

from .polyring import Poly, PolyRing, parse_field
from .matrix import PolyMatrix
from .groebner import (
    DegreeLimitExceeded,
    GroebnerBasis,
    LiftEngine,
    ModulePresentation,
    NotInImage,
    groebner_basis,
    module_is_zero,
    syzygies,
)
from .homalg import ChainComplex, ChainMap, homology, is_quasi_iso, mapping_cone, tensor_complexes
from .cycles import (
    DegenerateInput,
    ExcessSequence,
    LinearCyclePair,
    adapt_coordinates,
    excess_sequence,
    find_module_splitting,
    random_linear_pair,
    reduction_to_diagonal,
)
from .koszul import (
    derived_restriction,
    koszul_complex,
    tor_excess_compare,
    tor_ranks,
    tor_wedge_product,
)
from .ak import (
    QuantizedCycle,
    ak_complex,
    atiyah_morphism,
    change_quantization_iso,
    extract_splitting_from_formality,
    psi_theta,
    restrict_ak,
)
from .graded_split import (
    GradedBundleMap,
    LineBundleSum,
    euler_excess_example,
    find_graded_section,
)
