"""conedensity: exact workbench for cone-generator approximation on metric graphs.

Everything here is exact-rational (fractions.Fraction) over GF(2); there is no
floating point anywhere in the pipeline, so results are bit-reproducible.
"""

__version__ = "0.1.0"

from .rat import Val, INF, q, fmt
from .graph import (
    GraphError, GraphPoint, MetricGraph, ClosedSubgraph, CechCover,
    closed_star_cover, subdivide, subdivide_at,
)
from .tame import (
    TameError, EdgeProfile, TameFunction,
    constant, skyscraper, distance_cone,
)
from .twisted import (
    ComplexError, Generator, TwistedComplex, ChainMap,
    zero_map, identity_map, shift_map, translate_map, mapping_cone,
    direct_sum,
)
from .conv import (
    EmptySheafError, NonLipschitzError, is_lipschitz, inf_convolution,
    lipschitz_envelope,
)
from .barcode import (
    CertificateError, LeveledComplex, Bar, Barcode, GabrielCertificate,
    gabriel_decompose, barcode_of, cone_model, bottleneck,
    interleaving_distance_barcodes,
)
from .interleave import (
    Certificate, DistanceReport, PairThresholds,
    identity_certificate, certificate_from_inverse_pair, compose_certificates,
    sum_certificates, translate_certificate, shift_certificate,
    complete_certificate, wrapped_translate, check_interleaving, search_cells,
    interleaving_distance, distance_exact, distance_bounds, stalk_lower_bound,
)
from .cones import (
    ConeTransportError, ConeTowerRecord, transport_cone, transport_tower,
    DEFAULT_CONE_CAP,
)
from .density import (
    DensityError, ConeGenerator, CechTower,
    StalkReplacement, DensityReport, ConeChain, SoloReport,
    certified_budget, cone_apex, as_cone_generators, project,
    cone_distance, cone_distance_certificate, cech_tower, stalk_replace,
    densify, cone_chain, solo_approximator_check,
)
from .docio import DocumentError

__all__ = [
    "Val", "INF", "q", "fmt",
    "GraphError", "GraphPoint", "MetricGraph", "ClosedSubgraph", "CechCover",
    "closed_star_cover", "subdivide", "subdivide_at",
    "TameError", "EdgeProfile", "TameFunction",
    "constant", "skyscraper", "distance_cone",
    "ComplexError", "Generator", "TwistedComplex", "ChainMap",
    "zero_map", "identity_map", "shift_map", "translate_map", "mapping_cone",
    "direct_sum",
    "EmptySheafError", "NonLipschitzError", "is_lipschitz", "inf_convolution",
    "lipschitz_envelope",
    "CertificateError", "LeveledComplex", "Bar", "Barcode",
    "GabrielCertificate", "gabriel_decompose", "barcode_of", "cone_model",
    "bottleneck", "interleaving_distance_barcodes",
    "Certificate", "DistanceReport", "PairThresholds",
    "identity_certificate", "certificate_from_inverse_pair",
    "compose_certificates", "sum_certificates", "translate_certificate",
    "shift_certificate", "complete_certificate", "wrapped_translate",
    "check_interleaving", "search_cells", "interleaving_distance",
    "distance_exact", "distance_bounds", "stalk_lower_bound",
    "ConeTransportError", "ConeTowerRecord", "transport_cone",
    "transport_tower", "DEFAULT_CONE_CAP",
    "DensityError", "NonLipschitzError", "ConeGenerator", "CechTower",
    "StalkReplacement", "DensityReport", "ConeChain", "SoloReport",
    "certified_budget", "cone_apex", "as_cone_generators", "project",
    "cone_distance", "cone_distance_certificate", "cech_tower",
    "stalk_replace", "densify", "cone_chain", "solo_approximator_check",
    "DocumentError",
]
