"""Finite étale groupoids, their correspondences, induction of C*-bundles
along correspondences, and the induced maps on K0."""

from .bundles import (
    EquivariantCorrespondence,
    GCStarBundle,
    GHilbertBundle,
    crossed_product_algebra,
    crossed_product_correspondence,
    crossed_product_module,
    function_bundle,
    identity_correspondence_bundle,
    trivial_bundle,
)
from .correspondence import (
    EtaleCorrespondence,
    action_correspondence,
    canonical_cutoff,
    compose,
    from_homomorphism,
    identity_correspondence,
    is_morita,
)
from .cstar import FinDimCStarAlgebra, HilbertBimodule, K0Map, groupoid_algebra, k0, k0_map
from .groupoid import FiniteGroupoid, GroupoidAction
from .induction import (
    induce_algebra,
    induce_correspondence,
    induce_module,
    induce_operator,
    k_theory_map,
    omega_crossed_product,
)
from .invsemi import InverseSemigroup
from .report import Report, ValidationError
from .serialize import load, dump

__version__ = "0.1.0"

__all__ = [
    "FiniteGroupoid", "GroupoidAction", "InverseSemigroup", "EtaleCorrespondence",
    "FinDimCStarAlgebra", "HilbertBimodule", "K0Map", "GCStarBundle", "GHilbertBundle",
    "EquivariantCorrespondence", "Report", "ValidationError",
    "identity_correspondence", "from_homomorphism", "action_correspondence", "compose", "is_morita",
    "canonical_cutoff", "groupoid_algebra", "k0", "k0_map", "trivial_bundle", "function_bundle",
    "identity_correspondence_bundle", "crossed_product_algebra", "crossed_product_module",
    "crossed_product_correspondence", "induce_algebra", "induce_module", "induce_correspondence",
    "induce_operator", "omega_crossed_product", "k_theory_map", "load", "dump",
]
