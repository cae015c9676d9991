"""Hypercube-layer orthogonal product sets and strongest-nonlocality certification."""

from .states import (
    DEFAULT_POLICY,
    Ket,
    ProductState,
    TolerancePolicy,
    eta,
    inner,
    is_zero,
    product_inner,
    xi,
)
from .hypercube import (
    Block,
    DecompositionVerdict,
    Dims,
    outer_layer,
    projection_support,
    support,
    verify_decomposition,
)
from .constructions import (
    OPS,
    Family,
    family,
    fivepartite,
    fourpartite,
    size_formula,
    tripartite,
)

__version__ = "0.1.0"
