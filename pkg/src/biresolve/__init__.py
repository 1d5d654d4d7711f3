"""Bi-resolving and bi-covering graph homomorphisms, their extensions, and the
n-to-1 extension of codes between shifts of finite type."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BiresolveError,
    CapReached,
    FormatError,
    GraphError,
    HomomorphismError,
    PreconditionError,
    SearchTimeout,
    UnsupportedPresentation,
)
from .graph import DirectedMultigraph, Edge, build_graph, graph_from_matrix  # noqa: E402
from .homomorphism import GraphHomomorphism, SubamalgamationMatrix, resolving_profile  # noqa: E402

__all__ = [
    "BiresolveError",
    "CapReached",
    "DirectedMultigraph",
    "Edge",
    "FormatError",
    "GraphError",
    "GraphHomomorphism",
    "HomomorphismError",
    "PreconditionError",
    "SearchTimeout",
    "SubamalgamationMatrix",
    "UnsupportedPresentation",
    "build_graph",
    "graph_from_matrix",
    "resolving_profile",
]
