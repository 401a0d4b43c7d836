"""packforge: edge-disjoint packing of bounded-degree separable guests
into dense near-regular hosts, with exact verifiers and generators."""

from .certify import PackingCertificate, VerifyReport, host_fingerprint, verify_packing
from .core import (
    GuestGraph,
    MultiGraph,
    MultiHypergraph,
    SimpleGraph,
    graph_stats,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .oracle import exhaustive_subgraph_embed

__version__ = "0.1.0"

__all__ = [
    "SimpleGraph",
    "MultiGraph",
    "MultiHypergraph",
    "GuestGraph",
    "PackingCertificate",
    "VerifyReport",
    "graph_stats",
    "host_fingerprint",
    "verify_packing",
    "exhaustive_subgraph_embed",
    "KERNEL_BACKEND",
    "__version__",
]
