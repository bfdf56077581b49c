"""Named probe-state families: a base state plus an encoding mask."""
from dataclasses import dataclass, replace
from typing import Optional

from .channels import canonical_pipeline, run_pipeline
from .states import (
    EncodingMask, GraphSpec, cluster_mask, ghz, graph_state, linear_cluster, plus_state,
)

FAMILY_NAMES = ("ghz", "ghz_encoded", "cluster", "cluster_encoded", "graph", "graph_encoded",
                "product", "product_encoded")


@dataclass(frozen=True)
class Family:
    base: str
    n: int
    mask: EncodingMask
    graph: Optional[GraphSpec] = None

    @property
    def encoded(self) -> bool:
        return not self.mask.is_identity()

    @property
    def name(self) -> str:
        return self.base + ("_encoded" if self.encoded else "")

    def state(self):
        if self.base == "ghz":
            return ghz(self.n)
        if self.base == "cluster":
            return linear_cluster(self.n)
        if self.base == "product":
            return plus_state(self.n)
        if self.base == "graph":
            return graph_state(self.graph)
        raise ValueError(f"unknown family base {self.base!r}")

    def rho(self, p, phi=None):
        return run_pipeline(self.state(), canonical_pipeline(self.mask, p, phi))

    def bare(self) -> "Family":
        return replace(self, mask=EncodingMask.identity(self.n))

    def with_mask(self, mask: EncodingMask) -> "Family":
        return replace(self, mask=mask)


def default_mask(base: str, n: int) -> EncodingMask:
    """Hadamards on the cluster's end qubits, on every qubit otherwise."""
    return cluster_mask(n) if base == "cluster" else EncodingMask.all_hadamard(n)


def make_family(name: str, n: int = 4, mask: Optional[EncodingMask] = None,
                graph: Optional[GraphSpec] = None) -> Family:
    """Build a family from its CLI name.

    ``mask`` overrides the default encoding of ``*_encoded`` families; giving a
    mask to a bare family name encodes it with that mask.
    """
    if name not in FAMILY_NAMES:
        raise ValueError(f"unknown family {name!r}; choose from {', '.join(FAMILY_NAMES)}")
    base = name.removesuffix("_encoded")
    if base == "graph":
        if graph is None:
            raise ValueError("graph family needs a graph specification")
        n = graph.n_qubits
    if mask is None:
        mask = default_mask(base, n) if name.endswith("_encoded") else EncodingMask.identity(n)
    if mask.n != n:
        raise ValueError(f"mask {mask.bits} has {mask.n} qubits, family has {n}")
    return Family(base, n, mask, graph)
