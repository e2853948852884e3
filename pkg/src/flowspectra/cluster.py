"""Hierarchical agglomerative clustering of symmetrized weight matrices.

The distance between two entities is 1 minus their symmetrized weight
rescaled by the largest off-diagonal weight, so the strongest trading pair
sits at distance 0 and absent relations at distance 1. Average linkage is
the default; merges are fully deterministic (ties broken by the smallest
cluster-id pair), so the same matrix always yields the same dendrogram.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DataError
from .network import SymmetricMatrix

LINKAGES = ("average", "single", "complete")


@dataclass(frozen=True)
class Merge:
    """One agglomeration step: clusters `left` and `right` join at `height`
    to form cluster `id`. Leaves are 0..N-1, internal ids N..2N-2."""

    left: int
    right: int
    height: float
    id: int


@dataclass(frozen=True)
class Dendrogram:
    n_leaves: int
    merges: tuple[Merge, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "merges", tuple(self.merges))
        if len(self.merges) != self.n_leaves - 1:
            raise DataError(f"expected {self.n_leaves - 1} merges, got {len(self.merges)}")

    @property
    def root(self) -> int:
        return 2 * self.n_leaves - 2

    def heights(self) -> dict[int, float]:
        """Merge height per node id; leaves sit at height 0."""
        out = {leaf: 0.0 for leaf in range(self.n_leaves)}
        out.update({m.id: m.height for m in self.merges})
        return out


def distance_matrix(sym: SymmetricMatrix) -> SymmetricMatrix:
    """Weight-based distances: d(i, j) = 1 - s(i, j) / max off-diagonal s.

    Entries lie in [0, 1]; the strongest pair has distance 0 and an absent
    relation distance 1. Invariant under uniform weight scaling.
    """
    values = sym.values
    if values.min() < 0:
        raise DataError("distance matrix needs nonnegative weights")
    off_diag = values.copy()
    np.fill_diagonal(off_diag, 0.0)
    s_max = float(off_diag.max())
    if s_max <= 0:
        raise DataError("all-zero matrix has no distance structure")
    distances = 1.0 - values / s_max
    np.fill_diagonal(distances, 0.0)
    return SymmetricMatrix(sym.entities, distances)


def agglomerate(distances: SymmetricMatrix | np.ndarray,
                linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering of a distance matrix.

    At each step the pair of clusters with minimal linkage distance merges;
    ties break on the smallest (id, id) pair. Average linkage updates
    distances as size-weighted means (UPGMA), single as minima, complete as
    maxima. Merge heights never decrease.
    """
    if linkage not in LINKAGES:
        raise DataError(f"unknown linkage {linkage!r} (expected one of {LINKAGES})")
    values = distances.values if isinstance(distances, SymmetricMatrix) else np.asarray(distances, dtype=float)
    n = values.shape[0]
    if values.shape != (n, n) or n < 2:
        raise DataError("need a square distance matrix over at least 2 items")

    dist: dict[tuple[int, int], float] = {
        (i, j): float(values[i, j]) for i, j in combinations(range(n), 2)
    }
    sizes = {i: 1 for i in range(n)}
    min_leaf = {i: i for i in range(n)}
    active = list(range(n))
    merges: list[Merge] = []
    last_height = -np.inf

    for step in range(n - 1):
        a, b = min(combinations(active, 2), key=lambda pair: (dist[pair], pair))
        height = dist[(a, b)]
        if height < last_height:
            raise DataError("linkage produced decreasing merge heights")
        last_height = height
        new_id = n + step

        for x in active:
            if x in (a, b):
                continue
            d_ax = dist[(min(a, x), max(a, x))]
            d_bx = dist[(min(b, x), max(b, x))]
            if linkage == "average":
                merged = (sizes[a] * d_ax + sizes[b] * d_bx) / (sizes[a] + sizes[b])
            elif linkage == "single":
                merged = min(d_ax, d_bx)
            else:
                merged = max(d_ax, d_bx)
            dist[(x, new_id)] = merged

        # The child whose subtree holds the smaller leaf index goes left, so
        # an in-order traversal keeps early entities early.
        left, right = (a, b) if min_leaf[a] <= min_leaf[b] else (b, a)
        merges.append(Merge(left=left, right=right, height=height, id=new_id))
        sizes[new_id] = sizes[a] + sizes[b]
        min_leaf[new_id] = min(min_leaf[a], min_leaf[b])
        active = [x for x in active if x not in (a, b)]
        active.append(new_id)

    return Dendrogram(n_leaves=n, merges=tuple(merges))


def leaf_order(dendrogram: Dendrogram) -> list[int]:
    """Leaf permutation from an in-order traversal, left child first.

    Applying it to the rows and columns of the weight matrix places merged
    clusters next to each other.
    """
    children = {m.id: (m.left, m.right) for m in dendrogram.merges}
    order: list[int] = []
    stack = [dendrogram.root]
    while stack:
        node = stack.pop()
        if node < dendrogram.n_leaves:
            order.append(node)
        else:
            left, right = children[node]
            stack.append(right)
            stack.append(left)
    return order


def dendrogram_to_json(dendrogram: Dendrogram,
                       entities: tuple[str, ...] | None = None) -> dict:
    order = leaf_order(dendrogram)
    payload: dict = {
        "n_leaves": dendrogram.n_leaves,
        "merges": [
            {"left": m.left, "right": m.right, "height": m.height, "id": m.id}
            for m in dendrogram.merges
        ],
        "leaf_order": order,
    }
    if entities is not None:
        payload["entities"] = list(entities)
        payload["ordered_entities"] = [entities[i] for i in order]
    return payload


def to_newick(dendrogram: Dendrogram, labels: tuple[str, ...] | None = None) -> str:
    """Newick string with branch lengths equal to height differences."""
    n = dendrogram.n_leaves
    if labels is None:
        labels = tuple(str(i) for i in range(n))
    if len(labels) != n:
        raise DataError(f"expected {n} labels, got {len(labels)}")
    children = {m.id: (m.left, m.right) for m in dendrogram.merges}
    heights = dendrogram.heights()

    def render(node: int, parent_height: float) -> str:
        if node < n:
            return f"{labels[node]}:{parent_height!r}"
        left, right = children[node]
        height = heights[node]
        inner = f"({render(left, height)},{render(right, height)})"
        if node == dendrogram.root:
            return inner
        return f"{inner}:{parent_height - height!r}"

    return render(dendrogram.root, heights[dendrogram.root]) + ";"
