"""
Disjoint-set forest with path compression and union by rank.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Generic, Hashable, Iterable, TypeVar

T = TypeVar("T", bound=Hashable)


class DisjointSet(Generic[T]):
    """Union-find over hashable elements, created lazily on first use."""

    def __init__(self, elements: Iterable[T] = ()) -> None:
        self.parent: dict[T, T] = {}
        self.rank: dict[T, int] = {}
        for e in elements:
            self.make_set(e)

    def __contains__(self, e: object) -> bool:
        return e in self.parent

    def __len__(self) -> int:
        return len(self.parent)

    def make_set(self, e: T) -> None:
        if e in self.parent:
            return
        self.parent[e] = e
        self.rank[e] = 0

    # find with path compression
    def find(self, e: T) -> T:
        self.make_set(e)
        root = e
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[e] != root:
            self.parent[e], e = root, self.parent[e]
        return root

    # union by rank
    def union(self, x: T, y: T) -> T:
        x_root = self.find(x)
        y_root = self.find(y)
        if x_root == y_root:
            return x_root
        if self.rank[x_root] < self.rank[y_root]:
            x_root, y_root = y_root, x_root
        self.parent[y_root] = x_root
        if self.rank[x_root] == self.rank[y_root]:
            self.rank[x_root] += 1
        return x_root

    def same(self, x: T, y: T) -> bool:
        return self.find(x) == self.find(y)

    def groups(self) -> dict[T, list[T]]:
        """Members of every set, keyed by root."""
        sets: dict[T, list[T]] = defaultdict(list)
        for e in self.parent:
            sets[self.find(e)].append(e)
        return dict(sets)

    def count(self) -> int:
        return sum(1 for e in self.parent if self.find(e) == e)
