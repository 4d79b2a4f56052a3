"""
Finite Models of Glued Binary Trees.

The rooted binary tree is treated as a topological space, each edge cut
into N = 2^g grid steps. A grid point is (word, k) with 1 ≤ k ≤ N: the
point k/N of the way down the edge that ends at vertex ``word``. The root is
("", N). Depth is measured in grid steps.

Two gluings are modeled, both applied at every vertex v:

    A   [v, vLLL...) ~ [v, vRRR...) preserving depth
    B   [v, vLRRR...) ~ [v, vRLRRR...), doubling along [v, vL] and
        isometric after it

Classes come from a union-find over all grid points up to the depth bound.
The ancestor relation descends to a relation on classes; it is a partial
order exactly when the class graph has no cycle, which is checked.
"""

from __future__ import annotations

import logging
import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator, Sequence

import numpy as np

from holonomy.exceptions import ResolutionMismatch, TruncationBoundary
from holonomy.utils.disjoint_set import DisjointSet

logger = logging.getLogger(__name__)

MAX_DEPTH = 12
MAX_RESOLUTION = 6
CLAIM_MARGIN = 4

GridPoint = tuple[str, int]

_CANONICAL = re.compile(r"^(?:[LR]*LL|L)?R*$")


class Gluing(Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class TreePoint:
    """A point v₀·word·edge^tail of the tree.

    Attributes:
        word: Vertex below the root, letters L and R
        tail: Fraction of the way along the edge below ``word``, in [0, 1)
        edge: Edge followed by the tail, "L" or "R"
    """
    word: str = ""
    tail: Fraction = Fraction(0)
    edge: str = "R"

    def __post_init__(self) -> None:
        if set(self.word) - {"L", "R"}:
            raise ValueError(f"Tree words use only L and R, got {self.word!r}")
        if self.edge not in ("L", "R"):
            raise ValueError(f"Edge must be L or R, got {self.edge!r}")
        tail = Fraction(self.tail)
        if not 0 <= tail < 1:
            raise ValueError(f"Tail must lie in [0, 1), got {tail}")
        object.__setattr__(self, "tail", tail)

    def __str__(self) -> str:
        text = "v0" + self.word
        if self.tail:
            text += f"{self.edge}^{self.tail}"
        return text

    @property
    def depth(self) -> Fraction:
        return len(self.word) + self.tail

    def to_grid(self, resolution: int) -> GridPoint:
        """Grid coordinates at N = 2^resolution.

        Raises:
            ResolutionMismatch: If the tail is not a multiple of 1/N
        """
        n = 2 ** resolution
        if self.tail == 0:
            return (self.word, n)
        steps = self.tail * n
        if steps.denominator != 1:
            raise ResolutionMismatch(
                f"Point {self} is not on the grid of resolution {resolution}", resolution
            )
        return (self.word + self.edge, int(steps))

    @classmethod
    def from_grid(cls, point: GridPoint, resolution: int) -> TreePoint:
        word, k = point
        n = 2 ** resolution
        if k == n:
            return cls(word)
        return cls(word[:-1], Fraction(k, n), word[-1])


def grid_depth(point: GridPoint, n: int) -> int:
    word, k = point
    return (len(word) - 1) * n + k


def grid_parent(point: GridPoint, n: int) -> GridPoint:
    word, k = point
    if k > 1:
        return (word, k - 1)
    return (word[:-1], n)


def is_tree_ancestor(a: GridPoint, b: GridPoint) -> bool:
    """True when ``a`` lies on the path from the root to ``b``."""
    (wa, ka), (wb, kb) = a, b
    if wa == wb:
        return ka <= kb
    return wb.startswith(wa)


def is_canonical(point: GridPoint, n: int) -> bool:
    """Matches v₀{L,R}^k LLR^s, v₀LR^s or v₀R^s."""
    word, k = point
    if k != n and not word.endswith("R"):
        return False
    return _CANONICAL.match(word) is not None


def _spine(v: str, letter: Callable[[int], str], j: int, n: int) -> GridPoint:
    edges = (j - 1) // n + 1
    return (v + "".join(letter(i) for i in range(edges)), j - (edges - 1) * n)


def _lefts(i: int) -> str:
    return "L"


def _rights(i: int) -> str:
    return "R"


def _first_left(i: int) -> str:
    return "L" if i == 0 else "R"


def _second_left(i: int) -> str:
    return "L" if i == 1 else "R"


def _words(depth: int) -> Iterator[str]:
    for length in range(depth + 1):
        for letters in product("LR", repeat=length):
            yield "".join(letters)


@dataclass
class TreeQuotient:
    """Classes and class order of a truncated glued tree.

    Attributes:
        gluing: Gluing rule used
        depth: Vertex depth bound d
        resolution: Grid bits g per edge
        members: Grid points of each class
        class_index: Class of every grid point
        children: Class graph, parent class to child classes
    """
    gluing: Gluing
    depth: int
    resolution: int
    members: list[list[GridPoint]] = field(repr=False)
    class_index: dict[GridPoint, int] = field(repr=False)
    children: list[set[int]] = field(repr=False)
    _below: dict[int, frozenset[int]] = field(default_factory=dict, repr=False)

    def __repr__(self) -> str:
        return (
            f"TreeQuotient(gluing={self.gluing.value}, depth={self.depth}, "
            f"resolution={self.resolution}, classes={self.num_classes})"
        )

    @property
    def n(self) -> int:
        return 2 ** self.resolution

    @property
    def num_classes(self) -> int:
        return len(self.members)

    @property
    def max_grid_depth(self) -> int:
        return self.depth * self.n

    def class_of(self, point: TreePoint | GridPoint) -> int:
        grid = point.to_grid(self.resolution) if isinstance(point, TreePoint) else point
        try:
            return self.class_index[grid]
        except KeyError:
            raise TruncationBoundary(
                f"Point {grid} lies outside the depth-{self.depth} truncation", grid
            ) from None

    def classes_of(self) -> dict[int, list[TreePoint]]:
        return {
            c: [TreePoint.from_grid(p, self.resolution) for p in pts]
            for c, pts in enumerate(self.members)
        }

    def representative(self, cls: int) -> GridPoint:
        """Shallowest member of a class."""
        return min(self.members[cls], key=lambda p: (grid_depth(p, self.n), p[0]))

    def topological_order(self) -> list[int] | None:
        """Kahn order of the class graph, None if it has a cycle."""
        indegree = [0] * self.num_classes
        for kids in self.children:
            for c in kids:
                indegree[c] += 1
        ready = deque(c for c in range(self.num_classes) if indegree[c] == 0)
        order: list[int] = []
        while ready:
            c = ready.popleft()
            order.append(c)
            for kid in sorted(self.children[c]):
                indegree[kid] -= 1
                if indegree[kid] == 0:
                    ready.append(kid)
        return order if len(order) == self.num_classes else None

    def is_partial_order(self) -> bool:
        return self.topological_order() is not None

    def is_total_order(self) -> bool:
        """Acyclic with a unique topological order, so every pair compares."""
        order = self.topological_order()
        if order is None:
            return False
        return all(b in self.children[a] for a, b in zip(order, order[1:]))

    def descendants(self, cls: int) -> frozenset[int]:
        """Classes at or below ``cls``."""
        if cls in self._below:
            return self._below[cls]
        seen = {cls}
        queue = deque([cls])
        while queue:
            c = queue.popleft()
            for kid in self.children[c]:
                if kid not in seen:
                    seen.add(kid)
                    queue.append(kid)
        self._below[cls] = frozenset(seen)
        return self._below[cls]

    def class_path(self, start: int, end: int) -> list[int] | None:
        """Shortest chain of classes from ``start`` down to ``end``."""
        previous: dict[int, int | None] = {start: None}
        queue = deque([start])
        while queue:
            c = queue.popleft()
            if c == end:
                path = [c]
                while previous[path[-1]] is not None:
                    path.append(previous[path[-1]])
                return path[::-1]
            for kid in sorted(self.children[c]):
                if kid not in previous:
                    previous[kid] = c
                    queue.append(kid)
        return None

    def geq(self, a: TreePoint | GridPoint, b: TreePoint | GridPoint) -> bool:
        """[a] ≥ [b]: the class of ``a`` is an ancestor of the class of ``b``."""
        return self.class_of(b) in self.descendants(self.class_of(a))

    def comparable(self, a: TreePoint | GridPoint, b: TreePoint | GridPoint) -> bool:
        return self.geq(a, b) or self.geq(b, a)

    def incomparable_pair(self) -> tuple[int, int] | None:
        """Some pair of classes neither of which is above the other."""
        for a in range(self.num_classes):
            below = self.descendants(a)
            for b in range(a + 1, self.num_classes):
                if b not in below and a not in self.descendants(b):
                    return a, b
        return None

    def canonical_points(self, max_grid_depth: int | None = None) -> list[GridPoint]:
        bound = self.max_grid_depth if max_grid_depth is None else max_grid_depth
        return [
            p for p in self.class_index
            if grid_depth(p, self.n) <= bound and is_canonical(p, self.n)
        ]

    def to_dot(self) -> str:
        """Class graph in Graphviz DOT, nodes labelled by their shallowest member."""
        lines = [f'digraph quotient_{self.gluing.value} {{', "  rankdir=TB;"]
        for c in range(self.num_classes):
            label = TreePoint.from_grid(self.representative(c), self.resolution)
            lines.append(f'  c{c} [label="{label}" size={len(self.members[c])}];')
        for c, kids in enumerate(self.children):
            for kid in sorted(kids):
                lines.append(f"  c{c} -> c{kid};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _glue_a(forest: DisjointSet[GridPoint], v: str, depth: int, n: int) -> None:
    for j in range(1, (depth - len(v)) * n + 1):
        forest.union(_spine(v, _lefts, j, n), _spine(v, _rights, j, n))


def _glue_b(forest: DisjointSet[GridPoint], v: str, depth: int, n: int) -> None:
    room = (depth - len(v)) * n
    j = 1
    while True:
        target = 2 * j if j <= n else j + n
        if target > room:
            break
        forest.union(_spine(v, _first_left, j, n), _spine(v, _second_left, target, n))
        j += 1


def build_quotient(gluing: Gluing | str, depth: int, resolution: int) -> TreeQuotient:
    """Glue the depth-``depth`` truncation at grid resolution 2^resolution.

    Raises:
        ValueError: If depth or resolution is outside [0, 12] × [0, 6]
        ResolutionMismatch: If gluing B is asked for with resolution 0,
            where the doubling has no grid to land on

    Example:
        >>> q = build_quotient("A", 8, 2)
        >>> q.num_classes, q.is_total_order()
        (33, True)
    """
    gluing = Gluing(gluing)
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"Depth must be in [0, {MAX_DEPTH}], got {depth}")
    if not 0 <= resolution <= MAX_RESOLUTION:
        raise ValueError(f"Resolution must be in [0, {MAX_RESOLUTION}], got {resolution}")
    if gluing is Gluing.B and resolution < 1:
        raise ResolutionMismatch("Gluing B needs at least one grid bit per edge", resolution)

    n = 2 ** resolution
    forest: DisjointSet[GridPoint] = DisjointSet()
    forest.make_set(("", n))
    for word in _words(depth):
        if word:
            for k in range(1, n + 1):
                forest.make_set((word, k))

    glue = _glue_a if gluing is Gluing.A else _glue_b
    for v in _words(depth - 1):
        glue(forest, v, depth, n)

    roots: dict[GridPoint, int] = {}
    members: list[list[GridPoint]] = []
    class_index: dict[GridPoint, int] = {}
    for point in forest.parent:
        root = forest.find(point)
        if root not in roots:
            roots[root] = len(members)
            members.append([])
        c = roots[root]
        members[c].append(point)
        class_index[point] = c

    children: list[set[int]] = [set() for _ in members]
    for point, c in class_index.items():
        if point == ("", n):
            continue
        parent = class_index[grid_parent(point, n)]
        if parent != c:
            children[parent].add(c)

    quotient = TreeQuotient(gluing, depth, resolution, members, class_index, children)
    logger.info(
        f"Built gluing {gluing.value} quotient: depth {depth}, resolution {resolution}, "
        f"{len(class_index)} points, {quotient.num_classes} classes"
    )
    return quotient


def canonical_rep(quotient: TreeQuotient, point: TreePoint | GridPoint) -> TreePoint:
    """Canonical member of the class of ``point`` under gluing B.

    Raises:
        ValueError: If the quotient was built with gluing A
        TruncationBoundary: If the class has no canonical member in the truncation
    """
    if quotient.gluing is not Gluing.B:
        raise ValueError("Canonical representatives are defined for gluing B")
    cls = quotient.class_of(point)
    n = quotient.n
    found = sorted(
        (p for p in quotient.members[cls] if is_canonical(p, n)),
        key=lambda p: (grid_depth(p, n), p[0]),
    )
    if not found:
        raise TruncationBoundary(
            f"Class of {point} has no canonical member within depth {quotient.depth}", point
        )
    if len(found) > 1:
        logger.warning(
            f"Class of {point} has {len(found)} canonical members in the truncation; "
            f"keeping the shallowest"
        )
    return TreePoint.from_grid(found[0], quotient.resolution)


@dataclass
class AncestorCheck:
    """Predicted and brute-force answers to [a] ≥ [b]."""
    a: TreePoint
    b: TreePoint
    predicted: bool
    brute: bool
    case: str | None
    witness: list[TreePoint]

    @property
    def agree(self) -> bool:
        return self.predicted == self.brute

    def to_dict(self) -> dict[str, object]:
        return {
            "a": str(self.a),
            "b": str(self.b),
            "predicted": self.predicted,
            "bruteForce": self.brute,
            "case": self.case,
            "agree": self.agree,
            "witness": [str(p) for p in self.witness],
        }


def split_tail(point: GridPoint, n: int) -> tuple[str, Fraction]:
    """Write a canonical point as v₀·W·R^s with s maximal."""
    word, k = point
    core = word.rstrip("R")
    s = Fraction(len(word) - len(core)) - Fraction(n - k, n)
    return core, s


def predicted_geq(a: GridPoint, b: GridPoint, n: int) -> str | None:
    """Which clause of the ancestor rule gives [a] ≥ [b], or None."""
    if is_tree_ancestor(a, b):
        return "a"
    core, s = split_tail(a, n)
    if core == "":
        for power in range(int(s) + 1):
            if is_tree_ancestor(("R" * power + "L", n), b):
                return "b"
    elif core.endswith("L"):
        head = core[:-1]
        for power in range(len(b[0]) + 1):
            if is_tree_ancestor((head + "R" * power + "LL", n), b):
                return "c"
    return None


def check_ancestor_claim(
    quotient: TreeQuotient,
    a: TreePoint | GridPoint,
    b: TreePoint | GridPoint,
    margin: int = CLAIM_MARGIN,
) -> AncestorCheck:
    """Compare the ancestor rule for canonical points with union-find reachability.

    Raises:
        ValueError: If ``a`` or ``b`` is not canonical
        TruncationBoundary: If either point is deeper than depth − margin
    """
    n = quotient.n
    ga = a.to_grid(quotient.resolution) if isinstance(a, TreePoint) else a
    gb = b.to_grid(quotient.resolution) if isinstance(b, TreePoint) else b
    for point in (ga, gb):
        if not is_canonical(point, n):
            raise ValueError(f"{TreePoint.from_grid(point, quotient.resolution)} is not canonical")
        if grid_depth(point, n) > (quotient.depth - margin) * n:
            raise TruncationBoundary(
                f"Point {point} is within {margin} levels of the truncation", point
            )

    case = predicted_geq(ga, gb, n)
    path = quotient.class_path(quotient.class_of(ga), quotient.class_of(gb))
    witness = [
        TreePoint.from_grid(quotient.representative(c), quotient.resolution)
        for c in (path or [])
    ]
    result = AncestorCheck(
        TreePoint.from_grid(ga, quotient.resolution),
        TreePoint.from_grid(gb, quotient.resolution),
        case is not None,
        path is not None,
        case,
        witness,
    )
    if not result.agree:
        logger.warning(f"Ancestor rule disagrees with brute force for {result.a} ≥ {result.b}")
    return result


def check_shift_equivariance(
    quotient: TreeQuotient, margin: int = CLAIM_MARGIN
) -> tuple[bool, tuple[GridPoint, GridPoint] | None]:
    """Check that v ↦ Lv sends each class into a single class.

    Only members at most depth − margin levels down are compared. Deeper
    members can be joined through points whose images fall outside the
    truncation.

    Returns:
        (holds, counterexample pair of grid points or None)
    """
    n = quotient.n
    bound = max(quotient.depth - max(margin, 1), 0) * n
    for pts in quotient.members:
        image_class = None
        first = None
        for word, k in pts:
            if grid_depth((word, k), n) > bound:
                continue
            image = ("L" + word, k) if word else ("L", n)
            c = quotient.class_index[image]
            if image_class is None:
                image_class, first = c, (word, k)
            elif c != image_class:
                return False, (first, (word, k))
    return True, None


def sample_pairs(
    points: Sequence[GridPoint], count: int, rng: np.random.Generator
) -> list[tuple[GridPoint, GridPoint]]:
    """``count`` random ordered pairs drawn with replacement."""
    picks = rng.integers(0, len(points), size=(count, 2))
    return [(points[i], points[j]) for i, j in picks]
