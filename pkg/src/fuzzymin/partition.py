"""Compact fuzzy partitions: the block tree of a fuzzy equivalence, with the
navigation and union-find flattening the minimizer needs."""

from __future__ import annotations

from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    Degree,
    FuzzyRelation,
    ONE,
    SCALE,
    ZERO,
    is_fuzzy_equivalence,
)


class Block:
    """One node of the block tree.

    Crisp blocks (leaves) have degree 1 and carry elements directly; fuzzy
    blocks have degree < 1 and at least two subblocks.  Elements are kept as
    a contiguous span over the partition's element ordering, so membership
    and enumeration stay cheap.  `repr` is the retained representative
    element, set by the minimizer.
    """

    __slots__ = ("id", "degree", "parent", "children", "lo", "hi", "repr", "absorbed", "fully_flat")

    def __init__(self, block_id: int, degree: Degree, parent: Optional["Block"]):
        self.id = block_id
        self.degree = degree
        self.parent = parent
        self.children: List["Block"] = []
        self.lo = 0
        self.hi = 0
        self.repr: Optional[int] = None
        self.absorbed = False  # merged into some flattened class
        self.fully_flat = False  # this block's whole subtree is one class

    @property
    def is_crisp(self) -> bool:
        return not self.children

    def __repr__(self) -> str:
        kind = "crisp" if self.is_crisp else "fuzzy"
        return f"Block(#{self.id}, {kind}, degree={self.degree})"


class CompactFuzzyPartition:
    """Block tree over a finite carrier plus union-find flattening state.

    The tree itself is never mutated after construction; flattening only
    merges blocks into classes in the union-find overlay, so read-only
    consumers (rendering, equivalence reconstruction) always see the
    original structure.
    """

    def __init__(self, root: Block, blocks: List[Block], order: List[int], names: Sequence[str]):
        self.root = root
        self._blocks = blocks
        self.order = order
        self.names = list(names)
        n = len(order)
        self.pos = [0] * n
        for p, x in enumerate(order):
            self.pos[x] = p
        self.leaf_of: List[Block] = [None] * n  # type: ignore[list-item]
        for b in blocks:
            if b.is_crisp:
                for p in range(b.lo, b.hi):
                    self.leaf_of[order[p]] = b
        self._uf_parent = list(range(len(blocks)))
        self._uf_size = [1] * len(blocks)
        self._top: Dict[int, Block] = {b.id: b for b in blocks}

    @property
    def n(self) -> int:
        return len(self.order)

    def blocks(self) -> Iterator[Block]:
        return iter(self._blocks)

    def block_count(self) -> int:
        return len(self._blocks)

    def block_elements(self, block: Block) -> List[int]:
        return self.order[block.lo:block.hi]

    def contains(self, block: Block, x: int) -> bool:
        return block.lo <= self.pos[x] < block.hi

    # union-find overlay -------------------------------------------------

    def _find(self, block_id: int) -> int:
        parent = self._uf_parent
        root = block_id
        while parent[root] != root:
            root = parent[root]
        while parent[block_id] != root:
            parent[block_id], block_id = root, parent[block_id]
        return root

    def class_top(self, block: Block) -> Block:
        return self._top[self._find(block.id)]

    def _union_into(self, member: Block, top: Block) -> None:
        ra, rb = self._find(member.id), self._find(top.id)
        if ra == rb:
            return
        if self._uf_size[ra] < self._uf_size[rb]:
            ra, rb = rb, ra
        self._uf_parent[rb] = ra
        self._uf_size[ra] += self._uf_size[rb]
        self._top[ra] = top

    # navigation ---------------------------------------------------------

    def find_block(self, x: int, d: Degree) -> Block:
        """The block on x's root-to-leaf path with the smallest degree >= d.

        A crisp leaf always qualifies (degree 1).  After flattening merges,
        the returned block is the representative top of its merged class.
        """
        cur = self.class_top(self.leaf_of[x])
        while cur.parent is not None:
            up = self.class_top(cur.parent)
            if up.degree < d:
                break
            cur = up
        return cur

    def flatten_and_find(self, x: int, d: Degree) -> Block:
        """find_block plus flattening of the located block (union-find merge).

        Intended for calls with non-increasing d across a run; the located
        block's internal structure is not needed afterwards, only its degree
        and representative.
        """
        found = self.find_block(x, d)
        self._flatten(found)
        return found

    def _flatten(self, top: Block) -> None:
        if top.fully_flat:
            return
        top.absorbed = True
        top.fully_flat = True
        stack = list(top.children)
        while stack:
            child = stack.pop()
            self._union_into(child, top)
            if child.absorbed:
                continue  # its subtree already lives in child's old class
            child.absorbed = True
            stack.extend(child.children)

    def set_repr_upward(self, block: Block, element: int) -> None:
        """Set the representative on block and on every ancestor that lacks one."""
        cur = self.class_top(block)
        while cur is not None and cur.repr is None:
            cur.repr = element
            cur = self.class_top(cur.parent) if cur.parent is not None else None

    def clear_reprs(self) -> None:
        for b in self._blocks:
            b.repr = None

    # read-only views ----------------------------------------------------

    def render(self, names: Sequence[str] | None = None) -> str:
        """Text form of the tree, e.g. ``{{a1}_1, {{a2}_1,{a3}_1}_0.4}_0``.

        Sibling crisp leaves are joined without a space; any mixed or fuzzy
        sibling list is joined with a comma and a space.
        """
        names = self.names if names is None else list(names)

        def go(block: Block) -> str:
            if block.is_crisp:
                inner = ",".join(names[x] for x in self.block_elements(block))
            else:
                sep = "," if all(c.is_crisp for c in block.children) else ", "
                inner = sep.join(go(c) for c in block.children)
            return f"{{{inner}}}_{block.degree}"

        return go(self.root)

    def to_equivalence(self) -> FuzzyRelation:
        """Reconstruct the fuzzy equivalence: pairs get their least-common-ancestor degree."""
        entries: Dict[Tuple[int, int], Degree] = {}
        for block in self._blocks:
            if block.is_crisp:
                elems = self.block_elements(block)
                for a in elems:
                    for b in elems:
                        entries[a, b] = ONE
            elif not block.degree.is_zero:
                kids = block.children
                for i in range(len(kids)):
                    ei = self.block_elements(kids[i])
                    for j in range(i + 1, len(kids)):
                        for a in ei:
                            for b in self.block_elements(kids[j]):
                                entries[a, b] = block.degree
                                entries[b, a] = block.degree
        return FuzzyRelation(self.n, self.n, entries)

    def __repr__(self) -> str:
        return f"CompactFuzzyPartition(n={self.n}, blocks={len(self._blocks)})"


def build_partition_from_matrix(
    matrix: np.ndarray,
    rank_degrees: Sequence[Degree],
    names: Sequence[str],
) -> CompactFuzzyPartition:
    """Build the block tree from a dense rank matrix of a fuzzy equivalence.

    ``matrix[i, j]`` is an index into ``rank_degrees``; the last rank must be
    degree 1.  Recursive splitting: take the minimal pair degree d, split by
    the crisp relation "degree > d", recurse into each class.
    """
    n = matrix.shape[0]
    one_rank = len(rank_degrees) - 1
    blocks: List[Block] = []
    order: List[int] = []

    def new_block(degree: Degree, parent: Optional[Block]) -> Block:
        b = Block(len(blocks), degree, parent)
        blocks.append(b)
        return b

    def build(idx: np.ndarray, parent: Optional[Block]) -> Block:
        sub = matrix[np.ix_(idx, idx)]
        d = int(sub.min())
        if d == one_rank:
            b = new_block(ONE, parent)
            b.lo = len(order)
            order.extend(int(x) for x in np.sort(idx))
            b.hi = len(order)
            return b
        b = new_block(rank_degrees[d], parent)
        b.lo = len(order)
        over = sub > d
        # rows of an equivalence are identical exactly on one class
        _, inverse = np.unique(over, axis=0, return_inverse=True)
        groups: Dict[int, List[int]] = {}
        for local, g in enumerate(inverse):
            groups.setdefault(int(g), []).append(local)
        ordered = sorted(groups.values(), key=lambda locs: int(idx[locs].min()))
        for locs in ordered:
            child = build(idx[locs], b)
            b.children.append(child)
        b.hi = len(order)
        return b

    root = build(np.arange(n), None)
    return CompactFuzzyPartition(root, blocks, order, names)


def build_compact_partition(
    phi: FuzzyRelation,
    names: Sequence[str] | None = None,
) -> CompactFuzzyPartition:
    """Block tree of a fuzzy equivalence given as a sparse relation."""
    if not phi.is_square:
        raise ValueError("a fuzzy equivalence must be square")
    if not is_fuzzy_equivalence(phi):
        raise ValueError("input relation is not a fuzzy equivalence")
    n = phi.rows
    if names is None:
        names = [str(i) for i in range(n)]
    scaled = sorted({0, SCALE} | {d.scaled for d in phi._entries.values()})
    rank_of = {s: r for r, s in enumerate(scaled)}
    matrix = np.zeros((n, n), dtype=np.int64)
    for (i, j), d in phi._entries.items():
        matrix[i, j] = rank_of[d.scaled]
    rank_degrees = [Degree.from_scaled(s) for s in scaled]
    return build_partition_from_matrix(matrix, rank_degrees, names)


def partition_to_equivalence(partition: CompactFuzzyPartition) -> FuzzyRelation:
    return partition.to_equivalence()


def find_block(partition: CompactFuzzyPartition, x: int, d: Degree) -> Block:
    if d.is_zero:
        raise ValueError("find_block requires a positive degree")
    return partition.find_block(x, d)


def flatten_and_find(partition: CompactFuzzyPartition, x: int, d: Degree) -> Block:
    if d.is_zero:
        raise ValueError("flatten_and_find requires a positive degree")
    return partition.flatten_and_find(x, d)


def set_repr_upward(partition: CompactFuzzyPartition, block: Block, element: int) -> None:
    partition.set_repr_upward(block, element)
