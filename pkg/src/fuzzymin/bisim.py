"""Greatest fuzzy bisimulations between finite fuzzy interpretations.

The interpretations are first encoded as fuzzy labeled graphs (vertex labels
for atomic concepts and, with nominals, for individuals; edge labels for
basic roles).  The greatest bisimulation is then computed as a greatest
fixpoint by monotone refinement over a matrix of degree ranks: every entry
stays inside the finite set of input degrees plus {0, 1} and only ever
decreases, so the sweep terminates and Knaster-Tarski gives the greatest
fixpoint regardless of processing order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    Degree,
    FuzzyRelation,
    FuzzySet,
    ONE,
    SCALE,
    ZERO,
    biresiduum,
    tnorm,
)
from .model import (
    BasicRole,
    FuzzyInterpretation,
    basic_roles,
    normalize_features,
)
from .partition import CompactFuzzyPartition, build_partition_from_matrix


@dataclass(frozen=True)
class FuzzyLabeledGraph:
    """Vertices with fuzzy label sets and fuzzy labeled edges."""

    n: int
    vertex_labels: Tuple[str, ...]
    edge_labels: Tuple[BasicRole, ...]
    labels: Dict[str, FuzzySet]        # label token -> fuzzy set over vertices
    edges: Dict[BasicRole, FuzzyRelation]

    def vertex_label(self, v: int, token: str) -> Degree:
        got = self.labels.get(token)
        return got.value(v) if got is not None else ZERO

    def label_of(self, v: int) -> Dict[str, Degree]:
        out = {}
        for token in self.vertex_labels:
            d = self.vertex_label(v, token)
            if not d.is_zero:
                out[token] = d
        return out


def to_fuzzy_graph(interp: FuzzyInterpretation, features: Iterable[str] | None) -> FuzzyLabeledGraph:
    """Encode an interpretation as a fuzzy labeled graph.

    Vertex labels are the concept names, plus one indicator label per
    individual name when nominals are enabled.  Edge labels are the basic
    roles (role names, plus inverses when inverse roles are enabled).
    """
    fs = normalize_features(features)
    sig = interp.signature
    n = interp.n
    vertex_labels = list(sig.concept_names)
    labels: Dict[str, FuzzySet] = {}
    for cname in sig.concept_names:
        labels[cname] = interp.concept_set(cname)
    if "O" in fs:
        vertex_labels.extend(sig.individual_names)
        for a in sig.individual_names:
            labels[a] = FuzzySet(n, {interp.individual_element(a): ONE})
    edge_labels = basic_roles(sig, fs)
    edges = {role: interp.basic_role_relation(role) for role in edge_labels}
    return FuzzyLabeledGraph(n, tuple(vertex_labels), edge_labels, labels, edges)


@dataclass
class BisimResult:
    """Greatest bisimulation plus the number of refinement sweeps it took."""

    Z: FuzzyRelation
    iterations: int


# --------------------------------------------------------------------------
# rank-matrix engine
# --------------------------------------------------------------------------


def _universe(graphs: Sequence[FuzzyLabeledGraph]) -> List[int]:
    scaled = {0, SCALE}
    for g in graphs:
        for fset in g.labels.values():
            scaled.update(d.scaled for _, d in fset.items())
        for rel in g.edges.values():
            scaled.update(d.scaled for _, d in rel.items())
    return sorted(scaled)


def _dtype_for(nranks: int):
    return np.int16 if nranks < 2 ** 15 - 1 else np.int32


class _Adjacency:
    """Per-role CSR-ish arrays: for each source, its targets and edge ranks."""

    def __init__(self, rel: FuzzyRelation, rank_of: Dict[int, int], dtype):
        self.out: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        self.preds_of: Dict[int, List[int]] = {}
        for x in rel.sources():
            pairs = rel.successors(x)
            dsts = np.fromiter((j for j, _ in pairs), dtype=np.int64, count=len(pairs))
            ws = np.fromiter((rank_of[d.scaled] for _, d in pairs), dtype=dtype, count=len(pairs))
            self.out[x] = (dsts, ws)
            for j, _ in pairs:
                self.preds_of.setdefault(j, []).append(x)


def _label_vector(g: FuzzyLabeledGraph, token: str, rank_of: Dict[int, int], dtype) -> np.ndarray:
    vec = np.zeros(g.n, dtype=dtype)
    fset = g.labels.get(token)
    if fset is not None:
        for v, d in fset.items():
            vec[v] = rank_of[d.scaled]
    return vec


def _init_matrix(g1: FuzzyLabeledGraph, g2: FuzzyLabeledGraph, rank_of: Dict[int, int], rank_one: int, dtype) -> np.ndarray:
    z = np.full((g1.n, g2.n), rank_one, dtype=dtype)
    tokens = g1.vertex_labels
    for token in tokens:
        v1 = _label_vector(g1, token, rank_of, dtype)
        v2 = _label_vector(g2, token, rank_of, dtype)
        eq = v1[:, None] == v2[None, :]
        mn = np.minimum(v1[:, None], v2[None, :])
        np.minimum(z, np.where(eq, dtype(rank_one), mn), out=z)
    return z


def _apply_forward_rows(
    z: np.ndarray,
    s: np.ndarray,
    adj: _Adjacency,
    rows: Iterable[int],
    rank_one: int,
    changed_rows: np.ndarray,
) -> None:
    """Tighten z rows by the forward role condition, given the current s table.

    ``s[y, x2]`` is the best transfer degree for moving to y on the left while
    x2 answers on the right; an edge of rank w out of x1 into y forces
    z[x1, x2] <= s[y, x2] wherever w exceeds s[y, x2].
    """
    for x1 in rows:
        got = adj.out.get(x1)
        if got is None:
            continue
        dsts, ws = got
        srows = s[dsts, :]
        bounds = np.where(srows < ws[:, None], srows, rank_one).min(axis=0)
        old = z[x1]
        new = np.minimum(old, bounds)
        if not np.array_equal(new, old):
            z[x1] = new
            changed_rows[x1] = True


def _update_s_rows(
    z: np.ndarray,
    s: np.ndarray,
    adj2: _Adjacency,
    rows: np.ndarray,
) -> None:
    """Recompute s[rows, x2] = max over edges (x2 -> y2, w) of min(z[rows, y2], w)."""
    if rows.size == 0:
        return
    zd = z[rows, :]
    for x2, (dsts, ws) in adj2.out.items():
        cols = zd[:, dsts]
        acc = np.minimum(cols, ws[None, :]).max(axis=1)
        s[rows, x2] = acc


def _bisim_matrix_auto(g: FuzzyLabeledGraph, rank_of: Dict[int, int], rank_one: int, dtype) -> Tuple[np.ndarray, int]:
    """Greatest auto-bisimulation matrix: symmetric fast path with dirty rows.

    The greatest fixpoint is symmetric, so the backward condition on (x, x')
    equals the forward condition on (x', x); keeping z symmetric after every
    sweep lets the engine apply only forward bounds.
    """
    n = g.n
    z = _init_matrix(g, g, rank_of, rank_one, dtype)
    adjs = {role: _Adjacency(rel, rank_of, dtype) for role, rel in g.edges.items() if rel.support_size()}
    s_tables = {role: np.zeros((n, n), dtype=dtype) for role in adjs}
    dirty = np.ones(n, dtype=bool)
    sweeps = 0
    while dirty.any():
        sweeps += 1
        dirty_idx = np.flatnonzero(dirty)
        changed = np.zeros(n, dtype=bool)
        for role, adj in adjs.items():
            _update_s_rows(z, s_tables[role], adj, dirty_idx)
            check = set()
            for y in dirty_idx:
                check.update(adj.preds_of.get(int(y), ()))
            _apply_forward_rows(z, s_tables[role], adj, sorted(check), rank_one, changed)
        zt = z.T.copy()
        asym = z > zt
        if asym.any():
            np.minimum(z, zt, out=z)
            changed |= asym.any(axis=1)
        dirty = changed
    return z, sweeps


def _bisim_matrix_general(
    g1: FuzzyLabeledGraph,
    g2: FuzzyLabeledGraph,
    rank_of: Dict[int, int],
    rank_one: int,
    dtype,
) -> Tuple[np.ndarray, int]:
    """Greatest bisimulation matrix between two graphs: full sweeps, both directions."""
    n1, n2 = g1.n, g2.n
    z = _init_matrix(g1, g2, rank_of, rank_one, dtype)
    roles = [r for r in g1.edge_labels if g1.edges[r].support_size() or g2.edges[r].support_size()]
    adj1 = {role: _Adjacency(g1.edges[role], rank_of, dtype) for role in roles}
    adj2 = {role: _Adjacency(g2.edges[role], rank_of, dtype) for role in roles}
    all_rows1 = np.arange(n1)
    all_rows2 = np.arange(n2)
    sweeps = 0
    while True:
        sweeps += 1
        before = z.copy()
        for role in roles:
            s = np.zeros((n1, n2), dtype=dtype)
            _update_s_rows(z, s, adj2[role], all_rows1)
            changed = np.zeros(n1, dtype=bool)
            _apply_forward_rows(z, s, adj1[role], adj1[role].out.keys(), rank_one, changed)
            # backward direction: same computation on the transposed matrix
            zt = np.ascontiguousarray(z.T)
            t = np.zeros((n2, n1), dtype=dtype)
            _update_s_rows(zt, t, adj1[role], all_rows2)
            changed2 = np.zeros(n2, dtype=bool)
            _apply_forward_rows(zt, t, adj2[role], adj2[role].out.keys(), rank_one, changed2)
            np.minimum(z, zt.T, out=z)
        if np.array_equal(z, before):
            break
    return z, sweeps


def _matrix_to_relation(z: np.ndarray, rank_degrees: Sequence[Degree]) -> FuzzyRelation:
    entries = {}
    for i, j in zip(*np.nonzero(z)):
        entries[int(i), int(j)] = rank_degrees[int(z[i, j])]
    return FuzzyRelation(z.shape[0], z.shape[1], entries)


def _auto_bisim_matrix(
    interp: FuzzyInterpretation, features: Iterable[str] | None
) -> Tuple[np.ndarray, List[Degree], int]:
    g = to_fuzzy_graph(interp, features)
    scaled = _universe([g])
    rank_of = {s: r for r, s in enumerate(scaled)}
    dtype = _dtype_for(len(scaled))
    z, sweeps = _bisim_matrix_auto(g, rank_of, len(scaled) - 1, dtype)
    return z, [Degree.from_scaled(s) for s in scaled], sweeps


def auto_partition(
    interp: FuzzyInterpretation, features: Iterable[str] | None
) -> Tuple[CompactFuzzyPartition, int]:
    """Compact fuzzy partition of the greatest fuzzy auto-bisimulation."""
    z, rank_degrees, sweeps = _auto_bisim_matrix(interp, features)
    return build_partition_from_matrix(z, rank_degrees, interp.domain), sweeps


def greatest_bisimulation(
    interp1: FuzzyInterpretation,
    interp2: FuzzyInterpretation,
    features: Iterable[str] | None = None,
) -> BisimResult:
    """Greatest fuzzy bisimulation between two interpretations over one signature."""
    if not interp1.signature.same_names(interp2.signature):
        raise ValueError("interpretations use different signatures")
    fs = normalize_features(features)
    if interp1 is interp2:
        z, rank_degrees, sweeps = _auto_bisim_matrix(interp1, fs)
        return BisimResult(_matrix_to_relation(z, rank_degrees), sweeps)
    g1 = to_fuzzy_graph(interp1, fs)
    g2 = to_fuzzy_graph(interp2, fs)
    scaled = _universe([g1, g2])
    rank_of = {s: r for r, s in enumerate(scaled)}
    dtype = _dtype_for(len(scaled))
    z, sweeps = _bisim_matrix_general(g1, g2, rank_of, len(scaled) - 1, dtype)
    rank_degrees = [Degree.from_scaled(s) for s in scaled]
    return BisimResult(_matrix_to_relation(z, rank_degrees), sweeps)


def greatest_auto_bisimulation(
    interp: FuzzyInterpretation, features: Iterable[str] | None = None
) -> BisimResult:
    return greatest_bisimulation(interp, interp, features)


def bisimilarity_degree(
    interp1: FuzzyInterpretation,
    interp2: FuzzyInterpretation,
    features: Iterable[str] | None = None,
) -> Degree:
    """min over individuals a of Z(a in the first, a in the second) for the greatest Z."""
    result = greatest_bisimulation(interp1, interp2, features)
    best = ONE
    for a in interp1.signature.individual_names:
        d = result.Z.value(interp1.individual_element(a), interp2.individual_element(a))
        if d < best:
            best = d
    return best


# --------------------------------------------------------------------------
# condition checking and the small reference engine
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BisimViolation:
    condition: int
    x: str
    x_prime: str
    role: Optional[BasicRole]
    witness: Optional[str]
    detail: str

    def __str__(self) -> str:
        return f"condition ({self.condition}) at ({self.x}, {self.x_prime}): {self.detail}"


def check_bisimulation(
    Z: FuzzyRelation,
    interp1: FuzzyInterpretation,
    interp2: FuzzyInterpretation,
    features: Iterable[str] | None = None,
) -> List[BisimViolation]:
    """Enumerate every violated instance of the four bisimulation conditions.

    Pairs with Z = 0 satisfy everything vacuously, so only the support of Z
    is examined.  Condition (4) applies only when nominals are enabled.
    """
    fs = normalize_features(features)
    if (Z.rows, Z.cols) != (interp1.n, interp2.n):
        raise ValueError("relation shape does not match the interpretation domains")
    sig = interp1.signature
    roles = basic_roles(sig, fs)
    out: List[BisimViolation] = []
    for (x, xp), zval in Z.items():
        name_x = interp1.element_name(x)
        name_xp = interp2.element_name(xp)
        for cname in sig.concept_names:
            bound = biresiduum(interp1.concept_set(cname).value(x), interp2.concept_set(cname).value(xp))
            if zval > bound:
                out.append(
                    BisimViolation(
                        1, name_x, name_xp, None, cname,
                        f"Z={zval} exceeds label bound {bound} for concept {cname}",
                    )
                )
        for role in roles:
            rel1 = interp1.basic_role_relation(role)
            rel2 = interp2.basic_role_relation(role)
            for y, dxy in rel1.successors(x):
                lhs = tnorm(zval, dxy)
                if lhs.is_zero:
                    continue
                best = ZERO
                for yp, dxpyp in rel2.successors(xp):
                    cand = tnorm(Z.value(y, yp), dxpyp)
                    if cand > best:
                        best = cand
                if lhs > best:
                    out.append(
                        BisimViolation(
                            2, name_x, name_xp, role, interp1.element_name(y),
                            f"forward transfer over {role} to {interp1.element_name(y)}: "
                            f"{lhs} > {best}",
                        )
                    )
            for yp, dxpyp in rel2.successors(xp):
                lhs = tnorm(zval, dxpyp)
                if lhs.is_zero:
                    continue
                best = ZERO
                for y, dxy in rel1.successors(x):
                    cand = tnorm(Z.value(y, yp), dxy)
                    if cand > best:
                        best = cand
                if lhs > best:
                    out.append(
                        BisimViolation(
                            3, name_x, name_xp, role, interp2.element_name(yp),
                            f"backward transfer over {role} to {interp2.element_name(yp)}: "
                            f"{lhs} > {best}",
                        )
                    )
        if "O" in fs:
            for a in sig.individual_names:
                here = x == interp1.individual_element(a)
                there = xp == interp2.individual_element(a)
                if here != there and not zval.is_zero:
                    out.append(
                        BisimViolation(
                            4, name_x, name_xp, None, a,
                            f"Z={zval} but the name {a} marks only one side",
                        )
                    )
    return out


def greatest_bisimulation_reference(
    interp1: FuzzyInterpretation,
    interp2: FuzzyInterpretation,
    features: Iterable[str] | None = None,
    pair_order: Optional[Sequence[Tuple[int, int]]] = None,
) -> FuzzyRelation:
    """Small, order-parameterized refinement engine used as a test oracle.

    Processes pairs in the given order (Gauss-Seidel style); the greatest
    fixpoint is unique, so any order converges to the same relation.
    """
    if not interp1.signature.same_names(interp2.signature):
        raise ValueError("interpretations use different signatures")
    fs = normalize_features(features)
    g1 = to_fuzzy_graph(interp1, fs)
    g2 = to_fuzzy_graph(interp2, fs)
    n1, n2 = g1.n, g2.n
    pairs = list(pair_order) if pair_order is not None else [
        (x, xp) for x in range(n1) for xp in range(n2)
    ]

    z: List[List[Degree]] = [[ONE] * n2 for _ in range(n1)]
    for token in g1.vertex_labels:
        for x in range(n1):
            for xp in range(n2):
                b = biresiduum(g1.vertex_label(x, token), g2.vertex_label(xp, token))
                if b < z[x][xp]:
                    z[x][xp] = b

    roles = [r for r in g1.edge_labels]

    def refine_pair(x: int, xp: int) -> bool:
        cur = z[x][xp]
        if cur.is_zero:
            return False
        new = cur
        for role in roles:
            rel1, rel2 = g1.edges[role], g2.edges[role]
            for y, dxy in rel1.successors(x):
                best = ZERO
                for yp, d2 in rel2.successors(xp):
                    cand = tnorm(z[y][yp], d2)
                    if cand > best:
                        best = cand
                if dxy > best and best < new:
                    new = best
            for yp, dxpyp in rel2.successors(xp):
                best = ZERO
                for y, d1 in rel1.successors(x):
                    cand = tnorm(z[y][yp], d1)
                    if cand > best:
                        best = cand
                if dxpyp > best and best < new:
                    new = best
        if new < cur:
            z[x][xp] = new
            return True
        return False

    changed = True
    while changed:
        changed = False
        for x, xp in pairs:
            if refine_pair(x, xp):
                changed = True

    entries = {}
    for x in range(n1):
        for xp in range(n2):
            if not z[x][xp].is_zero:
                entries[x, xp] = z[x][xp]
    return FuzzyRelation(n1, n2, entries)
