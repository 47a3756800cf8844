"""Compile a forest, a query box and a forbidden class into CNF, and back.

The encoding is an order encoding over the forest's split thresholds: for each
feature f with sorted distinct thresholds T_f, Boolean variable b(f,k) means
"value <= T_f[k]". A satisfying assignment therefore pins every comparison any
tree can make, which identifies one leaf per tree, one vote per tree, and via
a sequential-counter cardinality constraint, whether the majority flips away
from the forbidden class. Decoding reads the lowest true order variable per
feature back into a half-open interval; every point inside the decoded product
of intervals provably receives the flipped prediction.

Clause groups:
  order axioms   b(f,k) -> b(f,k+1)
  box clamps     unit clauses for thresholds outside the query box
  leaf semantics leaf variable <-> conjunction of its root-path literals,
                 plus one coverage clause per tree
  votes          vote variable <-> disjunction of that class's leaves
  majority       count(votes for the winning class) >= strict-majority bound,
                 which also realizes the smaller-index tie-break
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .forest import Forest, predict_forest


class EncodingError(ValueError):
    pass


class UnsupportedClassCount(EncodingError):
    pass


class InconsistentAssignment(EncodingError):
    """Order axioms violated by a supposedly satisfying assignment."""


@dataclass(frozen=True)
class OrderVar:
    feature: int
    rank: int
    threshold: float


@dataclass(frozen=True)
class LeafVar:
    tree: int
    node: int


@dataclass(frozen=True)
class VoteVar:
    tree: int
    cls: int


@dataclass(frozen=True)
class CounterVar:
    group: str
    position: int
    count: int


@dataclass(frozen=True)
class CnfFormula:
    n_vars: int
    clauses: tuple          # tuple of tuples of signed variable ids
    var_meta: dict          # variable id -> one of the *Var roles above


@dataclass(frozen=True)
class ThresholdMap:
    """Per feature, the sorted distinct thresholds used anywhere in the forest."""

    per_feature: tuple  # tuple of tuples of floats

    def thresholds(self, feature: int) -> tuple:
        return self.per_feature[feature]


def extract_thresholds(forest: Forest) -> ThresholdMap:
    sets: list[set] = [set() for _ in range(forest.n_features)]
    for tree in forest.trees:
        for node in tree:
            if not node.is_leaf:
                sets[node.feature].add(node.threshold)
    return ThresholdMap(tuple(tuple(sorted(s)) for s in sets))


@dataclass(frozen=True)
class NeighborhoodBox:
    """Closed per-feature box around a query point.

    Half-width is delta * range(f) in each coordinate, clipped to the training
    feature ranges unless clip is disabled, always widened to keep the center
    inside. Frozen features (and zero-range features) collapse to the center
    value.
    """

    center: tuple
    delta: float
    lo: tuple
    hi: tuple
    frozen: frozenset


def make_box(center: Sequence[float], delta: float, forest: Forest,
             frozen: frozenset = frozenset(), clip: bool = True) -> NeighborhoodBox:
    if delta < 0:
        raise EncodingError("delta must be non-negative")
    center = tuple(float(v) for v in center)
    lo, hi = [], []
    for f, x in enumerate(center):
        rmin, rmax = forest.feature_ranges[f]
        width = rmax - rmin
        if f in frozen or width == 0.0:
            lo.append(x)
            hi.append(x)
            continue
        a = x - delta * width
        b = x + delta * width
        if clip:
            a = max(a, rmin)
            b = min(b, rmax)
        # a test point can lie outside the training ranges; the box must
        # still contain it or the search could never start
        lo.append(min(a, x))
        hi.append(max(b, x))
    return NeighborhoodBox(center=center, delta=float(delta),
                           lo=tuple(lo), hi=tuple(hi), frozen=frozenset(frozen))


def cardinality_at_least(var_ids: Sequence[int], k: int, aux_start: int,
                         group: str = "atleast"):
    """Clauses forcing >= k of var_ids true (sequential-counter encoding).

    Returns (clauses, aux_meta) where aux_meta maps new variable ids, starting
    at aux_start, to CounterVar roles. Encoded as the Sinz sequential at-most
    counter over the negated literals (at most n-k of them true).
    """
    n = len(var_ids)
    if not 0 <= k <= n:
        raise EncodingError(f"need 0 <= k <= {n}, got {k}")
    if k == 0:
        return [], {}
    if k == n:
        return [(v,) for v in var_ids], {}

    m = n - k  # at-most bound over negated inputs
    lits = [-v for v in var_ids]
    aux = {}

    def s(i: int, j: int) -> int:
        # 1 <= i <= n-1, 1 <= j <= m: "at least j of the first i inputs are true"
        vid = aux_start + (i - 1) * m + (j - 1)
        if vid not in aux:
            aux[vid] = CounterVar(group=group, position=i, count=j)
        return vid

    clauses = [(-lits[0], s(1, 1))]
    for j in range(2, m + 1):
        clauses.append((-s(1, j),))
    for i in range(2, n):
        x = lits[i - 1]
        clauses.append((-x, s(i, 1)))
        clauses.append((-s(i - 1, 1), s(i, 1)))
        for j in range(2, m + 1):
            clauses.append((-x, -s(i - 1, j - 1), s(i, j)))
            clauses.append((-s(i - 1, j), s(i, j)))
        clauses.append((-x, -s(i - 1, m)))
    clauses.append((-lits[n - 1], -s(n - 1, m)))
    return clauses, aux


def majority_bound(n_trees: int, winner: int) -> int:
    """Votes the winner class needs. Class 1 must beat class 0 outright;
    class 0 keeps ties (the smaller index wins a split vote)."""
    if winner == 1:
        return n_trees // 2 + 1
    return n_trees - n_trees // 2


class ForestEncoder:
    """Reusable encoder for one (forest, forbidden class) pair.

    Variable layout and every clause except the box clamps depend only on the
    forest, so they are built once; encode_box appends the per-box unit
    clauses. clamp_profile gives a hashable fingerprint of those units: boxes
    with equal profiles produce identical formulas.
    """

    def __init__(self, forest: Forest, tmap: ThresholdMap, forbidden_class: int):
        if forest.n_classes != 2:
            raise UnsupportedClassCount(
                f"encoder supports binary forests, got {forest.n_classes} classes")
        if forbidden_class not in (0, 1):
            raise EncodingError("forbidden_class must be 0 or 1")
        self.forest = forest
        self.tmap = tmap
        self.forbidden_class = forbidden_class

        self.var_meta: dict = {}
        self.order_var: list[list[int]] = []  # feature -> rank -> var id
        self._rank_of = [
            {t: k for k, t in enumerate(ts)} for ts in tmap.per_feature
        ]
        self._ts_arrays = [np.array(ts, dtype=np.float64) for ts in tmap.per_feature]
        next_id = 1
        for f in range(forest.n_features):
            ids = []
            for k, t in enumerate(tmap.per_feature[f]):
                self.var_meta[next_id] = OrderVar(feature=f, rank=k, threshold=t)
                ids.append(next_id)
                next_id += 1
            self.order_var.append(ids)

        static: list[tuple] = []
        # (a) order axioms
        for ids in self.order_var:
            for a, b in zip(ids, ids[1:]):
                static.append((-a, b))

        # (c) leaf semantics, by preorder path enumeration
        self.leaf_vars: list[list[tuple]] = []  # tree -> [(var id, class)]
        for t, tree in enumerate(forest.trees):
            leaves = []

            def walk(node_idx: int, path: tuple):
                nonlocal next_id
                node = tree[node_idx]
                if node.is_leaf:
                    lv = next_id
                    next_id += 1
                    self.var_meta[lv] = LeafVar(tree=t, node=node_idx)
                    leaves.append((lv, node.label))
                    for lit in path:
                        static.append((-lv, lit))
                    static.append((lv,) + tuple(-lit for lit in path))
                    return
                k = self._rank_of[node.feature][node.threshold]
                b = self.order_var[node.feature][k]
                walk(node.left, path + (b,))
                walk(node.right, path + (-b,))

            walk(0, ())
            static.append(tuple(lv for lv, _ in leaves))  # coverage
            self.leaf_vars.append(leaves)

        # (d) votes
        self.vote_vars: list[list[int]] = []
        for t in range(forest.n_trees):
            per_class = []
            for cls in (0, 1):
                vv = next_id
                next_id += 1
                self.var_meta[vv] = VoteVar(tree=t, cls=cls)
                members = [lv for lv, c in self.leaf_vars[t] if c == cls]
                for lv in members:
                    static.append((-lv, vv))
                static.append((-vv,) + tuple(members))
                per_class.append(vv)
            self.vote_vars.append(per_class)

        # (e) strict majority for the complement class
        winner = 1 - forbidden_class
        need = majority_bound(forest.n_trees, winner)
        winner_votes = [votes[winner] for votes in self.vote_vars]
        card_clauses, aux = cardinality_at_least(
            winner_votes, need, next_id, group=f"votes_class{winner}")
        static.extend(card_clauses)
        self.var_meta.update(aux)
        next_id += len(aux)

        self.n_vars = next_id - 1
        self.static_clauses = tuple(static)

    def clamp_profile(self, box: NeighborhoodBox) -> tuple:
        """Per-feature (first free rank, first forced-true rank); equal
        profiles imply byte-identical encodings."""
        profile = []
        for f, ts in enumerate(self._ts_arrays):
            start = np.searchsorted(ts, box.lo[f], side="left")  # first rank with t >= lo
            stop = np.searchsorted(ts, box.hi[f], side="left")   # first rank with t >= hi
            profile.append((int(start), int(stop)))
        return tuple(profile)

    def clamp_clauses(self, box: NeighborhoodBox) -> list[tuple]:
        units = []
        for (start, stop), ids in zip(self.clamp_profile(box), self.order_var):
            for vid in ids[:start]:        # threshold below the box: "<= t" is false
                units.append((-vid,))
            for vid in ids[stop:]:         # threshold at/above the box top: true
                units.append((vid,))
        return units

    def encode_box(self, box: NeighborhoodBox) -> CnfFormula:
        clauses = list(self.static_clauses)
        clauses.extend(self.clamp_clauses(box))
        return CnfFormula(n_vars=self.n_vars, clauses=tuple(clauses),
                          var_meta=self.var_meta)


def encode(forest: Forest, tmap: ThresholdMap, box: NeighborhoodBox,
           forbidden_class: int) -> CnfFormula:
    """One-shot encoding; satisfiable iff some point in the box is predicted
    anything other than forbidden_class."""
    if predict_forest(forest, box.center) != forbidden_class:
        raise EncodingError("forbidden_class must equal the prediction at the box center")
    return ForestEncoder(forest, tmap, forbidden_class).encode_box(box)


@dataclass(frozen=True)
class FeatureInterval:
    """Interval for one feature; the upper end is always closed."""

    lo: float
    hi: float
    lo_open: bool

    def contains(self, v: float) -> bool:
        above = v > self.lo if self.lo_open else v >= self.lo
        return above and v <= self.hi


def decode_assignment(formula: CnfFormula, assignment: Sequence[bool],
                      tmap: ThresholdMap, box: NeighborhoodBox) -> list[FeatureInterval]:
    """Map a satisfying assignment back to one interval per feature.

    The lowest true order variable b(f,k) puts the feature in
    (T_f[k-1], T_f[k]], intersected with the box. assignment[i] is the value
    of variable i+1.
    """
    n_features = len(tmap.per_feature)
    ranks: list[dict] = [dict() for _ in range(n_features)]
    for vid, meta in formula.var_meta.items():
        if isinstance(meta, OrderVar):
            ranks[meta.feature][meta.rank] = assignment[vid - 1]

    intervals = []
    for f in range(n_features):
        ts = tmap.per_feature[f]
        values = [ranks[f][k] for k in range(len(ts))]
        if True in values:
            lowest = values.index(True)
            if not all(values[lowest:]):
                raise InconsistentAssignment(f"order axioms violated on feature {f}")
        else:
            lowest = len(ts)

        box_lo, box_hi = box.lo[f], box.hi[f]
        hi = min(ts[lowest], box_hi) if lowest < len(ts) else box_hi
        if lowest > 0 and ts[lowest - 1] >= box_lo:
            intervals.append(FeatureInterval(lo=ts[lowest - 1], hi=hi, lo_open=True))
        else:
            intervals.append(FeatureInterval(lo=box_lo, hi=hi, lo_open=False))
    return intervals


def to_dimacs(formula: CnfFormula) -> str:
    """Standard DIMACS CNF; variable roles ride along as 'c meta' comments."""
    lines = [f"p cnf {formula.n_vars} {len(formula.clauses)}"]
    for vid in sorted(formula.var_meta):
        meta = formula.var_meta[vid]
        payload = {"kind": type(meta).__name__, **meta.__dict__}
        lines.append(f"c meta {vid} {json.dumps(payload)}")
    for clause in formula.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


_META_KINDS = {"OrderVar": OrderVar, "LeafVar": LeafVar,
               "VoteVar": VoteVar, "CounterVar": CounterVar}


def parse_dimacs(text: str) -> CnfFormula:
    """Inverse of to_dimacs; tolerates clauses split across lines and foreign
    comments, restores 'c meta' roles when present."""
    n_vars = None
    clauses: list[tuple] = []
    var_meta: dict = {}
    pending: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split(maxsplit=3)
            if len(parts) == 4 and parts[1] == "meta":
                try:
                    payload = json.loads(parts[3])
                    kind = _META_KINDS[payload.pop("kind")]
                    var_meta[int(parts[2])] = kind(**payload)
                except (ValueError, KeyError, TypeError):
                    pass  # foreign comment that happened to start with "meta"
            continue
        if line.startswith("p"):
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise ValueError(f"malformed problem line: {line!r}")
            n_vars = int(fields[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(pending))
                pending = []
            else:
                pending.append(lit)
    if pending:
        raise ValueError("last clause is not 0-terminated")
    if n_vars is None:
        raise ValueError("missing problem line")
    seen_max = max((abs(l) for cl in clauses for l in cl), default=0)
    if seen_max > n_vars:
        raise ValueError(f"clause references variable {seen_max} > {n_vars}")
    return CnfFormula(n_vars=n_vars, clauses=tuple(clauses), var_meta=var_meta)
