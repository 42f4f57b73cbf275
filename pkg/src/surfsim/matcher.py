"""Exact minimum-weight perfect matching.

The solver is Edmonds' primal-dual blossom algorithm in its O(n^3) form:
alternating trees are grown from every exposed vertex, odd cycles of
S-vertices are shrunk into blossoms, and dual variables are adjusted until
an augmenting path becomes tight. Minimum-weight perfect matching is solved
as maximum-weight maximum-cardinality matching on ``C - w``.

Weights are converted to exact integers (scaled by a power of two and
doubled) before solving, so ties stay exact ties and the dual arithmetic
never rounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

_SCALE_BITS = 40


@dataclass
class MatchingGraph:
    """Weighted undirected graph on ``n_nodes`` vertices.

    Build decoding instances with :meth:`with_boundary`, which adds one
    virtual boundary node per real node.
    """

    n_nodes: int
    edges: list[tuple[int, int, float]] = field(default_factory=list)
    n_real: int | None = None

    def add_edge(self, i: int, j: int, w: float) -> None:
        self.edges.append((i, j, float(w)))

    @classmethod
    def with_boundary(
        cls,
        n_real: int,
        real_edges: Iterable[tuple[int, int, float]],
        boundary_weights: Sequence[float],
    ) -> "MatchingGraph":
        """Real nodes ``0..n-1``, boundary node ``i + n`` paired with real ``i``.

        Boundary nodes are joined to each other at weight 0, so any number of
        real nodes can be matched to the boundary.
        """
        g = cls(2 * n_real, n_real=n_real)
        for i, j, w in real_edges:
            g.add_edge(i, j, w)
        for i, w in enumerate(boundary_weights):
            if w is not None and math.isfinite(w):
                g.add_edge(i, i + n_real, w)
        for i in range(n_real):
            for j in range(i + 1, n_real):
                g.add_edge(n_real + i, n_real + j, 0.0)
        return g


@dataclass
class Matching:
    pairs: list[tuple[int, int]]
    weight: float

    def partner(self) -> dict[int, int]:
        out = {}
        for i, j in self.pairs:
            out[i] = j
            out[j] = i
        return out


def _validate(graph: MatchingGraph) -> dict[tuple[int, int], float]:
    if graph.n_nodes % 2:
        raise ValueError(f"perfect matching needs an even node count, got {graph.n_nodes}")
    weights: dict[tuple[int, int], float] = {}
    for i, j, w in graph.edges:
        if not (0 <= i < graph.n_nodes and 0 <= j < graph.n_nodes) or i == j:
            raise ValueError(f"bad edge ({i}, {j})")
        if not math.isfinite(w) or w < 0:
            raise ValueError(f"edge weights must be finite and >= 0, got {w}")
        key = (min(i, j), max(i, j))
        weights[key] = min(w, weights.get(key, math.inf))
    return weights


def _scaled(weights: dict[tuple[int, int], float]) -> dict[tuple[int, int], int]:
    top = max(weights.values(), default=0.0)
    unit = 2.0 ** (_SCALE_BITS - max(0, math.frexp(top)[1]))
    return {k: 2 * round(w * unit) for k, w in weights.items()}


def _lexkey(pairs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    return sorted((min(p), max(p)) for p in pairs)


def min_weight_perfect_matching(graph: MatchingGraph, canonical: bool = True) -> Matching:
    """Globally minimum-weight perfect matching of ``graph``.

    With ``canonical`` set, ties between optimal matchings are broken towards
    the lexicographically smallest sorted pair list.

    Raises
    ------
    ValueError
        For an odd node count, invalid edges, or when no perfect matching
        exists.
    """
    weights = _validate(graph)
    n = graph.n_nodes
    if n == 0:
        return Matching([], 0.0)
    ints = _scaled(weights)
    pairs, total = _solve(n, ints)
    if canonical:
        pairs = _canonicalize(n, ints, total)
    pairs = _lexkey(pairs)
    return Matching(pairs, float(sum(weights[p] for p in pairs)))


def _solve(n: int, ints: dict[tuple[int, int], int], fixed: frozenset = frozenset()):
    """Optimal perfect matching on the vertices not in ``fixed``."""
    keep = [v for v in range(n) if v not in fixed]
    if not keep:
        return [], 0
    relabel = {v: k for k, v in enumerate(keep)}
    edges = [(relabel[i], relabel[j], w) for (i, j), w in ints.items() if i in relabel and j in relabel]
    if not edges:
        raise ValueError("graph has no perfect matching")
    top = max(w for _, _, w in edges) + 2
    mate = _Blossom(len(keep), [(i, j, top - w) for i, j, w in edges]).solve()
    if any(m < 0 for m in mate):
        raise ValueError("graph has no perfect matching")
    pairs = [(keep[v], keep[m]) for v, m in enumerate(mate) if v < m]
    return pairs, sum(ints[(min(p), max(p))] for p in pairs)


def _canonicalize(n: int, ints, total: int) -> list[tuple[int, int]]:
    adj: dict[int, list[int]] = {}
    for i, j in ints:
        adj.setdefault(i, []).append(j)
        adj.setdefault(j, []).append(i)
    fixed: set[int] = set()
    pairs: list[tuple[int, int]] = []
    spent = 0
    for v in range(n):
        if v in fixed:
            continue
        for u in sorted(adj.get(v, [])):
            if u in fixed:
                continue
            w = ints[(min(u, v), max(u, v))]
            try:
                _, rest = _solve(n, ints, frozenset(fixed | {u, v}))
            except ValueError:
                continue
            if spent + w + rest == total:
                pairs.append((v, u))
                fixed |= {u, v}
                spent += w
                break
        else:
            raise AssertionError("tie-break refinement lost optimality")
    return pairs


def brute_force_matching(graph: MatchingGraph) -> Matching:
    """Exhaustive minimum over all perfect matchings (at most 12 nodes)."""
    if graph.n_nodes > 12:
        raise ValueError("brute force is limited to 12 nodes")
    weights = _validate(graph)
    ints = _scaled(weights)
    best: tuple[int, list] | None = None

    def rec(free: list[int], acc: int, chosen: list):
        nonlocal best
        if not free:
            key = (acc, _lexkey(chosen))
            if best is None or key < best:
                best = key
            return
        v = free[0]
        for k in range(1, len(free)):
            u = free[k]
            w = ints.get((v, u))
            if w is None:
                continue
            rec(free[1:k] + free[k + 1 :], acc + w, chosen + [(v, u)])

    rec(list(range(graph.n_nodes)), 0, [])
    if best is None:
        raise ValueError("graph has no perfect matching")
    pairs = best[1]
    return Matching(pairs, float(sum(weights[p] for p in pairs)))


def all_perfect_matchings(n: int) -> Iterable[list[tuple[int, int]]]:
    """Every perfect matching of the complete graph on ``n`` vertices."""
    def rec(free):
        if not free:
            yield []
            return
        v = free[0]
        for k in range(1, len(free)):
            for rest in rec(free[1:k] + free[k + 1 :]):
                yield [(v, free[k])] + rest

    yield from rec(list(range(n)))


class _Blossom:
    """Maximum-weight maximum-cardinality matching on integer weights.

    Vertices are ``0..n-1``; blossom ids ``n..2n-1``. An edge ``k`` has two
    endpoint slots ``2k`` and ``2k + 1``; ``mate[v]`` stores the slot at the
    far end of v's matched edge.
    """

    FREE, S, T = 0, 1, 2

    def __init__(self, n: int, edges: list[tuple[int, int, int]]):
        self.n = n
        self.edges = edges
        self.end = [edges[p >> 1][p & 1] for p in range(2 * len(edges))]
        self.incident: list[list[int]] = [[] for _ in range(n)]
        for k, (i, j, _) in enumerate(edges):
            self.incident[i].append(2 * k + 1)
            self.incident[j].append(2 * k)
        top = max(w for _, _, w in edges)
        self.mate = [-1] * n
        self.label = [0] * (2 * n)
        self.label_end = [-1] * (2 * n)
        self.owner = list(range(n))  # outermost blossom of each vertex
        self.parent = [-1] * (2 * n)
        self.children: list[list[int] | None] = [None] * (2 * n)
        self.base = list(range(n)) + [-1] * n
        self.child_ends: list[list[int] | None] = [None] * (2 * n)
        self.best = [-1] * (2 * n)
        self.best_list: list[list[int] | None] = [None] * (2 * n)
        self.spare = list(range(n, 2 * n))
        self.dual = [top] * n + [0] * n
        self.allowed = [False] * len(edges)
        self.queue: list[int] = []

    def slack(self, k: int) -> int:
        i, j, w = self.edges[k]
        return self.dual[i] + self.dual[j] - 2 * w

    def leaves(self, b: int):
        if b < self.n:
            yield b
            return
        stack = [b]
        while stack:
            t = stack.pop()
            if t < self.n:
                yield t
            else:
                stack.extend(self.children[t])

    def assign(self, w: int, t: int, p: int) -> None:
        while True:
            b = self.owner[w]
            self.label[w] = self.label[b] = t
            self.label_end[w] = self.label_end[b] = p
            self.best[w] = self.best[b] = -1
            if t == self.S:
                self.queue.extend(self.leaves(b))
                return
            base_mate = self.mate[self.base[b]]
            w, t, p = self.end[base_mate], self.S, base_mate ^ 1

    def scan(self, v: int, w: int) -> int:
        """Trace back from v and w; return the common base or -1 (augmenting)."""
        marked = []
        base = -1
        while v != -1 or w != -1:
            b = self.owner[v]
            if self.label[b] & 4:
                base = self.base[b]
                break
            marked.append(b)
            self.label[b] = 5
            if self.label_end[b] == -1:
                v = -1
            else:
                v = self.end[self.label_end[b]]
                b = self.owner[v]
                v = self.end[self.label_end[b]]
            if w != -1:
                v, w = w, v
        for b in marked:
            self.label[b] = self.S
        return base

    def shrink(self, base: int, k: int) -> None:
        v, w, _ = self.edges[k]
        bb, bv, bw = self.owner[base], self.owner[v], self.owner[w]
        b = self.spare.pop()
        self.base[b] = base
        self.parent[b] = -1
        self.parent[bb] = b
        path: list[int] = []
        ends: list[int] = []
        while bv != bb:
            self.parent[bv] = b
            path.append(bv)
            ends.append(self.label_end[bv])
            bv = self.owner[self.end[self.label_end[bv]]]
        path.append(bb)
        path.reverse()
        ends.reverse()
        ends.append(2 * k)
        while bw != bb:
            self.parent[bw] = b
            path.append(bw)
            ends.append(self.label_end[bw] ^ 1)
            bw = self.owner[self.end[self.label_end[bw]]]
        self.children[b] = path
        self.child_ends[b] = ends
        self.label[b] = self.S
        self.label_end[b] = self.label_end[bb]
        self.dual[b] = 0
        for x in self.leaves(b):
            if self.label[self.owner[x]] == self.T:
                self.queue.append(x)
            self.owner[x] = b
        best_to = [-1] * (2 * self.n)
        for sub in path:
            if self.best_list[sub] is None:
                lists = [[p >> 1 for p in self.incident[x]] for x in self.leaves(sub)]
            else:
                lists = [self.best_list[sub]]
            for lst in lists:
                for kk in lst:
                    i, j, _ = self.edges[kk]
                    if self.owner[j] == b:
                        i, j = j, i
                    bj = self.owner[j]
                    if bj != b and self.label[bj] == self.S and (
                        best_to[bj] == -1 or self.slack(kk) < self.slack(best_to[bj])
                    ):
                        best_to[bj] = kk
            self.best_list[sub] = None
            self.best[sub] = -1
        self.best_list[b] = [kk for kk in best_to if kk != -1]
        self.best[b] = -1
        for kk in self.best_list[b]:
            if self.best[b] == -1 or self.slack(kk) < self.slack(self.best[b]):
                self.best[b] = kk

    def expand(self, b: int, final: bool) -> None:
        for s in self.children[b]:
            self.parent[s] = -1
            if s < self.n:
                self.owner[s] = s
            elif final and self.dual[s] == 0:
                self.expand(s, final)
            else:
                for x in self.leaves(s):
                    self.owner[x] = s
        if not final and self.label[b] == self.T:
            kids, ends = self.children[b], self.child_ends[b]
            entry = self.owner[self.end[self.label_end[b] ^ 1]]
            j = kids.index(entry)
            if j & 1:
                j -= len(kids)
                step, trick = 1, 0
            else:
                step, trick = -1, 1
            p = self.label_end[b]
            while j != 0:
                self.label[self.end[p ^ 1]] = 0
                self.label[self.end[ends[j - trick] ^ trick ^ 1]] = 0
                self.assign(self.end[p ^ 1], self.T, p)
                self.allowed[ends[j - trick] >> 1] = True
                j += step
                p = ends[j - trick] ^ trick
                self.allowed[p >> 1] = True
                j += step
            bv = kids[j]
            self.label[self.end[p ^ 1]] = self.label[bv] = self.T
            self.label_end[self.end[p ^ 1]] = self.label_end[bv] = p
            self.best[bv] = -1
            j += step
            while kids[j] != entry:
                bv = kids[j]
                if self.label[bv] == self.S:
                    j += step
                    continue
                hit = -1
                for x in self.leaves(bv):
                    if self.label[x] != 0:
                        hit = x
                        break
                if hit != -1:
                    self.label[hit] = 0
                    self.label[self.end[self.mate[self.base[bv]]]] = 0
                    self.assign(hit, self.T, self.label_end[hit])
                j += step
        self.label[b] = self.label_end[b] = -1
        self.children[b] = self.child_ends[b] = None
        self.base[b] = -1
        self.best_list[b] = None
        self.best[b] = -1
        self.spare.append(b)

    def rotate(self, b: int, v: int) -> None:
        """Flip matched/unmatched edges inside blossom b so v becomes its base."""
        t = v
        while self.parent[t] != b:
            t = self.parent[t]
        if t >= self.n:
            self.rotate(t, v)
        kids, ends = self.children[b], self.child_ends[b]
        i = j = kids.index(t)
        if i & 1:
            j -= len(kids)
            step, trick = 1, 0
        else:
            step, trick = -1, 1
        while j != 0:
            j += step
            t = kids[j]
            p = ends[j - trick] ^ trick
            if t >= self.n:
                self.rotate(t, self.end[p])
            j += step
            t = kids[j]
            if t >= self.n:
                self.rotate(t, self.end[p ^ 1])
            self.mate[self.end[p]] = p ^ 1
            self.mate[self.end[p ^ 1]] = p
        self.children[b] = kids[i:] + kids[:i]
        self.child_ends[b] = ends[i:] + ends[:i]
        self.base[b] = self.base[self.children[b][0]]

    def augment(self, k: int) -> None:
        v, w, _ = self.edges[k]
        for s, p in ((v, 2 * k + 1), (w, 2 * k)):
            while True:
                bs = self.owner[s]
                if bs >= self.n:
                    self.rotate(bs, s)
                self.mate[s] = p
                if self.label_end[bs] == -1:
                    break
                t = self.end[self.label_end[bs]]
                bt = self.owner[t]
                s = self.end[self.label_end[bt]]
                j = self.end[self.label_end[bt] ^ 1]
                if bt >= self.n:
                    self.rotate(bt, j)
                self.mate[j] = self.label_end[bt]
                p = self.label_end[bt] ^ 1

    def _grow(self) -> bool:
        """Process the queue; returns True once an augmentation happened."""
        S, T = self.S, self.T
        while self.queue:
            v = self.queue.pop()
            for p in self.incident[v]:
                k = p >> 1
                w = self.end[p]
                if self.owner[v] == self.owner[w]:
                    continue
                kslack = None
                if not self.allowed[k]:
                    kslack = self.slack(k)
                    if kslack <= 0:
                        self.allowed[k] = True
                if self.allowed[k]:
                    bw = self.owner[w]
                    if self.label[bw] == 0:
                        self.assign(w, T, p ^ 1)
                    elif self.label[bw] == S:
                        base = self.scan(v, w)
                        if base >= 0:
                            self.shrink(base, k)
                        else:
                            self.augment(k)
                            return True
                    elif self.label[w] == 0:
                        self.label[w] = T
                        self.label_end[w] = p ^ 1
                elif self.label[self.owner[w]] == S:
                    b = self.owner[v]
                    if self.best[b] == -1 or kslack < self.slack(self.best[b]):
                        self.best[b] = k
                elif self.label[w] == 0:
                    if self.best[w] == -1 or kslack < self.slack(self.best[w]):
                        self.best[w] = k
        return False

    def solve(self) -> list[int]:
        n = self.n
        S, T = self.S, self.T
        for _stage in range(n):
            self.label = [0] * (2 * n)
            self.best = [-1] * (2 * n)
            for b in range(n, 2 * n):
                self.best_list[b] = None
            self.allowed = [False] * len(self.edges)
            self.queue = []
            for v in range(n):
                if self.mate[v] == -1 and self.label[self.owner[v]] == 0:
                    self.assign(v, S, -1)
            augmented = False
            while True:
                if self._grow():
                    augmented = True
                    break
                kind, delta, edge, blossom = None, None, -1, -1
                for v in range(n):
                    if self.label[self.owner[v]] == 0 and self.best[v] != -1:
                        d = self.slack(self.best[v])
                        if kind is None or d < delta:
                            kind, delta, edge = 2, d, self.best[v]
                for b in range(2 * n):
                    if self.parent[b] == -1 and self.label[b] == S and self.best[b] != -1:
                        d = self.slack(self.best[b]) // 2
                        if kind is None or d < delta:
                            kind, delta, edge = 3, d, self.best[b]
                for b in range(n, 2 * n):
                    if self.base[b] >= 0 and self.parent[b] == -1 and self.label[b] == T:
                        if kind is None or self.dual[b] < delta:
                            kind, delta, blossom = 4, self.dual[b], b
                if kind is None:
                    kind, delta = 1, max(0, min(self.dual[:n]))
                for v in range(n):
                    lb = self.label[self.owner[v]]
                    if lb == S:
                        self.dual[v] -= delta
                    elif lb == T:
                        self.dual[v] += delta
                for b in range(n, 2 * n):
                    if self.base[b] >= 0 and self.parent[b] == -1:
                        if self.label[b] == S:
                            self.dual[b] += delta
                        elif self.label[b] == T:
                            self.dual[b] -= delta
                if kind == 1:
                    break
                if kind == 2:
                    self.allowed[edge] = True
                    i, j, _ = self.edges[edge]
                    if self.label[self.owner[i]] == 0:
                        i, j = j, i
                    self.queue.append(i)
                elif kind == 3:
                    self.allowed[edge] = True
                    i, _, _ = self.edges[edge]
                    self.queue.append(i)
                else:
                    self.expand(blossom, False)
            if not augmented:
                break
            for b in range(n, 2 * n):
                if self.parent[b] == -1 and self.base[b] >= 0 and self.label[b] == S and self.dual[b] == 0:
                    self.expand(b, True)
        return [self.end[m] if m >= 0 else -1 for m in self.mate]


def dump_graph(graph: MatchingGraph) -> str:
    """DIMACS-like text: ``p edge <n> <m>`` then ``e <i> <j> <w>`` per edge."""
    lines = [f"p edge {graph.n_nodes} {len(graph.edges)}"]
    lines += [f"e {i} {j} {w:.17g}" for i, j, w in graph.edges]
    return "\n".join(lines) + "\n"
