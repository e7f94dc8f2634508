"""Exact max-flow / min-cut (Dinic) over rational capacities."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

INF = math.inf


@dataclass
class FlowNetwork:
    """Directed network; a capacity of ``INF`` marks an uncuttable edge."""

    n_nodes: int
    source: int
    sink: int
    edges: list = field(default_factory=list)
    labels: list = field(default_factory=list)

    def __post_init__(self):
        if self.source == self.sink:
            raise ValueError("source and sink must differ")

    def add_edge(self, u: int, v: int, capacity) -> None:
        if capacity != INF:
            capacity = Fraction(capacity)
            if capacity < 0:
                raise ValueError("capacities must be nonnegative")
        self.edges.append((u, v, capacity))


def _integer_capacities(net: FlowNetwork) -> tuple[list, int]:
    """Scale rational capacities to integers by their common denominator."""
    finite = [c for _, _, c in net.edges if c != INF]
    scale = 1
    for c in finite:
        scale = math.lcm(scale, c.denominator)
    big = sum(int(c * scale) for c in finite) + 1
    out = [(u, v, big if c == INF else int(c * scale)) for u, v, c in net.edges]
    return out, scale


class _Dinic:
    def __init__(self, n: int):
        self.n = n
        self.head = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add(self, u: int, v: int, c: int) -> None:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)

    def _levels(self, s: int) -> list[int]:
        level = [-1] * self.n
        level[s] = 0
        queue = deque([s])
        to, cap, head = self.to, self.cap, self.head
        while queue:
            u = queue.popleft()
            for e in head[u]:
                if cap[e] > 0 and level[to[e]] < 0:
                    level[to[e]] = level[u] + 1
                    queue.append(to[e])
        return level

    def _blocking_flow(self, s: int, t: int, level: list[int]) -> int:
        to, cap, head = self.to, self.cap, self.head
        it = [0] * self.n
        total = 0
        while True:
            # iterative DFS for one augmenting path in the level graph
            path: list[int] = []
            u = s
            while u != t:
                adj = head[u]
                while it[u] < len(adj):
                    e = adj[it[u]]
                    if cap[e] > 0 and level[to[e]] == level[u] + 1:
                        break
                    it[u] += 1
                if it[u] == len(adj):
                    if u == s:
                        return total
                    level[u] = -1
                    e = path.pop()
                    u = to[e ^ 1]
                    it[u] += 1
                    continue
                e = adj[it[u]]
                path.append(e)
                u = to[e]
            push = min(cap[e] for e in path)
            for e in path:
                cap[e] -= push
                cap[e ^ 1] += push
            total += push

    def run(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = self._levels(s)
            if level[t] < 0:
                return flow
            flow += self._blocking_flow(s, t, level)

    def reachable(self, s: int) -> set[int]:
        return {v for v, lv in enumerate(self._levels(s)) if lv >= 0}


def min_cut(net: FlowNetwork) -> tuple[Fraction, frozenset[int]]:
    """Return the min-cut value and the source side (residual reachability)."""
    edges, scale = _integer_capacities(net)
    solver = _Dinic(net.n_nodes)
    for u, v, c in edges:
        solver.add(u, v, c)
    value = solver.run(net.source, net.sink)
    return Fraction(value, scale), frozenset(solver.reachable(net.source))


def max_flow(net: FlowNetwork) -> Fraction:
    return min_cut(net)[0]
