"""Branched triangulations of the torus.

Vertex ``(r, c)`` has index ``r * Lx + c``.  Each square cell contributes a
horizontal, a vertical and a diagonal edge (lower-left to upper-right) and two
triangles.  Edges point from the smaller to the larger vertex index, which
fixes a global branching structure; every triangle is stored as its vertices
sorted by index, ``v1 < v2 < v3``, with orientation sign ``+1`` when that order
runs counterclockwise in the plane.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .groups import FiniteGroup

__all__ = [
    "LatticeError",
    "TooSmall",
    "DisconnectedWalk",
    "NonContractible",
    "Disconnected",
    "TriLattice",
    "CorrectionTree",
    "Region",
    "build_torus",
    "holonomy",
    "plaquette_walk",
    "correction_tree",
    "region_boundary",
]


class LatticeError(Exception):
    pass


class TooSmall(LatticeError):
    pass


class DisconnectedWalk(LatticeError):
    pass


class NonContractible(LatticeError):
    pass


class Disconnected(LatticeError):
    pass


@dataclass(frozen=True, eq=False)
class TriLattice:
    Lx: int
    Ly: int
    edges: np.ndarray  # (E, 2) tail, head with tail < head
    triangles: np.ndarray  # (F, 3) sorted vertex indices
    tri_edges: np.ndarray  # (F, 3) edge ids of (v1v2, v2v3, v1v3)
    signs: np.ndarray  # (F,) orientation sign
    incidence: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return self.Lx * self.Ly

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_triangles

    def position(self, v: int) -> tuple[int, int]:
        return divmod(v, self.Lx)

    def vertex(self, r: int, c: int) -> int:
        return (r % self.Ly) * self.Lx + (c % self.Lx)

    def edges_at(self, v: int) -> tuple[tuple[int, int], ...]:
        """``(edge, +1)`` for edges whose head is v, ``(edge, -1)`` for edges whose tail is v."""
        return self.incidence[v]

    def triangles_at(self, v: int) -> np.ndarray:
        return np.flatnonzero((self.triangles == v).any(axis=1))

    def to_json(self) -> str:
        return json.dumps({
            "Lx": self.Lx, "Ly": self.Ly,
            "edges": self.edges.tolist(),
            "triangles": self.triangles.tolist(),
            "signs": self.signs.tolist(),
        })


def build_torus(Lx: int, Ly: int) -> TriLattice:
    if Lx < 2 or Ly < 2:
        raise TooSmall(f"torus needs Lx, Ly >= 2, got {Lx}x{Ly}")

    def vid(r: int, c: int) -> int:
        return (r % Ly) * Lx + (c % Lx)

    edges = []
    for r in range(Ly):
        for c in range(Lx):
            a = vid(r, c)
            for b in (vid(r, c + 1), vid(r + 1, c), vid(r + 1, c + 1)):
                edges.append((min(a, b), max(a, b)))

    def eid(r: int, c: int, kind: int) -> int:
        return 3 * vid(r, c) + kind

    tris, tri_edges, signs = [], [], []
    for r in range(Ly):
        for c in range(Lx):
            # unwrapped plane positions (x, y) = (column, row)
            lower = [((r, c), (c, r)), ((r, c + 1), (c + 1, r)), ((r + 1, c + 1), (c + 1, r + 1))]
            lower_edges = {frozenset((0, 1)): eid(r, c, 0), frozenset((1, 2)): eid(r, c + 1, 1),
                           frozenset((0, 2)): eid(r, c, 2)}
            upper = [((r, c), (c, r)), ((r + 1, c), (c, r + 1)), ((r + 1, c + 1), (c + 1, r + 1))]
            upper_edges = {frozenset((0, 1)): eid(r, c, 1), frozenset((1, 2)): eid(r + 1, c, 0),
                           frozenset((0, 2)): eid(r, c, 2)}
            for corners, emap in ((lower, lower_edges), (upper, upper_edges)):
                ids = [vid(*rc) for rc, _ in corners]
                order = sorted(range(3), key=lambda i: ids[i])
                (x0, y0), (x1, y1), (x2, y2) = (corners[i][1] for i in order)
                cross = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
                tris.append([ids[i] for i in order])
                tri_edges.append([emap[frozenset((order[0], order[1]))],
                                  emap[frozenset((order[1], order[2]))],
                                  emap[frozenset((order[0], order[2]))]])
                signs.append(1 if cross > 0 else -1)
    n = Lx * Ly
    inc: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e, (t, h) in enumerate(edges):
        inc[h].append((e, 1))
        inc[t].append((e, -1))
    return TriLattice(Lx, Ly, np.array(edges, dtype=np.int64), np.array(tris, dtype=np.int64),
                      np.array(tri_edges, dtype=np.int64), np.array(signs, dtype=np.int64),
                      tuple(tuple(x) for x in inc))


def holonomy(lattice: TriLattice, group: FiniteGroup, edge_values: Sequence[int],
             walk: Sequence[tuple[int, int]]) -> int:
    """Ordered product along a walk of ``(edge, +1 | -1)`` steps; later steps multiply on the left.

    With edge values ``g_head g_tail^-1`` a walk from u to w yields ``g_w g_u^-1``.
    """
    out = 0
    at = None
    for e, d in walk:
        t, h = (int(v) for v in lattice.edges[e])
        start, end = (t, h) if d > 0 else (h, t)
        if at is not None and start != at:
            raise DisconnectedWalk(f"step along edge {e} starts at {start}, walk is at {at}")
        at = end
        val = int(edge_values[e]) if d > 0 else group.inv(int(edge_values[e]))
        out = group.mul(val, out)
    return out


def plaquette_walk(lattice: TriLattice, f: int) -> list[tuple[int, int]]:
    """The closed walk v1 -> v2 -> v3 -> v1 around triangle f."""
    e12, e23, e13 = (int(e) for e in lattice.tri_edges[f])
    return [(e12, 1), (e23, 1), (e13, -1)]


@dataclass(frozen=True, eq=False)
class CorrectionTree:
    root: int
    parent_edge: tuple[int, ...]  # -1 at the root
    parent: tuple[int, ...]
    order: tuple[int, ...]  # BFS order, root first

    def path(self, v: int, lattice: TriLattice) -> list[tuple[int, int]]:
        """Walk from v to the root as ``(edge, direction)`` steps."""
        out = []
        while v != self.root:
            e = self.parent_edge[v]
            t, h = (int(x) for x in lattice.edges[e])
            out.append((e, 1 if t == v else -1))
            v = self.parent[v]
        return out

    def tree_edges(self) -> set[int]:
        return {e for e in self.parent_edge if e >= 0}


def correction_tree(lattice: TriLattice, root: int = 0) -> CorrectionTree:
    n = lattice.n_vertices
    parent = [-1] * n
    pedge = [-1] * n
    seen = [False] * n
    seen[root] = True
    order = [root]
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for e, _ in sorted(lattice.edges_at(v)):
            t, h = (int(x) for x in lattice.edges[e])
            w = h if t == v else t
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                pedge[w] = e
                order.append(w)
                queue.append(w)
    return CorrectionTree(root, tuple(pedge), tuple(parent), tuple(order))


@dataclass(frozen=True, eq=False)
class Region:
    """Interior vertex set R and the closed walk bounding the triangles that touch R."""

    interior: tuple[int, ...]
    boundary: tuple[int, ...]  # cyclic vertex sequence, boundary[0] is the reference vertex
    crossing: tuple[tuple[int, int], ...]  # (edge, +1 if head inside else -1)
    touching: tuple[int, ...]  # triangles with at least one vertex in R

    @property
    def reference(self) -> int:
        return self.boundary[0]


def region_boundary(lattice: TriLattice, interior: Sequence[int]) -> Region:
    inside = sorted(set(int(v) for v in interior))
    n = lattice.n_vertices
    if not inside:
        raise Disconnected("region must be nonempty")
    if len(inside) >= n:
        raise NonContractible("region covers the whole torus")
    ins = set(inside)
    # edge-connectivity of the interior
    adj = {v: set() for v in inside}
    for t, h in lattice.edges.tolist():
        if t in ins and h in ins:
            adj[t].add(h)
            adj[h].add(t)
    seen = {inside[0]}
    stack = [inside[0]]
    while stack:
        v = stack.pop()
        for w in adj[v] - seen:
            seen.add(w)
            stack.append(w)
    if seen != ins:
        raise Disconnected("interior is not edge-connected")
    touching = [f for f in range(lattice.n_triangles) if ins & set(lattice.triangles[f].tolist())]
    # boundary edges of the star: edges of touching triangles with no interior endpoint
    count: dict[int, int] = {}
    for f in touching:
        for e in lattice.tri_edges[f].tolist():
            count[e] = count.get(e, 0) + 1
    bedges = [e for e, k in count.items() if k == 1 and not (set(lattice.edges[e].tolist()) & ins)]
    if any(k == 1 and set(lattice.edges[e].tolist()) & ins for e, k in count.items()):
        raise NonContractible("region star is not a disk")
    nbr: dict[int, list[int]] = {}
    for e in bedges:
        t, h = lattice.edges[e].tolist()
        nbr.setdefault(t, []).append(h)
        nbr.setdefault(h, []).append(t)
    if not nbr or any(len(v) != 2 for v in nbr.values()):
        raise NonContractible("boundary is not a simple closed walk")
    start = min(nbr)
    cycle = [start]
    prev, cur = None, start
    while True:
        a, b = nbr[cur]
        nxt = a if a != prev else b
        if nxt == start:
            break
        cycle.append(nxt)
        prev, cur = cur, nxt
        if len(cycle) > n:
            raise NonContractible("boundary walk does not close")
    if len(cycle) != len(nbr):
        raise NonContractible("boundary has several components")
    crossing = []
    for e, (t, h) in enumerate(lattice.edges.tolist()):
        if (t in ins) != (h in ins):
            crossing.append((e, 1 if h in ins else -1))
    return Region(tuple(inside), tuple(cycle), tuple(crossing), tuple(touching))
