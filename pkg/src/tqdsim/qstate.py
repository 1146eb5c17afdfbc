"""Sparse superpositions of group-valued lattice configurations.

A basis configuration is one integer row: vertex values in columns
``0 .. V-1`` followed by edge values in columns ``V .. V+E-1``.  Columns of an
inactive sector hold the identity (0).  Amplitudes are complex doubles and
states are kept unnormalized; comparisons normalize on the fly.

Cocycle phases enter through ``Omega``, the product over triangles of
``omega(w_23, w_12, P_1) ** s``.  Here ``w`` are the group words on the
triangle's edges and ``P_1`` is the potential of its first vertex, integrated
along a fixed spanning tree from the root (potential identity).  For a
vertex-only configuration the words are ``g_head g_tail^-1`` and this is the
usual SPT amplitude.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .cohomology import Cocycle3, PhaseExponent, PhaseTable
from .groups import FiniteGroup
from .lattice import CorrectionTree, TriLattice, correction_tree

__all__ = [
    "StateError",
    "BudgetExceeded",
    "SectorMismatch",
    "ZeroProbabilityForcedOutcome",
    "DEFAULT_BUDGET",
    "TOL",
    "SparseState",
    "MeasurementRecord",
    "LocalOp",
    "product_state",
    "vertex_omega",
    "tree_potentials",
    "edge_words",
    "word_omega",
    "omega_amplitude",
    "build_spt_state",
    "build_tqd_state",
    "apply_local",
    "apply_u_omega",
    "apply_entangler",
    "measure_fourier",
    "equal_up_to_phase",
    "check_global_symmetry",
    "global_right_shift",
    "random_state",
]

DEFAULT_BUDGET = 1 << 22
TOL = 1e-9


class StateError(Exception):
    pass


class BudgetExceeded(StateError):
    pass


class SectorMismatch(StateError):
    pass


class ZeroProbabilityForcedOutcome(StateError):
    pass


@dataclass(frozen=True, eq=False)
class SparseState:
    group: FiniteGroup
    lattice: TriLattice
    configs: np.ndarray
    amps: np.ndarray
    vertex_active: bool = True
    edge_active: bool = False
    tol: float = TOL

    @property
    def nv(self) -> int:
        return self.lattice.n_vertices

    @property
    def n_terms(self) -> int:
        return len(self.amps)

    @property
    def vertices(self) -> np.ndarray:
        return self.configs[:, : self.nv]

    @property
    def edges(self) -> np.ndarray:
        return self.configs[:, self.nv:]

    def with_terms(self, configs: np.ndarray, amps: np.ndarray, merge: bool = True, **kw) -> SparseState:
        out = replace(self, configs=configs, amps=amps, **kw)
        return out.merged() if merge else out

    def merged(self) -> SparseState:
        """Combine duplicate configurations and drop amplitudes below tolerance."""
        if self.n_terms == 0:
            return self
        ncols = self.configs.shape[1]
        if ncols and ncols * np.log2(max(self.group.order, 2)) < 62:
            # mixed-radix keys keep lexicographic row order and make the sort one-dimensional
            weights = self.group.order ** np.arange(ncols - 1, -1, -1, dtype=np.int64)
            _, first, inv = np.unique(self.configs @ weights, return_index=True, return_inverse=True)
            uniq = self.configs[first]
        else:
            uniq, inv = np.unique(self.configs, axis=0, return_inverse=True)
        amps = np.zeros(len(uniq), dtype=complex)
        np.add.at(amps, inv.ravel(), self.amps)
        keep = np.abs(amps) >= self.tol
        return replace(self, configs=uniq[keep], amps=amps[keep])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def normalized(self) -> SparseState:
        n = self.norm()
        return replace(self, amps=self.amps / n) if n > 0 else self

    def scaled(self, c: complex) -> SparseState:
        return replace(self, amps=self.amps * c)

    def __add__(self, other: SparseState) -> SparseState:
        return self.with_terms(np.vstack([self.configs, other.configs]),
                               np.concatenate([self.amps, other.amps]))

    def __sub__(self, other: SparseState) -> SparseState:
        return self + other.scaled(-1)

    def _aligned(self, other: SparseState) -> tuple[np.ndarray, np.ndarray]:
        """Amplitude vectors of both states over the union of their configurations."""
        allc = np.vstack([self.configs, other.configs])
        if len(allc) == 0:
            return np.zeros(0, dtype=complex), np.zeros(0, dtype=complex)
        uniq, inv = np.unique(allc, axis=0, return_inverse=True)
        inv = inv.ravel()
        a = np.zeros(len(uniq), dtype=complex)
        b = np.zeros(len(uniq), dtype=complex)
        np.add.at(a, inv[: self.n_terms], self.amps)
        np.add.at(b, inv[self.n_terms:], other.amps)
        return a, b

    def inner(self, other: SparseState) -> complex:
        """``<self|other>``."""
        a, b = self._aligned(other)
        return complex(np.vdot(a, b))

    def distance(self, other: SparseState) -> float:
        """Largest amplitude difference, with no phase freedom and no pruning."""
        a, b = self._aligned(other)
        return float(np.max(np.abs(a - b))) if len(a) else 0.0

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps({"config": c.tolist(), "re": float(a.real), "im": float(a.imag)})
                         for c, a in zip(self.configs, self.amps))


@dataclass
class MeasurementRecord:
    """Outcome exponent vectors per measured vertex at one gauging level."""

    level: int
    orders: tuple[int, ...]
    outcomes: dict[int, tuple[int, ...]]
    seed: int | None = None
    forced: bool = False

    def total(self) -> tuple[int, ...]:
        tot = [0] * len(self.orders)
        for p in self.outcomes.values():
            for j, x in enumerate(p):
                tot[j] += x
        return tuple(t % d for t, d in zip(tot, self.orders))

    def to_json(self) -> dict:
        return {"step": self.level, "orders": list(self.orders), "seed": self.seed, "forced": self.forced,
                "outcomes": {str(v): list(p) for v, p in sorted(self.outcomes.items())}}


# ---------------------------------------------------------------- Omega


def vertex_omega(omega: Cocycle3, lattice: TriLattice, vconfigs: np.ndarray) -> np.ndarray:
    """Exponent (over ``omega.den``) of ``prod_tri omega(g3 g2^-1, g2 g1^-1, g1)^s``."""
    grp = omega.group
    t, inv = grp.mul_table, grp.inv_table
    tri = lattice.triangles
    g1, g2, g3 = vconfigs[:, tri[:, 0]], vconfigs[:, tri[:, 1]], vconfigs[:, tri[:, 2]]
    vals = omega.num[t[g3, inv[g2]], t[g2, inv[g1]], g1]
    return np.mod(vals @ lattice.signs, omega.den)


def edge_words(group: FiniteGroup, lattice: TriLattice, configs: np.ndarray,
               vertex_map: np.ndarray | None = None) -> np.ndarray:
    """Edge words ``q_head n_e q_tail^-1`` with ``q`` the vertex value (optionally mapped)."""
    nv = lattice.n_vertices
    t, inv = group.mul_table, group.inv_table
    q = configs[:, :nv] if vertex_map is None else vertex_map[configs[:, :nv]]
    n = configs[:, nv:]
    heads, tails = lattice.edges[:, 1], lattice.edges[:, 0]
    return t[t[q[:, heads], n], inv[q[:, tails]]]


def tree_potentials(group: FiniteGroup, lattice: TriLattice, tree: CorrectionTree, words: np.ndarray) -> np.ndarray:
    """Potentials with ``P_root = e`` and ``P_head = w P_tail`` along tree edges."""
    t, inv = group.mul_table, group.inv_table
    P = np.zeros((words.shape[0], lattice.n_vertices), dtype=np.int64)
    for v in tree.order[1:]:
        e, p = tree.parent_edge[v], tree.parent[v]
        w = words[:, e]
        if lattice.edges[e, 1] == v:
            P[:, v] = t[w, P[:, p]]
        else:
            P[:, v] = t[inv[w], P[:, p]]
    return P


def word_omega(omega: Cocycle3, lattice: TriLattice, words: np.ndarray, tree: CorrectionTree | None = None,
               triangles: Sequence[int] | None = None) -> np.ndarray:
    """Exponent of ``prod_tri omega(w_23, w_12, P_1)^s`` over the chosen triangles (default all)."""
    tree = tree or correction_tree(lattice)
    P = tree_potentials(omega.group, lattice, tree, words)
    tri_ids = np.arange(lattice.n_triangles) if triangles is None else np.asarray(triangles, dtype=np.int64)
    te = lattice.tri_edges[tri_ids]
    v1 = lattice.triangles[tri_ids, 0]
    vals = omega.num[words[:, te[:, 1]], words[:, te[:, 0]], P[:, v1]]
    return np.mod(vals @ lattice.signs[tri_ids], omega.den)


def _omega_exponents(omega: Cocycle3, state: SparseState, tree: CorrectionTree | None = None) -> np.ndarray:
    if state.vertex_active and not state.edge_active:
        return vertex_omega(omega, state.lattice, state.vertices)
    words = edge_words(state.group, state.lattice, state.configs)
    return word_omega(omega, state.lattice, words, tree)


def omega_amplitude(omega: Cocycle3, lattice: TriLattice, config: Sequence[int], edge_active: bool | None = None) -> PhaseExponent:
    """Exact Omega of a single configuration (vertex-only rows use the plain SPT formula)."""
    row = np.asarray(config, dtype=np.int64)[None, :]
    nv = lattice.n_vertices
    if row.shape[1] == nv:
        return PhaseExponent(int(vertex_omega(omega, lattice, row)[0]), omega.den)
    words = edge_words(omega.group, lattice, row)
    return PhaseExponent(int(word_omega(omega, lattice, words)[0]), omega.den)


# ---------------------------------------------------------- constructors


def _all_assignments(order: int, count: int, budget: int) -> np.ndarray:
    if order ** count > budget:
        raise BudgetExceeded(f"{order}^{count} terms exceed the budget {budget}")
    grids = np.indices((order,) * count).reshape(count, -1).T
    return grids.astype(np.int64)


def product_state(group: FiniteGroup, lattice: TriLattice, budget: int = DEFAULT_BUDGET) -> SparseState:
    """Uniform superposition over all vertex values, no edge sector."""
    v = _all_assignments(group.order, lattice.n_vertices, budget)
    configs = np.hstack([v, np.zeros((len(v), lattice.n_edges), dtype=np.int64)])
    return SparseState(group, lattice, configs, np.ones(len(v), dtype=complex), True, False)


def build_spt_state(omega: Cocycle3, lattice: TriLattice, budget: int = DEFAULT_BUDGET) -> SparseState:
    """``sum_g Omega(g) |g>`` over all vertex configurations."""
    base = product_state(omega.group, lattice, budget)
    return apply_u_omega(base, omega, +1)


def build_tqd_state(omega: Cocycle3, lattice: TriLattice, budget: int = DEFAULT_BUDGET) -> SparseState:
    """Gauged SPT: ``sum_g Omega(g) |{g_head g_tail^-1}>`` with the vertex sector dropped."""
    spt = build_spt_state(omega, lattice, budget)
    grp = omega.group
    v = spt.vertices
    e = grp.mul_table[v[:, lattice.edges[:, 1]], grp.inv_table[v[:, lattice.edges[:, 0]]]]
    configs = np.hstack([np.zeros_like(v), e])
    return spt.with_terms(configs, spt.amps, vertex_active=False, edge_active=True)


def random_state(group: FiniteGroup, lattice: TriLattice, n_terms: int, rng: np.random.Generator,
                 vertex_values: Sequence[int] | None = None, edge_values: Sequence[int] | None = None,
                 vertex_active: bool = True, edge_active: bool = True) -> SparseState:
    """Random sparse state with values drawn from the given sets (default: whole group)."""
    nv, ne = lattice.n_vertices, lattice.n_edges
    vv = np.arange(group.order) if vertex_values is None else np.asarray(vertex_values)
    ev = np.arange(group.order) if edge_values is None else np.asarray(edge_values)
    v = rng.choice(vv, size=(n_terms, nv)) if vertex_active else np.zeros((n_terms, nv), dtype=np.int64)
    e = rng.choice(ev, size=(n_terms, ne)) if edge_active else np.zeros((n_terms, ne), dtype=np.int64)
    amps = rng.normal(size=n_terms) + 1j * rng.normal(size=n_terms)
    st = SparseState(group, lattice, np.hstack([v, e]).astype(np.int64), amps, vertex_active, edge_active)
    return st.merged()


# -------------------------------------------------------------- operators


@dataclass(frozen=True)
class LocalOp:
    """A single-site operator.

    ``kind``: ``left`` (g -> x g), ``right`` (g -> g x^-1), ``conj`` (g -> x g x^-1)
    or ``clock`` (diagonal phase ``table[g]``).  ``sector`` is ``"v"`` or ``"e"``.
    """

    kind: str
    sector: str
    site: int
    x: int = 0
    table: PhaseTable | None = None


def _column(state: SparseState, sector: str, site: int) -> int:
    if sector == "v":
        if not state.vertex_active:
            raise SectorMismatch("vertex sector is inactive")
        return site
    if sector == "e":
        if not state.edge_active:
            raise SectorMismatch("edge sector is inactive")
        return state.nv + site
    raise SectorMismatch(f"unknown sector {sector!r}")


def apply_local(state: SparseState, ops: LocalOp | Iterable[LocalOp]) -> SparseState:
    """Apply one or several commuting single-site operators (applied in order)."""
    ops = [ops] if isinstance(ops, LocalOp) else list(ops)
    grp = state.group
    t, inv = grp.mul_table, grp.inv_table
    configs = state.configs.copy()
    amps = state.amps.copy()
    for op in ops:
        col = _column(state, op.sector, op.site)
        vals = configs[:, col]
        if op.kind == "left":
            configs[:, col] = t[op.x, vals]
        elif op.kind == "right":
            configs[:, col] = t[vals, inv[op.x]]
        elif op.kind == "conj":
            configs[:, col] = t[t[op.x, vals], inv[op.x]]
        elif op.kind == "clock":
            amps = amps * op.table.to_complex()[vals]
        else:
            raise ValueError(f"unknown operator kind {op.kind!r}")
    return state.with_terms(configs, amps, merge=False)


def apply_u_omega(state: SparseState, omega: Cocycle3, direction: int = +1,
                  tree: CorrectionTree | None = None) -> SparseState:
    """Multiply every amplitude by ``Omega(config) ** direction``."""
    ex = _omega_exponents(omega, state, tree)
    return replace(state, amps=state.amps * np.exp(2j * np.pi * direction * ex / omega.den))


def apply_entangler(state: SparseState, control_map: np.ndarray, edges: Sequence[int] | None = None) -> SparseState:
    """Controlled multiplication ``h_e -> f(g_head) h_e f(g_tail)^-1`` with ``f = control_map``."""
    if not (state.vertex_active and state.edge_active):
        raise SectorMismatch("entangler needs both vertex and edge sectors")
    grp = state.group
    t, inv = grp.mul_table, grp.inv_table
    lat = state.lattice
    es = np.arange(lat.n_edges) if edges is None else np.asarray(edges, dtype=np.int64)
    configs = state.configs.copy()
    fh = control_map[configs[:, lat.edges[es, 1]]]
    ft = control_map[configs[:, lat.edges[es, 0]]]
    cols = state.nv + es
    configs[:, cols] = t[t[fh, configs[:, cols]], inv[ft]]
    return state.with_terms(configs, state.amps, merge=False)


def measure_fourier(state: SparseState, vertices: Sequence[int], rest: np.ndarray, coords: np.ndarray,
                    orders: Sequence[int], rng: np.random.Generator | None = None,
                    forced: dict[int, Sequence[int]] | None = None, level: int = 0,
                    seed: int | None = None) -> tuple[SparseState, MeasurementRecord]:
    """Measure the abelian factor of each vertex in the basis ``prod_j Z_j^{p_j} |+>``.

    The stored vertex value ``u`` splits as ``rest[u]`` (kept) times a factor
    with cyclic coordinates ``coords[u]`` (measured).  Outcome ``p`` multiplies a
    term by ``prod_j exp(-2 pi i p_j i_j / d_j)`` and replaces ``u`` by ``rest[u]``.
    Outcomes are Born-sampled vertex by vertex, or taken from ``forced``.
    """
    orders = tuple(int(d) for d in orders)
    outcomes: dict[int, tuple[int, ...]] = {}
    all_p = list(np.ndindex(*orders)) if orders else [()]
    for v in vertices:
        u = state.configs[:, v]
        new_configs = state.configs.copy()
        new_configs[:, v] = rest[u]
        c = coords[u]

        def project(p: tuple[int, ...]) -> SparseState:
            ph = np.zeros(state.n_terms)
            for j, d in enumerate(orders):
                ph = ph - p[j] * c[:, j] / d
            return state.with_terms(new_configs, state.amps * np.exp(2j * np.pi * ph))

        total = state.norm() ** 2
        if forced is not None:
            p = tuple(int(x) for x in forced[v])
            out = project(p)
            if out.norm() ** 2 < state.tol * total:
                raise ZeroProbabilityForcedOutcome(f"outcome {p} at vertex {v} has zero probability")
        else:
            branches = [project(p) for p in all_p]
            probs = np.array([b.norm() ** 2 for b in branches])
            probs = probs / probs.sum()
            pick = int((rng or np.random.default_rng()).choice(len(all_p), p=probs))
            p, out = tuple(int(x) for x in all_p[pick]), branches[pick]
        outcomes[v] = p
        state = out
    return state, MeasurementRecord(level, orders, outcomes, seed, forced is not None)


# ------------------------------------------------------------ comparisons


def equal_up_to_phase(a: SparseState, b: SparseState, tol: float = TOL) -> bool:
    """True iff ``a`` and ``b`` agree after normalization and one global phase."""
    if a.n_terms == 0 or b.n_terms == 0:
        return a.n_terms == b.n_terms
    an, bn = a.normalized(), b.normalized()
    i = int(np.argmax(np.abs(an.amps)))
    key = an.configs[i]
    match = np.flatnonzero((bn.configs == key).all(axis=1))
    if len(match) == 0:
        return False
    lam = an.amps[i] / bn.amps[match[0]]
    if abs(abs(lam) - 1) > tol:
        return False
    return an.distance(bn.scaled(lam)) < tol


def global_right_shift(state: SparseState, x: int, conjugate_edges: bool = False) -> SparseState:
    """``g_v -> g_v x^-1`` on every vertex, and ``n_e -> x n_e x^-1`` when requested."""
    ops = [LocalOp("right", "v", v, x) for v in range(state.nv)]
    if conjugate_edges:
        ops += [LocalOp("conj", "e", e, x) for e in range(state.lattice.n_edges)]
    return apply_local(state, ops)


def check_global_symmetry(state: SparseState, op: Callable[[SparseState], SparseState], tol: float = TOL) -> bool:
    return equal_up_to_phase(op(state), state, tol)
