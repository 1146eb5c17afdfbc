"""Measurement-assisted gauging of an SPT state, one abelian layer at a time.

Each vertex stores the part of its group value that has not been gauged yet.
At level ``k`` the stored value is ``u = q_N ... q_k``.  The entangler writes
``q_k(head) h q_k(tail)^-1`` onto every edge, the vertex is measured in the
Fourier basis of ``Q_k`` (which strips ``q_k`` from the vertex), and the
resulting chargeon phases are moved to the tree root by Z-strings of
characters of ``Q_k`` evaluated on edge values.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .cohomology import Cocycle3
from .groups import FiniteGroup, NormalSeries, decompose_chain, derive_series
from .lattice import CorrectionTree, TriLattice, correction_tree
from .qstate import (
    MeasurementRecord,
    SparseState,
    apply_entangler,
    build_spt_state,
    measure_fourier,
)

__all__ = [
    "GaugingError",
    "ConstraintViolated",
    "LevelTables",
    "GaugingPlan",
    "GaugingTrace",
    "level_tables",
    "add_ancillas",
    "gauge_step",
    "correct_outcomes",
    "verify_outcome_constraint",
    "run_gauging",
    "gamma_image",
    "plaquette_fluxes",
]


class GaugingError(Exception):
    pass


class ConstraintViolated(GaugingError):
    pass


@dataclass(frozen=True, eq=False)
class LevelTables:
    """Per-level lookups indexed by the stored vertex value ``u``."""

    level: int
    factor: np.ndarray  # q_k(u)
    rest: np.ndarray  # u q_k(u)^-1
    coords: np.ndarray  # cyclic coordinates of pi_k(q_k(u)), shape (|G|, r)
    edge_coords: np.ndarray  # cyclic coordinates of pi_k(h) for h in G_k, zeros elsewhere
    orders: tuple[int, ...]


def level_tables(series: NormalSeries, k: int) -> LevelTables:
    grp = series.group
    n = series.length
    factor = np.zeros(grp.order, dtype=np.int64)
    for u in range(grp.order):
        factor[u] = decompose_chain(series, u)[n - k]
    rest = grp.mul_table[np.arange(grp.order), grp.inv_table[factor]]
    cyc = series.cyclic[k - 1]
    proj = series.projections[k - 1]
    coords = cyc.coords[proj[factor]]
    edge_coords = np.zeros((grp.order, len(cyc.orders)), dtype=np.int64)
    inside = proj >= 0
    edge_coords[inside] = cyc.coords[proj[inside]]
    return LevelTables(k, factor, rest, coords, edge_coords, tuple(int(d) for d in cyc.orders))


@dataclass
class GaugingPlan:
    """Everything needed to replay a gauging run.

    ``forced`` maps a level to ``{vertex: outcome exponents}``; levels that are
    absent are Born-sampled from ``seed``.
    """

    omega: Cocycle3
    lattice: TriLattice
    series: NormalSeries
    seed: int | None = 0
    forced: Mapping[int, Mapping[int, Sequence[int]]] | None = None
    root: int = 0

    @property
    def group(self) -> FiniteGroup:
        return self.omega.group

    @property
    def strategy(self) -> str:
        return self.series.strategy

    @classmethod
    def build(cls, omega: Cocycle3, lattice: TriLattice, strategy: str = "quotient-chain",
              seed: int | None = 0, forced=None) -> GaugingPlan:
        return cls(omega, lattice, derive_series(omega.group, strategy), seed, forced)


@dataclass
class GaugingTrace:
    records: list[MeasurementRecord] = field(default_factory=list)
    corrections: list[dict[int, tuple[int, ...]]] = field(default_factory=list)
    checksums: list[str] = field(default_factory=list)
    states: list[SparseState] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "steps": [
                {**rec.to_json(), "corrections": {str(e): list(p) for e, p in sorted(cor.items())},
                 "checksum": chk}
                for rec, cor, chk in zip(self.records, self.corrections, self.checksums)
            ]
        }, sort_keys=True)


def _checksum(state: SparseState) -> str:
    st = state.merged()
    order = np.lexsort(st.configs.T[::-1])
    h = hashlib.sha256()
    h.update(st.configs[order].tobytes())
    h.update(np.round(np.abs(st.amps[order]) / max(st.norm(), 1e-300), 9).tobytes())
    return h.hexdigest()[:16]


def add_ancillas(state: SparseState) -> SparseState:
    """Activate the edge sector with every edge in the identity."""
    if state.edge_active:
        return state
    return state.with_terms(state.configs.copy(), state.amps, merge=False, edge_active=True)


def verify_outcome_constraint(record: MeasurementRecord) -> bool:
    return all(t == 0 for t in record.total())


def correct_outcomes(state: SparseState, record: MeasurementRecord, tables: LevelTables,
                     tree: CorrectionTree) -> tuple[SparseState, dict[int, tuple[int, ...]]]:
    """Undo the chargeon phases of ``record`` with Z-strings routed to the tree root.

    A measured phase ``chi_p(q_k(v))`` at vertex v equals the root's factor
    times ``prod chi_p(edge)^-d`` along the tree path from v, so the root's
    factors cancel by the outcome constraint and only edge operators remain.
    """
    if not verify_outcome_constraint(record):
        raise ConstraintViolated(f"outcomes at level {record.level} sum to {record.total()}")
    lat = state.lattice
    orders = tables.orders
    expo: dict[int, list[int]] = {}
    for v, p in record.outcomes.items():
        if not any(p):
            continue
        for e, d in tree.path(v, lat):
            acc = expo.setdefault(e, [0] * len(orders))
            for j, d_j in enumerate(orders):
                acc[j] = (acc[j] - d * p[j]) % d_j
    corr = {e: tuple(p) for e, p in expo.items() if any(p)}
    if not corr:
        return state, {}
    phase = np.zeros(state.n_terms)
    for e, p in corr.items():
        c = tables.edge_coords[state.configs[:, state.nv + e]]
        for j, d_j in enumerate(orders):
            phase = phase + p[j] * c[:, j] / d_j
    # the string multiplies by prod chi_p(edge)^-d, which restores chi_p(q_k(v)) up to the root factor
    return state.with_terms(state.configs, state.amps * np.exp(2j * np.pi * phase), merge=False), corr


def gauge_step(state: SparseState, k: int, plan: GaugingPlan, rng: np.random.Generator,
               tree: CorrectionTree | None = None) -> tuple[SparseState, MeasurementRecord, dict[int, tuple[int, ...]]]:
    """Entangle, measure and correct at level ``k`` (1-based)."""
    tree = tree or correction_tree(plan.lattice, plan.root)
    tables = level_tables(plan.series, k)
    state = apply_entangler(state, tables.factor)
    forced = plan.forced.get(k) if plan.forced else None
    if forced is not None:
        forced = {int(v): p for v, p in forced.items()}
    state, record = measure_fourier(state, range(state.nv), tables.rest, tables.coords, tables.orders,
                                    rng=rng, forced=forced, level=k, seed=plan.seed)
    state, corr = correct_outcomes(state, record, tables, tree)
    return state.merged(), record, corr


def run_gauging(spt: SparseState | None, plan: GaugingPlan, keep_states: bool = True) -> tuple[SparseState, GaugingTrace]:
    """Gauge ``spt`` level by level; returns the final edge-only state and the trace."""
    if spt is None:
        spt = build_spt_state(plan.omega, plan.lattice)
    rng = np.random.default_rng(plan.seed)
    tree = correction_tree(plan.lattice, plan.root)
    state = add_ancillas(spt)
    trace = GaugingTrace()
    for k in range(1, plan.series.length + 1):
        state, record, corr = gauge_step(state, k, plan, rng, tree)
        trace.records.append(record)
        trace.corrections.append(corr)
        trace.checksums.append(_checksum(state))
        if keep_states:
            trace.states.append(state)
    final = state.with_terms(state.configs, state.amps, merge=False, vertex_active=False)
    return final, trace


def gamma_image(spt: SparseState, series: NormalSeries, level: int) -> SparseState:
    """Gauge the bottom ``level`` layers directly.

    The vertex keeps ``q_N ... q_{level+1}`` and each edge gets
    ``r_head r_tail^-1`` with ``r = q_level ... q_1`` the gauged remainder.
    ``level = series.length`` drops the vertex sector.
    """
    grp = spt.group
    n = series.length
    keep = np.zeros(grp.order, dtype=np.int64)
    for g in range(grp.order):
        keep[g] = grp.prod(decompose_chain(series, g)[: n - level])
    rem = grp.mul_table[grp.inv_table[keep], np.arange(grp.order)]
    lat = spt.lattice
    v = spt.vertices
    r = rem[v]
    edges = grp.mul_table[r[:, lat.edges[:, 1]], grp.inv_table[r[:, lat.edges[:, 0]]]]
    full = level >= n
    verts = np.zeros_like(v) if full else keep[v]
    return spt.with_terms(np.hstack([verts, edges]), spt.amps, vertex_active=not full, edge_active=True)


def plaquette_fluxes(state: SparseState) -> np.ndarray:
    """Holonomy of every triangle for every term, shape ``(T, F)``."""
    grp = state.group
    t, inv = grp.mul_table, grp.inv_table
    te = state.lattice.tri_edges
    e = state.edges
    e12, e23, e13 = e[:, te[:, 0]], e[:, te[:, 1]], e[:, te[:, 2]]
    return t[inv[e13], t[e23, e12]]
