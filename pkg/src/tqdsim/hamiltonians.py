"""Parent Hamiltonian terms as operators on sparse states.

Every twisted term is the conjugate ``U_omega T U_omega^dagger`` of an
untwisted term ``T``: plain shifts for vertex terms, uniform projectors for
the quotient vertex terms.  Hermiticity, idempotence and commutation are then
inherited from the untwisted operators, and the twisted phases are exactly the
Omega ratios of the configurations involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .cohomology import Cocycle3
from .groups import FiniteGroup, NormalSeries, decompose_chain
from .lattice import CorrectionTree, TriLattice, correction_tree
from .qstate import (
    TOL,
    SparseState,
    apply_u_omega,
    equal_up_to_phase,
    word_omega,
)

__all__ = [
    "NotSetState",
    "LocalTerm",
    "VerificationReport",
    "edge_shift",
    "vertex_shift",
    "twisted_vertex_op",
    "local_phase_ratio",
    "tqd_terms",
    "set_terms",
    "spt_pre_terms",
    "level_sets",
    "verify_eigenstate",
    "operator_identity_suite",
    "trial_states",
    "disentangler",
    "embed_state",
]


class NotSetState(Exception):
    pass


@dataclass(frozen=True, eq=False)
class LocalTerm:
    kind: str  # "A", "B", "K", "A_set", "spt_pre"
    site: int
    apply: Callable[[SparseState], SparseState]
    projector: bool = True

    def __call__(self, state: SparseState) -> SparseState:
        return self.apply(state)

    @property
    def name(self) -> str:
        return f"{self.kind}[{self.site}]"


# --------------------------------------------------------- untwisted moves


def edge_shift(state: SparseState, v: int, g: int) -> SparseState:
    """Gauge shift of the edges at v: ``h -> g h`` if v is the head, ``h -> h g^-1`` if the tail."""
    grp = state.group
    t, inv = grp.mul_table, grp.inv_table
    configs = state.configs.copy()
    for e, d in state.lattice.edges_at(v):
        col = state.nv + e
        configs[:, col] = t[g, configs[:, col]] if d > 0 else t[configs[:, col], inv[g]]
    return state.with_terms(configs, state.amps, merge=False)


def vertex_shift(state: SparseState, v: int, g: int, side: str = "left") -> SparseState:
    grp = state.group
    configs = state.configs.copy()
    if side == "left":
        configs[:, v] = grp.mul_table[g, configs[:, v]]
    else:
        configs[:, v] = grp.mul_table[configs[:, v], grp.inv_table[g]]
    return state.with_terms(configs, state.amps, merge=False)


def twisted_vertex_op(omega: Cocycle3, move: Callable[[SparseState], SparseState],
                      tree: CorrectionTree | None = None) -> Callable[[SparseState], SparseState]:
    """``U_omega . move . U_omega^dagger``."""
    def op(state: SparseState) -> SparseState:
        return apply_u_omega(move(apply_u_omega(state, omega, -1, tree)), omega, +1, tree)
    return op


def local_phase_ratio(omega: Cocycle3, lattice: TriLattice, edge_configs: np.ndarray, v: int, g: int) -> np.ndarray:
    """Exponent of the twisted shift phase at v, from the triangles containing v only.

    For flux-free edge configurations and a non-root vertex this equals the
    full ratio ``Omega(shifted) / Omega(original)``.
    """
    grp = omega.group
    tree = correction_tree(lattice)
    tris = lattice.triangles_at(v)
    shifted = edge_configs.copy()
    for e, d in lattice.edges_at(v):
        shifted[:, e] = grp.mul_table[g, shifted[:, e]] if d > 0 else grp.mul_table[shifted[:, e], grp.inv_table[g]]
    before = word_omega(omega, lattice, edge_configs, tree, tris)
    after = word_omega(omega, lattice, shifted, tree, tris)
    return np.mod(after - before, omega.den)


# ------------------------------------------------------------------ terms


def _average(ops: list[Callable[[SparseState], SparseState]]) -> Callable[[SparseState], SparseState]:
    def op(state: SparseState) -> SparseState:
        parts = [f(state) for f in ops]
        configs = np.vstack([p.configs for p in parts])
        amps = np.concatenate([p.amps for p in parts]) / len(ops)
        return state.with_terms(configs, amps)
    return op


def _flux_projector(group: FiniteGroup, lattice: TriLattice, f: int) -> Callable[[SparseState], SparseState]:
    e12, e23, e13 = (int(e) for e in lattice.tri_edges[f])
    t, inv = group.mul_table, group.inv_table

    def op(state: SparseState) -> SparseState:
        e = state.edges
        hol = t[inv[e[:, e13]], t[e[:, e23], e[:, e12]]]
        keep = hol == 0
        return state.with_terms(state.configs[keep], state.amps[keep], merge=False)
    return op


def tqd_terms(omega: Cocycle3, lattice: TriLattice, tree: CorrectionTree | None = None) -> list[LocalTerm]:
    """Vertex terms ``A_v`` (average of twisted gauge shifts) and flux terms ``B_p``."""
    tree = tree or correction_tree(lattice)
    grp = omega.group
    terms = []
    for v in range(lattice.n_vertices):
        ops = [twisted_vertex_op(omega, lambda s, v=v, g=g: edge_shift(s, v, g), tree) for g in range(grp.order)]
        terms.append(LocalTerm("A", v, _average(ops)))
    for f in range(lattice.n_triangles):
        terms.append(LocalTerm("B", f, _flux_projector(grp, lattice, f)))
    return terms


def level_sets(series: NormalSeries, level: int) -> tuple[list[int], list[int]]:
    """``(gauged subgroup G_level, ungauged vertex values q_N ... q_{level+1})``."""
    grp = series.group
    n = series.length
    gauged = list(series.chain[level].members)
    stored = sorted({grp.prod(decompose_chain(series, g)[: n - level]) for g in range(grp.order)})
    return gauged, stored


def _uniform_vertex_projector(v: int, values: Sequence[int]) -> Callable[[SparseState], SparseState]:
    vals = np.asarray(values, dtype=np.int64)
    m = len(vals)

    def op(state: SparseState) -> SparseState:
        keep = np.isin(state.configs[:, v], vals)
        base = state.configs[keep]
        amps = state.amps[keep]
        configs = np.repeat(base, m, axis=0)
        configs[:, v] = np.tile(vals, len(base))
        return state.with_terms(configs, np.repeat(amps, m) / m)
    return op


def set_terms(omega: Cocycle3, lattice: TriLattice, series: NormalSeries, level: int,
              tree: CorrectionTree | None = None) -> list[LocalTerm]:
    """Terms for the state after gauging ``level`` layers.

    ``A_set`` averages twisted gauge shifts by the gauged subgroup, ``B``
    projects onto trivial holonomy and ``K`` is the twisted uniform projector
    on the ungauged vertex values.
    """
    tree = tree or correction_tree(lattice)
    gauged, stored = level_sets(series, level)
    terms = []
    for v in range(lattice.n_vertices):
        ops = [twisted_vertex_op(omega, lambda s, v=v, n=n: edge_shift(s, v, n), tree) for n in gauged]
        terms.append(LocalTerm("A_set", v, _average(ops)))
    for f in range(lattice.n_triangles):
        terms.append(LocalTerm("B", f, _flux_projector(omega.group, lattice, f)))
    for v in range(lattice.n_vertices):
        terms.append(LocalTerm("K", v, twisted_vertex_op(omega, _uniform_vertex_projector(v, stored), tree)))
    return terms


def spt_pre_terms(omega: Cocycle3, lattice: TriLattice, tree: CorrectionTree | None = None) -> list[LocalTerm]:
    """Gauge-invariant SPT vertex terms: twisted left shifts of one vertex value."""
    tree = tree or correction_tree(lattice)
    grp = omega.group
    terms = []
    for v in range(lattice.n_vertices):
        ops = [twisted_vertex_op(omega, lambda s, v=v, g=g: vertex_shift(s, v, g, "left"), tree)
               for g in range(grp.order)]
        terms.append(LocalTerm("spt_pre", v, _average(ops)))
    return terms


# ------------------------------------------------------------ verification


@dataclass
class VerificationReport:
    results: list[dict]

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.results)

    @property
    def max_deviation(self) -> float:
        return max((r["max_deviation"] for r in self.results), default=0.0)

    def failing(self) -> list[dict]:
        return [r for r in self.results if not r["pass"]]

    def to_json(self) -> str:
        return json.dumps(self.results, sort_keys=True)


def verify_eigenstate(state: SparseState, terms: Iterable[LocalTerm], tol: float = TOL) -> VerificationReport:
    """Check ``T psi = psi`` for every term (eigenvalue exactly 1 for projectors)."""
    psi = state.normalized()
    out = []
    for term in terms:
        img = term(psi)
        if term.projector:
            dev = psi.distance(img)
        else:
            dev = 0.0 if equal_up_to_phase(img, psi, tol) else 1.0
        out.append({"term": term.kind, "site": term.site, "pass": bool(dev < tol), "max_deviation": float(dev)})
    return VerificationReport(out)


def trial_states(terms: Sequence[LocalTerm], bases: Sequence[SparseState], count: int,
                 rng: np.random.Generator, mix: int = 4) -> list[SparseState]:
    """Random superpositions of shared base states and their images under a few terms.

    Sharing the bases makes trial states overlap, so inner-product identities
    are tested on nonzero matrix elements.
    """
    out = []
    for _ in range(count):
        parts = []
        for b in bases:
            parts.append(b.scaled(complex(rng.normal(), rng.normal())))
            for i in rng.choice(len(terms), size=min(mix, len(terms)), replace=False):
                parts.append(terms[int(i)](b).scaled(complex(rng.normal(), rng.normal())))
        st = parts[0]
        for p in parts[1:]:
            st = st + p
        out.append(st.normalized())
    return out


def operator_identity_suite(terms: Sequence[LocalTerm], trials: Sequence[SparseState], tol: float = TOL) -> dict:
    """Idempotence, hermiticity and pairwise commutation deviations over trial states.

    ``overlap`` is the largest matrix element seen in the hermiticity check; a
    zero there would make that check vacuous.
    """
    trials = [t.normalized() for t in trials]
    idem = herm = comm = overlap = 0.0
    cache = []
    for term in terms:
        images = [term(psi) for psi in trials]
        cache.append(images)
        for i, (psi, a) in enumerate(zip(trials, images)):
            idem = max(idem, a.distance(term(a)))
            j = (i + 1) % len(trials)
            lhs = trials[j].inner(a)
            herm = max(herm, abs(lhs - images[j].inner(psi)))
            overlap = max(overlap, abs(lhs))
    for i, s in enumerate(terms):
        for j in range(i + 1, len(terms)):
            t = terms[j]
            for s_psi, t_psi in zip(cache[i], cache[j]):
                comm = max(comm, s(t_psi).distance(t(s_psi)))
    return {"idempotence": idem, "hermiticity": herm, "commutator": comm, "overlap": overlap,
            "pass": bool(max(idem, herm, comm) < tol and overlap > tol)}


# ------------------------------------------------------------- disentangler


def _fourier_on_values(v: int, values: Sequence[int]) -> Callable[[SparseState], SparseState]:
    """``|s_k> <- sum_l exp(2 pi i k l / m) / sqrt(m) |s_l>`` on vertex v; values[0] must be identity."""
    vals = np.asarray(values, dtype=np.int64)
    m = len(vals)
    index = {int(s): i for i, s in enumerate(vals)}

    def op(state: SparseState) -> SparseState:
        cur = np.array([index[int(u)] for u in state.configs[:, v]], dtype=np.int64)
        configs = np.repeat(state.configs, m, axis=0)
        k = np.tile(np.arange(m), state.n_terms)
        configs[:, v] = vals[k]
        amps = np.repeat(state.amps, m) * np.exp(2j * np.pi * k * np.repeat(cur, m) / m) / np.sqrt(m)
        return state.with_terms(configs, amps)
    return op


def disentangler(set_state: SparseState, omega: Cocycle3, series: NormalSeries, level: int,
                 tree: CorrectionTree | None = None) -> SparseState:
    """Map the level-``level`` SET state to a gauge-only state, one vertex at a time.

    Each vertex gets ``U_omega F_v U_omega^dagger`` with ``F_v`` a Fourier
    transform over the ungauged vertex values, which sends their uniform
    superposition to the identity.
    """
    tree = tree or correction_tree(set_state.lattice)
    _, stored = level_sets(series, level)
    state = set_state
    for v in range(state.nv):
        state = twisted_vertex_op(omega, _fourier_on_values(v, stored), tree)(state)
    if np.any(state.vertices != 0):
        raise NotSetState("vertex sector did not disentangle to the identity")
    return state.with_terms(state.configs, state.amps, merge=False, vertex_active=False)


def embed_state(state: SparseState, parent: FiniteGroup, embedding: np.ndarray) -> SparseState:
    """Relabel a state over a subgroup into the parent group's indices."""
    return SparseState(parent, state.lattice, embedding[state.configs], state.amps,
                       state.vertex_active, state.edge_active, state.tol)
