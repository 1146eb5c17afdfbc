from __future__ import annotations

import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqdsim.cohomology import PhaseTable, attach_coboundary, builtin_cocycle
from tqdsim.groups import build_group
from tqdsim.lattice import build_torus
from tqdsim.qstate import SparseState, build_spt_state, build_tqd_state
from tqdsim.setprobe import (
    EpsilonMissing,
    FluxObstruction,
    NontrivialAutomorphism,
    SetProbeError,
    TheoryMismatch,
    anchored_branch_line_check,
    anyon_table,
    braiding_phase,
    branch_line_apply,
    branch_line_identity_check,
    branch_line_phase,
    defect_sector,
    fusion_decompose,
    gauge_transform_region,
    open_ribbon_matrix,
    pumping_factor,
    set_context,
    sfc_equivalent,
    sfc_table,
    symmetry_automorphism,
    transport_anyon,
    verify_pumping_factor,
)

D4_ODD = {("a", "x"): "s", ("xa", "a"): "s", ("a", "a"): "s", ("xa", "x"): "s̄",
          ("x", "x"): "ss̄", ("x", "xa"): "ss̄", ("xa", "xa"): "ss̄"}
SWAP = {"s": "s̄", "s̄": "s"}


def table_from(ctx, labels):
    grp = ctx.group
    return {(h1, h2): ctx.theory.by_label(labels.get((grp.labels[h1], grp.labels[h2]), "1"))
            for h1 in ctx.section for h2 in ctx.section}


def labels_of(theory):
    return sorted(a.label for a in theory.anyons)


# ------------------------------------------------------------ anyon tables


def test_toric_code_and_double_semion_names():
    grp = build_group("Z2")
    assert labels_of(anyon_table(builtin_cocycle(grp, (0,)), [0, 1])) == sorted(["1", "e", "m", "em"])
    ds = anyon_table(builtin_cocycle(grp, (1,)), [0, 1])
    assert labels_of(ds) == sorted(["1", "ss̄", "s", "s̄"])
    assert ds.spin(ds.by_label("s")) == Fraction(1, 4)
    assert ds.spin(ds.by_label("s̄")) == Fraction(3, 4)


@pytest.mark.parametrize("p", range(4))
def test_z4_has_sixteen_anyons_closed_under_fusion(p):
    th = anyon_table(builtin_cocycle(build_group("Z4"), (p,)), range(4))
    assert th.size == 16
    keys = {a.key() for a in th.anyons}
    for a, b in itertools.product(th.anyons, repeat=2):
        assert th.fuse(a, b).key() in keys
    e = th.by_label("e")
    assert th.fuse_all([e] * 4).label == "1"


def test_z4_untwisted_braiding():
    th = anyon_table(builtin_cocycle(build_group("Z4"), (0,)), range(4))
    e, m = th.by_label("e"), th.by_label("m")
    assert braiding_phase(th, e, m).value in (Fraction(1, 4), Fraction(3, 4))
    assert braiding_phase(th, e, th.by_label("m²")).value == Fraction(1, 2)
    assert braiding_phase(th, e, e).is_one()


@settings(max_examples=20, deadline=None)
@given(st.sampled_from((("Z4", (1,), range(4)), ("S3", (1, 1), [0, 1, 2]), ("D4", (1, 1, 0), [0, 1, 2, 3]))),
       st.data())
def test_braiding_is_bilinear_under_fusion(case, data):
    name, params, normal = case
    th = anyon_table(builtin_cocycle(build_group(name), params), list(normal))
    a, b, c = (th.anyons[data.draw(st.integers(0, th.size - 1))] for _ in range(3))
    lhs = braiding_phase(th, th.fuse(a, b), c)
    assert lhs == braiding_phase(th, a, c) * braiding_phase(th, b, c)


def test_braiding_rejects_foreign_anyons():
    z2 = anyon_table(builtin_cocycle(build_group("Z2"), (0,)), [0, 1])
    z4 = anyon_table(builtin_cocycle(build_group("Z4"), (0,)), range(4))
    with pytest.raises(TheoryMismatch):
        braiding_phase(z2, z2.vacuum(), z4.by_label("m"))


def test_bad_prescribed_charge_is_rejected():
    grp = build_group("Z2")
    with pytest.raises(SetProbeError):
        anyon_table(builtin_cocycle(grp, (1,)), [0, 1], m_charges={1: {0: 0, 1: 0}})


# ------------------------------------------------------------ automorphisms


@pytest.mark.parametrize("p1,p2", list(itertools.product(range(3), range(2))))
def test_s3_reflection_permutes_z3_anyons(p1, p2):
    ctx = set_context(builtin_cocycle(build_group("S3"), (p1, p2)), [0, 1, 2], need_epsilon=False)
    th = ctx.theory
    perm = symmetry_automorphism(ctx, 3)
    assert perm["1"] == "1"
    assert perm["e"] == "e²"
    assert th.by_label(perm["m"]).flux == 2
    # an involution that keeps fusion, spin and braiding
    assert all(perm[perm[a]] == a for a in perm)
    by = th.by_label
    for a, b in itertools.product(th.anyons, repeat=2):
        assert perm[th.fuse(a, b).label] == th.fuse(by(perm[a.label]), by(perm[b.label])).label
        assert braiding_phase(th, a, b) == braiding_phase(th, by(perm[a.label]), by(perm[b.label]))
    for a in th.anyons:
        assert th.spin(a) == th.spin(by(perm[a.label]))


def test_d4_reflection_on_z4_is_nontrivial():
    ctx = set_context(builtin_cocycle(build_group("D4"), (1, 0, 0)), [0, 1, 2, 3], need_epsilon=False)
    perm = symmetry_automorphism(ctx, 4)
    assert perm["e"] == "e³"
    assert any(k != v for k, v in perm.items())
    with pytest.raises(NontrivialAutomorphism):
        sfc_table(set_context(builtin_cocycle(build_group("D4"), (1, 0, 0)), [0, 1, 2, 3]))


def test_identity_acts_trivially():
    ctx = set_context(builtin_cocycle(build_group("D4"), (1, 1, 1)), [0, 2])
    assert all(k == v for k, v in symmetry_automorphism(ctx, 0).items())


# ----------------------------------------------------------------- SFC


def test_identity_row_is_vacuum():
    ctx = set_context(builtin_cocycle(build_group("Z2xZ2"), (1, 1, 1)), [0, 2])
    rep = sfc_table(ctx)
    assert rep.cocycle_identity
    for h in ctx.section:
        assert rep.label(0, h) == "1" and rep.label(h, 0) == "1"


def test_z2_cube_type_three_table():
    g = build_group("Z2xZ2")
    normal = [g.from_coords((0, 0)), g.from_coords((1, 0))]
    h = g.from_coords((0, 1))
    assert sfc_table(set_context(builtin_cocycle(g, (0, 0, 1)), normal)).label(h, h) == "e"
    assert sfc_table(set_context(builtin_cocycle(g, (0, 0, 0)), normal)).nontrivial() == {}


def test_sfc_report_json_is_stable():
    ctx = set_context(builtin_cocycle(build_group("Z4"), (1,)), [0, 2])
    rep = sfc_table(ctx)
    assert rep.to_json() == sfc_table(ctx).to_json()
    data = json.loads(rep.to_json())
    assert data["theory"] == "double-semion"
    assert {r["w"] for r in data["table"]} == {"1", "s"}


@pytest.mark.parametrize("p2,p3", list(itertools.product(range(2), range(2))))
def test_d4_p1_three_is_the_conjugate_table(p2, p3):
    """p1 = 3 lands in the class of the s and s̄ exchanged p1 = 1 table, not in the p1 = 1 class."""
    ctx = set_context(builtin_cocycle(build_group("D4"), (3, p2, p3)), [0, 2])
    got = sfc_table(ctx).table
    swapped = {k: SWAP.get(v, v) for k, v in D4_ODD.items()}
    assert sfc_equivalent(ctx, got, table_from(ctx, swapped))
    assert not sfc_equivalent(ctx, got, table_from(ctx, D4_ODD))


def test_sfc_equivalence_accepts_coboundaries():
    ctx = set_context(builtin_cocycle(build_group("D4"), (1, 0, 0)), [0, 2])
    base = sfc_table(ctx).table
    th, grp = ctx.theory, ctx.group
    c = {0: th.vacuum(), **{s: th.anyons[(3 * i + 1) % th.size] for i, s in enumerate(ctx.section[1:])}}
    inv = {a.key(): next(b for b in th.anyons if th.fuse(a, b).label == "1") for a in th.anyons}
    shifted = {(h1, h2): th.fuse(w, th.fuse(th.fuse(c[h1], c[h2]), inv[c[ctx.q_of(grp.mul(h1, h2))].key()]))
               for (h1, h2), w in base.items()}
    assert sfc_equivalent(ctx, base, shifted)


def test_missing_epsilon():
    ctx = set_context(builtin_cocycle(build_group("Z4"), (1,)), [0, 2], need_epsilon=False)
    with pytest.raises(EpsilonMissing):
        sfc_table(ctx)


# ------------------------------------------------------ defects, pumping


@pytest.mark.parametrize("name,params,normal", [
    ("D4", (1, 1, 1), [0, 2]), ("D4", (1, 0, 1), [0, 1, 2, 3]), ("S3", (1, 1), [0, 1, 2]), ("Q8", (1,), [0, 2]),
])
def test_defect_sectors_have_total_dimension_n_squared(name, params, normal):
    ctx = set_context(builtin_cocycle(build_group(name), params), normal, need_epsilon=False)
    for x in range(ctx.group.order):
        sec = defect_sector(ctx, x)
        assert sec.total_dimension_squared() == len(normal) ** 2
        assert x in sec.orbit


def test_pumping_factor_identities():
    for name, params, normal in (("D4", (1, 1, 1), [0, 2]), ("Z4", (1,), [0, 2]), ("Z2xZ2", (1, 1, 1), [0, 2])):
        ctx = set_context(builtin_cocycle(build_group(name), params), normal)
        assert verify_pumping_factor(ctx.omega, ctx.eps)
        assert all(b.is_one() for b in pumping_factor(ctx.omega, ctx.eps, 0).values())


# ----------------------------------------------------------- transport


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_transport_preserves_braiding_and_fusion(seed):
    grp = build_group("D4")
    omega = builtin_cocycle(grp, (1, 1, 0))
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 4, (8, 8))
    a[0, :] = 0
    a[:, 0] = 0
    alpha = PhaseTable(a, 4)
    th = anyon_table(omega, [0, 2])
    th2 = anyon_table(attach_coboundary(omega, alpha), [0, 2])
    move = {x.key(): transport_anyon(th, th2, x, alpha) for x in th.anyons}
    assert len({v.key() for v in move.values()}) == th.size
    for x, y in itertools.product(th.anyons, repeat=2):
        assert braiding_phase(th, x, y) == braiding_phase(th2, move[x.key()], move[y.key()])
        assert move[th.fuse(x, y).key()].key() == th2.fuse(move[x.key()], move[y.key()]).key()


# ------------------------------------------------------- ribbon matrices


def test_ribbon_matrix_products():
    ctx = set_context(builtin_cocycle(build_group("D4"), (1, 1, 1)), [0, 1, 2, 3], need_epsilon=False)
    m = open_ribbon_matrix(ctx, 4)
    assert m.size == 2 and m.status == "conjectured-operator-derived"
    left = m.matmul(m).matmul(m)
    right = m.matmul(m.matmul(m))
    assert left.entries == right.entries
    sq = m.tensor(m)
    assert sq.size == 4 and sq.labels == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert json.loads(sq.to_json())["status"] == "conjectured-operator-derived"
    out = fusion_decompose(sq, ctx.theory)
    assert sum(out.multiset().values()) == 4
    assert json.loads(out.to_json())["status"] == "conjectured-operator-derived"


def test_ribbon_rejects_repeated_representatives():
    ctx = set_context(builtin_cocycle(build_group("S3"), (0, 0)), [0, 1, 2], need_epsilon=False)
    with pytest.raises(SetProbeError):
        open_ribbon_matrix(ctx, 3, reps=[0, 0, 1])


# --------------------------------------------------------- branch lines


def test_branch_line_with_identity_changes_nothing():
    lat = build_torus(3, 3)
    omega = builtin_cocycle(build_group("Z3"), (1,))
    spt = build_spt_state(omega, lat)
    pre = spt.with_terms(spt.configs, spt.amps, merge=False, edge_active=True)
    assert not branch_line_phase(omega, pre, [4], 0).any()
    assert pre.distance(branch_line_apply(omega, pre, [4], 0)) < 1e-12
    assert pre.distance(gauge_transform_region(pre, [4], 0)) < 1e-12


@pytest.mark.parametrize("k", (0, 1))
def test_branch_line_matches_gauge_transform_on_z2(k):
    lat = build_torus(3, 3)
    omega = builtin_cocycle(build_group("Z2"), (k,))
    spt = build_spt_state(omega, lat)
    pre = spt.with_terms(spt.configs, spt.amps, merge=False, edge_active=True)
    ok, dev = branch_line_identity_check(omega, pre, [4], 1)
    assert ok, dev


def test_branch_lines_compose_on_z3():
    lat = build_torus(3, 3)
    omega = builtin_cocycle(build_group("Z3"), (1,))
    spt = build_spt_state(omega, lat)
    pre = spt.with_terms(spt.configs, spt.amps, merge=False, edge_active=True)
    twice = branch_line_apply(omega, branch_line_apply(omega, pre, [4], 1), [4], 1)
    assert twice.distance(branch_line_apply(omega, pre, [4], 2)) < 1e-9


def test_anchored_check_on_z3():
    omega = builtin_cocycle(build_group("Z3"), (2,))
    ok, count = anchored_branch_line_check(omega, build_torus(4, 4), [5], 1)
    assert ok and count > 0


def test_flux_next_to_region_is_an_obstruction():
    lat = build_torus(3, 3)
    grp = build_group("Z2")
    omega = builtin_cocycle(grp, (1,))
    tc = build_tqd_state(builtin_cocycle(grp, (0,)), lat)
    cfg = tc.configs[:1].copy()
    e = int(lat.tri_edges[next(f for f in range(lat.n_triangles) if 4 in lat.triangles[f])][0])
    cfg[0, tc.nv + e] ^= 1
    bad = SparseState(grp, lat, cfg, np.ones(1, complex), tc.vertex_active, True)
    with pytest.raises(FluxObstruction):
        branch_line_phase(omega, bad, [4], 1)
