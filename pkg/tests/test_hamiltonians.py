from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqdsim.cohomology import PhaseTable, builtin_cocycle
from tqdsim.gauging import gamma_image
from tqdsim.groups import build_group, derive_series, subgroup
from tqdsim.hamiltonians import (
    disentangler,
    embed_state,
    local_phase_ratio,
    operator_identity_suite,
    set_terms,
    spt_pre_terms,
    tqd_terms,
    trial_states,
    verify_eigenstate,
)
from tqdsim.lattice import build_torus
from tqdsim.qstate import (
    LocalOp,
    apply_local,
    build_spt_state,
    build_tqd_state,
    equal_up_to_phase,
    vertex_omega,
)


def failing_sites(report):
    return {(r["term"], r["site"]) for r in report.failing()}


def test_toric_code_ground_state():
    lat = build_torus(3, 3)
    omega = builtin_cocycle(build_group("Z2"), (0,))
    assert verify_eigenstate(build_tqd_state(omega, lat), tqd_terms(omega, lat)).passed


def test_chargeon_violates_only_its_endpoints():
    lat = build_torus(3, 3)
    omega = builtin_cocycle(build_group("Z2"), (0,))
    e = 4
    z = LocalOp("clock", "e", e, table=PhaseTable(np.array([0, 1]), 2))
    excited = apply_local(build_tqd_state(omega, lat), z)
    t, h = (int(v) for v in lat.edges[e])
    assert failing_sites(verify_eigenstate(excited, tqd_terms(omega, lat))) == {("A", t), ("A", h)}


def test_flux_violates_only_adjacent_plaquettes():
    lat = build_torus(3, 3)
    omega = builtin_cocycle(build_group("Z2"), (0,))
    e = 4
    flipped = apply_local(build_tqd_state(omega, lat), LocalOp("left", "e", e, x=1))
    adjacent = {("B", f) for f in range(lat.n_triangles) if e in lat.tri_edges[f]}
    assert len(adjacent) == 2
    assert failing_sites(verify_eigenstate(flipped, tqd_terms(omega, lat))) == adjacent


@settings(max_examples=30, deadline=None)
@given(st.sampled_from((("S3", (1, 1)), ("D4", (1, 1, 1)), ("Z4", (3,)))), st.integers(1, 8), st.data())
def test_local_phase_ratio_matches_full_ratio(case, v, data):
    name, params = case
    lat = build_torus(3, 3)
    grp = build_group(name)
    omega = builtin_cocycle(grp, params)
    rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
    g = data.draw(st.integers(0, grp.order - 1))
    verts = rng.integers(0, grp.order, (6, lat.n_vertices))
    verts[:, 0] = 0  # the tree root carries the identity
    edges = grp.mul_table[verts[:, lat.edges[:, 1]], grp.inv_table[verts[:, lat.edges[:, 0]]]]
    moved = verts.copy()
    moved[:, v] = grp.mul_table[g, moved[:, v]]
    full = np.mod(vertex_omega(omega, lat, moved) - vertex_omega(omega, lat, verts), omega.den)
    assert (local_phase_ratio(omega, lat, edges, v, g) == full).all()


def test_identity_suite_untwisted_z2():
    lat = build_torus(2, 2)
    omega = builtin_cocycle(build_group("Z2"), (0,))
    terms = tqd_terms(omega, lat)
    trials = trial_states(terms, [build_tqd_state(omega, lat)], 5, np.random.default_rng(0))
    assert operator_identity_suite(terms, trials)["pass"]


def test_set_terms_on_the_intermediate_state():
    lat = build_torus(2, 2)
    grp = build_group("S3")
    series = derive_series(grp)
    for params in ((0, 1), (1, 1)):
        omega = builtin_cocycle(grp, params)
        mid = gamma_image(build_spt_state(omega, lat), series, 1)
        assert verify_eigenstate(mid, set_terms(omega, lat, series, 1)).passed


def test_trivial_gauged_layer_recovers_spt_check():
    lat = build_torus(2, 2)
    grp = build_group("S3")
    omega = builtin_cocycle(grp, (1, 1))
    spt = build_spt_state(omega, lat)
    pre = spt.with_terms(spt.configs, spt.amps, merge=False, edge_active=True)
    assert verify_eigenstate(pre, set_terms(omega, lat, derive_series(grp), 0)).passed
    assert verify_eigenstate(spt, spt_pre_terms(omega, lat)).passed


def test_set_state_with_a_chargeon_fails_locally():
    lat = build_torus(2, 2)
    grp = build_group("S3")
    series = derive_series(grp)
    omega = builtin_cocycle(grp, (1, 1))
    mid = gamma_image(build_spt_state(omega, lat), series, 1)
    # sign flip on the quotient value at vertex 2 is a Z2 charge there
    sign = np.zeros(6, dtype=np.int64)
    sign[[3, 4, 5]] = 1
    excited = apply_local(mid, LocalOp("clock", "v", 2, table=PhaseTable(sign, 2)))
    bad = failing_sites(verify_eigenstate(excited, set_terms(omega, lat, series, 1)))
    assert bad == {("K", 2)}


@pytest.mark.parametrize("p1", range(3))
def test_disentangler_reaches_builtin_z3_model(p1):
    lat = build_torus(2, 2)
    grp = build_group("S3")
    series = derive_series(grp)
    omega = builtin_cocycle(grp, (p1, 0))
    out = disentangler(gamma_image(build_spt_state(omega, lat), series, 1), omega, series, 1)
    z3 = build_group("Z3")
    emb = np.array(subgroup(grp, [0, 1, 2]).members)
    ref = embed_state(build_tqd_state(builtin_cocycle(z3, (p1,)), lat), grp, emb)
    assert equal_up_to_phase(out, ref)
