from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqdsim.cohomology import PhaseTable, builtin_cocycle
from tqdsim.groups import build_group
from tqdsim.lattice import build_torus
from tqdsim.qstate import (
    BudgetExceeded,
    LocalOp,
    apply_entangler,
    apply_local,
    apply_u_omega,
    build_spt_state,
    build_tqd_state,
    check_global_symmetry,
    equal_up_to_phase,
    global_right_shift,
    omega_amplitude,
    product_state,
    random_state,
)


def triangle_product_scalar(omega, lat, v) -> Fraction:
    """Scalar loop over triangles: the reciprocal of the opposite-orientation evaluation."""
    grp = omega.group
    m, inv = grp.mul, grp.inv
    total = Fraction(0)
    for (a, b, c), s in zip(lat.triangles, lat.signs):
        g1, g2, g3 = int(v[a]), int(v[b]), int(v[c])
        val = Fraction(int(omega.num[m(g3, inv(g2)), m(g2, inv(g1)), g1]), omega.den)
        total -= -int(s) * val
    return total % 1


def test_product_state_is_uniform():
    st_ = product_state(build_group("Z2"), build_torus(2, 2))
    assert st_.n_terms == 16
    assert np.ptp(np.abs(st_.amps)) < 1e-12


def test_budget_guard():
    with pytest.raises(BudgetExceeded):
        product_state(build_group("Z4"), build_torus(4, 4), budget=1000)


def test_trivial_cocycle_amplitudes_are_one():
    lat = build_torus(2, 2)
    omega = builtin_cocycle(build_group("S3"), (0, 0))
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert omega_amplitude(omega, lat, rng.integers(0, 6, lat.n_vertices)).is_one()
    assert omega_amplitude(builtin_cocycle(build_group("S3"), (1, 1)), lat, [0] * 4).is_one()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_spt_amplitude_double_evaluation(seed):
    lat = build_torus(2, 2)
    omega = builtin_cocycle(build_group("S3"), (1, 1))
    v = np.random.default_rng(seed).integers(0, 6, lat.n_vertices)
    assert omega_amplitude(omega, lat, v).value == triangle_product_scalar(omega, lat, v)


def test_s3_spt_state():
    lat = build_torus(2, 2)
    omega = builtin_cocycle(build_group("S3"), (1, 1))
    spt = build_spt_state(omega, lat)
    assert spt.n_terms == 1296
    assert np.ptp(np.abs(spt.amps)) < 1e-12
    for x in range(6):
        assert check_global_symmetry(spt, lambda s, x=x: global_right_shift(s, x))


def test_u_omega_roundtrip_and_trivial():
    lat = build_torus(2, 2)
    grp = build_group("D4")
    base = random_state(grp, lat, 50, np.random.default_rng(1), edge_active=False)
    omega = builtin_cocycle(grp, (1, 1, 1))
    back = apply_u_omega(apply_u_omega(base, omega, +1), omega, -1)
    assert base.distance(back) < 1e-12
    assert base.distance(apply_u_omega(base, builtin_cocycle(grp, (0, 0, 0)), +1)) < 1e-12
    assert build_spt_state(omega, lat).distance(apply_u_omega(product_state(grp, lat), omega, +1)) < 1e-12


def test_identity_shift_and_clock_relation():
    lat = build_torus(2, 2)
    grp = build_group("Z3")
    st_ = product_state(grp, lat).normalized()
    assert st_.distance(apply_local(st_, LocalOp("left", "v", 0, x=0))) < 1e-12
    z = LocalOp("clock", "v", 0, table=PhaseTable(np.arange(3), 3))
    x = LocalOp("left", "v", 0, x=1)
    zx = apply_local(apply_local(st_, x), z)
    xz = apply_local(apply_local(st_, z), x)
    # Z X = omega X Z with omega a primitive cube root of unity
    ratio = xz.inner(zx)
    assert abs(abs(ratio) - 1) < 1e-12
    assert abs(ratio - np.exp(2j * np.pi / 3)) < 1e-12 or abs(ratio - np.exp(-2j * np.pi / 3)) < 1e-12


def test_equal_up_to_phase():
    lat = build_torus(2, 2)
    omega = builtin_cocycle(build_group("Z2"), (1,))
    psi = build_spt_state(omega, lat)
    assert equal_up_to_phase(psi, psi)
    assert equal_up_to_phase(psi, psi.scaled(np.exp(1j * np.pi / 7)))
    # the 2x2 torus is too small for the double-semion signs to show up
    big = build_torus(3, 3)
    tc = build_tqd_state(builtin_cocycle(build_group("Z2"), (0,)), big)
    ds = build_tqd_state(omega, big)
    assert not equal_up_to_phase(tc, ds)


def test_entangler_writes_gauge_differences():
    lat = build_torus(2, 2)
    grp = build_group("Z2")
    spt = build_spt_state(builtin_cocycle(grp, (1,)), lat)
    pre = apply_entangler(spt.with_terms(spt.configs, spt.amps, merge=False, edge_active=True), np.arange(2))
    v, e = pre.vertices, pre.edges
    want = grp.mul_table[v[:, lat.edges[:, 1]], grp.inv_table[v[:, lat.edges[:, 0]]]]
    assert (e == want).all()
    idle = apply_entangler(spt.with_terms(spt.configs, spt.amps, merge=False, edge_active=True), np.zeros(2, int))
    assert not idle.edges.any()


def test_entangler_on_s3():
    lat = build_torus(2, 2)
    grp = build_group("S3")
    spt = build_spt_state(builtin_cocycle(grp, (1, 1)), lat)
    pre = apply_entangler(spt.with_terms(spt.configs, spt.amps, merge=False, edge_active=True), np.arange(6))
    v = pre.vertices
    want = grp.mul_table[v[:, lat.edges[:, 1]], grp.inv_table[v[:, lat.edges[:, 0]]]]
    assert (pre.edges == want).all()
