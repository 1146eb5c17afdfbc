from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqdsim.cohomology import (
    BadParams,
    Cocycle3,
    DomainError,
    NotExists,
    PhaseExponent,
    PhaseTable,
    attach_coboundary,
    beta_factor,
    builtin_cocycle,
    builtin_parameter_space,
    charge_table,
    coboundary2,
    gamma_product,
    restrict_cocycle,
    slant_theta,
    solve_epsilon,
    solve_mod,
    verify_cocycle_condition,
    verify_twisted_2cocycle,
)
from tqdsim.groups import build_group, subgroup

SMALL = ("Z2", "Z3", "Z4", "Z2xZ2", "S3", "D4", "Q8")


def omega_value(omega, g, h, l) -> Fraction:
    return Fraction(int(omega.num[g, h, l]), omega.den)


def cocycle_ok_by_loops(omega) -> bool:
    """Independent scalar evaluation of the 3-cocycle condition."""
    grp = omega.group
    m = grp.mul
    for g, h, k, l in itertools.product(range(grp.order), repeat=4):
        d = (omega_value(omega, h, k, l) - omega_value(omega, m(g, h), k, l) + omega_value(omega, g, m(h, k), l)
             - omega_value(omega, g, h, m(k, l)) + omega_value(omega, g, h, k))
        if d % 1:
            return False
    return True


def test_phase_exponent_arithmetic():
    a = PhaseExponent(1, 4)
    assert (a * a).value == Fraction(1, 2)
    assert (a / a).is_one()
    assert (a ** 4).is_one()
    assert a.inverse().value == Fraction(3, 4)
    assert abs(complex(a) - 1j) < 1e-12


def test_phase_table_reduction():
    t = PhaseTable(np.array([2, 4, 6]), 8)
    assert t.reduced().den == 4
    assert t.equals(PhaseTable(np.array([1, 2, 3]), 4))
    assert (t * PhaseTable(np.array([6, 4, 2]), 8)).is_trivial()


@pytest.mark.parametrize("name", SMALL)
def test_all_zero_params_are_trivial(name):
    grp = build_group(name)
    fam, params = builtin_parameter_space(grp)[0]
    assert not any(params)
    assert builtin_cocycle(grp, params, fam).num.sum() == 0


@pytest.mark.parametrize("name", ("Z2", "Z3", "Z2xZ2", "S3"))
def test_cocycle_condition_matches_loop_oracle(name):
    grp = build_group(name)
    for fam, params in builtin_parameter_space(grp):
        omega = builtin_cocycle(grp, params, fam)
        assert verify_cocycle_condition(omega) == cocycle_ok_by_loops(omega) is True


def test_corrupted_table_fails():
    grp = build_group("S3")
    omega = builtin_cocycle(grp, (1, 1))
    num = omega.num.copy()
    g, h, l = np.argwhere(num % omega.den)[0]
    num[g, h, l] = -num[g, h, l]
    bad = Cocycle3(grp, PhaseTable(num, omega.den), "corrupt", ())
    assert not verify_cocycle_condition(bad)
    assert not cocycle_ok_by_loops(bad)


def test_bad_params_rejected():
    with pytest.raises(BadParams):
        builtin_cocycle(build_group("D4"), (4, 0, 0))
    with pytest.raises(BadParams):
        builtin_cocycle(build_group("Z3"), (1, 1))


def test_json_roundtrip():
    omega = builtin_cocycle(build_group("D4"), (1, 1, 1))
    back = Cocycle3.from_json(omega.group, omega.to_json())
    assert PhaseTable(back.num, back.den).equals(PhaseTable(omega.num, omega.den))
    assert back.params == omega.params


def test_s3_restricted_to_z3_is_type_one():
    grp = build_group("S3")
    for p1, p2 in itertools.product(range(3), range(2)):
        nu, emb = restrict_cocycle(builtin_cocycle(grp, (p1, p2)), subgroup(grp, [0, 1, 2]))
        # element a^j sits at index j
        assert list(emb) == [0, 1, 2]
        for g, h, l in itertools.product(range(3), repeat=3):
            want = Fraction(p1 * g * (h + l - (h + l) % 3), 9) % 1
            assert Fraction(int(nu.num[g, h, l]), nu.den) % 1 == want
        assert verify_cocycle_condition(nu)


def test_restriction_to_trivial_subgroup():
    nu, _ = restrict_cocycle(builtin_cocycle(build_group("D4"), (1, 1, 1)), subgroup(build_group("D4"), [0]))
    assert nu.num.sum() == 0


def test_trivial_omega_gives_trivial_derived_phases():
    omega = builtin_cocycle(build_group("D4"), (0, 0, 0))
    assert slant_theta(omega).is_trivial()
    assert gamma_product(omega).is_trivial()


@pytest.mark.parametrize("name", SMALL)
def test_slant_product_is_twisted_2cocycle(name):
    grp = build_group(name)
    for fam, params in builtin_parameter_space(grp):
        assert verify_twisted_2cocycle(grp, slant_theta(builtin_cocycle(grp, params, fam)))


def epsilon_residual(grp, theta, sol, flux, arg) -> bool:
    """theta_x(g,h) == eps_{g^-1 x g}(h) eps_x(g) / eps_x(gh) on the domain, with Fractions."""
    eps = sol.particular
    for x in flux:
        for g in arg:
            for h in arg:
                lhs = Fraction(int(theta.num[x, g, h]), theta.den)
                y = grp.prod([grp.inv(g), x, g])
                rhs = eps(y, h).value + eps(x, g).value - eps(x, grp.mul(g, h)).value
                if (lhs - rhs) % 1:
                    return False
    return True


@pytest.mark.parametrize("name,params,flux,arg", [
    ("Z4", (1,), range(4), range(4)),
    ("Z2xZ2", (1, 1, 1), range(4), range(4)),
    ("D4", (1, 1, 1), [0, 2], range(8)),
    ("S3", (1, 1), [0, 1, 2], [0, 1, 2]),
])
def test_solve_epsilon_solves_the_equation(name, params, flux, arg):
    grp = build_group(name)
    theta = slant_theta(builtin_cocycle(grp, params))
    sol = solve_epsilon(grp, theta, list(flux), list(arg))
    assert epsilon_residual(grp, theta, sol, list(flux), list(arg))
    for k in sol.homogeneous:
        shifted = type(sol)(sol.particular.times(k), [])
        assert epsilon_residual(grp, theta, shifted, list(flux), list(arg))


def test_trivial_theta_admits_trivial_epsilon():
    grp = build_group("D4")
    theta = slant_theta(builtin_cocycle(grp, (0, 0, 0)))
    sol = solve_epsilon(grp, theta, range(8), range(8))
    assert not np.any(sol.particular.table.num)


def test_z2_cube_type_three_obstruction():
    grp = build_group("Z2xZ2xZ2")
    theta = slant_theta(builtin_cocycle(grp, (0, 1)))
    with pytest.raises(NotExists):
        solve_epsilon(grp, theta, range(8), range(8))
    flux = [grp.from_coords((0, a, b)) for a in range(2) for b in range(2)]
    t1 = grp.from_coords((1, 0, 0))
    for h in flux:
        for k, g in itertools.product((0, t1), repeat=2):
            assert PhaseExponent(int(theta.num[h, k, g]), theta.den).is_one()


def test_flux_domain_must_be_conjugation_closed():
    grp = build_group("S3")
    with pytest.raises(DomainError):
        solve_epsilon(grp, slant_theta(builtin_cocycle(grp, (1, 0))), [grp.element("x")], range(6))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(("Z2xZ2", "Z4", "S3", "D4")), st.integers(0, 2**31 - 1))
def test_coboundary_keeps_cocycle_condition(name, seed):
    grp = build_group(name)
    rng = np.random.default_rng(seed)
    fam, params = builtin_parameter_space(grp)[-1]
    omega = builtin_cocycle(grp, params, fam)
    a = rng.integers(0, 6, (grp.order, grp.order))
    a[0, :] = 0
    a[:, 0] = 0
    alpha = PhaseTable(a, 6)
    shifted = attach_coboundary(omega, alpha)
    assert verify_cocycle_condition(shifted)
    assert verify_cocycle_condition(Cocycle3(grp, coboundary2(grp, alpha), "delta", ()))
    # the slant product stays a twisted 2-cocycle
    assert verify_twisted_2cocycle(grp, slant_theta(shifted))


def test_unnormalized_alpha_rejected():
    grp = build_group("Z2")
    with pytest.raises(BadParams):
        attach_coboundary(builtin_cocycle(grp, (1,)), PhaseTable(np.ones((2, 2), dtype=np.int64), 2))


def test_zero_alpha_is_identity():
    grp = build_group("D4")
    omega = builtin_cocycle(grp, (1, 0, 1))
    same = attach_coboundary(omega, PhaseTable(np.zeros((8, 8), dtype=np.int64), 4))
    assert PhaseTable(same.num, same.den).equals(PhaseTable(omega.num, omega.den))


def test_beta_trivial_for_trivial_inputs():
    grp = build_group("Z2xZ2")
    omega = builtin_cocycle(grp, (0, 0, 0))
    sol = solve_epsilon(grp, slant_theta(omega), range(4), range(4))
    assert beta_factor(sol.particular, gamma_product(omega), 1, 2).is_trivial()


def test_charge_table_untwisted_z2():
    grp = build_group("Z2")
    charges = charge_table(grp, slant_theta(builtin_cocycle(grp, (0,))))
    assert {a: len(c) for a, c in charges.items()} == {0: 2, 1: 2}


def test_charge_table_solves_projective_condition():
    grp = build_group("Z4")
    theta = slant_theta(builtin_cocycle(grp, (1,)))
    for a, charges in charge_table(grp, theta).items():
        for mu in charges:
            for g, h in itertools.product(range(4), repeat=2):
                lhs = Fraction(int(mu.num[g]), mu.den) + Fraction(int(mu.num[h]), mu.den)
                rhs = Fraction(int(theta.num[a, g, h]), theta.den) + Fraction(int(mu.num[grp.mul(g, h)]), mu.den)
                assert (lhs - rhs) % 1 == 0


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**31 - 1))
def test_solve_mod_solutions_check_out(modulus, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, modulus, (4, 3))
    x0 = rng.integers(0, modulus, 3)
    b = (a @ x0) % modulus
    x, kernel = solve_mod(a, b, modulus)
    assert ((a @ x - b) % modulus == 0).all()
    for k in kernel:
        assert ((a @ k) % modulus == 0).all()
