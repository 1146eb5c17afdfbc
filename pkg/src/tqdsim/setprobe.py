"""Anyons, symmetry fractionalization and symmetry branch lines of partially gauged SPT states.

After gauging an abelian normal subgroup ``N`` of ``G`` the anyons are those of
the twisted quantum double of ``N`` with the restricted cocycle: a flux
``a in N`` together with a twisted charge ``mu_a`` solving
``mu_a(g) mu_a(h) = theta_a(g,h) mu_a(gh)`` on ``N``.  Charges are stored as
exact fractions of a full turn, one per element of ``N``.

Two probes of the remaining symmetry ``Q = G/N`` live here:

* closed-loop branch-line algebra, giving the fractionalization anyons
  ``w(h1, h2)`` when ``Q`` does not permute anyons;
* formal open-ribbon matrices whose tensor square splits into abelian ribbon
  signatures when it does.

The branch-line operator itself acts on lattice states and is checked against
the region gauge transformation it replaces.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cohomology import (
    Cocycle3,
    ConjCochain1,
    EpsilonSolution,
    NotExists,
    PhaseExponent,
    PhaseTable,
    gamma_product,
    slant_theta,
    solve_epsilon,
)
from .groups import (
    FiniteGroup,
    Quotient,
    Subgroup,
    cyclic_decomposition,
    quotient_with_section,
    subgroup,
)
from .lattice import Region, TriLattice, region_boundary
from .qstate import SparseState, TOL, vertex_omega

__all__ = [
    "SetProbeError",
    "TheoryMismatch",
    "EpsilonMissing",
    "NontrivialAutomorphism",
    "NoMatch",
    "AmbiguousMatch",
    "UnmatchedEigenvector",
    "FluxObstruction",
    "Anyon",
    "AnyonTheory",
    "DefectSector",
    "SetContext",
    "SfcReport",
    "FormalRibbonMatrix",
    "FusionOutcome",
    "anyon_table",
    "braiding_phase",
    "set_context",
    "sfc_braiding",
    "sfc_table",
    "sfc_equivalent",
    "symmetry_automorphism",
    "defect_sector",
    "transport_anyon",
    "open_ribbon_matrix",
    "fusion_decompose",
    "pumping_factor",
    "verify_pumping_factor",
    "gauge_transform_region",
    "branch_line_phase",
    "branch_line_apply",
    "branch_line_identity_check",
    "anchored_branch_line_check",
]


class SetProbeError(Exception):
    pass


class TheoryMismatch(SetProbeError):
    pass


class EpsilonMissing(SetProbeError):
    pass


class NontrivialAutomorphism(SetProbeError):
    pass


class NoMatch(SetProbeError):
    pass


class AmbiguousMatch(SetProbeError):
    pass


class UnmatchedEigenvector(SetProbeError):
    pass


class FluxObstruction(SetProbeError):
    pass


_SUP = str.maketrans("0123456789()", "⁰¹²³⁴⁵⁶⁷⁸⁹⁽⁾")


def _frac_table(table: PhaseTable) -> np.ndarray:
    """Object array of exact fractions ``num / den``."""
    out = np.empty(table.num.shape, dtype=object)
    for idx, v in np.ndenumerate(table.num):
        out[idx] = Fraction(int(v), table.den)
    return out


def _turn(x: Fraction) -> Fraction:
    return x % 1


# ------------------------------------------------------------------ anyons


@dataclass(frozen=True)
class Anyon:
    """Flux in ``N`` (as an element index of ``G``) and charge values over ``N``."""

    flux: int
    charge: tuple[Fraction, ...]
    label: str = ""
    theory_id: int = field(default=0, compare=False)

    def key(self) -> tuple[int, tuple[Fraction, ...]]:
        return self.flux, self.charge

    def __str__(self) -> str:
        return self.label or f"({self.flux}, {[str(c) for c in self.charge]})"


@dataclass(eq=False)
class AnyonTheory:
    """Abelian twisted quantum double of ``N`` inside ``G``.

    ``generators`` fix the naming: ``e_j`` is the character equal to
    ``exp(-2 pi i / d_j)`` on the j-th generator and 1 on the others, ``m_j`` the flux of that generator whose charge has the
    smallest nonnegative exponent on every generator.  Products are named by
    exponents, e.g. ``e²m``.  For ``N = Z_2`` with a twisted restriction the
    double-semion names ``s`` (spin ``+i``), ``s̄`` and ``ss̄`` are used.
    """

    group: FiniteGroup
    members: tuple[int, ...]
    generators: tuple[int, ...]
    orders: tuple[int, ...]
    theta: np.ndarray  # exact fractions, theta[x, g, h] over G
    gamma: np.ndarray  # exact fractions, gamma[g, x, y] over G
    anyons: list[Anyon] = field(default_factory=list)
    kind: str = "tqd"

    def __post_init__(self) -> None:
        self._pos = {g: i for i, g in enumerate(self.members)}
        self._index: dict[tuple[int, tuple[Fraction, ...]], Anyon] = {}

    @property
    def size(self) -> int:
        return len(self.anyons)

    def mu(self, a: Anyon, g: int) -> Fraction:
        return a.charge[self._pos[g]]

    def find(self, flux: int, charge: Sequence[Fraction]) -> Anyon:
        key = (int(flux), tuple(_turn(Fraction(c)) for c in charge))
        if key not in self._index:
            raise NoMatch(f"no anyon with flux {flux} and charge {[str(c) for c in key[1]]}")
        return self._index[key]

    def by_label(self, label: str) -> Anyon:
        for a in self.anyons:
            if a.label == label:
                return a
        raise KeyError(label)

    def vacuum(self) -> Anyon:
        return self.find(0, [Fraction(0)] * len(self.members))

    def is_charge(self, flux: int, charge: Sequence[Fraction]) -> bool:
        """Exhaustive check of the twisted charge equation on ``N``."""
        t = self.group.mul_table
        pos = self._pos
        for g in self.members:
            for h in self.members:
                lhs = charge[pos[g]] + charge[pos[h]]
                rhs = self.theta[flux, g, h] + charge[pos[int(t[g, h])]]
                if _turn(lhs - rhs):
                    return False
        return True

    def fuse_raw(self, a: Anyon, b: Anyon) -> tuple[int, tuple[Fraction, ...]]:
        f = int(self.group.mul_table[a.flux, b.flux])
        ch = tuple(_turn(ca + cb + self.gamma[g, a.flux, b.flux])
                   for g, ca, cb in zip(self.members, a.charge, b.charge))
        return f, ch

    def fuse(self, a: Anyon, b: Anyon) -> Anyon:
        return self.find(*self.fuse_raw(a, b))

    def fuse_all(self, items: Iterable[Anyon]) -> Anyon:
        out = self.vacuum()
        for a in items:
            out = self.fuse(out, a)
        return out

    def spin(self, a: Anyon) -> Fraction:
        return self.mu(a, a.flux)

    def braiding_matrix(self) -> np.ndarray:
        return np.array([[complex(braiding_phase(self, a, b)) for b in self.anyons] for a in self.anyons])

    def _register(self, a: Anyon) -> None:
        self._index[a.key()] = a
        self.anyons.append(a)


def _exp_label(base: str, k: int) -> str:
    if k == 0:
        return ""
    return base if k == 1 else base + str(k).translate(_SUP)


def anyon_table(omega: Cocycle3, normal: Subgroup | Sequence[int],
                generators: Sequence[int] | None = None,
                m_charges: Mapping[int, Mapping[int, Fraction]] | None = None) -> AnyonTheory:
    """All ``|N|^2`` anyons of the gauged abelian subgroup, canonically named.

    ``m_charges`` optionally fixes the charge of a generator flux ``m_j`` as a
    map from members of ``N`` to turns; it must solve the twisted charge
    equation, otherwise SetProbeError is raised.
    """
    grp = omega.group
    members = tuple(sorted(normal.members if isinstance(normal, Subgroup) else (int(g) for g in normal)))
    sub = subgroup(grp, members)
    local, emb = sub.as_group()
    if not local.is_abelian():
        raise SetProbeError("anyon tables need an abelian gauged subgroup")
    if generators is None:
        cd = cyclic_decomposition(local)
        gens = tuple(int(emb[g]) for g in cd.gens)
        orders = tuple(int(d) for d in cd.orders)
    else:
        gens = tuple(int(g) for g in generators)
        orders = tuple(grp.element_order(g) for g in gens)
        if math.prod(orders) != len(members):
            raise SetProbeError("generators do not give a direct-product decomposition of N")
    theory = AnyonTheory(grp, members, gens, orders,
                         _frac_table(slant_theta(omega)), _frac_table(gamma_product(omega)))
    pos = {g: i for i, g in enumerate(members)}

    # exponent coordinates of every member in the chosen generators
    coord: dict[int, tuple[int, ...]] = {}
    for exps in itertools.product(*(range(d) for d in orders)):
        g = grp.prod([grp.power(a, e) for a, e in zip(gens, exps)])
        coord[g] = exps
    if len(coord) != len(members) or set(coord) != set(members):
        raise SetProbeError("generators do not give a direct-product decomposition of N")

    def character(j: int) -> tuple[Fraction, ...]:
        # e_j takes the value exp(-2 pi i / d_j) on the j-th generator
        return tuple(_turn(Fraction(-coord[g][j], orders[j])) for g in members)

    theta_table = slant_theta(omega)

    def minimal_charge(a: int) -> tuple[Fraction, ...]:
        sol = solve_epsilon(grp, theta_table, (a,), members).particular
        base = [Fraction(int(sol.table.num[a, g]), sol.table.den) for g in members]
        # shifting by characters moves the value on generator j in steps of 1/d_j
        shift = [Fraction(0)] * len(members)
        for j, gj in enumerate(gens):
            r = base[pos[gj]] % Fraction(1, orders[j])
            k = (r - base[pos[gj]]) * orders[j]
            for i, g in enumerate(members):
                shift[i] += k * Fraction(coord[g][j], orders[j])
        return tuple(_turn(b + s) for b, s in zip(base, shift))

    zero = tuple(Fraction(0) for _ in members)
    e_gens = [Anyon(0, character(j)) for j in range(len(gens))]
    m_gens = []
    for a in gens:
        if m_charges and a in m_charges:
            ch = tuple(_turn(Fraction(m_charges[a][g])) for g in members)
            if not theory.is_charge(a, ch):
                raise SetProbeError(f"prescribed charge for flux {grp.labels[a]} violates the twisted equation")
            m_gens.append(Anyon(a, ch))
        else:
            m_gens.append(Anyon(a, minimal_charge(a)))

    semion = (len(members) == 2 and theory.theta[gens[0], gens[0], gens[0]] != 0) if gens else False
    single = len(gens) == 1

    def name(ce: tuple[int, ...], cm: tuple[int, ...]) -> str:
        if not any(ce) and not any(cm):
            return "1"
        if semion:
            return {(1, 0): "ss̄", (0, 1): "s", (1, 1): "s̄"}[(ce[0], cm[0])]
        out = ""
        for j in range(len(gens)):
            tag = "" if single else f"({j + 1})".translate(_SUP)
            if ce[j]:
                out += "e" + tag + ("" if ce[j] == 1 else str(ce[j]).translate(_SUP))
        for j in range(len(gens)):
            tag = "" if single else f"({j + 1})".translate(_SUP)
            if cm[j]:
                out += "m" + tag + ("" if cm[j] == 1 else str(cm[j]).translate(_SUP))
        return out

    for cm in itertools.product(*(range(d) for d in orders)):
        flux, charge = 0, zero
        for j, k in enumerate(cm):
            for _ in range(k):
                flux, charge = theory.fuse_raw(Anyon(flux, charge), m_gens[j])
        for ce in itertools.product(*(range(d) for d in orders)):
            ch = list(charge)
            for j, k in enumerate(ce):
                ch = [_turn(c + k * x) for c, x in zip(ch, e_gens[j].charge)]
            if semion and flux != 0:
                # semions are named by their spin, +i for s
                label = "s" if ch[pos[flux]] == Fraction(1, 4) else "s̄"
            else:
                label = name(ce, cm)
            theory._register(Anyon(flux, tuple(ch), label))
    for a in theory.anyons:
        if not theory.is_charge(a.flux, a.charge):
            raise SetProbeError(f"constructed charge for {a.label} violates the twisted equation")
    if len(theory._index) != len(members) ** 2:
        raise SetProbeError("anyon construction produced duplicates")
    return theory


def braiding_phase(theory: AnyonTheory, a: Anyon, b: Anyon) -> PhaseExponent:
    """``B(a, b) = mu_a(flux b) mu_b(flux a)``."""
    for c in (a, b):
        if c.flux not in theory._pos or len(c.charge) != len(theory.members):
            raise TheoryMismatch(f"anyon {c} does not belong to this theory")
    return PhaseExponent(theory.mu(a, b.flux) + theory.mu(b, a.flux))


# ------------------------------------------------------------ SET context


@dataclass(eq=False)
class SetContext:
    """Everything the closed-loop probes need for one gauged subgroup."""

    omega: Cocycle3
    normal: tuple[int, ...]
    quotient: Quotient
    section: tuple[int, ...]  # s(q) per quotient element
    theory: AnyonTheory
    theta: PhaseTable
    gamma: PhaseTable
    eps: ConjCochain1 | None
    eps_solution: EpsilonSolution | None

    @property
    def group(self) -> FiniteGroup:
        return self.omega.group

    def q_of(self, g: int) -> int:
        """``q(g) = s(pi(g))``."""
        return int(self.section[self.quotient.projection[g]])

    def n_of(self, g: int) -> int:
        """``n(g) = q(g)^-1 g``."""
        grp = self.group
        return grp.mul(grp.inv(self.q_of(g)), g)

    def quotient_label(self, g: int) -> str:
        return self.group.labels[self.q_of(g)]


def _orbit_closure(group: FiniteGroup, seeds: Iterable[int], by: Sequence[int]) -> tuple[int, ...]:
    out = set(int(s) for s in seeds)
    frontier = list(out)
    while frontier:
        x = frontier.pop()
        for n in by:
            y = group.conj(x, n)
            if y not in out:
                out.add(y)
                frontier.append(y)
    return tuple(sorted(out))


def _solve_per_orbit(group: FiniteGroup, theta: PhaseTable, fluxes: Sequence[int],
                     args: Sequence[int]) -> tuple[ConjCochain1, EpsilonSolution]:
    """One epsilon per conjugation orbit, stitched into a single cochain.

    The identity orbit gets ``eps_1 = 1`` so that ``w(1, h) = 1`` holds literally.
    """
    orbits: list[tuple[int, ...]] = []
    seen: set[int] = set()
    for x in fluxes:
        if x in seen:
            continue
        orb = _orbit_closure(group, (x,), args)
        seen.update(orb)
        orbits.append(orb)
    sols = []
    for orb in orbits:
        try:
            sols.append(solve_epsilon(group, theta, orb, args))
        except NotExists as exc:
            raise EpsilonMissing(f"no epsilon for fluxes {orb} on arguments {tuple(args)}") from exc
    den = math.lcm(*(s.particular.table.den for s in sols))
    num = np.zeros((group.order, group.order), dtype=np.int64)
    homog = []
    for orb, s in zip(orbits, sols):
        tab = s.particular.table.lift(den).num
        for x in orb:
            num[x] = 0 if orb == (0,) else tab[x]
        for h in s.homogeneous:
            hden = math.lcm(den, h.table.den)
            hnum = np.zeros_like(num)
            ht = h.table.lift(hden).num
            for x in orb:
                hnum[x] = ht[x]
            homog.append(ConjCochain1(group, tuple(sorted(fluxes)), tuple(sorted(args)), PhaseTable(hnum, hden)))
    eps = ConjCochain1(group, tuple(sorted(seen)), tuple(sorted(args)), PhaseTable(num, den))
    return eps, EpsilonSolution(eps, homog)


def set_context(omega: Cocycle3, normal: Subgroup | Sequence[int], generators: Sequence[int] | None = None,
                section: Mapping[int, int] | None = None, need_epsilon: bool = True,
                m_charges: Mapping[int, Mapping[int, Fraction]] | None = None) -> SetContext:
    """Build the anyon theory of ``N`` and an epsilon on (section fluxes, arguments in ``N``).

    ``section`` optionally overrides the least-representative section as a
    map from a coset representative to the chosen lift.
    """
    grp = omega.group
    members = tuple(sorted(normal.members if isinstance(normal, Subgroup) else (int(g) for g in normal)))
    sub = subgroup(grp, members)
    quo = quotient_with_section(grp, sub)
    sec = [int(s) for s in quo.section]
    if section:
        for rep, lift in section.items():
            q = int(quo.projection[rep])
            if int(quo.projection[lift]) != q:
                raise SetProbeError(f"{lift} is not in the coset of {rep}")
            sec[q] = int(lift)
        if sec[0] != 0:
            raise SetProbeError("the section must send the identity to the identity")
    theory = anyon_table(omega, members, generators, m_charges)
    theta = slant_theta(omega)
    gamma = gamma_product(omega)
    eps = sol = None
    if need_epsilon:
        fluxes = _orbit_closure(grp, sec, members)
        eps, sol = _solve_per_orbit(grp, theta, fluxes, members)
    return SetContext(omega, members, quo, tuple(sec), theory, theta, gamma, eps, sol)


# ------------------------------------------------------------ automorphism


def symmetry_automorphism(ctx: SetContext, x: int) -> dict[str, str]:
    """Label map of ``rho^x``: flux ``a -> x^-1 a x`` and
    ``mu'(x^-1 n x) = theta_a(x, x^-1 n x) / theta_a(n, x) * mu_a(n)``."""
    grp = ctx.group
    th = ctx.theory.theta
    out = {}
    for a in ctx.theory.anyons:
        xi = grp.inv(x)
        a2 = grp.conj(a.flux, xi)
        new = [Fraction(0)] * len(ctx.normal)
        pos = ctx.theory._pos
        for n in ctx.normal:
            n2 = grp.conj(n, xi)
            new[pos[n2]] = _turn(th[a.flux, x, n2] - th[a.flux, n, x] + ctx.theory.mu(a, n))
        out[a.label] = ctx.theory.find(a2, new).label
    return out


def _check_trivial_action(ctx: SetContext) -> None:
    for s in ctx.section:
        perm = symmetry_automorphism(ctx, s)
        moved = {k: v for k, v in perm.items() if k != v}
        if moved:
            raise NontrivialAutomorphism(
                f"symmetry {ctx.group.labels[s]} permutes anyons {moved}; use fusion_decompose")


# ----------------------------------------------------------------- SFC


def sfc_braiding(ctx: SetContext, h1: int, h2: int, b: Anyon, eps: ConjCochain1 | None = None,
                 split_gamma: bool = True) -> PhaseExponent:
    """``B(w(h1,h2), b) = eps_h1(g) eps_h2(g) / eps_q(h1h2)(g) * gamma_g(h1,h2) * mu_b(n(h1h2))`` with g = flux(b)."""
    eps = eps or ctx.eps
    if eps is None:
        raise EpsilonMissing("context was built without epsilon")
    grp = ctx.group
    g = b.flux
    h12 = grp.mul(h1, h2)
    q12, n12 = ctx.q_of(h12), ctx.n_of(h12)
    for f in (h1, h2, q12):
        if not eps.defined(f, g):
            raise EpsilonMissing(f"epsilon undefined at flux {f}, argument {g}")
    val = (eps(h1, g).value + eps(h2, g).value - eps(q12, g).value
           + ctx.theory.gamma[g, h1, h2] + ctx.theory.mu(b, n12))
    if split_gamma:
        val -= ctx.theory.gamma[g, q12, n12]
    return PhaseExponent(val)


@dataclass
class SfcReport:
    group: str
    params: tuple[int, ...]
    normal: tuple[int, ...]
    section: tuple[int, ...]
    table: dict[tuple[int, int], Anyon]
    theory_kind: str
    cocycle_identity: bool

    def label(self, h1: int, h2: int) -> str:
        return self.table[(h1, h2)].label

    def nontrivial(self) -> dict[tuple[int, int], str]:
        return {k: v.label for k, v in self.table.items() if v.label != "1"}

    def to_json(self, labels: Sequence[str] | None = None) -> str:
        name = (lambda g: labels[g]) if labels else str
        rows = [{"h1": name(a), "h2": name(b), "w": w.label} for (a, b), w in sorted(self.table.items())]
        return json.dumps({"group": self.group, "params": list(self.params), "normal": list(self.normal),
                           "theory": self.theory_kind, "cocycle_identity": self.cocycle_identity,
                           "table": rows}, sort_keys=True, ensure_ascii=False)


def _theory_kind(theory: AnyonTheory, omega: Cocycle3) -> str:
    if len(theory.members) == 2:
        return "double-semion" if any(a.label == "s" for a in theory.anyons) else "toric-code"
    twist = any(theory.spin(a) for a in theory.anyons if a.flux != 0 and a.label.startswith("m"))
    return f"Z{len(theory.members)}-TQD" + ("-twisted" if twist else "") if len(theory.generators) == 1 \
        else "abelian-TQD"


def _match_row(theory: AnyonTheory, row: Sequence[Fraction]) -> Anyon:
    hits = [a for a in theory.anyons
            if all(_turn(braiding_phase(theory, a, b).value - r) == 0 for b, r in zip(theory.anyons, row))]
    if not hits:
        raise NoMatch("no anyon has this braiding row")
    if len(hits) > 1:
        raise AmbiguousMatch(f"{len(hits)} anyons share this braiding row")
    return hits[0]


def sfc_table(ctx: SetContext, eps: ConjCochain1 | None = None) -> SfcReport:
    """Fractionalization anyon ``w(h1, h2)`` for every pair of section elements."""
    _check_trivial_action(ctx)
    theory = ctx.theory
    table = {}
    for h1 in ctx.section:
        for h2 in ctx.section:
            row = [sfc_braiding(ctx, h1, h2, b, eps).value for b in theory.anyons]
            table[(h1, h2)] = _match_row(theory, row)
    grp = ctx.group
    ok = True
    for h1, h2, h3 in itertools.product(ctx.section, repeat=3):
        s23 = ctx.q_of(grp.mul(h2, h3))
        s12 = ctx.q_of(grp.mul(h1, h2))
        lhs = theory.fuse(table[(h2, h3)], table[(h1, s23)])
        rhs = theory.fuse(table[(s12, h3)], table[(h1, h2)])
        ok &= lhs.key() == rhs.key()
    return SfcReport(grp.name, ctx.omega.params, ctx.normal, ctx.section, table,
                     _theory_kind(theory, ctx.omega), ok)


def sfc_equivalent(ctx: SetContext, a: Mapping[tuple[int, int], Anyon], b: Mapping[tuple[int, int], Anyon]) -> bool:
    """True iff ``a / b`` is a 2-coboundary ``c(h1) c(h2) / c(h1 h2)`` with values in the abelian anyons."""
    theory = ctx.theory
    grp = ctx.group
    sec = ctx.section
    def inverse(x: Anyon) -> Anyon:
        for y in theory.anyons:
            if theory.fuse(x, y).label == "1":
                return y
        raise NoMatch("anyon without inverse")

    ratio = {k: theory.fuse(a[k], inverse(b[k])) for k in a}
    nontriv = [s for s in sec if s != 0]
    for choice in itertools.product(theory.anyons, repeat=len(nontriv)):
        c = {0: theory.vacuum(), **dict(zip(nontriv, choice))}
        good = True
        for h1, h2 in itertools.product(sec, repeat=2):
            h12 = ctx.q_of(grp.mul(h1, h2))
            cob = theory.fuse(theory.fuse(c[h1], c[h2]), inverse(c[h12]))
            if cob.key() != ratio[(h1, h2)].key():
                good = False
                break
        if good:
            return True
    return False


# ------------------------------------------------------------- defects


@dataclass(frozen=True)
class DefectSector:
    """Defect sector over a section element ``x``: simple objects all of one quantum dimension."""

    x: int
    orbit: tuple[int, ...]  # N-conjugates of x
    quantum_dimension: int
    n_objects: int
    epsilon: ConjCochain1 | None

    def total_dimension_squared(self) -> int:
        return self.n_objects * self.quantum_dimension ** 2


def defect_sector(ctx: SetContext, x: int) -> DefectSector:
    """Objects of the ``x`` sector: dimension = size of the N-orbit of x, total dimension |N|^2."""
    orbit = _orbit_closure(ctx.group, (x,), ctx.normal)
    d = len(orbit)
    n = len(ctx.normal) ** 2 // d ** 2
    eps = None
    try:
        eps, _ = _solve_per_orbit(ctx.group, ctx.theta, orbit, ctx.normal)
    except EpsilonMissing:
        pass
    return DefectSector(x, orbit, d, n, eps)


def transport_anyon(theory_from: AnyonTheory, theory_to: AnyonTheory, a: Anyon, alpha: PhaseTable) -> Anyon:
    """Image of ``a`` after ``omega -> omega * delta(alpha)``: ``mu_a(g) -> mu_a(g) alpha(g,a) / alpha(a,g)``."""
    al = _frac_table(alpha)
    ch = [_turn(c + al[g, a.flux] - al[a.flux, g]) for g, c in zip(theory_from.members, a.charge)]
    return theory_to.find(a.flux, ch)


# -------------------------------------------------------- ribbon matrices


Term = tuple[int, int]  # (flux, group label g) of H^{flux, g}


@dataclass
class FormalRibbonMatrix:
    """Square matrix of formal sums ``sum c * H^{flux, g}`` with exact phase coefficients.

    Products use ``H^{x,g} H^{y,g'} = delta_{g,g'} gamma_g(x,y) H^{xy,g}``.
    """

    group: FiniteGroup
    gamma: np.ndarray  # exact fractions gamma[g, x, y]
    entries: dict[tuple[int, int], dict[Term, Fraction]]
    size: int
    labels: tuple[tuple[int, ...], ...] = ()  # row index tuples, e.g. (i,) or (i, j)
    status: str = "conjectured-operator-derived"

    @staticmethod
    def _mul_entry(group: FiniteGroup, gamma: np.ndarray, a: dict[Term, Fraction],
                   b: dict[Term, Fraction]) -> dict[Term, Fraction]:
        out: dict[Term, Fraction] = {}
        for (x, g), ca in a.items():
            for (y, g2), cb in b.items():
                if g != g2:
                    continue
                key = (int(group.mul_table[x, y]), g)
                val = _turn(ca + cb + gamma[g, x, y])
                if key in out:
                    raise SetProbeError("coefficient collision; formal sums must stay single-term per key")
                out[key] = val
        return out

    def tensor(self, other: FormalRibbonMatrix) -> FormalRibbonMatrix:
        n, m = self.size, other.size
        ent: dict[tuple[int, int], dict[Term, Fraction]] = {}
        for (i, i2), a in self.entries.items():
            for (j, j2), b in other.entries.items():
                prod = self._mul_entry(self.group, self.gamma, a, b)
                if prod:
                    ent[(i * m + j, i2 * m + j2)] = prod
        labels = tuple((i, j) for i in range(n) for j in range(m))
        return FormalRibbonMatrix(self.group, self.gamma, ent, n * m, labels, self.status)

    def matmul(self, other: FormalRibbonMatrix) -> FormalRibbonMatrix:
        ent: dict[tuple[int, int], dict[Term, Fraction]] = {}
        for (i, k), a in self.entries.items():
            for (k2, j), b in other.entries.items():
                if k != k2:
                    continue
                prod = self._mul_entry(self.group, self.gamma, a, b)
                cell = ent.setdefault((i, j), {})
                for key, val in prod.items():
                    if key in cell:
                        raise SetProbeError("matrix product adds two terms on one key")
                    cell[key] = val
        return FormalRibbonMatrix(self.group, self.gamma, {k: v for k, v in ent.items() if v},
                                  self.size, self.labels, self.status)

    def row_flux(self, r: int) -> set[int]:
        return {x for (i, _), cell in self.entries.items() if i == r for (x, _) in cell}

    def coefficient(self, r: int, c: int, term: Term) -> complex:
        cell = self.entries.get((r, c), {})
        if term not in cell:
            return 0j
        return complex(np.exp(2j * np.pi * float(cell[term])))

    def to_json(self) -> str:
        rows = []
        for (r, c), cell in sorted(self.entries.items()):
            for (x, g), v in sorted(cell.items()):
                rows.append({"row": r, "col": c, "flux": x, "g": g, "phase": str(v)})
        return json.dumps({"size": self.size, "status": self.status, "entries": rows})


def open_ribbon_matrix(ctx: SetContext, x: int, reps: Sequence[int] | None = None) -> FormalRibbonMatrix:
    """``M_{ii'} = sum_{n in C_N(x)} eps_{b_i x b_i^-1}(b_i n b_i'^-1) H^{b_i x b_i^-1, b_i n b_i'^-1}``.

    ``reps`` are elements of ``N`` enumerating the N-conjugates of ``x``;
    by default the first element of ``N`` reaching each conjugate is used.
    """
    grp = ctx.group
    normal = ctx.normal
    if reps is None:
        seen: dict[int, int] = {}
        for b in normal:
            c = grp.mul(grp.mul(b, x), grp.inv(b))
            seen.setdefault(c, b)
        reps = [seen[c] for c in sorted(seen, key=lambda c: normal.index(seen[c]))]
    reps = [int(b) for b in reps]
    conj = [grp.mul(grp.mul(b, x), grp.inv(b)) for b in reps]
    if len(set(conj)) != len(conj):
        raise SetProbeError("representatives repeat a conjugate")
    cent = [n for n in normal if grp.mul(n, x) == grp.mul(x, n)]
    eps, _ = _solve_per_orbit(grp, ctx.theta, sorted(set(conj)), normal)
    ent: dict[tuple[int, int], dict[Term, Fraction]] = {}
    for i, (bi, ci) in enumerate(zip(reps, conj)):
        for j, bj in enumerate(reps):
            cell = {}
            for n in cent:
                g = grp.mul(grp.mul(bi, n), grp.inv(bj))
                cell[(ci, g)] = eps(ci, g).value
            ent[(i, j)] = cell
    return FormalRibbonMatrix(grp, ctx.theory.gamma, ent, len(reps), tuple((i,) for i in range(len(reps))))


@dataclass
class FusionOutcome:
    anyons: list[str]
    blocks: dict[int, list[str]]
    status: str = "conjectured-operator-derived"

    def multiset(self) -> Counter:
        return Counter(self.anyons)

    def to_json(self) -> str:
        return json.dumps({"anyons": sorted(self.anyons), "status": self.status,
                           "blocks": {str(k): sorted(v) for k, v in sorted(self.blocks.items())}},
                          ensure_ascii=False)


def fusion_decompose(square: FormalRibbonMatrix, theory: AnyonTheory, tol: float = 1e-9,
                     seed: int = 0) -> FusionOutcome:
    """Split a tensor-square ribbon matrix into abelian ribbon signatures.

    Rows are grouped by flux; inside a block the coefficient matrices of each
    ``H^{flux, g}`` are simultaneously diagonalized and every eigenvector's
    coefficients ``c_g`` (normalized to ``c_1 = 1``) are matched to a charge.
    """
    flux_of: dict[int, int] = {}
    for r in range(square.size):
        fx = square.row_flux(r)
        if len(fx) != 1:
            raise UnmatchedEigenvector(f"row {r} mixes fluxes {fx}")
        flux_of[r] = fx.pop()
    for (r, c), cell in square.entries.items():
        if flux_of.get(c) != flux_of[r]:
            raise UnmatchedEigenvector("tensor square is not block diagonal by flux")
    rng = np.random.default_rng(seed)
    out: list[str] = []
    blocks: dict[int, list[str]] = {}
    for flux in sorted(set(flux_of.values())):
        idx = [r for r in range(square.size) if flux_of[r] == flux]
        mats = {}
        for g in theory.members:
            mats[g] = np.array([[square.coefficient(r, c, (flux, g)) for c in idx] for r in idx])
        combo = sum(complex(rng.normal(), rng.normal()) * m for m in mats.values())
        _, vecs = np.linalg.eig(combo)
        inv = np.linalg.inv(vecs)
        diag = {}
        for g, m in mats.items():
            d = inv @ m @ vecs
            if np.max(np.abs(d - np.diag(np.diag(d)))) > tol * max(1.0, np.max(np.abs(m))) * 10:
                raise UnmatchedEigenvector(f"coefficient matrices of flux {flux} are not simultaneously diagonal")
            diag[g] = np.diag(d)
        names = []
        for k in range(len(idx)):
            norm = diag[0][k]
            if abs(norm) < tol:
                raise UnmatchedEigenvector("eigenvector without identity component")
            sig = {g: diag[g][k] / norm for g in theory.members}
            hit = None
            for a in theory.anyons:
                if a.flux != flux:
                    continue
                if all(abs(sig[g] - np.exp(2j * np.pi * float(theory.mu(a, g)))) < tol * 1e3 for g in theory.members):
                    hit = a
                    break
            if hit is None:
                raise UnmatchedEigenvector(f"signature {sig} of flux {flux} matches no anyon")
            names.append(hit.label)
        blocks[flux] = names
        out.extend(names)
    return FusionOutcome(out, blocks)


# ------------------------------------------------------------ pumping


def pumping_factor(omega: Cocycle3, eps: ConjCochain1, x: int) -> dict[int, PhaseExponent]:
    """``beta_x(g) = eps_x(g) eps_x^-1(g) gamma_g(x, x^-1)`` over the arguments of ``eps``."""
    grp = omega.group
    xi = grp.inv(x)
    gam = _frac_table(gamma_product(omega))
    out = {}
    for g in eps.arg:
        if not (eps.defined(x, g) and eps.defined(xi, g)):
            raise EpsilonMissing(f"epsilon undefined at flux {x} or {xi}, argument {g}")
        out[g] = PhaseExponent(eps(x, g).value + eps(xi, g).value + gam[g, x, xi])
    return out


def verify_pumping_factor(omega: Cocycle3, eps: ConjCochain1) -> bool:
    """Twisted cocycle identity ``beta_{g^-1xg}(h) beta_x(g) = beta_x(gh)`` and the endpoint factorization."""
    grp = omega.group
    fluxes = eps.flux
    beta = {x: pumping_factor(omega, eps, x) for x in fluxes if grp.inv(x) in fluxes}
    args = eps.arg
    for x, bx in beta.items():
        for g in args:
            for h in args:
                gh = grp.mul(g, h)
                y = grp.conj(x, grp.inv(g))
                if gh not in bx or y not in beta:
                    continue
                if not (beta[y][h] * bx[g] / bx[gh]).is_one():
                    return False
    for x in beta:
        for g1 in args:
            for gn in args:
                y = grp.mul(grp.mul(gn, x), grp.inv(gn))
                y1 = grp.mul(grp.mul(g1, x), grp.inv(g1))
                d = grp.mul(gn, grp.inv(g1))
                if y not in beta or y1 not in beta or d not in beta[y]:
                    continue
                if not (beta[y][d] / (beta[y][gn] / beta[y1][g1])).is_one():
                    return False
    return True


# ---------------------------------------------------------- branch lines


def gauge_transform_region(state: SparseState, region: Sequence[int], x: int) -> SparseState:
    """``prod_{v in R} G^x_v``: right shift on vertices, ``h -> x h`` at heads and ``h -> h x^-1`` at tails."""
    grp = state.group
    t, inv = grp.mul_table, grp.inv_table
    lat = state.lattice
    configs = state.configs.copy()
    for v in set(int(r) for r in region):
        configs[:, v] = t[configs[:, v], inv[x]]
        for e, d in lat.edges_at(v):
            col = state.nv + e
            configs[:, col] = t[x, configs[:, col]] if d > 0 else t[configs[:, col], inv[x]]
    return state.with_terms(configs, state.amps, merge=False)


@dataclass(frozen=True, eq=False)
class _BranchGeometry:
    region: Region
    inside: frozenset[int]
    mixed: tuple[int, ...]  # touching triangles with a vertex outside R
    inner: tuple[int, ...]  # triangles with all vertices in R
    fan: tuple[tuple[tuple[int, int, int], int], ...]  # (sorted vertices, sign) for Theta
    internal_edges: tuple[int, ...]
    paths: dict[int, tuple[tuple[int, int], ...]]  # walk from the reference to each interior vertex


def _inner_fan(lattice: TriLattice, inner: Sequence[int]) -> list[tuple[tuple[int, int, int], int]]:
    """Fan triangulation of the disk covered by ``inner``; falls back to ``inner`` itself."""
    direct = [(tuple(int(v) for v in lattice.triangles[f]), int(lattice.signs[f])) for f in inner]
    if not inner:
        return []
    arcs: Counter = Counter()
    for f in inner:
        a, b, c = (int(v) for v in lattice.triangles[f])
        cyc = [(a, b), (b, c), (c, a)] if lattice.signs[f] > 0 else [(b, a), (c, b), (a, c)]
        arcs.update(cyc)
    bnd = [(u, w) for (u, w) in arcs if (w, u) not in arcs]
    verts = {v for f in inner for v in lattice.triangles[f].tolist()}
    edges = {frozenset(p) for p in arcs}
    nxt: dict[int, int] = {}
    for u, w in bnd:
        if u in nxt:
            return direct
        nxt[u] = w
    if not nxt or len(verts) - len(edges) + len(inner) != 1:
        return direct
    start = min(nxt)
    cycle = [start]
    while nxt[cycle[-1]] != start:
        cycle.append(nxt[cycle[-1]])
        if len(cycle) > len(nxt):
            return direct
    if len(cycle) != len(nxt):
        return direct
    fan = []
    for k in range(1, len(cycle) - 1):
        tri = (cycle[0], cycle[k], cycle[k + 1])
        srt = tuple(sorted(tri))
        # sign +1 when the sorted order is an even permutation of the counterclockwise order
        perm = [tri.index(v) for v in srt]
        inversions = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
        fan.append((srt, 1 if inversions % 2 == 0 else -1))
    return fan


def _branch_geometry(lattice: TriLattice, region: Sequence[int]) -> _BranchGeometry:
    reg = region_boundary(lattice, region)
    inside = frozenset(reg.interior)
    mixed, inner = [], []
    for f in reg.touching:
        (inner if set(lattice.triangles[f].tolist()) <= inside else mixed).append(f)
    internal = [e for e, (a, b) in enumerate(lattice.edges.tolist()) if a in inside and b in inside]
    ref = min(inside)
    paths: dict[int, tuple[tuple[int, int], ...]] = {ref: ()}
    frontier = [ref]
    while frontier:
        v = frontier.pop(0)
        for e, d in sorted(lattice.edges_at(v)):
            if e not in internal:
                continue
            a, b = (int(u) for u in lattice.edges[e])
            w = a if d > 0 else b
            if w not in paths:
                # step from v to w: forward along the edge when v is its tail
                paths[w] = paths[v] + ((e, 1 if a == v else -1),)
                frontier.append(w)
    return _BranchGeometry(reg, inside, tuple(mixed), tuple(inner), tuple(_inner_fan(lattice, inner)),
                           tuple(internal), paths)


def _words(state: SparseState) -> np.ndarray:
    grp = state.group
    t, inv = grp.mul_table, grp.inv_table
    lat = state.lattice
    v, e = state.vertices, state.edges
    return t[t[v[:, lat.edges[:, 1]], e], inv[v[:, lat.edges[:, 0]]]]


def branch_line_phase(omega: Cocycle3, state: SparseState, region: Sequence[int], x: int,
                      geometry: _BranchGeometry | None = None, parts: bool = False):
    """Exponent (over ``omega.den``) of ``W * Theta`` for every term of ``state``.

    ``W`` multiplies the three tetrahedra of the prism over each triangle that
    touches R without lying inside it; ``Theta`` multiplies slant products
    over a fan of the disk spanned by the triangles inside R.  Lifted vertices
    carry the word ``l_i = g_i x g_i^-1``; composite words are
    ``w_j'i = l_j w_ji`` and ``w_j'i' = l_j w_ji l_i^-1``.
    """
    grp = omega.group
    t, inv = grp.mul_table, grp.inv_table
    lat = state.lattice
    geo = geometry or _branch_geometry(lat, region)
    om = omega.num
    den = omega.den
    g = state.vertices
    W = _words(state)
    T = state.n_terms

    # flatness on the star of R and internal edges commuting with x
    for f in geo.region.touching:
        e12, e23, e13 = lat.tri_edges[f]
        hol = t[inv[W[:, e13]], t[W[:, e23], W[:, e12]]]
        if np.any(hol != 0):
            raise FluxObstruction(f"triangle {f} next to the branch line carries flux")
    for e in geo.internal_edges:
        h = state.edges[:, e]
        if np.any(t[h, x] != t[x, h]):
            raise FluxObstruction(f"internal edge {e} does not commute with {grp.labels[x]}")

    ell = np.zeros((T, lat.n_vertices), dtype=np.int64)
    for v in geo.inside:
        ell[:, v] = t[t[g[:, v], x], inv[g[:, v]]]

    w_phase = np.zeros(T, dtype=np.int64)
    for f in geo.mixed:
        v1, v2, v3 = (int(v) for v in lat.triangles[f])
        e12, e23, _ = lat.tri_edges[f]
        w21, w32 = W[:, e12], W[:, e23]
        l1, l2, l3 = ell[:, v1], ell[:, v2], ell[:, v3]
        w3p2p = t[t[l3, w32], inv[l2]]
        w2p1p = t[t[l2, w21], inv[l1]]
        a = om[w3p2p, w2p1p, l1]
        b = om[w3p2p, l2, w21]
        c = om[l3, w32, w21]
        w_phase += int(lat.signs[f]) * (a - b + c)

    th_phase = np.zeros(T, dtype=np.int64)
    if geo.fan:
        # potentials along internal paths give the words of fan chords
        ref = min(geo.inside)
        P = {ref: np.zeros(T, dtype=np.int64)}
        for v, path in geo.paths.items():
            cur = np.zeros(T, dtype=np.int64)
            for e, d in path:
                w = W[:, e]
                cur = t[w, cur] if d > 0 else t[inv[w], cur]
            P[v] = cur
        theta = slant_theta(omega).num
        for (a, b, c), s in geo.fan:
            wcb = t[P[c], inv[P[b]]]
            wba = t[P[b], inv[P[a]]]
            th_phase += s * theta[ell[:, c], wcb, wba]
    if parts:
        return np.mod(w_phase, den), np.mod(th_phase, den)
    return np.mod(w_phase + th_phase, den)


def branch_line_apply(omega: Cocycle3, state: SparseState, region: Sequence[int], x: int,
                      geometry: _BranchGeometry | None = None) -> SparseState:
    """Apply the closed branch line around R: boundary edge shifts plus the ``W * Theta`` phase."""
    grp = omega.group
    if not state.edge_active:
        state = state.with_terms(state.configs, state.amps, merge=False, edge_active=True)
    geo = geometry or _branch_geometry(state.lattice, region)
    phase = branch_line_phase(omega, state, region, x, geo)
    t, inv = grp.mul_table, grp.inv_table
    configs = state.configs.copy()
    for e, d in geo.region.crossing:
        col = state.nv + e
        configs[:, col] = t[x, configs[:, col]] if d > 0 else t[configs[:, col], inv[x]]
    amps = state.amps * np.exp(2j * np.pi * phase / omega.den)
    return state.with_terms(configs, amps, merge=False)


def branch_line_identity_check(omega: Cocycle3, state: SparseState, region: Sequence[int], x: int,
                               tol: float = TOL) -> tuple[bool, float]:
    """Compare the branch line with the region gauge transformation on ``state``, no phase freedom."""
    lhs = branch_line_apply(omega, state, region, x)
    rhs = gauge_transform_region(state, region, x)
    dev = lhs.distance(rhs)
    return dev < tol, dev


def anchored_branch_line_check(omega: Cocycle3, lattice: TriLattice, region: Sequence[int], x: int,
                               support: int = 3) -> tuple[bool, int]:
    """Exact check of the branch-line phase against the SPT amplitude ratio.

    Both ``Omega(g with g_R x) / Omega(g)`` and ``W * Theta`` are products of
    factors that each read at most three vertex values, so their ratio is the
    identity everywhere once it is the identity on every configuration with at
    most three non-identity vertices (inclusion-exclusion over supports).
    Returns ``(ok, number of configurations checked)``.
    """
    grp = omega.group
    nv = lattice.n_vertices
    geo = _branch_geometry(lattice, region)
    star = sorted({int(v) for f in geo.region.touching for v in lattice.triangles[f]})
    rows = []
    for k in range(support + 1):
        for sites in itertools.combinations(star, k):
            for vals in itertools.product(range(1, grp.order), repeat=k):
                row = np.zeros(nv, dtype=np.int64)
                row[list(sites)] = vals
                rows.append(row)
    v = np.array(rows)
    t = grp.mul_table
    lifted = v.copy()
    for r in geo.inside:
        lifted[:, r] = t[v[:, r], x]
    direct = np.mod(vertex_omega(omega, lattice, lifted) - vertex_omega(omega, lattice, v), omega.den)
    configs = np.hstack([v, np.zeros((len(v), lattice.n_edges), dtype=np.int64)])
    st = SparseState(grp, lattice, configs, np.ones(len(v), dtype=complex), True, True)
    phase = branch_line_phase(omega, st, region, x, geo)
    return bool(np.array_equal(direct, phase)), len(v)
