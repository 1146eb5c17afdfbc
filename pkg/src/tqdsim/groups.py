"""Finite groups as multiplication tables.

Elements are dense integer indices with element 0 the identity.  The module
provides the builtin families used throughout the package (cyclic groups and
their products, dihedral groups, the quaternion group), normal subgroups and
quotients with an explicit section, and two ways of cutting a solvable group
into a chain of abelian layers.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "GroupError",
    "UnsupportedFamily",
    "InvalidParameter",
    "NotClosed",
    "NotNormal",
    "NotSolvable",
    "FiniteGroup",
    "Subgroup",
    "SubgroupInfo",
    "Quotient",
    "CyclicDecomposition",
    "NormalSeries",
    "QUOTIENT_CHAIN",
    "SEQUENTIAL_NORMAL",
    "build_group",
    "cyclic_product",
    "dihedral",
    "quaternion",
    "from_permutations",
    "subgroup",
    "generated_subgroup",
    "subgroup_analysis",
    "conjugacy_classes",
    "centralizer",
    "normal_subgroups",
    "quotient_with_section",
    "cyclic_decomposition",
    "derived_series",
    "derive_series",
    "series_from_chain",
    "decompose_chain",
    "recompose",
]

QUOTIENT_CHAIN = "quotient-chain"
SEQUENTIAL_NORMAL = "sequential-normal"


class GroupError(Exception):
    """Base class for group construction and analysis errors."""


class UnsupportedFamily(GroupError):
    pass


class InvalidParameter(GroupError):
    pass


class NotClosed(GroupError):
    pass


class NotNormal(GroupError):
    pass


class NotSolvable(GroupError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its Cayley table.

    ``coords`` holds the family-specific coordinates of each element (exponent
    tuples for cyclic products, ``(i, j)`` for ``x^i a^j`` in the dihedral and
    quaternion families).  Cocycle formulas are written against these.
    """

    name: str
    mul_table: np.ndarray
    family: str = "table"
    params: tuple[int, ...] = ()
    coords: tuple[tuple[int, ...], ...] = ()
    labels: tuple[str, ...] = ()
    inv_table: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        table = np.asarray(self.mul_table, dtype=np.int64)
        n = table.shape[0]
        if table.shape != (n, n) or n < 1:
            raise InvalidParameter("multiplication table must be square and nonempty")
        if not (np.array_equal(table[0], np.arange(n)) and np.array_equal(table[:, 0], np.arange(n))):
            raise InvalidParameter("element 0 must be the identity")
        inv = np.argmax(table == 0, axis=1)
        if not np.all(table[np.arange(n), inv] == 0):
            raise InvalidParameter("table has an element without inverse")
        table.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "mul_table", table)
        object.__setattr__(self, "inv_table", inv)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(n)))
        if not self.coords:
            object.__setattr__(self, "coords", tuple((i,) for i in range(n)))

    @property
    def order(self) -> int:
        return int(self.mul_table.shape[0])

    @property
    def identity(self) -> int:
        return 0

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"

    def mul(self, g: int, h: int) -> int:
        return int(self.mul_table[g, h])

    def inv(self, g: int) -> int:
        return int(self.inv_table[g])

    def conj(self, x: int, g: int) -> int:
        """Return ``g x g^-1``."""
        return int(self.mul_table[self.mul_table[g, x], self.inv_table[g]])

    def prod(self, elements: Sequence[int]) -> int:
        out = 0
        for g in elements:
            out = int(self.mul_table[out, g])
        return out

    def power(self, g: int, k: int) -> int:
        if k < 0:
            g, k = self.inv(g), -k
        out = 0
        for _ in range(k):
            out = int(self.mul_table[out, g])
        return out

    def element_order(self, g: int) -> int:
        k, h = 1, g
        while h != 0:
            h = int(self.mul_table[h, g])
            k += 1
        return k

    def element(self, label: str) -> int:
        """Look up an element by label, e.g. ``"xa3"`` or ``"(1,0)"``."""
        key = label.replace(" ", "").replace("^", "")
        for i, lab in enumerate(self.labels):
            if lab.replace("^", "") == key:
                return i
        raise KeyError(f"{label!r} is not an element of {self.name}")

    def from_coords(self, coords: Sequence[int]) -> int:
        return self.coords.index(tuple(coords))

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul_table, self.mul_table.T))

    def is_associative(self) -> bool:
        t = self.mul_table
        return bool(np.array_equal(t[t], t[:, t]))

    def to_json(self) -> str:
        return json.dumps({"name": self.name, "mul_table": self.mul_table.tolist()})


# ---------------------------------------------------------------- builtins


def cyclic_product(orders: Sequence[int]) -> FiniteGroup:
    """Direct product of cyclic groups with mixed-radix element indices."""
    orders = tuple(int(n) for n in orders)
    if not orders or any(n < 1 for n in orders):
        raise InvalidParameter(f"cyclic orders must be positive, got {orders}")
    coords = list(itertools.product(*(range(n) for n in orders)))
    index = {c: i for i, c in enumerate(coords)}
    size = len(coords)
    table = np.empty((size, size), dtype=np.int64)
    for i, a in enumerate(coords):
        for j, b in enumerate(coords):
            table[i, j] = index[tuple((x + y) % n for x, y, n in zip(a, b, orders))]
    name = "x".join(f"Z{n}" for n in orders)
    if len(orders) == 1:
        labels = tuple(str(c[0]) for c in coords)
    else:
        labels = tuple("(" + ",".join(map(str, c)) + ")" for c in coords)
    return FiniteGroup(name, table, "cyclic", orders, tuple(coords), labels)


def _xa_label(i: int, j: int) -> str:
    if i == 0 and j == 0:
        return "e"
    s = "x" if i else ""
    if j == 1:
        s += "a"
    elif j > 1:
        s += f"a{j}"
    return s


def dihedral(n: int) -> FiniteGroup:
    """D_n of order 2n with ``a^n = x^2 = e`` and ``x a x = a^-1``; x^i a^j -> i*n + j."""
    if n < 1:
        raise InvalidParameter(f"dihedral parameter must be >= 1, got {n}")
    coords = [(i, j) for i in range(2) for j in range(n)]
    table = np.empty((2 * n, 2 * n), dtype=np.int64)
    for (i, j) in coords:
        for (k, l) in coords:
            table[i * n + j, k * n + l] = ((i + k) % 2) * n + ((-1) ** k * j + l) % n
    name = "S3" if n == 3 else f"D{n}"
    return FiniteGroup(name, table, "dihedral", (n,), tuple(coords),
                       tuple(_xa_label(i, j) for i, j in coords))


def quaternion() -> FiniteGroup:
    """Q_8 with ``a^4 = e``, ``x^2 = a^2`` and ``x^-1 a x = a^-1``; x^i a^j -> 4i + j."""
    coords = [(i, j) for i in range(2) for j in range(4)]
    table = np.empty((8, 8), dtype=np.int64)
    for (i, j) in coords:
        for (k, l) in coords:
            table[4 * i + j, 4 * k + l] = ((i + k) % 2) * 4 + ((-1) ** k * j + l + 2 * (i * k)) % 4
    return FiniteGroup("Q8", table, "quaternion", (), tuple(coords),
                       tuple(_xa_label(i, j) for i, j in coords))


def from_permutations(generators: Sequence[Sequence[int]], name: str = "perm") -> FiniteGroup:
    """Closure of permutation generators (images of 0..n-1), identity first."""
    gens = [tuple(int(v) for v in g) for g in generators]
    if not gens:
        raise InvalidParameter("need at least one generator")
    n = len(gens[0])
    ident = tuple(range(n))
    elements = [ident]
    seen = {ident: 0}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[p[i]] for i in range(n))
                if q not in seen:
                    seen[q] = len(elements)
                    elements.append(q)
                    nxt.append(q)
        frontier = nxt
        if len(elements) > 64:
            raise InvalidParameter("groups of order > 64 are not supported")
    size = len(elements)
    table = np.empty((size, size), dtype=np.int64)
    for i, p in enumerate(elements):
        for j, q in enumerate(elements):
            # (p*q)(k) = p(q(k)): apply q first
            table[i, j] = seen[tuple(p[q[k]] for k in range(n))]
    return FiniteGroup(name, table, "permutation", (), tuple(elements))


_DESCRIPTOR = re.compile(r"^(?:Z\d+)(?:x(?:Z\d+))*$")


def build_group(spec: str) -> FiniteGroup:
    """Build a group from a descriptor such as ``"Z4"``, ``"Z2xZ2xZ2"``, ``"D4"``, ``"Q8"`` or ``"S3"``."""
    s = spec.strip().replace("×", "x").replace("_", "")
    if _DESCRIPTOR.match(s):
        return cyclic_product([int(p[1:]) for p in s.split("x")])
    m = re.fullmatch(r"D(\d+)", s)
    if m:
        n = int(m.group(1))
        if n < 1:
            raise InvalidParameter(f"D{n}: n must be >= 1")
        return dihedral(n)
    if s == "S3":
        return dihedral(3)
    if s == "Q8":
        return quaternion()
    if re.fullmatch(r"Z\d*", s):
        raise InvalidParameter(f"bad cyclic order in {spec!r}")
    raise UnsupportedFamily(f"unsupported group descriptor {spec!r}")


# ------------------------------------------------------------- subgroups


@dataclass(frozen=True, eq=False)
class Subgroup:
    parent: FiniteGroup
    members: tuple[int, ...]

    def __contains__(self, g: int) -> bool:
        return g in self._set

    @property
    def _set(self) -> frozenset[int]:
        return frozenset(self.members)

    @property
    def order(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Subgroup) and other.parent is self.parent and other.members == self.members

    def __hash__(self) -> int:
        return hash(self.members)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[list(self.members)] = True
        return m

    def as_group(self, name: str | None = None) -> tuple[FiniteGroup, np.ndarray]:
        """Re-index the subgroup as a standalone group; returns (group, embedding)."""
        emb = np.array(self.members, dtype=np.int64)
        local = {g: i for i, g in enumerate(self.members)}
        t = self.parent.mul_table[np.ix_(emb, emb)]
        table = np.vectorize(local.__getitem__, otypes=[np.int64])(t)
        labels = tuple(self.parent.labels[g] for g in self.members)
        coords = tuple(self.parent.coords[g] for g in self.members)
        grp = FiniteGroup(name or f"sub({self.parent.name})", table, "table", (), coords, labels)
        return grp, emb


def _check_closed(group: FiniteGroup, members: Sequence[int]) -> tuple[int, ...]:
    mem = sorted(set(int(m) for m in members))
    if not mem or mem[0] != 0:
        raise NotClosed("subgroup must contain the identity")
    idx = np.array(mem)
    prods = group.mul_table[np.ix_(idx, idx)]
    if not np.isin(prods, idx).all() or not np.isin(group.inv_table[idx], idx).all():
        raise NotClosed(f"{mem} is not closed in {group.name}")
    return tuple(mem)


def subgroup(group: FiniteGroup, members: Sequence[int]) -> Subgroup:
    return Subgroup(group, _check_closed(group, members))


def generated_subgroup(group: FiniteGroup, generators: Sequence[int]) -> Subgroup:
    mem = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for h in frontier:
            for g in generators:
                k = group.mul(h, g)
                if k not in mem:
                    mem.add(k)
                    nxt.append(k)
        frontier = nxt
    return Subgroup(group, tuple(sorted(mem)))


def is_normal(group: FiniteGroup, sub: Subgroup) -> bool:
    idx = np.array(sub.members)
    t = group.mul_table
    conj = t[t[:, idx], group.inv_table[:, None]]  # g m g^-1
    return bool(np.isin(conj, idx).all())


def conjugacy_classes(group: FiniteGroup) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    out = []
    for x in range(group.order):
        if x in seen:
            continue
        cls = tuple(sorted({group.conj(x, g) for g in range(group.order)}))
        seen.update(cls)
        out.append(cls)
    return out


def centralizer(group: FiniteGroup, x: int) -> Subgroup:
    t = group.mul_table
    mem = tuple(int(g) for g in np.flatnonzero(t[:, x] == t[x, :]))
    return Subgroup(group, mem)


@dataclass(frozen=True)
class SubgroupInfo:
    is_subgroup: bool
    is_normal: bool
    conjugacy_classes: list[tuple[int, ...]]
    centralizer: Callable[[int], Subgroup]


def subgroup_analysis(group: FiniteGroup, members: Sequence[int]) -> SubgroupInfo:
    """Closure, normality, conjugacy classes and centralizers.  Raises NotClosed."""
    sub = subgroup(group, members)
    return SubgroupInfo(True, is_normal(group, sub), conjugacy_classes(group),
                        lambda x: centralizer(group, x))


def all_subgroups(group: FiniteGroup) -> list[Subgroup]:
    """Every subgroup, found as closures of element pairs (enough for order <= 64 here)."""
    subs = {generated_subgroup(group, [g, h]).members for g in range(group.order) for h in range(g, group.order)}
    # close under joins so that subgroups needing three generators are included
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(sorted(subs), 2):
            j = generated_subgroup(group, list(set(a) | set(b))).members
            if j not in subs:
                subs.add(j)
                changed = True
    return [Subgroup(group, m) for m in sorted(subs, key=lambda m: (len(m), m))]


def normal_subgroups(group: FiniteGroup) -> list[Subgroup]:
    """Normal subgroups sorted by order, ties by member tuple."""
    return [s for s in all_subgroups(group) if is_normal(group, s)]


def commutator_subgroup(group: FiniteGroup, sub: Subgroup | None = None) -> Subgroup:
    mem = sub.members if sub is not None else range(group.order)
    comms = {group.prod([g, h, group.inv(g), group.inv(h)]) for g in mem for h in mem}
    return generated_subgroup(group, sorted(comms))


def derived_series(group: FiniteGroup) -> list[Subgroup]:
    """G = D_0 > D_1 > ... until it stabilizes."""
    series = [Subgroup(group, tuple(range(group.order)))]
    while True:
        nxt = commutator_subgroup(group, series[-1])
        if nxt.members == series[-1].members:
            return series
        series.append(nxt)


# ------------------------------------------------------------- quotients


@dataclass(frozen=True, eq=False)
class Quotient:
    """``K/H`` with projection (defined on K, -1 elsewhere) and least-representative section."""

    group: FiniteGroup
    projection: np.ndarray
    section: np.ndarray

    def decompose(self, parent: FiniteGroup, g: int) -> tuple[int, int]:
        """Split ``g = s(q) n`` and return ``(s(q), n)``."""
        s = int(self.section[self.projection[g]])
        return s, parent.mul(parent.inv(s), g)


def quotient_with_section(group: FiniteGroup, normal: Subgroup, ambient: Subgroup | None = None) -> Quotient:
    """Coset group ``ambient/normal`` (ambient defaults to the whole group).

    Cosets are numbered by their least representative, which is also the
    section value, so ``s(identity) = identity``.
    """
    amb = ambient.members if ambient is not None else tuple(range(group.order))
    amb_set = set(amb)
    if not set(normal.members) <= amb_set:
        raise NotNormal("normal subgroup is not contained in the ambient subgroup")
    t = group.mul_table
    for g in amb:
        for n in normal.members:
            if int(t[t[g, n], group.inv_table[g]]) not in normal:
                raise NotNormal(f"{normal.members} is not normal in {sorted(amb)}")
    projection = np.full(group.order, -1, dtype=np.int64)
    reps: list[int] = []
    for g in sorted(amb):
        if projection[g] >= 0:
            continue
        q = len(reps)
        reps.append(g)
        for n in normal.members:
            projection[t[g, n]] = q
    section = np.array(reps, dtype=np.int64)
    size = len(reps)
    table = np.empty((size, size), dtype=np.int64)
    for a in range(size):
        for b in range(size):
            table[a, b] = projection[t[reps[a], reps[b]]]
    labels = tuple(group.labels[r] for r in reps)
    coords = tuple(group.coords[r] for r in reps)
    qgroup = FiniteGroup(f"{group.name}/N{len(normal)}", table, "quotient", (), coords, labels)
    return Quotient(qgroup, projection, section)


@dataclass(frozen=True, eq=False)
class CyclicDecomposition:
    """An abelian group written as ``prod_j Z_{orders[j]}`` with ``q = prod_j gens[j]^coords[q, j]``."""

    gens: tuple[int, ...]
    orders: tuple[int, ...]
    coords: np.ndarray

    def element(self, group: FiniteGroup, exps: Sequence[int]) -> int:
        return group.prod([group.power(g, int(e)) for g, e in zip(self.gens, exps)])


def cyclic_decomposition(group: FiniteGroup) -> CyclicDecomposition:
    """Minimal generating set with ``prod orders = |Q|`` (brute force, lexicographic first)."""
    if not group.is_abelian():
        raise InvalidParameter(f"{group.name} is not abelian")
    n = group.order
    if n == 1:
        return CyclicDecomposition((), (), np.zeros((1, 0), dtype=np.int64))
    orders_of = [group.element_order(g) for g in range(n)]
    for r in range(1, n):
        for gens in itertools.combinations(range(1, n), r):
            ords = tuple(orders_of[g] for g in gens)
            if int(np.prod(ords)) != n:
                continue
            coords = np.full((n, r), -1, dtype=np.int64)
            ok = True
            for exps in itertools.product(*(range(d) for d in ords)):
                q = group.prod([group.power(g, e) for g, e in zip(gens, exps)])
                if coords[q, 0] >= 0:
                    ok = False
                    break
                coords[q] = exps
            if ok:
                return CyclicDecomposition(gens, ords, coords)
    raise AssertionError("unreachable: every finite abelian group is a product of cyclics")


# ---------------------------------------------------------- normal series


@dataclass(frozen=True, eq=False)
class NormalSeries:
    """A chain ``1 = G_0 < G_1 < ... < G_N = G`` with abelian layers.

    Level ``k`` (1-based) has quotient ``Q_k = G_k / G_{k-1}``, a projection
    from ``G_k`` to ``Q_k``, a section ``s_k: Q_k -> G_k`` and a cyclic
    decomposition of ``Q_k``.  Lists are indexed by ``k - 1``.
    """

    group: FiniteGroup
    chain: tuple[Subgroup, ...]
    quotients: tuple[FiniteGroup, ...]
    projections: tuple[np.ndarray, ...]
    sections: tuple[np.ndarray, ...]
    cyclic: tuple[CyclicDecomposition, ...]
    strategy: str = "explicit"

    @property
    def length(self) -> int:
        return len(self.quotients)

    def __post_init__(self) -> None:
        g = self.group
        if self.chain[0].members != (0,) or self.chain[-1].order != g.order:
            raise InvalidParameter("chain must run from the trivial group to the whole group")
        for k in range(self.length):
            q = self.quotients[k]
            if not q.is_abelian():
                raise InvalidParameter(f"layer {k + 1} is not abelian")
            if self.sections[k][0] != 0:
                raise InvalidParameter("section must send identity to identity")
            if not np.array_equal(self.projections[k][self.sections[k]], np.arange(q.order)):
                raise InvalidParameter("projection after section must be the identity")

    def level_coords(self, k: int, g: int) -> np.ndarray:
        """Cyclic coordinates of ``pi_k(g)`` for ``g`` in ``G_k`` (level k is 1-based)."""
        return self.cyclic[k - 1].coords[self.projections[k - 1][g]]


def series_from_chain(group: FiniteGroup, chain: Sequence[Subgroup],
                      sections: Sequence[Sequence[int]] | None = None,
                      strategy: str = "explicit") -> NormalSeries:
    """Assemble a NormalSeries from an explicit chain, optionally overriding sections.

    A supplied section for level k lists, per coset of ``G_k/G_{k-1}`` in
    least-representative order, the chosen representative.
    """
    quotients, projections, secs, cyc = [], [], [], []
    for k in range(1, len(chain)):
        quo = quotient_with_section(group, chain[k - 1], chain[k])
        sec = quo.section
        if sections is not None and sections[k - 1] is not None:
            sec = np.asarray(sections[k - 1], dtype=np.int64)
            if not np.array_equal(quo.projection[sec], np.arange(quo.group.order)):
                raise InvalidParameter(f"level {k} section does not pick one element per coset")
        quotients.append(quo.group)
        projections.append(quo.projection)
        secs.append(sec)
        cyc.append(cyclic_decomposition(quo.group))
    return NormalSeries(group, tuple(chain), tuple(quotients), tuple(projections),
                        tuple(secs), tuple(cyc), strategy)


def _quotient_chain(group: FiniteGroup) -> list[Subgroup]:
    normals = normal_subgroups(group)
    chain = [normals[0]]
    while chain[-1].order < group.order:
        h = chain[-1]
        for k in normals:
            if k.order > h.order and set(h.members) <= set(k.members):
                if quotient_with_section(group, h, k).group.is_abelian():
                    chain.append(k)
                    break
        else:
            raise NotSolvable(f"{group.name} has no abelian normal layer above {h.members}")
    return chain


def _sequential_normal(group: FiniteGroup) -> tuple[list[Subgroup], list[np.ndarray]]:
    """Peel off the last nontrivial derived term, recurse on the quotient.

    Returns the chain of preimages in G together with the composed lifts
    used as sections at each level.
    """
    chain = [Subgroup(group, (0,))]
    sections: list[np.ndarray] = []
    current = group
    lift = np.arange(group.order)  # composed section from `current` into `group`
    pullback = np.arange(group.order)  # projection from `group` onto `current`
    while current.order > 1:
        ds = derived_series(current)
        if ds[-1].order != 1:
            raise NotSolvable(f"derived series of {group.name} stops at order {ds[-1].order}")
        layer = ds[-2] if len(ds) > 1 else ds[0]
        members = tuple(sorted(int(g) for g in np.flatnonzero(np.isin(pullback, layer.members))))
        prev = chain[-1]
        level = Subgroup(group, members)
        chain.append(level)
        # section of level/prev: composed lift of each coset's image in `current`
        quo = quotient_with_section(group, prev, level)
        sec = np.empty(quo.group.order, dtype=np.int64)
        for q, rep in enumerate(quo.section):
            sec[q] = lift[pullback[rep]]
        sections.append(sec)
        nxt = quotient_with_section(current, layer)
        lift = lift[nxt.section]
        pullback = nxt.projection[pullback]
        current = nxt.group
    return chain, sections


def derive_series(group: FiniteGroup, strategy: str = QUOTIENT_CHAIN) -> NormalSeries:
    """Deterministic solvable decomposition.

    ``quotient-chain`` grows the chain greedily through normal subgroups of G
    (smallest first, ties by member tuple) keeping each layer abelian.
    ``sequential-normal`` repeatedly splits off the last nontrivial term of the
    derived series and uses composed section lifts.
    """
    if derived_series(group)[-1].order != 1:
        raise NotSolvable(f"{group.name} is not solvable")
    if strategy == QUOTIENT_CHAIN:
        return series_from_chain(group, _quotient_chain(group), strategy=strategy)
    if strategy == SEQUENTIAL_NORMAL:
        chain, sections = _sequential_normal(group)
        return series_from_chain(group, chain, sections, strategy=strategy)
    raise InvalidParameter(f"unknown strategy {strategy!r}")


def decompose_chain(series: NormalSeries, g: int) -> list[int]:
    """Return ``[q_N, ..., q_1]`` with ``g = q_N ... q_1`` and ``q_k`` in the image of ``s_k``."""
    grp = series.group
    out = []
    for k in range(series.length, 0, -1):
        q = int(series.sections[k - 1][series.projections[k - 1][g]])
        out.append(q)
        g = grp.mul(grp.inv(q), g)
    assert g == 0
    return out


def recompose(series: NormalSeries, parts: Sequence[int]) -> int:
    return series.group.prod(parts)
