"""Exact root-of-unity phases, 3-cocycles and the cochains derived from them.

A phase ``exp(2 pi i k / d)`` is stored by its exponent.  Whole tables of
phases share one denominator (``PhaseTable``) so that products become integer
additions and cocycle identities can be checked exactly with numpy.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .groups import FiniteGroup, Subgroup, cyclic_decomposition

__all__ = [
    "CohomologyError",
    "BadParams",
    "DomainError",
    "NotExists",
    "PhaseExponent",
    "PhaseTable",
    "Cocycle3",
    "ConjCochain1",
    "EpsilonSolution",
    "builtin_cocycle",
    "builtin_parameter_space",
    "cocycle_from_function",
    "verify_cocycle_condition",
    "coboundary2",
    "attach_coboundary",
    "restrict_cocycle",
    "slant_theta",
    "gamma_product",
    "verify_twisted_2cocycle",
    "solve_epsilon",
    "conj_cocycles1",
    "beta_factor",
    "pumping_factor",
    "characters",
    "charge_table",
    "solve_mod",
]


class CohomologyError(Exception):
    pass


class BadParams(CohomologyError):
    pass


class DomainError(CohomologyError):
    pass


class NotExists(CohomologyError):
    """The conjugated 1-cochain equation has no solution on the requested domain."""


@dataclass(frozen=True, order=True)
class PhaseExponent:
    """``exp(2 pi i * value)`` with ``value`` a fraction in [0, 1)."""

    value: Fraction

    def __init__(self, numerator: int | Fraction = 0, denominator: int = 1) -> None:
        if denominator <= 0:
            raise ValueError("denominator must be positive")
        object.__setattr__(self, "value", Fraction(numerator) / denominator % 1)

    @property
    def numerator(self) -> int:
        return self.value.numerator

    @property
    def denominator(self) -> int:
        return self.value.denominator

    def __mul__(self, other: PhaseExponent) -> PhaseExponent:
        return PhaseExponent(self.value + other.value)

    def __truediv__(self, other: PhaseExponent) -> PhaseExponent:
        return PhaseExponent(self.value - other.value)

    def __pow__(self, k: int) -> PhaseExponent:
        return PhaseExponent(self.value * k)

    def inverse(self) -> PhaseExponent:
        return PhaseExponent(-self.value)

    def is_one(self) -> bool:
        return self.value == 0

    def __complex__(self) -> complex:
        return complex(np.exp(2j * np.pi * float(self.value)))

    def __repr__(self) -> str:
        return f"PhaseExponent({self.numerator}/{self.denominator})"


@dataclass(frozen=True, eq=False)
class PhaseTable:
    """An array of phases ``exp(2 pi i num / den)`` over one common denominator."""

    num: np.ndarray
    den: int

    def __post_init__(self) -> None:
        num = np.mod(np.asarray(self.num, dtype=np.int64), self.den)
        object.__setattr__(self, "num", num)

    def lift(self, den: int) -> PhaseTable:
        if den % self.den:
            raise ValueError(f"{den} is not a multiple of {self.den}")
        return PhaseTable(self.num * (den // self.den), den)

    def _common(self, other: PhaseTable) -> tuple[np.ndarray, np.ndarray, int]:
        d = math.lcm(self.den, other.den)
        return self.num * (d // self.den), other.num * (d // other.den), d

    def __mul__(self, other: PhaseTable) -> PhaseTable:
        a, b, d = self._common(other)
        return PhaseTable(a + b, d)

    def __truediv__(self, other: PhaseTable) -> PhaseTable:
        a, b, d = self._common(other)
        return PhaseTable(a - b, d)

    def __pow__(self, k: int) -> PhaseTable:
        return PhaseTable(self.num * k, self.den)

    def __getitem__(self, idx) -> PhaseExponent | PhaseTable:
        v = self.num[idx]
        if np.ndim(v) == 0:
            return PhaseExponent(int(v), self.den)
        return PhaseTable(v, self.den)

    def reduced(self) -> PhaseTable:
        g = reduce(math.gcd, self.num.ravel().tolist(), self.den)
        return PhaseTable(self.num // g, self.den // g)

    def equals(self, other: PhaseTable) -> bool:
        a, b, d = self._common(other)
        return bool(np.array_equal(np.mod(a, d), np.mod(b, d)))

    def is_trivial(self) -> bool:
        return not np.any(self.num)

    def to_complex(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.num / self.den)


# ----------------------------------------------------------------- cocycles


@dataclass(frozen=True, eq=False)
class Cocycle3:
    """A normalized 3-cocycle on ``group`` stored as an exponent table ``num[g, h, l] / den``."""

    group: FiniteGroup
    table: PhaseTable
    family: str = "table"
    params: tuple[int, ...] = ()

    @property
    def num(self) -> np.ndarray:
        return self.table.num

    @property
    def den(self) -> int:
        return self.table.den

    def __call__(self, g: int, h: int, l: int) -> PhaseExponent:
        return PhaseExponent(int(self.num[g, h, l]), self.den)

    def is_normalized(self) -> bool:
        t = self.num
        return not (np.any(t[0]) or np.any(t[:, 0]) or np.any(t[:, :, 0]))

    def complex_table(self) -> np.ndarray:
        return self.table.to_complex()

    def to_json(self) -> str:
        n = self.group.order
        rows = [[g, h, l, int(self.num[g, h, l]), self.den]
                for g in range(n) for h in range(n) for l in range(n) if self.num[g, h, l]]
        return json.dumps({"group": self.group.name, "family": self.family,
                           "params": list(self.params), "table": rows})

    @classmethod
    def from_json(cls, group: FiniteGroup, text: str) -> Cocycle3:
        data = json.loads(text)
        rows = data.get("table", [])
        den = math.lcm(1, *[r[4] for r in rows]) if rows else 1
        num = np.zeros((group.order,) * 3, dtype=np.int64)
        for g, h, l, k, d in rows:
            num[g, h, l] = k * (den // d)
        return cls(group, PhaseTable(num, den), data.get("family", "table"), tuple(data.get("params", ())))


def cocycle_from_function(group: FiniteGroup, fn, den: int, family: str = "table",
                          params: Sequence[int] = ()) -> Cocycle3:
    """Tabulate ``fn(coords_g, coords_h, coords_l) -> integer exponent over den``."""
    n = group.order
    num = np.empty((n, n, n), dtype=np.int64)
    c = group.coords
    for g in range(n):
        for h in range(n):
            for l in range(n):
                num[g, h, l] = fn(c[g], c[h], c[l])
    return Cocycle3(group, PhaseTable(num, den), family, tuple(params))


def _zn_type1(n: int, p: int):
    # exp(2 pi i p g (h + l - [h+l]_n) / n^2); the bracket is the residue mod n
    return lambda g, h, l: p * g[0] * (h[0] + l[0] - (h[0] + l[0]) % n)


def _s3(p1: int, p2: int):
    def f(g, h, l):
        (G, a), (H, b), (L, c) = g, h, l
        m = b * (-1) ** L + c
        return 2 * p1 * a * (-1) ** (H + L) * (m - m % 3) + 9 * p2 * G * H * L
    return f


def _d4(p1: int, p2: int, p3: int):
    def f(g, h, l):
        (G, a), (H, b), (L, c) = g, h, l
        m = b * (-1) ** L + c
        return p1 * a * (-1) ** (H + L) * (m - m % 4) + 8 * p2 * G * H * L + 8 * p3 * a * H * L
    return f


def _q8(p: int):
    def f(g, h, l):
        (G, a), (H, b), (L, c) = g, h, l
        m = b * (-1) ** L + c
        return p * (-2 * G * H * L + a * (-1) ** (H + L) * (m - (m + 2 * H * L) % 4))
    return f


def _z2z2(k1: int, k2: int, k3: int):
    return lambda g, h, l: k1 * g[0] * h[0] * l[0] + k2 * g[1] * h[1] * l[1] + k3 * g[0] * h[1] * l[1]


def _z2cube(a1, a2, a3, b12, b13, b23, b21, b31, b32, c):
    # type-1 per factor, type-2 g_i h_j l_j per ordered pair, type-3 g1 h2 l3
    def f(g, h, l):
        t1 = a1 * g[0] * h[0] * l[0] + a2 * g[1] * h[1] * l[1] + a3 * g[2] * h[2] * l[2]
        t2 = (b12 * g[0] * h[1] * l[1] + b13 * g[0] * h[2] * l[2] + b23 * g[1] * h[2] * l[2]
              + b21 * g[1] * h[0] * l[0] + b31 * g[2] * h[0] * l[0] + b32 * g[2] * h[1] * l[1])
        return t1 + t2 + c * g[0] * h[1] * l[2]
    return f


_RANGES = {
    "S3": (3, 2),
    "D4": (4, 2, 2),
    "Q8": (4,),
    "Z2xZ2": (2, 2, 2),
    "Z2xZ2xZ2": (2, 2),
    "Z2xZ2xZ2-full": (2,) * 10,
}


def builtin_parameter_space(group: FiniteGroup) -> list[tuple[str, tuple[int, ...]]]:
    """Every ``(family, params)`` pair accepted by :func:`builtin_cocycle` for ``group``."""
    out = []
    for fam, rng in _RANGES.items():
        if fam.removesuffix("-full") == group.name:
            out.extend((fam, p) for p in itertools.product(*(range(r) for r in rng)))
    if group.family == "cyclic" and len(group.params) == 1:
        out.extend((group.name, (p,)) for p in range(group.params[0]))
    return out


def builtin_cocycle(group: FiniteGroup, params: Sequence[int] = (), family: str | None = None) -> Cocycle3:
    """Representative 3-cocycles for the builtin groups.

    Families and parameters:

    * ``Zn`` (cyclic group of order n): ``(p,)``, type-1 with denominator n^2.
    * ``Z2xZ2``: ``(k1, k2, k3)``.
    * ``Z2xZ2xZ2``: ``(k1, k2)``, type-1 on the first factor plus the type-3 term.
    * ``Z2xZ2xZ2-full``: ten bits, the printed terms extended to every factor by relabeling.
    * ``S3``: ``(p1, p2)``; ``D4``: ``(p1, p2, p3)``; ``Q8``: ``(p,)`` (four of eight classes).
    * ``trivial``: any group.
    """
    fam = family or group.name
    params = tuple(int(p) for p in params)
    if fam == "trivial":
        n = group.order
        return Cocycle3(group, PhaseTable(np.zeros((n, n, n), dtype=np.int64), 1), "trivial", ())
    if fam in _RANGES:
        if group.name != fam.removesuffix("-full"):
            raise BadParams(f"family {fam} does not apply to {group.name}")
        rng = _RANGES[fam]
        if len(params) != len(rng) or any(not 0 <= p < r for p, r in zip(params, rng)):
            raise BadParams(f"{fam} expects params in ranges {rng}, got {params}")
        maker, den = {
            "S3": (_s3, 18), "D4": (_d4, 16), "Q8": (_q8, 8),
            "Z2xZ2": (_z2z2, 2), "Z2xZ2xZ2-full": (_z2cube, 2),
            "Z2xZ2xZ2": (lambda k1, k2: _z2cube(k1, 0, 0, 0, 0, 0, 0, 0, 0, k2), 2),
        }[fam]
        omega = cocycle_from_function(group, maker(*params), den, fam, params)
    elif group.family == "cyclic" and len(group.params) == 1 and fam == group.name:
        n = group.params[0]
        if len(params) != 1 or not 0 <= params[0] < n:
            raise BadParams(f"Z{n} expects one parameter p in [0, {n}), got {params}")
        omega = cocycle_from_function(group, _zn_type1(n, params[0]), n * n, fam, params)
    else:
        raise BadParams(f"no builtin cocycle family {fam!r} for {group.name}")
    if not omega.is_normalized():
        raise BadParams(f"{fam}{params} is not normalized")
    return omega


def _delta3(group: FiniteGroup, num: np.ndarray) -> np.ndarray:
    """Exponent of the coboundary of a 3-cochain on all 4-tuples (g, h, k, l)."""
    t = group.mul_table
    n = group.order
    g, h, k, l = np.meshgrid(*(np.arange(n),) * 4, indexing="ij")
    return (num[h, k, l] - num[t[g, h], k, l] + num[g, t[h, k], l]
            - num[g, h, t[k, l]] + num[g, h, k])


def verify_cocycle_condition(omega: Cocycle3) -> bool:
    """Exhaustive check of the 3-cocycle identity over G^4."""
    return not np.any(np.mod(_delta3(omega.group, omega.num), omega.den))


def coboundary2(group: FiniteGroup, alpha: PhaseTable) -> PhaseTable:
    """``(delta alpha)(g,h,l) = alpha(h,l) alpha(g,hl) / (alpha(gh,l) alpha(g,h))``."""
    t = group.mul_table
    n = group.order
    g, h, l = np.meshgrid(*(np.arange(n),) * 3, indexing="ij")
    a = alpha.num
    return PhaseTable(a[h, l] + a[g, t[h, l]] - a[t[g, h], l] - a[g, h], alpha.den)


def attach_coboundary(omega: Cocycle3, alpha: PhaseTable) -> Cocycle3:
    a = alpha.num
    if np.any(np.mod(a[0], alpha.den)) or np.any(np.mod(a[:, 0], alpha.den)):
        raise BadParams("2-cochain must be normalized")
    return Cocycle3(omega.group, omega.table * coboundary2(omega.group, alpha),
                    omega.family + "+coboundary", omega.params)


def restrict_cocycle(omega: Cocycle3, sub: Subgroup) -> tuple[Cocycle3, np.ndarray]:
    """Restriction to a subgroup, re-indexed as a standalone group; returns (nu, embedding)."""
    grp, emb = sub.as_group(f"{omega.group.name}|{len(sub)}")
    num = omega.num[np.ix_(emb, emb, emb)]
    return Cocycle3(grp, PhaseTable(num, omega.den), omega.family + "|restricted", omega.params), emb


# ---------------------------------------------------------- derived phases


def _conj_inv(group: FiniteGroup) -> np.ndarray:
    """``c[x, g] = g^-1 x g``."""
    t, inv = group.mul_table, group.inv_table
    return t[t[inv[None, :], np.arange(group.order)[:, None]], np.arange(group.order)[None, :]]


def slant_theta(omega: Cocycle3) -> PhaseTable:
    """``theta[x, g, h] = omega(x,g,h) omega(g,h,(gh)^-1 x gh) / omega(g, g^-1 x g, h)``."""
    grp = omega.group
    n = grp.order
    t = grp.mul_table
    c = _conj_inv(grp)
    x, g, h = np.meshgrid(*(np.arange(n),) * 3, indexing="ij")
    w = omega.num
    num = w[x, g, h] + w[g, h, c[x, t[g, h]]] - w[g, c[x, g], h]
    return PhaseTable(num, omega.den)


def gamma_product(omega: Cocycle3) -> PhaseTable:
    """``gamma[g, x, y] = omega(x,y,g) omega(g, g^-1 x g, g^-1 y g) / omega(x, g, g^-1 y g)``."""
    grp = omega.group
    n = grp.order
    c = _conj_inv(grp)
    g, x, y = np.meshgrid(*(np.arange(n),) * 3, indexing="ij")
    w = omega.num
    num = w[x, y, g] + w[g, c[x, g], c[y, g]] - w[x, g, c[y, g]]
    return PhaseTable(num, omega.den)


def verify_twisted_2cocycle(group: FiniteGroup, theta: PhaseTable) -> bool:
    """``theta_{g^-1xg}(h,l) theta_x(g,hl) = theta_x(gh,l) theta_x(g,h)`` for all x, g, h, l."""
    n = group.order
    t = group.mul_table
    c = _conj_inv(group)
    x, g, h, l = np.meshgrid(*(np.arange(n),) * 4, indexing="ij")
    th = theta.num
    d = th[c[x, g], h, l] + th[x, g, t[h, l]] - th[x, t[g, h], l] - th[x, g, h]
    return not np.any(np.mod(d, theta.den))


# ------------------------------------------------------ modular linear algebra


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return a, 1, 0
    g, s, t = _egcd(b, a % b)
    return g, t, s - (a // b) * t


def solve_mod(a: np.ndarray, b: np.ndarray, modulus: int) -> tuple[np.ndarray, list[np.ndarray]] | None:
    """Solve ``a @ x = b (mod modulus)``.

    Diagonalizes ``a`` with unimodular row and column operations over Z/modulus.
    Returns ``(particular, kernel_generators)`` or ``None`` when inconsistent.
    """
    L = modulus
    A = [[int(v) % L for v in row] for row in np.asarray(a)]
    B = [int(v) % L for v in np.asarray(b)]
    m = len(A)
    n = len(A[0]) if m else 0
    C = [[int(i == j) for j in range(n)] for i in range(n)]

    def row_combine(i: int, j: int, s: int, u: int, v: int, w: int) -> None:
        # (r_i, r_j) <- (s r_i + u r_j, v r_i + w r_j)
        ri, rj = A[i], A[j]
        A[i] = [(s * p + u * q) % L for p, q in zip(ri, rj)]
        A[j] = [(v * p + w * q) % L for p, q in zip(ri, rj)]
        B[i], B[j] = (s * B[i] + u * B[j]) % L, (v * B[i] + w * B[j]) % L

    def col_combine(i: int, j: int, s: int, u: int, v: int, w: int) -> None:
        for mat in (A, C):
            for row in mat:
                p, q = row[i], row[j]
                row[i], row[j] = (s * p + u * q) % L, (v * p + w * q) % L

    rank = 0
    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j]:
                    g = math.gcd(A[i][j], L)
                    if best is None or g < best[0]:
                        best = (g, i, j)
                        if g == 1:
                            break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        A[t], A[pi] = A[pi], A[t]
        B[t], B[pi] = B[pi], B[t]
        if pj != t:
            col_combine(t, pj, 0, 1, 1, 0)
        while True:
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    dirty = True
                    p, q = A[t][t], A[i][t]
                    if q % p == 0:
                        row_combine(t, i, 1, 0, -(q // p), 1)
                    else:
                        g, s, u = _egcd(p, q)
                        row_combine(t, i, s, u, -(q // g), p // g)
            for j in range(t + 1, n):
                if A[t][j]:
                    dirty = True
                    p, q = A[t][t], A[t][j]
                    if q % p == 0:
                        col_combine(t, j, 1, 0, -(q // p), 1)
                    else:
                        g, s, u = _egcd(p, q)
                        col_combine(t, j, s, u, -(q // g), p // g)
            if not dirty:
                break
        rank = t + 1
    y = [0] * n
    kernel_y: list[list[int]] = []
    for i in range(m):
        d = A[i][i] if i < min(rank, n) else 0
        g = math.gcd(d, L)
        if B[i] % g:
            return None
        if i < rank:
            mod = L // g
            y[i] = (B[i] // g) * pow(d // g, -1, mod) % mod if mod > 1 else 0
            if g > 1:
                k = [0] * n
                k[i] = mod
                kernel_y.append(k)
    for j in range(rank, n):
        k = [0] * n
        k[j] = 1
        kernel_y.append(k)
    Cm = np.array(C, dtype=object).reshape(n, n)
    x = np.mod(np.array((Cm @ np.array(y, dtype=object)).tolist(), dtype=np.int64), L) if n else np.zeros(0, np.int64)
    kernel = [np.mod(np.array((Cm @ np.array(k, dtype=object)).tolist(), dtype=np.int64), L) for k in kernel_y]
    return x, kernel


# ---------------------------------------------------------------- epsilon


@dataclass(frozen=True, eq=False)
class ConjCochain1:
    """``eps[x, g]`` defined for x in ``flux`` and g in ``arg``; other entries are unused."""

    group: FiniteGroup
    flux: tuple[int, ...]
    arg: tuple[int, ...]
    table: PhaseTable

    def __call__(self, x: int, g: int) -> PhaseExponent:
        if x not in self.flux or g not in self.arg:
            raise DomainError(f"cochain undefined at ({x}, {g})")
        return self.table[x, g]

    def defined(self, x: int, g: int) -> bool:
        return x in self.flux and g in self.arg

    def times(self, other: ConjCochain1) -> ConjCochain1:
        return ConjCochain1(self.group, self.flux, self.arg, self.table * other.table)


@dataclass(frozen=True, eq=False)
class EpsilonSolution:
    particular: ConjCochain1
    homogeneous: list[ConjCochain1]


def _epsilon_system(group: FiniteGroup, theta: PhaseTable, flux: Sequence[int], arg: Sequence[int], L: int):
    t = group.mul_table
    c = _conj_inv(group)
    var = {(x, g): i for i, (x, g) in enumerate((x, g) for x in flux for g in arg)}
    rows, rhs = [], []
    for x in flux:
        for g in arg:
            for h in arg:
                row = np.zeros(len(var), dtype=np.int64)
                row[var[(int(c[x, g]), h)]] += 1
                row[var[(x, g)]] += 1
                row[var[(x, int(t[g, h]))]] -= 1
                rows.append(row)
                k = int(theta.num[x, g, h]) * L
                assert k % theta.den == 0
                rhs.append(k // theta.den)
        row = np.zeros(len(var), dtype=np.int64)
        row[var[(x, 0)]] = 1
        rows.append(row)
        rhs.append(0)
    return var, np.array(rows), np.array(rhs)


def solve_epsilon(group: FiniteGroup, theta: PhaseTable, flux: Sequence[int] | Subgroup,
                  arg: Sequence[int] | Subgroup) -> EpsilonSolution:
    """Solve ``theta_x(g,h) = eps_{g^-1xg}(h) eps_x(g) / eps_x(gh)`` on the given domains.

    ``flux`` must be closed under conjugation by ``arg``.  The denominator
    starts at theta's and is enlarged (doubled, then multiplied by the order
    of ``arg``) before the system is declared inconsistent.  Raises NotExists.
    """
    flux = tuple(sorted(flux.members if isinstance(flux, Subgroup) else flux))
    arg = tuple(sorted(arg.members if isinstance(arg, Subgroup) else arg))
    c = _conj_inv(group)
    if any(int(c[x, g]) not in flux for x in flux for g in arg):
        raise DomainError("flux domain must be closed under conjugation by the argument domain")
    sub = theta.num[np.ix_(flux, arg, arg)]
    base = PhaseTable(sub, theta.den).reduced().den
    for L in dict.fromkeys([base, 2 * base, base * len(arg), 2 * base * len(arg)]):
        var, A, b = _epsilon_system(group, theta, flux, arg, L)
        sol = solve_mod(A, b, L)
        if sol is None:
            continue
        x, kernel = sol

        def to_cochain(vec: np.ndarray) -> ConjCochain1:
            num = np.zeros((group.order, group.order), dtype=np.int64)
            for (fx, g), i in var.items():
                num[fx, g] = vec[i]
            return ConjCochain1(group, flux, arg, PhaseTable(num, L))

        homog = [to_cochain(k) for k in kernel] if L > 1 else []
        return EpsilonSolution(to_cochain(x), homog)
    raise NotExists("no conjugated 1-cochain trivializes theta on this domain")


def conj_cocycles1(group: FiniteGroup, flux: Sequence[int], arg: Sequence[int], den: int) -> list[ConjCochain1]:
    """Generators of the 1-conjugated cocycles ``v`` (``delta v = 1``) with values in the den-th roots."""
    zero = PhaseTable(np.zeros((group.order,) * 3, dtype=np.int64), 1)
    flux, arg = tuple(sorted(flux)), tuple(sorted(arg))
    var, A, b = _epsilon_system(group, zero, flux, arg, den)
    _, kernel = solve_mod(A, b, den)
    out = []
    for vec in kernel:
        num = np.zeros((group.order, group.order), dtype=np.int64)
        for (fx, g), i in var.items():
            num[fx, g] = vec[i]
        out.append(ConjCochain1(group, flux, arg, PhaseTable(num, den)))
    return out


def beta_factor(eps: ConjCochain1, gamma: PhaseTable, x: int, y: int, args: Sequence[int] | None = None) -> PhaseTable:
    """``beta_{x,y}(g) = eps_x(g) eps_y(g) gamma_g(x, y)`` as a table over g (zeros off ``args``)."""
    grp = eps.group
    args = eps.arg if args is None else tuple(args)
    for g in args:
        if not (eps.defined(x, g) and eps.defined(y, g)):
            raise DomainError(f"epsilon undefined at flux {x} or {y}, argument {g}")
    d = math.lcm(eps.table.den, gamma.den)
    num = np.zeros(grp.order, dtype=np.int64)
    e = eps.table.lift(d).num
    gm = gamma.lift(d).num
    for g in args:
        num[g] = e[x, g] + e[y, g] + gm[g, x, y]
    return PhaseTable(num, d)


def pumping_factor(eps: ConjCochain1, gamma: PhaseTable, x: int) -> PhaseTable:
    """``beta_x(g) = eps_x(g) eps_{x^-1}(g) gamma_g(x, x^-1)``."""
    return beta_factor(eps, gamma, x, eps.group.inv(x))


# ---------------------------------------------------------------- charges


def characters(group: FiniteGroup) -> PhaseTable:
    """Character table ``chi[r, g]`` of an abelian group, rows indexed like the elements."""
    cd = cyclic_decomposition(group)
    d = math.lcm(1, *cd.orders)
    coords = cd.coords
    num = np.zeros((group.order, group.order), dtype=np.int64)
    for r in range(group.order):
        for g in range(group.order):
            num[r, g] = sum(int(coords[r, j]) * int(coords[g, j]) * (d // o) for j, o in enumerate(cd.orders))
    return PhaseTable(num, d)


def charge_table(group: FiniteGroup, theta: PhaseTable) -> dict[int, list[PhaseTable]]:
    """All charges ``mu_a`` of an abelian twisted quantum double, per flux ``a``.

    Each charge solves ``mu_a(g) mu_a(h) = theta_a(g,h) mu_a(gh)``; the list for
    flux ``a`` is the particular solution times every ordinary character, in
    character order.
    """
    if not group.is_abelian():
        raise DomainError("charge tables are defined for abelian gauge groups")
    chars = characters(group)
    out = {}
    elems = tuple(range(group.order))
    for a in elems:
        sol = solve_epsilon(group, theta, (a,), elems)
        base = PhaseTable(sol.particular.table.num[a], sol.particular.table.den)
        out[a] = [base * PhaseTable(chars.num[r], chars.den) for r in elems]
    return out
