"""Lattice simulator for gauging SPT states into twisted quantum doubles and probing the SETs in between."""

from __future__ import annotations

__version__ = "0.1.0"

from . import cohomology, gauging, groups, hamiltonians, lattice, qstate, setprobe  # noqa: E402
from .cohomology import Cocycle3, PhaseExponent, PhaseTable, builtin_cocycle  # noqa: E402
from .groups import FiniteGroup, build_group, derive_series  # noqa: E402
from .lattice import TriLattice, build_torus  # noqa: E402
from .qstate import SparseState, build_spt_state, build_tqd_state  # noqa: E402

__all__ = [
    "__version__",
    "cohomology",
    "gauging",
    "groups",
    "hamiltonians",
    "lattice",
    "qstate",
    "setprobe",
    "Cocycle3",
    "PhaseExponent",
    "PhaseTable",
    "builtin_cocycle",
    "FiniteGroup",
    "build_group",
    "derive_series",
    "TriLattice",
    "build_torus",
    "SparseState",
    "build_spt_state",
    "build_tqd_state",
]
