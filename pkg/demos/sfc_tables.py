"""Print symmetry-fractionalization tables for a few gauged central subgroups."""

from __future__ import annotations

from tqdsim.cohomology import builtin_cocycle
from tqdsim.groups import build_group
from tqdsim.setprobe import set_context, sfc_table

CASES = [
    ("Z4", (1,), [0, 2]),
    ("Z4", (2,), [0, 2]),
    ("D4", (1, 1, 0), [0, 2]),
    ("Q8", (1,), [0, 2]),
]


def main() -> None:
    for name, params, normal in CASES:
        grp = build_group(name)
        rep = sfc_table(set_context(builtin_cocycle(grp, params), normal))
        cells = {f"{grp.labels[a]},{grp.labels[b]}": w for (a, b), w in sorted(rep.nontrivial().items())}
        print(f"{name} {params} [{rep.theory_kind}] closed={rep.cocycle_identity}: {cells or 'trivial'}")


if __name__ == "__main__":
    main()
