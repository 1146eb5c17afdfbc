"""Fuse two non-abelian symmetry defects through their ribbon matrices."""

from __future__ import annotations

from tqdsim.cohomology import builtin_cocycle
from tqdsim.groups import build_group
from tqdsim.setprobe import fusion_decompose, open_ribbon_matrix, set_context

CASES = [
    ("S3", (1, 1), [0, 1, 2], "x"),
    ("D4", (1, 0, 0), [0, 1, 2, 3], "x"),
    ("D4", (2, 0, 0), [0, 1, 2, 3], "x"),
]


def main() -> None:
    for name, params, normal, flux in CASES:
        grp = build_group(name)
        ctx = set_context(builtin_cocycle(grp, params), normal, need_epsilon=False)
        mat = open_ribbon_matrix(ctx, grp.element(flux))
        out = fusion_decompose(mat.tensor(mat), ctx.theory)
        print(f"{name} {params}: {flux} × {flux} = {' + '.join(sorted(out.anyons))}")


if __name__ == "__main__":
    main()
