"""Gauge the S3 SPT in two steps on a 2x2 torus and check every intermediate stage."""

from __future__ import annotations

from tqdsim.cohomology import builtin_cocycle
from tqdsim.gauging import GaugingPlan, run_gauging
from tqdsim.groups import build_group
from tqdsim.hamiltonians import set_terms, tqd_terms, verify_eigenstate
from tqdsim.lattice import build_torus


def main() -> None:
    grp = build_group("S3")
    omega = builtin_cocycle(grp, (1, 1))
    lat = build_torus(2, 2)
    plan = GaugingPlan.build(omega, lat, seed=7)
    final, trace = run_gauging(None, plan)
    for level, state in enumerate(trace.states[:-1], start=1):
        rep = verify_eigenstate(state, set_terms(omega, lat, plan.series, level))
        print(f"after step {level}: {state.n_terms} terms, SET terms pass = {rep.passed}")
    rep = verify_eigenstate(final, tqd_terms(omega, lat))
    print(f"final: {final.n_terms} terms, twisted quantum double terms pass = {rep.passed}")
    print(f"corrections per step: {[len(c) for c in trace.corrections]}")


if __name__ == "__main__":
    main()
