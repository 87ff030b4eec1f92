"""Smoke test for the fsi_schur extension module.

Build and stage the module next to this script first:

    cargo build -p fsi-schur-py --release
    cp target/release/libfsi_schur.so python/fsi_schur.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import fsi_schur  # noqa: E402


def main():
    c = fsi_schur.PhysicalConstants()
    exact = fsi_schur.ExactSolution(c)
    assert abs(exact.velocity(0.0, 0.0, 0.0)[0]) < 1e-15
    g = exact.multiplier(0.3, 0.1)
    assert all(math.isfinite(v) for v in g)

    sim = fsi_schur.Simulation(4, 1e-3, constants=c)
    dofs = sim.dofs()
    assert sim.schur_dim == dofs["n_p"] + dofs["n_gamma"]

    z = [1.0] * sim.schur_dim
    sz = sim.apply_schur(z)
    assert sum(a * b for a, b in zip(z, sz)) > 0.0

    diag = sim.advance(steps=5, solver="pcg")
    assert diag["step"] == 5 and diag["constraint_residual"] < 1e-8
    assert abs(sim.time - 5e-3) < 1e-12
    errs = sim.errors()
    assert errs["eta_l2"] < 1e-2, errs

    kappa_cg, kappa_pcg, iters_cg, iters_pcg = sim.condition()
    assert kappa_pcg < kappa_cg and iters_pcg < iters_cg

    csv = fsi_schur.run_study("meshes = [2, 4]\ndt_list = [1e-3]\nT = 2e-3", study="space")
    lines = [l for l in csv.splitlines() if not l.startswith("#")]
    assert lines[0].startswith("dx,dt,eta_l2") and len(lines) == 3

    try:
        fsi_schur.run_study("lambda = -1")
    except ValueError as e:
        assert "lambda" in str(e)
    else:
        raise AssertionError("invalid config accepted")

    print(f"fsi_schur {fsi_schur.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
