#!/usr/bin/env python3
"""Smoke test for the rkhsb_py extension module.

Builds the cdylib if needed, imports it, and checks a closed-form
single-point model against the library end to end, plus one small
benchmark-system and certificate round trip.

Run from anywhere: python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    lib = None
    for profile in ("release", "debug"):
        cand = REPO / "target" / profile / "librkhsb_py.so"
        if cand.exists():
            lib = cand
            break
    if lib is None:
        print("building rkhsb-py (release) ...")
        subprocess.run(
            ["cargo", "build", "-p", "rkhsb-py", "--release"], cwd=REPO, check=True
        )
        lib = REPO / "target" / "release" / "librkhsb_py.so"
    stage = Path(tempfile.mkdtemp(prefix="rkhsb_py_"))
    shutil.copy(lib, stage / "rkhsb_py.so")
    sys.path.insert(0, str(stage))
    import rkhsb_py

    return rkhsb_py


def approx(got, want, tol=1e-9, label=""):
    if not math.isfinite(got) or abs(got - want) > tol:
        raise AssertionError(f"{label}: got {got!r}, want {want!r} (tol {tol})")


def check_closed_form(rk):
    # One training point at the origin, unit SE kernel, y = 2, sigma_n = 1:
    # every quantity below has a hand-computable value.
    kernel = rk.Kernel.se(1.0, 1.0)
    data = rk.Dataset([[0.0]], [2.0])
    gp = rk.Gp(kernel, data, 1.0)
    x = [0.0]
    approx(gp.mean(x), 1.0, label="posterior mean")
    approx(gp.var(x), 0.5, label="posterior variance")
    approx(gp.weights(x)[0], 0.5, label="posterior weight")

    sigma_v, norm_bound, delta = 0.5, 2.0, 0.05
    ctx = rk.BoundContext(gp, sigma_v, norm_bound)
    # c* = (y - sigma_v)^2 / (k + sigma_n^2) at the clipped noise corner.
    approx(ctx.cstar, (2.0 - sigma_v) ** 2 / 2.0, tol=1e-7, label="cstar")
    assert ctx.cstar_converged

    rkhs = math.sqrt(0.5) * math.sqrt(norm_bound**2 - ctx.cstar)
    approx(ctx.rkhs_term(x), rkhs, tol=1e-7, label="rkhs term")
    lam = 4.0 * sigma_v**2 * 0.5**2
    approx(ctx.lambda_x(x), lam, label="lambda_x")
    approx(
        ctx.prob_bound(x, delta),
        rkhs + math.sqrt(lam / 2.0 * math.log(2.0 / delta)),
        tol=1e-7,
        label="probabilistic bound",
    )
    approx(
        ctx.det_bound(x),
        rkhs + sigma_v * 0.5,
        tol=1e-7,
        label="deterministic bound",
    )

    # A single kernel section has norm |coefficient| * sigma_s.
    f = rk.RkhsFunction(kernel, [[0.0]], [1.5])
    approx(f.norm, 1.5, label="rkhs norm")
    approx(f.eval([0.0]), 1.5, label="rkhs eval")
    print("closed-form single-point model: ok")


def check_baselines(rk):
    system = rk.System.builtin("lin2d")
    data = system.generate_dataset(60, 1)
    assert len(data) == system.dim and len(data[0]) == 60
    kernel = rk.Kernel.se(0.25, 1.0)
    b = system.norm_bounds[0]
    sv = system.sigma_v
    x = [0.1, -0.2]
    for bound in (
        rk.Chowdhury(kernel, data[0], b, sv, 0.05),
        rk.Hashimoto(kernel, data[0], b, sv),
        rk.Abbasi(kernel, data[0], b, sv, 0.05),
        rk.Seeger(kernel, data[0], b, sv, 0.05),
        rk.Maddalena(kernel, data[0], b, sv, sv),
    ):
        v = bound.bound(x)
        assert math.isfinite(v) and v > 0.0, f"{type(bound).__name__}: {v}"
    print("baseline bounds on lin2d: ok")


def check_feature_map(rk):
    fm = rk.FeatureMap([2, 8, 8], "gelu", 7)
    assert fm.input_dim == 2 and fm.output_dim == 8
    assert len(fm.forward([0.3, -0.1])) == 8
    inputs = [[0.1 * i, 0.05 * i] for i in range(20)]
    targets = [[math.sin(x[0]) + x[1]] * 8 for x in inputs]
    before = fm.mse(inputs, targets)
    trained = fm.train(inputs, targets, 200, 0.5, 1e-2, 3)
    after = trained.mse(inputs, targets)
    assert after <= before + 1e-12, f"training made mse worse: {before} -> {after}"
    fm2 = rk.FeatureMap.from_json(trained.to_json())
    approx(fm2.mse(inputs, targets), after, label="feature map json round trip")
    print(f"feature map training (mse {before:.4f} -> {after:.4f}): ok")


def check_certificate(rk):
    system = rk.System.builtin("lin2d")
    data = system.generate_dataset(60, 1)
    kernel = rk.Kernel.se(0.25, 1.0)
    sv = system.sigma_v
    ctxs = [
        rk.BoundContext(rk.Gp(kernel, d, sv), sv, b)
        for d, b in zip(data, system.norm_bounds)
    ]
    cert = rk.synthesize_barrier(
        ctxs,
        "det",
        system.domain,
        [5, 5],
        system.initial_box,
        1,
        grid_per_dim=2,
        slack=0.05,
    )
    assert len(cert.values) == 25
    assert 0.0 <= cert.safety_probability <= 1.0
    assert cert.confidence_delta is None
    freq = system.mc_unsafe_frequency(system.domain, system.initial_box, 1, 2000, 9)
    assert freq <= 1.0 - cert.safety_probability + 0.05, (
        f"empirical unsafe frequency {freq} above certified {cert}"
    )
    print(f"det certificate on lin2d (P_s={cert.safety_probability:.3f}, mc={freq:.4f}): ok")


def check_errors(rk):
    try:
        rk.Kernel.se(-1.0, 1.0)
        raise AssertionError("negative sigma_s accepted")
    except ValueError:
        pass
    kernel = rk.Kernel.se(1.0, 1.0)
    data = rk.Dataset([[0.0]], [2.0])
    gp = rk.Gp(kernel, data, 1.0)
    try:
        rk.BoundContext(gp, 0.5, 0.01)
        raise AssertionError("tiny norm bound accepted")
    except RuntimeError:
        pass
    print("error mapping (ValueError / RuntimeError): ok")


def main():
    rk = load_module()
    check_closed_form(rk)
    check_baselines(rk)
    check_feature_map(rk)
    check_certificate(rk)
    check_errors(rk)
    print("smoke test passed")


if __name__ == "__main__":
    main()
