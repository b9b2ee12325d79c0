#!/usr/bin/env python3
"""Smoke test for the _densjump extension module.

Build the module first:

    cargo build --release -p densjump-py

then run:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / "release" / "lib_densjump.so",
        ROOT / "target" / "debug" / "lib_densjump.so",
        ROOT / "target" / "release" / "lib_densjump.dylib",
        ROOT / "target" / "debug" / "lib_densjump.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("extension not built; run: cargo build --release -p densjump-py")
    tmp = Path(tempfile.mkdtemp(prefix="densjump-smoke-"))
    target = tmp / ("_densjump" + built.suffix.replace(".dylib", ".so"))
    shutil.copy(built, target)
    sys.path.insert(0, str(tmp))
    import _densjump

    return _densjump


CHECKS = []


def check(name, ok, detail=""):
    status = "ok" if ok else "FAIL"
    print(f"  [{status}] {name}" + (f"  ({detail})" if detail else ""))
    CHECKS.append(ok)


def main():
    dj = load_module()
    print(f"_densjump {dj.__version__}")

    # Special functions against independent references.
    check(
        "P(3, 3)",
        abs(dj.reg_lower_gamma(3.0, 3.0) - 0.57680991887315648) < 1e-12,
        f"{dj.reg_lower_gamma(3.0, 3.0):.15f}",
    )
    check(
        "Q(1, 5) = e^-5",
        abs(dj.reg_upper_gamma(1.0, 5.0) - math.exp(-5)) < 1e-14,
    )
    check(
        "quantile round trip",
        abs(dj.reg_lower_gamma(2.75, dj.inv_reg_lower_gamma(2.75, 0.3)) - 0.3) < 1e-10,
    )
    check(
        "lambda(0.81)",
        abs(dj.lambda_factor(0.81) - 2.6093806822457135) < 1e-10,
    )
    check(
        "gamma kernel closed form",
        abs(dj.gamma_kernel(2.0, 1.0, 1.0) - math.exp(-1) / 2) < 1e-14,
    )
    check(
        "kernel decomposition",
        abs(
            dj.reg_lower_gamma(3.0, 2.0) * dj.trunc_kernel_minus(2.0, 1.0, 2.0, 1.0)
            - dj.gamma_kernel(2.0, 1.0, 1.0)
        )
        < 1e-14,
    )

    # A discontinuous sample must be flagged, a continuous one must not.
    c = dj.dist_quantile("gamma", 2.75, 1.0, 0.3)
    check("gamma 30% quantile", abs(c - 1.7056991888125403) < 1e-10, f"{c:.6f}")

    jumpy = dj.draw_sample("gamma", 2.75, 1.0, 2000, 7, c=c, d=0.10)
    res = dj.jump_test(jumpy, c)
    check(
        "jump detected at d = 0.10",
        res["reject"] and res["jump"] > 0,
        f"T = {res['t_stat']:.2f}, b = {res['b']:.4f} ({res['b_source']})",
    )

    smooth = dj.draw_sample("gamma", 2.75, 1.0, 2000, 7)
    res0 = dj.jump_test(smooth, c, b=0.05)
    check(
        "no jump on continuous data",
        abs(res0["t_stat"]) < 3.0,
        f"T = {res0['t_stat']:.2f}, p = {res0['p_value']:.3f}",
    )

    sel = dj.select_bandwidth(jumpy, c)
    check(
        "bandwidth selection in range",
        0.0 < sel["b_hat_n"] < sel["b_hat_k"] <= 0.50 and len(sel["power_curve"]) == 46,
        f"b_hat_n = {sel['b_hat_n']:.4f}, M = {sel['m']}",
    )

    curve = dj.density_curve(jumpy, 0.1, [1.0, c, 3.0], cutoff=c)
    at_c = [pt for pt in curve if pt[0] == c]
    check(
        "density curve emits both limits at the cutoff",
        len(at_c) == 2 and at_c[0][2] == "left" and at_c[1][2] == "right",
        f"f- = {at_c[0][1]:.4f}, f+ = {at_c[1][1]:.4f}",
    )

    # Error mapping.
    try:
        dj.reg_lower_gamma(-1.0, 2.0)
        check("domain error surfaces as ValueError", False)
    except ValueError:
        check("domain error surfaces as ValueError", True)

    if all(CHECKS):
        print(f"PASS ({len(CHECKS)} checks)")
    else:
        sys.exit(f"FAIL ({CHECKS.count(False)} of {len(CHECKS)} checks)")


if __name__ == "__main__":
    main()
