#!/usr/bin/env python3
"""Smoke test for the `_bufrelay` extension module.

Builds nothing itself: it locates the compiled shared object under
``target/{release,debug}``, stages it in a temporary directory under the
importable name ``_bufrelay.so``, and exercises the analytic pipeline, the
LP oracle, the certificate, and the simulator end to end.

Run from the repository root after ``cargo build --release -p bufrelay-py``:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO_ROOT / "target" / "release" / "lib_bufrelay.so",
        REPO_ROOT / "target" / "debug" / "lib_bufrelay.so",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "no compiled module found; run `cargo build --release -p bufrelay-py` first"
        )
    staging = Path(tempfile.mkdtemp(prefix="bufrelay_py_"))
    shutil.copy2(built, staging / "_bufrelay.so")
    sys.path.insert(0, str(staging))
    import _bufrelay

    print(f"loaded {built.relative_to(REPO_ROOT)}")
    return _bufrelay


def check(label, condition):
    status = "ok" if condition else "FAIL"
    print(f"  {status}: {label}")
    if not condition:
        sys.exit(1)


def main():
    br = load_module()

    params = br.SystemParams(
        p1=br.db_to_linear(25.0),
        p2=br.db_to_linear(25.0),
        omega1=0.8,
        omega2=0.6,
        r0=4.0,
        rsi=5.0,
    )
    print(repr(params))
    check("gamma0 = 2^r0 - 1", math.isclose(params.gamma0(), 15.0))

    print("analytic pipeline:")
    p = br.region_probabilities(params)
    check("six region probabilities", len(p) == 6)
    check("probabilities sum to 1", math.isclose(sum(p), 1.0, abs_tol=1e-9))

    case, rows, degenerate = br.optimal_policy(p)
    check("case tag looks like Psi*", case == br.classify_case(p) and case.startswith("Psi"))
    check("no degenerate regions at this point", degenerate == [])
    check(
        "policy rows are distributions",
        all(math.isclose(sum(row), 1.0, abs_tol=1e-9) for row in rows),
    )

    t_opt = br.optimal_throughput(p, params.r0)
    objective, alpha0, support = br.lp_optimum(p, params.r0)
    print(f"  case {case}: closed form {t_opt:.9f}, LP {objective:.9f}, alpha0 {alpha0}")
    check("LP oracle matches the closed form", abs(objective - t_opt) < 1e-9)
    check("LP support fits in the basis", support <= 7)
    check("LP dual price equals the case price", abs(alpha0 - br.case_price(case)) < 1e-6)

    certified, violations = br.certify_policy(p, rows, br.case_price(case))
    check("certificate accepts the optimal policy", certified and violations == [])
    bad, bad_violations = br.certify_policy(p, rows, 0.99)
    check("certificate rejects a wrong balance price", not bad and bad_violations)

    hd, fd_always, fd_preferred = br.baseline_throughputs(p, params.r0)
    print(f"  baselines: hd {hd:.6f}, fd-always {fd_always:.6f}, fd-preferred {fd_preferred:.6f}")
    check("hybrid dominates every baseline", t_opt >= max(hd, fd_always, fd_preferred) - 1e-12)
    hd_rows, hd_t = br.baseline_policy("hd-optimal", p, params.r0)
    check("baseline policy reproduces its throughput tag", math.isclose(hd_t, hd, abs_tol=1e-12))
    check("hd baseline never picks full duplex", all(row[2] == 0.0 for row in hd_rows))

    print("simulator:")
    report = br.simulate(params, horizon=400_000, seed=7)
    print(f"  {report!r}")
    check("simulated the requested horizon", report.horizon == 400_000)
    check(
        "estimate tracks the analytic throughput",
        abs(report.est_throughput - t_opt) / t_opt < 0.02,
    )
    check(
        "hop rate estimates agree",
        abs(report.est_r1 - report.est_r2) <= 3.0 * params.r0 / math.sqrt(report.horizon),
    )
    repeat = br.simulate(params, horizon=400_000, seed=7)
    check(
        "same seed reproduces the run exactly",
        repeat.est_throughput == report.est_throughput
        and repeat.region_counts == report.region_counts,
    )
    strict = br.simulate(params, horizon=400_000, seed=7, buffer="strict")
    check(
        "strict buffering stays near the ideal rate",
        abs(strict.est_throughput - report.est_throughput) / t_opt < 0.02,
    )

    horizons, means, exponent = br.queue_growth_probe(
        params, rows, replicas=30, min_pow=10, max_pow=17, seed=42
    )
    print(f"  growth probe: {len(horizons)} horizons, exponent {exponent:.3f}")
    check("balanced policy diffuses (exponent near 1/2)", 0.3 < exponent < 0.7)

    names = br.preset_names()
    check("presets are registered", "fig3a" in names and len(names) >= 6)
    check(
        "preset lookup round-trips a parameter",
        math.isclose(br.preset_params("fig5").omega2, 0.8),
    )

    print("smoke test passed")


if __name__ == "__main__":
    main()
