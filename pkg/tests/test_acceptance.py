"""The twelve acceptance criteria, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict, printed at the end of the
pytest run (and immediately with ``-s``).
"""

import subprocess
import sys
import time

import pytest

from conftest import ACCEPTANCE_LINES
from crosslab import suite
from crosslab.extension import cauchy_reconstruct


def record(n, name, ok, detail):
    line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append((n, line))
    print(line)
    return ok


@pytest.fixture(scope="module")
def annulus():
    start = time.perf_counter()
    field = suite._annulus_field(256)
    return field, time.perf_counter() - start


def test_01_annulus_oracle(annulus):
    field, seconds = annulus
    res = suite.annulus_oracle(field)
    ok = res["max_error"] <= 0.02 and seconds <= 60
    record(1, "annulus oracle", ok, f"max error {res['max_error']:.2e} (<= 0.02), {seconds:.1f} s (<= 60 s)")
    assert res["max_error"] <= 0.02
    assert seconds <= 60


def test_02_solver_vs_monte_carlo(annulus):
    field, _ = annulus
    res = suite.solver_vs_mc(field, seed=2024, n=20_000)
    excess = [abs(p["solver"] - p["mc_mean"]) - (3 * p["std_error"] + 0.02) for p in res["probes"]]
    ok = len(excess) == 20 and max(excess) <= 0
    record(2, "solver vs walk-on-spheres", ok, f"20 probes, worst |diff| - (3 se + 0.02) = {max(excess):.3e}")
    assert len(excess) == 20
    assert max(excess) <= 0


def test_03_trivial_envelope():
    res = suite.trivial_envelope()
    record(3, "trivial envelope", res["passed"], f"{res['rows_differing']} differing w-rows")
    assert res["passed"] and res["rows_differing"] == 0


def test_04_symmetric_envelope():
    res = suite.symmetric_envelope(96)
    ok = res["agreement"] >= 0.99 and res["components"] == 1
    record(4, "symmetric envelope", ok,
           f"cell agreement {100 * res['agreement']:.3f}% (>= 99%), {res['components']} component(s)")
    assert res["agreement"] >= 0.99
    assert res["components"] == 1


def test_05_cross_containment():
    res = suite.cross_containment()
    bad = [k for k, v in res["configs"].items() if not v]
    ok = not bad and len(res["configs"]) >= 3
    record(5, "cross containment", ok, f"{len(res['configs'])} shipped cross configs, failures: {bad or 'none'}")
    assert ok


def test_06_monotone_exhaustion():
    res = suite.monotone_exhaustion(128, 20, tol=1e-7)
    ok = res["worst_increase"] <= 5e-7 and res["gap_to_direct"] <= 0.03
    record(6, "monotone exhaustion", ok,
           f"worst increase {res['worst_increase']:.1e} (<= 5e-7), gap {res['gap_to_direct']:.4f} (<= 0.03)")
    assert res["worst_increase"] <= 5e-7
    assert res["gap_to_direct"] <= 0.03


def test_07_puncture_degeneration():
    res = suite.puncture((0.02, 0.01, 0.005), probe=0.1)
    values = [r["value"] for r in res["values"]]
    errors = [abs(r["value"] - r["exact"]) for r in res["values"]]
    ok = all(e <= 0.03 for e in errors) and values[0] > values[1] > values[2]
    record(7, "puncture degeneration", ok,
           "values " + ", ".join(f"{v:.4f}" for v in values) + f", max error {max(errors):.1e} (<= 0.03)")
    assert values[0] > values[1] > values[2]
    assert max(errors) <= 0.03


def test_08_branch_locus():
    res = suite.branch_locus_check(seed=11, n_poly=50)
    base = res["w2_minus_z"]
    ok = len(base) == 1 and abs(base[0]) <= 1e-9 and res["agreeing"] == 50
    record(8, "branch locus", ok, f"w^2 - z -> {base}, scan agrees on {res['agreeing']}/50 polynomials")
    assert len(base) == 1 and abs(base[0]) <= 1e-9
    assert res["agreeing"] == 50


def test_09_extension_end_to_end():
    start = time.perf_counter()
    res = suite.extension_end_to_end(seed=0)
    seconds = time.perf_counter() - start
    ok = (res["max_rel_error"] <= 1e-6 and res["uniqueness_residual"] <= 1e-10
          and res["control_rejected"] and seconds <= 30)
    record(9, "extension end to end", ok,
           f"max rel error {res['max_rel_error']:.1e} (<= 1e-6), uniqueness {res['uniqueness_residual']:.1e} "
           f"(<= 1e-10), control rejected: {res['control_rejected']}, {seconds:.1f} s (<= 30 s)")
    assert res["max_rel_error"] <= 1e-6
    assert res["uniqueness_residual"] <= 1e-10
    assert res["control_rejected"]
    assert seconds <= 30


def test_09_negative_control_exits_nonzero(tmp_path):
    from importlib import resources
    cfg = resources.files("crosslab.configs") / "negative_control.json"
    proc = subprocess.run([sys.executable, "-m", "crosslab.cli", "verify", "--config", str(cfg),
                           "--out", str(tmp_path)], capture_output=True)
    assert proc.returncode != 0


def test_10_removability():
    value = cauchy_reconstruct(lambda z, w: 1.0 / (z - w), (0.0, 0.8), (0.2, 0.2), n_quad=64)
    err = abs(value - (-1.25))
    record(10, "removability", err <= 1e-8, f"reconstructed {value.real:.12f}, error {err:.1e} (<= 1e-8)")
    assert err <= 1e-8


def test_11_gluing():
    res = suite.gluing(seed=0)
    ok = res["discrepancy"] <= 1e-6 and res["overlap_cells"] > 0
    record(11, "gluing", ok, f"overlap discrepancy {res['discrepancy']:.1e} (<= 1e-6) on {res['overlap_cells']} cells")
    assert res["overlap_cells"] > 0
    assert res["discrepancy"] <= 1e-6


def test_12_suite_is_deterministic(tmp_path):
    outputs = []
    for run in ("first", "second"):
        proc = subprocess.run([sys.executable, "-m", "crosslab.cli", "suite", "--seed", "7",
                               "--out", str(tmp_path / run)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stdout + proc.stderr
        outputs.append((tmp_path / run / "suite.json").read_bytes())
    same = outputs[0] == outputs[1]
    record(12, "determinism", same, f"two suite runs with seed 7 byte-identical: {same}")
    assert same


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
