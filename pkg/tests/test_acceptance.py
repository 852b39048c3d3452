"""Acceptance criteria, each run at its stated tolerance and time budget.

Every test appends one ``[PASS]``/``[FAIL]`` line that is printed in the
"acceptance criteria" section of the pytest summary.
"""

import json
import math
import time

import numpy as np
import pytest

from skewangular.cli import main
from skewangular.detector import SearchConfig, search_counterexample
from skewangular.functionals import (
    UNIVERSAL_BOUNDS,
    bound_holds,
    bound_terms,
    euclidean_identity_defect,
    failure_counts,
    pair_geometry,
    pair_terms,
)
from skewangular.norm_core import Gram, Lp, child_rng, sample_vectors

from conftest import ACCEPTANCE_LINES, family_spec, grid_alpha_minus_beta, random_spd

THRESHOLD = 1e-7
SEED = 7
# thread counts compared by the determinism criterion
DETECT_WORKERS = (1, 8)

_reports = {}


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, detail


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


@pytest.fixture(scope="module")
def gram_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("gram")
    paths = []
    for dim, seed in ((2, 501), (3, 502)):
        path = root / f"spd{dim}.txt"
        body = "\n".join(" ".join(repr(float(v)) for v in row) for row in random_spd(dim, seed))
        path.write_text(f"# random SPD {dim}x{dim}\n{body}\n")
        paths.append((dim, f"gram:{path}"))
    return paths


def test_criterion_1_real_line_example(capsys):
    t0 = time.perf_counter()
    code, out = run_cli(capsys, "eval", "--norm", "lp:1", "--x", "1", "--y", "-2")
    elapsed = time.perf_counter() - t0
    r = json.loads(out)["results"]
    ok = (code == 0 and abs(r["maligranda_gap"] - 2) <= 1e-12
          and abs(r["dehghan_gap"] - 1) <= 1e-12 and elapsed < 1.0)
    record(1, ok, f"maligranda_gap={r['maligranda_gap']!r} dehghan_gap={r['dehghan_gap']!r} "
                  f"({elapsed:.3f}s)")


def test_criterion_2_l1_plane_example(capsys):
    t0 = time.perf_counter()
    code, out = run_cli(capsys, "eval", "--norm", "lp:1", "--x", "0.75,0.75", "--y", "-1,0")
    elapsed = time.perf_counter() - t0
    r = json.loads(out)["results"]
    ok = (code == 0 and abs(r["maligranda_gap"] - 1) <= 1e-12
          and abs(r["dehghan_gap"] - 4 / 3) <= 1e-12 and elapsed < 1.0)
    record(2, ok, f"maligranda_gap={r['maligranda_gap']!r} dehghan_gap={r['dehghan_gap']!r} "
                  f"({elapsed:.3f}s)")


def test_criterion_3_universal_bounds():
    names = ("l1", "l1.5", "l2", "l3", "linf", "wlp2", "gram")
    t0 = time.perf_counter()
    failures = {}
    for name in names:
        for dim in (2, 3, 4):
            spec = family_spec(name, dim)
            x = sample_vectors(spec, dim, 10_000, child_rng(dim, 0), (0.25, 4.0))
            y = sample_vectors(spec, dim, 10_000, child_rng(dim, 1), (0.25, 4.0))
            counts = failure_counts(spec, x, y)
            bad = {k: counts[k] for k in UNIVERSAL_BOUNDS if counts[k]}
            if bad:
                failures[(name, dim)] = bad
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 30.0
    record(3, ok, f"{len(names)} specs x dims 2-4 x 10^4 pairs, {len(UNIVERSAL_BOUNDS)} bounds, "
                  f"failures={failures or 0} ({elapsed:.2f}s)")


def test_criterion_4_inner_product_identity():
    specs = [Gram(random_spd(3, 77)), Gram(np.diag([1.0, 4.0])), Gram(random_spd(4, 78))]
    t0 = time.perf_counter()
    worst = 0.0
    for k, spec in enumerate(specs):
        dim = spec.matrix.shape[0]
        x = sample_vectors(spec, dim, 10_000 // len(specs) + 1, child_rng(40 + k, 0), (0.25, 4.0))
        y = sample_vectors(spec, dim, len(x), child_rng(40 + k, 1), (0.25, 4.0))
        worst = max(worst, max(euclidean_identity_defect(spec, a, b) for a, b in zip(x, y)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5.0
    record(4, ok, f"max |beta^2 - alpha^2 - (r - 1/r)^2| = {worst:.2e} over 10^4 Gram pairs "
                  f"({elapsed:.2f}s)")


def _detect(capsys, norm, dim, workers):
    code, out = run_cli(capsys, "detect", "--norm", norm, "--dim", str(dim), "--seed", str(SEED),
                        "--workers", str(workers))
    _reports[(norm, dim, workers)] = out
    return code, json.loads(out)["results"]


def _positive_cases(gram_files):
    return [("lp:2", d) for d in (2, 3, 4)] + [(norm, dim) for dim, norm in gram_files]


NEGATIVE_CASES = [("lp:1", 1.0), ("lp:1.5", 1.5), ("lp:4", 4.0), ("lp:inf", math.inf)]


def test_criterion_5_positive_direction(capsys, gram_files):
    t0 = time.perf_counter()
    problems = []
    for norm, dim in _positive_cases(gram_files):
        code, r = _detect(capsys, norm, dim, 1)
        if not (code == 0 and r["verdict"] == "ConsistentWithInnerProduct"
                and r["alpha_beta"]["best_value"] <= THRESHOLD
                and r["lorch"]["violation_count"] == 0 and r["lorch"]["gammas_per_pair"] == 61):
            problems.append(f"{norm} dim {dim}")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 60.0
    record(5, ok, f"lp:2 dims 2-4 + 2 random Gram specs all ConsistentWithInnerProduct, "
                  f"problems={problems or 0} ({elapsed:.2f}s)")


def test_criterion_6_negative_direction(capsys):
    t0 = time.perf_counter()
    problems = []
    for norm, p in NEGATIVE_CASES:
        # the grid oracle must show a violation exists before the search is trusted
        ratios = (1.5, 2.0, 4.0) if p in (1.0, math.inf) else (1.05, 1.2, 1.5)
        grid_best = grid_alpha_minus_beta("lp", ratios, steps=360, p=p)[0]
        if not grid_best > THRESHOLD:
            problems.append(f"{norm}: grid oracle found nothing")
            continue
        code, r = _detect(capsys, norm, 2, 1)
        ab = r["alpha_beta"]
        if code != 3 or r["verdict"] != "NotInnerProduct" or ab["witness_x"] is None:
            problems.append(f"{norm}: verdict {r['verdict']}")
            continue
        g = pair_geometry(Lp(p), ab["witness_x"], ab["witness_y"])
        if not g.alpha - g.beta > 0.99 * THRESHOLD:
            problems.append(f"{norm}: witness does not re-verify")
        if not r["sub_verdicts"]["parallelogram"]:
            problems.append(f"{norm}: parallelogram sub-test disagrees")
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 60.0
    record(6, ok, f"lp:1, lp:1.5, lp:4, lp:inf certified NotInnerProduct after grid-oracle "
                  f"precheck, problems={problems or 0} ({elapsed:.2f}s)")


def test_criterion_7_sharpness(capsys):
    t0 = time.perf_counter()
    code, out = run_cli(capsys, "sharpness", "--eps-start", "1e-1", "--eps-end", "1e-6",
                        "--steps", "6")
    elapsed = time.perf_counter() - t0
    rows = json.loads(out)["results"]["rows"]
    worst = max(r["abs_diff"] for r in rows)
    ok = (code == 0 and len(rows) == 6 and worst <= 1e-10
          and all(0 < r["one_minus_ratio"] <= 2 * r["eps"] for r in rows) and elapsed < 1.0)
    record(7, ok, f"max |ratio - closed form| = {worst:.1e}, 1 - ratio in (0, 2 eps] "
                  f"({elapsed:.3f}s)")


def test_criterion_8_dunkl_williams_dichotomy():
    t0 = time.perf_counter()
    violations = {}
    for label, spec, dim in (("lp:2", Lp(2.0), 3), ("gram", Gram(random_spd(3, 88)), 3)):
        x = sample_vectors(spec, dim, 10_000, child_rng(88, 0), (0.25, 4.0))
        y = sample_vectors(spec, dim, 10_000, child_rng(88, 1), (0.25, 4.0))
        lhs, rhs = bound_terms(pair_terms(spec, x, y))["dunkl_williams_2"]
        violations[label] = int(np.sum(~bound_holds(lhs, rhs)))
    r = search_counterexample(Lp(1.0), SearchConfig(dim=2, seed=SEED), "dunkl_williams_2")
    certified = False
    if r.found:
        g = pair_geometry(Lp(1.0), r.witness_x, r.witness_y)
        certified = g.alpha - 2 * g.norm_diff / (g.norm_x + g.norm_y) > 0.99 * THRESHOLD
    elapsed = time.perf_counter() - t0
    ok = not any(violations.values()) and certified and elapsed < 30.0
    record(8, ok, f"inner-product violations={violations}, lp:1 certified violation "
                  f"{r.best_value:.4f} ({elapsed:.2f}s)")


def test_criterion_9_determinism(capsys, gram_files):
    cases = _positive_cases(gram_files) + [(norm, 2) for norm, _ in NEGATIVE_CASES]
    mismatched = []
    for norm, dim in cases:
        outs = {}
        for workers in DETECT_WORKERS:
            if (norm, dim, workers) not in _reports:
                _detect(capsys, norm, dim, workers)
            outs[workers] = _reports[(norm, dim, workers)]
        again = run_cli(capsys, "detect", "--norm", norm, "--dim", str(dim), "--seed", str(SEED),
                        "--workers", "1")[1]
        if not (outs[1] == outs[8] == again):
            mismatched.append(f"{norm} dim {dim}")
    ok = not mismatched
    record(9, ok, f"{len(cases)} detect reports byte-identical across repeats and 1 vs 8 "
                  f"threads, mismatches={mismatched or 0}")
