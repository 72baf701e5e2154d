"""Acceptance gate: one test per numbered criterion.

Each test prints one ``CRITERION n: PASS/FAIL`` line (visible with ``-s`` or
``-rA``) and then asserts, so the suite is both a report and a gate.  The
Figure-1 and Figure-2 sweeps are shared through session fixtures; the whole
module takes on the order of ten minutes of wall time on a small machine.

Criteria 5 and 7 are implemented exactly at their stated tolerances and are
expected to fail in part; see the test docstrings for the measured reasons.
"""

import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from keynetsim import (
    ChannelMatrix,
    ClassDistribution,
    KeyProfile,
    ModelParams,
    connectivity,
    derive,
    generate,
    pairwise_key_prob,
    rng_stream,
    run_trials,
)
from keynetsim.analysis import analyze
from keynetsim.cli import csv_rows, main
from keynetsim.config import load_config
from keynetsim.montecarlo import run_sweep
from keynetsim.oracle import (
    combinatorial_bound_check,
    dfs_connectivity,
    exact_key_prob,
    pair_adjacency_frequency,
)

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")
WORKERS = max(1, min(8, os.cpu_count() or 1))


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"\nCRITERION {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")


def _config(name: str):
    return load_config(os.path.join(CONFIG_DIR, name))


@pytest.fixture(scope="session")
def fig1_sweeps():
    out = {}
    t0 = time.perf_counter()
    for tag in ("02", "04", "06"):
        cfg = _config(f"figure1_alpha12_{tag}.yaml")
        out[tag] = run_sweep(cfg.spec, workers=WORKERS)
    out["elapsed"] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="session")
def fig2_sweeps():
    out = {}
    for tag in ("04", "06"):
        cfg = _config(f"figure2_alpha11_{tag}.yaml")
        out[tag] = run_sweep(cfg.spec, workers=WORKERS)
    return out


# ---------------------------------------------------------------------------
# 1. Exact-formula oracle equivalence
# ---------------------------------------------------------------------------


def test_criterion_01_exact_formula_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    checked = 0
    for pool in (256, 1024, 10**4):
        for kj in range(1, 129):
            for ki in range(1, 129):
                approx = pairwise_key_prob(ki, kj, pool)
                exact = float(exact_key_prob(ki, kj, pool))
                err = abs(approx - exact) / exact
                worst = max(worst, err)
                checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 10.0
    _report(
        1,
        ok,
        f"{checked} grid points, worst relative error {worst:.3e}, {elapsed:.1f}s",
    )
    assert worst <= 1e-12
    assert elapsed < 10.0


# ---------------------------------------------------------------------------
# 2. Edge-probability fidelity
# ---------------------------------------------------------------------------


def test_criterion_02_edge_probability_fidelity():
    params = _config("figure1_alpha12_02.yaml").params
    samples = 10**6
    t0 = time.perf_counter()
    worst_z = 0.0
    for idx, (i, j) in enumerate(((0, 0), (0, 1), (1, 1))):
        freq = pair_adjacency_frequency(params, i, j, samples, rng_stream(2, idx))
        expected = float(params.channel.alpha[i, j]) * pairwise_key_prob(
            int(params.keys.ring_sizes[i]), int(params.keys.ring_sizes[j]),
            params.keys.pool_size,
        )
        sigma = math.sqrt(expected * (1.0 - expected) / samples)
        worst_z = max(worst_z, abs(freq - expected) / sigma)
    elapsed = time.perf_counter() - t0
    ok = worst_z <= 4.0 and elapsed < 30.0
    _report(2, ok, f"worst |z| = {worst_z:.2f} over 3 class pairs, {elapsed:.1f}s")
    assert worst_z <= 4.0
    assert elapsed < 30.0


# ---------------------------------------------------------------------------
# 3. Figure-1 reproduction (property form)
# ---------------------------------------------------------------------------


def test_criterion_03_figure1_reproduction(fig1_sweeps):
    thresholds = {}
    problems = []
    for tag, a12 in (("02", 0.2), ("04", 0.4), ("06", 0.6)):
        rows = fig1_sweeps[tag]
        by_value = {r.sweep_value: r for r in rows}
        if by_value[10].p_connected > 0.10:
            problems.append(f"a12={a12}: p_connected(10)={by_value[10].p_connected}")
        if by_value[35].p_connected < 0.95:
            problems.append(f"a12={a12}: p_connected(35)={by_value[35].p_connected}")
        marked = [r.sweep_value for r in rows if r.is_predicted_threshold]
        if len(marked) != 1:
            problems.append(f"a12={a12}: threshold marker count {len(marked)}")
            continue
        t = marked[0]
        thresholds[a12] = t
        low = max(r.sweep_value for r in rows if r.p_connected <= 0.10)
        high = min(r.sweep_value for r in rows if r.p_connected >= 0.95)
        if not (low < t < high):
            problems.append(f"a12={a12}: threshold {t} not inside ({low}, {high})")
    if not (thresholds.get(0.6, 99) <= thresholds.get(0.4, 99) <= thresholds.get(0.2, 99)):
        problems.append(f"thresholds not monotone in alpha12: {thresholds}")
    elapsed = fig1_sweeps["elapsed"]
    ok = not problems and elapsed <= 15 * 60
    _report(
        3,
        ok,
        f"thresholds {thresholds}, sweeps took {elapsed:.0f}s"
        + (f"; problems: {problems}" if problems else ""),
    )
    assert not problems
    assert elapsed <= 15 * 60


# ---------------------------------------------------------------------------
# 4. Event coincidence
# ---------------------------------------------------------------------------


def test_criterion_04_event_coincidence(fig1_sweeps):
    worst = 0.0
    for tag in ("02", "04", "06"):
        for row in fig1_sweeps[tag]:
            worst = max(worst, abs(row.p_no_isolated - row.p_connected))
    ok = worst <= 0.03
    _report(4, ok, f"max |p_no_isolated - p_connected| = {worst:.4f} (bound 0.03)")
    assert worst <= 0.03


# ---------------------------------------------------------------------------
# 5. Figure-2 regime switch
# ---------------------------------------------------------------------------


def test_criterion_05_figure2_regime_switch(fig2_sweeps):
    """m-switch and threshold equality hold; the row-wise CI-overlap clause
    does not: below the threshold the alpha_11=0.4 and alpha_11=0.6 curves
    differ systematically (the class-1 isolation term still depends on
    alpha_11 there), by more than two 95% intervals at T=400."""
    problems = []
    m4 = derive(_config("figure2_alpha11_04.yaml").params).m
    m6 = derive(_config("figure2_alpha11_06.yaml").params).m
    m2 = derive(_config("figure2_alpha11_02.yaml").params).m
    if m4 != 1 or m6 != 1:
        problems.append(f"expected minimizing class 2, got m={m4 + 1}/{m6 + 1}")
    if m2 != 0:
        problems.append(f"alpha11=0.2 should minimize in class 1, got m={m2 + 1}")

    t4 = [r.sweep_value for r in fig2_sweeps["04"] if r.is_predicted_threshold]
    t6 = [r.sweep_value for r in fig2_sweeps["06"] if r.is_predicted_threshold]
    if t4 != t6 or len(t4) != 1:
        problems.append(f"thresholds differ: {t4} vs {t6}")

    disjoint = []
    for r4, r6 in zip(fig2_sweeps["04"], fig2_sweeps["06"]):
        lo4, hi4 = r4.p_connected_ci
        lo6, hi6 = r6.p_connected_ci
        if hi4 < lo6 or hi6 < lo4:
            disjoint.append(
                f"K1={r4.sweep_value}: p={r4.p_connected:.3f} vs {r6.p_connected:.3f}"
            )
    if disjoint:
        problems.append("rows without CI overlap: " + "; ".join(disjoint))

    ok = not problems
    _report(
        5,
        ok,
        f"m(0.4)/m(0.6)={m4 + 1}/{m6 + 1}, m(0.2)={m2 + 1}, thresholds {t4}/{t6}"
        + (f"; {problems}" if problems else ""),
    )
    assert not problems, problems


# ---------------------------------------------------------------------------
# 6. Figure-3/4 bipartite boundary
# ---------------------------------------------------------------------------


def _bipartite_params(alpha12: float) -> ModelParams:
    return ModelParams(
        n=500,
        dist=ClassDistribution([0.5, 0.5]),
        keys=KeyProfile([50, 55], 10**4),
        channel=ChannelMatrix([[0.0, alpha12], [alpha12, 0.0]]),
    )


def test_criterion_06_bipartite_boundary():
    params = _bipartite_params(0.2)
    intra = 0
    connected = 0
    for k in range(400):
        out = analyze(generate(params, rng_stream(1, k)))
        intra += int(out.intra_class_edge_counts.sum())
        connected += out.is_connected
    stats_zero = run_trials(_bipartite_params(0.0), 400, master_seed=1)
    ok = intra == 0 and connected > 0 and stats_zero.p_connected == 0.0
    _report(
        6,
        ok,
        f"intra-class edges {intra}, p_connected(alpha12=0.2) = {connected / 400}, "
        f"p_connected(alpha12=0) = {stats_zero.p_connected}",
    )
    assert intra == 0
    assert connected > 0
    assert stats_zero.p_connected == 0.0


# ---------------------------------------------------------------------------
# 7. First-moment agreement
# ---------------------------------------------------------------------------


def test_criterion_07_first_moment_agreement(fig1_sweeps):
    """Stated tolerance 3 * sample std / sqrt(400) degenerates to zero on
    saturated rows (every trial has zero isolated nodes) while the analytic
    first moment stays positive, so those rows cannot satisfy the bound for
    any seed; rows with a live sample pass."""
    failing = []
    for tag in ("02", "04", "06"):
        for row in fig1_sweeps[tag]:
            tol = 3.0 * row.std_isolated / math.sqrt(row.trials)
            if abs(row.mean_isolated - row.analytic_e_in) > tol:
                failing.append(
                    f"a12=0.{tag[1]} K1={row.sweep_value}: mean={row.mean_isolated} "
                    f"std={row.std_isolated} E={row.analytic_e_in:.3g}"
                )
    total = sum(len(fig1_sweeps[tag]) for tag in ("02", "04", "06"))
    ok = not failing
    _report(
        7,
        ok,
        f"{total - len(failing)}/{total} rows within 3 SE"
        + (f"; failing rows (all with sample std 0): {failing}" if failing else ""),
    )
    assert not failing, failing


# ---------------------------------------------------------------------------
# 8. Zero-one law trend
# ---------------------------------------------------------------------------


def test_criterion_08_zero_one_law_trend():
    t0 = time.perf_counter()
    pool = 10**4
    k = 20
    p = pairwise_key_prob(k, k, pool)
    ns = (500, 1000, 2000, 4000)
    curves = {}
    reported_c = {}
    for c in (0.5, 2.0):
        curve = []
        for n in ns:
            alpha = c * math.log(n) / (n * p)
            params = ModelParams(
                n=n,
                dist=ClassDistribution([1.0]),
                keys=KeyProfile([k], pool),
                channel=ChannelMatrix([[alpha]]),
            )
            reported_c[(c, n)] = derive(params).c_n
            stats = run_trials(params, 200, master_seed=1, workers=WORKERS)
            curve.append(stats.p_no_isolated)
        curves[c] = curve
    elapsed = time.perf_counter() - t0

    gaps = [hi - lo for hi, lo in zip(curves[2.0], curves[0.5])]
    problems = []
    if any(abs(reported_c[(c, n)] - c) > 1e-9 for c in (0.5, 2.0) for n in ns):
        problems.append(f"scaling constants off target: {reported_c}")
    if curves[0.5][-1] > 0.3:
        problems.append(f"c=0.5 curve too high at n=4000: {curves[0.5][-1]}")
    if curves[2.0][-1] < 0.8:
        problems.append(f"c=2.0 curve too low at n=4000: {curves[2.0][-1]}")
    if any(b < a for a, b in zip(gaps, gaps[1:])):
        problems.append(f"gap not widening monotonically: {gaps}")
    if elapsed > 20 * 60:
        problems.append(f"took {elapsed:.0f}s")
    ok = not problems
    _report(
        8,
        ok,
        f"c_n hit 0.5/2.0 exactly; p(c=0.5)={curves[0.5]}, p(c=2.0)={curves[2.0]}, "
        f"gaps={gaps}, {elapsed:.0f}s" + (f"; {problems}" if problems else ""),
    )
    assert not problems, problems


# ---------------------------------------------------------------------------
# 9. Connectivity algorithm equivalence
# ---------------------------------------------------------------------------


def test_criterion_09_connectivity_equivalence():
    rng = np.random.default_rng(20250809)
    mismatches = 0
    for i in range(500):
        n = int(rng.integers(40, 220))
        pool = int(rng.integers(30, 120))
        k = int(rng.integers(1, pool // 2 + 1))
        regime = i % 3
        if regime == 0:
            alpha = 0.0  # empty
        elif regime == 1:
            alpha = min(1.0, math.log(n) / (n * pairwise_key_prob(k, k, pool)))
        else:
            alpha = float(rng.uniform(0.5, 1.0))
            k = max(k, pool // 3)
        params = ModelParams(
            n=n,
            dist=ClassDistribution([1.0]),
            keys=KeyProfile([k], pool),
            channel=ChannelMatrix([[alpha]]),
        )
        g = generate(params, rng_stream(9, i))
        uf_connected, uf_components, _ = connectivity(g)
        if (uf_connected, uf_components) != dfs_connectivity(g):
            mismatches += 1
    ok = mismatches == 0
    _report(9, ok, f"union-find vs DFS agreement on 500 graphs, {mismatches} mismatches")
    assert mismatches == 0


# ---------------------------------------------------------------------------
# 10. Determinism
# ---------------------------------------------------------------------------


def test_criterion_10_determinism(fig1_sweeps, tmp_path):
    cfg = os.path.join(CONFIG_DIR, "figure1_alpha12_02.yaml")
    blobs = {}
    for workers in (1, 8):
        out = str(tmp_path / f"fig1_w{workers}.csv")
        code = main(["sweep", "--config", cfg, "--out", out, "--workers", str(workers)])
        assert code == 0
        with open(out, "rb") as fh:
            blobs[workers] = fh.read()
    identical = blobs[1] == blobs[8]

    # the in-memory fixture (a third worker count) renders to the same rows
    fixture_csv = "\n".join(
        ",".join(cells) for cells in csv_rows(fig1_sweeps["02"])
    )
    file_body = b"\n".join(blobs[1].split(b"\n")[1:]).rstrip(b"\n").decode()
    matches_fixture = fixture_csv == file_body

    ok = identical and matches_fixture
    _report(
        10,
        ok,
        f"CSV bytes identical across worker counts 1/8: {identical}; "
        f"matches in-memory rows from the {WORKERS}-worker fixture: {matches_fixture}",
    )
    assert identical
    assert matches_fixture


# ---------------------------------------------------------------------------
# 11. Combinatorial bound property
# ---------------------------------------------------------------------------


def test_criterion_11_combinatorial_bound():
    rng = np.random.default_rng(20170530)
    t0 = time.perf_counter()
    checked = 0
    failures = 0
    while checked < 10**4:
        pool = int(rng.integers(10, 500))
        ki = int(rng.integers(1, max(2, pool // 5)))
        a = float(rng.choice([1.0, float(rng.integers(1, 5)), rng.uniform(1.0, 4.0)]))
        room = pool - math.ceil(a * ki)
        if room < 1:
            continue
        kj = int(rng.integers(1, room + 1))
        if not combinatorial_bound_check(ki, kj, pool, a):
            failures += 1
        checked += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0
    _report(11, ok, f"{checked} random tuples, {failures} violations, {elapsed:.1f}s")
    assert failures == 0
