"""Exit criteria for the controller, the oracle checks and the density toolkit.

Each test prints one PASS/FAIL line (collected again in the terminal summary).
"""

import datetime as dt
import io
import time

import numpy as np
import pytest

from domectl.cli import main
from domectl.config import Config
from domectl.density import HeadAnnotations, count_from_map, knn_mean_distances, render_density_map
from domectl.dome import CrowdEstimate, WeatherReading, decide
from domectl.ingest import parse_crowd_profile, parse_weather_csv
from domectl.simulate import run_replay, write_log

from oracles import brute_force_centroid, brute_force_knn_mean

CONFIG = Config()
ENGINE = CONFIG.engine
CAPACITY = CONFIG.controller.capacity
NOON = dt.datetime(2019, 6, 1, 12)

TARGET_MINUTES = 3.04
MINUTES_TOL = 0.5
ORACLE_TOL_S = 0.5
MONOTONE_TOL = 1e-9
MASS_REL_TOL = 1e-6


def reading(temp, rain):
    return WeatherReading(float(temp), 40.0, rain, NOON)


def crowd(ratio):
    return CrowdEstimate.from_ratio(float(ratio), CAPACITY)


def test_1_reference_scenario(acceptance_report):
    t0 = time.perf_counter()
    d = decide(reading(30, False), crowd(72), ENGINE)
    elapsed = time.perf_counter() - t0
    minutes = d.open_seconds / 60
    ok = abs(minutes - TARGET_MINUTES) <= MINUTES_TOL and elapsed < 1.0
    acceptance_report(1, ok, f"crowd 72% temp 30C -> {d.open_seconds:.2f} s = {minutes:.2f} min "
                             f"(target {TARGET_MINUTES} +/- {MINUTES_TOL}); {elapsed:.3f} s")
    assert abs(minutes - TARGET_MINUTES) <= MINUTES_TOL
    assert elapsed < 1.0


def test_2_rain_dominance(acceptance_report):
    t0 = time.perf_counter()
    worst = 0.0
    for c in np.linspace(0, 100, 100):
        for t in np.linspace(-40, 80, 100):
            worst = max(worst, decide(reading(t, True), crowd(c), ENGINE).open_seconds)
    elapsed = time.perf_counter() - t0
    ok = worst == 0.0 and elapsed < 1.0
    acceptance_report(2, ok, f"100x100 grid with rain: max open {worst} s; {elapsed:.3f} s")
    assert worst == 0.0
    assert elapsed < 1.0


def test_3_centroid_oracle(acceptance_report):
    rng = np.random.default_rng(20211018)
    pairs = np.column_stack([rng.uniform(0, 100, 1000), rng.uniform(0, 50, 1000)])
    step = ENGINE.output.axis.step
    t0 = time.perf_counter()
    worst = 0.0
    for c, t in pairs:
        inputs = {"crowd": float(c), "weather": float(t)}
        engine_value = ENGINE.infer(inputs).crisp
        oracle = brute_force_centroid(ENGINE, inputs, step)
        oracle = ENGINE.output.axis.lo if oracle is None else oracle
        worst = max(worst, abs(engine_value - oracle))
    elapsed = time.perf_counter() - t0
    ok = worst <= ORACLE_TOL_S and elapsed < 5.0
    acceptance_report(3, ok, f"1000 pairs vs 10,001-point oracle: max |diff| {worst:.4f} s "
                             f"(tol {ORACLE_TOL_S}); {elapsed:.3f} s")
    assert worst <= ORACLE_TOL_S
    assert elapsed < 5.0


def test_4_monotone_in_crowd(acceptance_report):
    t0 = time.perf_counter()
    seconds = [decide(reading(30, False), crowd(c), ENGINE).open_seconds for c in range(101)]
    elapsed = time.perf_counter() - t0
    drops = [(c, a, b) for c, (a, b) in enumerate(zip(seconds, seconds[1:])) if b < a - MONOTONE_TOL]
    ok = not drops and elapsed < 1.0
    acceptance_report(4, ok, f"temp 30C, crowd 0..100 step 1: {seconds[0]:.2f} -> {seconds[-1]:.2f} s, "
                             f"{len(drops)} decreases; {elapsed:.3f} s")
    assert not drops
    assert elapsed < 1.0


def test_5_density_mass_and_knn(acceptance_report):
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst_rel = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 1001))
        w, h = int(rng.integers(16, 1025)), int(rng.integers(16, 1025))
        pts = np.column_stack([rng.uniform(0, w, n), rng.uniform(0, h, n)])
        pts = np.minimum(pts, [w - 1e-9, h - 1e-9])
        total = count_from_map(render_density_map(HeadAnnotations(pts, w, h)))
        worst_rel = max(worst_rel, abs(total - n) / n)
    knn_mismatch = 0
    for n in (5, 50, 500, 2000):
        pts = rng.uniform(0, 500, (n, 2))
        plist = [tuple(p) for p in pts.tolist()]
        fast = knn_mean_distances(pts, 4)
        knn_mismatch += sum(fast[i] != brute_force_knn_mean(plist, i, 4) for i in range(n))
    elapsed = time.perf_counter() - t0
    ok = worst_rel <= MASS_REL_TOL and knn_mismatch == 0 and elapsed < 30.0
    acceptance_report(5, ok, f"200 maps: max rel mass error {worst_rel:.2e} (tol {MASS_REL_TOL}); "
                             f"knn mismatches {knn_mismatch} up to 2000 pts; {elapsed:.2f} s")
    assert worst_rel <= MASS_REL_TOL
    assert knn_mismatch == 0
    assert elapsed < 30.0


def test_6_count_evaluation(acceptance_report, capsys):
    t0 = time.perf_counter()
    code = main(["eval", "--predicted", "267,453", "--truth", "258,662"])
    out = capsys.readouterr().out.strip()
    elapsed = time.perf_counter() - t0
    ok = code == 0 and "mae=109.00" in out.split() and "rmse=147.92" in out.split() and elapsed < 1.0
    acceptance_report(6, ok, f"eval [267,453] vs [258,662]: {out!r}; {elapsed:.3f} s")
    assert code == 0
    assert "mae=109.00" in out.split()
    assert "rmse=147.92" in out.split()
    assert elapsed < 1.0


def test_7_simulator(acceptance_report, data_dir):
    t0 = time.perf_counter()
    with open(data_dir / "weather_24h.csv", newline="") as fh:
        weather, _ = parse_weather_csv(fh)
    with open(data_dir / "crowd_50.csv", newline="") as fh:
        profile, _ = parse_crowd_profile(fh, CAPACITY)
    logs = []
    for _ in range(2):
        buf = io.StringIO()
        entries = run_replay(weather, profile, CONFIG)
        write_log(buf, entries)
        logs.append(buf.getvalue().encode())
    elapsed = time.perf_counter() - t0
    per_entry = {f"{e.open_seconds:.2f}" for e in entries}
    ok = len(entries) == 24 and logs[0] == logs[1] and per_entry == {"150.00"} and elapsed < 1.0
    acceptance_report(7, ok, f"{len(entries)} entries, identical bytes: {logs[0] == logs[1]}, "
                             f"open seconds {sorted(per_entry)}; {elapsed:.3f} s")
    assert len(entries) == 24
    assert logs[0] == logs[1]
    assert per_entry == {"150.00"}
    assert elapsed < 1.0


def test_8_network_metrics_not_reproduced(acceptance_report):
    acceptance_report(8, True, "trained counting-network metrics are out of scope; "
                               "replaced by criteria 5 and 6 (documented in README)", status="N/A")
    pytest.skip("requires the trained counting network and GPUs; substituted by criteria 5 and 6")
