import datetime as dt
import io

import pytest

from domectl.config import Config, load_config
from domectl.errors import DataError
from domectl.ingest import CrowdProfileEntry, WeatherRecord, parse_crowd_profile, parse_weather_csv
from domectl.simulate import (
    ReplaySummary,
    format_entry,
    iter_replay,
    parse_log_line,
    run_replay,
    write_log,
)

DAY = dt.date(2019, 6, 1)
T0 = dt.datetime(2019, 6, 1)


def load(data_dir, weather, crowd):
    with open(data_dir / weather, newline="") as fh:
        w, _ = parse_weather_csv(fh)
    with open(data_dir / crowd, newline="") as fh:
        c, _ = parse_crowd_profile(fh, 698_000)
    return w, c


def hourly(temps, rain=()):
    return [WeatherRecord(DAY, h, 0, t, 40.0, rain=h in rain) for h, t in enumerate(temps)]


def flat_crowd(ratio, hours=24):
    return [CrowdProfileEntry(T0 + dt.timedelta(hours=h), ratio) for h in range(hours)]


def log_text(entries):
    buf = io.StringIO()
    write_log(buf, entries)
    return buf.getvalue()


def test_constant_day(data_dir):
    entries = run_replay(*load(data_dir, "weather_24h.csv", "crowd_50.csv"))
    assert len(entries) == 24
    assert all(e.open_seconds == pytest.approx(150.0, abs=1e-9) for e in entries)
    assert [e.timestamp.hour for e in entries] == list(range(24))


def test_rain_hour(data_dir):
    entries = run_replay(*load(data_dir, "weather_24h_rain7.csv", "crowd_50.csv"))
    assert (entries[7].open_seconds, entries[7].label) == (0.0, "Stop")
    assert entries[6].open_seconds > 0 and entries[8].open_seconds > 0


def test_scenario_hour(data_dir):
    entries = run_replay(*load(data_dir, "weather_24h.csv", "crowd_scenario.csv"))
    assert entries[9].ratio == 72.0
    assert entries[9].open_seconds == pytest.approx(181.64, abs=0.01)


def test_byte_identical(data_dir):
    w, c = load(data_dir, "weather_24h_rain7.csv", "crowd_scenario.csv")
    assert log_text(run_replay(w, c)) == log_text(run_replay(w, c))


def test_entry_count_is_hour_heads():
    weather = [WeatherRecord(DAY, 0, 30, 30.0, 40.0), WeatherRecord(DAY, 5, 10, 30.0, 40.0)]
    crowd = [CrowdProfileEntry(T0, 50.0)]
    entries = run_replay(weather, crowd)
    # heads 01:00 .. 05:00
    assert [e.timestamp.hour for e in entries] == [1, 2, 3, 4, 5]


def test_stale_inputs_fail_safe():
    weather = hourly([30.0] * 24)
    del weather[10:13]  # last reading before 12:00 is 09:00, three hours old
    entries = run_replay(weather, flat_crowd(50.0))
    assert len(entries) == 24
    assert entries[10].open_seconds > 0  # 09:00 reading is exactly one hour old
    for h in (11, 12):
        assert (entries[h].open_seconds, entries[h].label, entries[h].fault) == (0.0, "NoRule", "stale_weather")


def test_empty_crowd_profile_runs_fail_safe():
    entries = run_replay(hourly([30.0] * 5), [])
    assert all(e.label == "NoRule" and e.fault == "stale_crowd" for e in entries)


def test_empty_weather_is_fatal():
    with pytest.raises(DataError):
        run_replay([], flat_crowd(50.0))


def test_unsorted_weather_is_fatal():
    with pytest.raises(DataError):
        run_replay(hourly([30.0] * 3)[::-1], flat_crowd(50.0))


def test_never_open_in_rain():
    temps = [5, 30, 30, 40, 12, 30, 30, 28] * 3
    entries = run_replay(hourly(temps, rain={2, 3, 9, 10, 17}), flat_crowd(80.0))
    for e in entries:
        if e.rain:
            assert not e.fleet.startswith("Open(")
            assert e.open_seconds == 0.0


def test_fleet_after_decision():
    entries = run_replay(hourly([30.0] * 3), flat_crowd(50.0))
    assert entries[0].fleet == "Opening(0)"


def test_log_format_and_summary():
    entries = run_replay(hourly([30.0] * 24, rain={7}), flat_crowd(50.0))
    lines = log_text(entries).splitlines()
    assert len(lines) == 25
    first = parse_log_line(lines[0])
    assert first["kind"] == "decision"
    assert first["timestamp"] == "2019-06-01T00:00:00"
    assert first["open_seconds"] == "150.00" and first["minutes"] == "2.50"
    assert first["fired"] == "1:0.0000,2:0.0000,3:0.8500,4:0.0000"
    rain = parse_log_line(lines[7])
    assert (rain["rain"], rain["label"], rain["fired"]) == ("true", "Stop", "-")
    summary = parse_log_line(lines[-1])
    assert summary == {
        "kind": "summary", "hours": "24", "open_seconds_total": f"{23 * 150:.2f}",
        "rain_closures": "1", "no_rule": "0",
    }
    assert ReplaySummary.of(entries).rain_closures == 1


def test_missing_values_print_na():
    entries = run_replay(hourly([30.0] * 2), [])
    rec = parse_log_line(format_entry(entries[0]))
    assert rec["ratio"] == "NA" and rec["fault"] == "stale_crowd"


def test_streaming_matches_batch():
    weather, crowd = hourly([30.0] * 6), flat_crowd(60.0)
    assert list(iter_replay(weather, crowd)) == run_replay(weather, crowd)


def test_config_capacity_and_fleet():
    cfg = load_config("[controller]\ndomes = 3\ntravel_seconds = 30\n")
    entries = run_replay(hourly([30.0] * 2), flat_crowd(50.0), cfg)
    assert entries[0].fleet == "Opening(0)"
    assert Config().controller.domes == 27
