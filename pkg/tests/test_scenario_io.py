import json
import math

import numpy as np
import pytest

from salvosim.engine import RunResult, AgentOutcome, RunTelemetry
from salvosim.errors import ParseError
from salvosim.scenario_io import (
    GRAVITY,
    bundled_scenario_path,
    parse_scenario,
    resolve_scenario_path,
    scenario_to_dict,
)
from salvosim.telemetry import (
    read_summary,
    result_from_dict,
    result_to_dict,
    telemetry_header,
    write_summary,
    write_telemetry_csv,
)


def minimal_doc():
    return {
        "version": 1,
        "name": "mini",
        "target": {"position": [3000.0, 0.0], "speed": 300.0, "heading_deg": 120.0},
        "interceptors": [
            {"position": [0.0, 0.0], "speed": 600.0, "heading_deg": 10.0},
            {"position": [400.0, 300.0], "speed": 590.0, "heading_deg": 5.0},
        ],
        "sensing_edges": [[0, 1], [1, 2]],
        "actuation_edges": [[1, 2], [2, 1]],
        "observer": {
            "gains": {"k1": 0.9, "k2": 4.0, "k3": 5.0, "alpha": 0.93, "beta": 1.3},
            "init": {
                "seeker_position_jitter": 50.0,
                "seeker_velocity_jitter": 5.0,
                "seekerless_position_range": [2000.0, 4000.0],
                "seekerless_velocity_range": [-350.0, 350.0],
            },
        },
        "guidance": {"lambda1": 5.0, "lambda2": 10.0, "accel_limit_g": 40.0},
        "sim": {"max_time": 12.0},
        "seed": 3,
    }


class TestParse:
    def test_bundled_scenario1(self):
        sc = parse_scenario(bundled_scenario_path("scenario1"))
        assert sc.name == "scenario1"
        assert sc.target_position == (14000.0, 0.0)
        assert sc.target_heading == pytest.approx(math.radians(120.0))
        assert sc.interceptor_speeds == (580.0, 590.0, 600.0, 580.0)
        assert sc.interceptor_headings == tuple(
            math.radians(d) for d in (15.0, 20.0, 30.0, 35.0)
        )
        assert sc.observer_gains.k1 == 0.9
        assert sc.guidance_gains.lambda1 == 5.0
        assert sc.guidance_gains.accel_limit == pytest.approx(40.0 * GRAVITY)
        assert sc.dt == 1e-3
        assert sc.capture_radius == 5.0

    def test_bundled_scenario2(self):
        sc = parse_scenario(bundled_scenario_path("scenario2"))
        assert sc.target_heading == pytest.approx(math.radians(150.0))
        assert sc.interceptor_positions == (
            (6000.0, 500.0),
            (6000.0, 1000.0),
            (6500.0, -500.0),
            (6500.0, -1000.0),
        )
        assert sc.interceptor_headings == tuple(
            math.radians(d) for d in (-15.0, -10.0, 20.0, 25.0)
        )

    def test_defaults_applied_for_optional_sim_fields(self):
        sc = parse_scenario(minimal_doc())
        assert sc.dt == 1e-3
        assert sc.capture_radius == 5.0
        assert sc.telemetry_interval == 0.01
        assert sc.anti_windup is False
        assert sc.sign_smoothing == 0.0

    def test_speed_ratio_violation_reported(self):
        doc = minimal_doc()
        doc["interceptors"][0]["speed"] = 250.0
        with pytest.raises(ParseError, match="interceptors\\[0\\].speed"):
            parse_scenario(doc)

    def test_unknown_field_rejected_with_path(self):
        doc = minimal_doc()
        doc["guidance"]["typo_field"] = 1.0
        with pytest.raises(ParseError, match="guidance.typo_field"):
            parse_scenario(doc)

    def test_missing_required_field(self):
        doc = minimal_doc()
        del doc["observer"]["gains"]["k2"]
        with pytest.raises(ParseError, match="observer.gains.k2"):
            parse_scenario(doc)

    def test_bad_version(self):
        doc = minimal_doc()
        doc["version"] = 99
        with pytest.raises(ParseError, match="version"):
            parse_scenario(doc)

    def test_multiple_errors_collected(self):
        doc = minimal_doc()
        doc["interceptors"][0]["speed"] = 250.0
        doc["sim"]["bogus"] = True
        with pytest.raises(ParseError) as exc:
            parse_scenario(doc)
        assert len(exc.value.errors) >= 2

    def test_malformed_json_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError, match="malformed"):
            parse_scenario(path)

    def test_round_trip(self):
        sc = parse_scenario(minimal_doc())
        again = parse_scenario(scenario_to_dict(sc))
        assert again == sc

    def test_bundled_round_trip(self):
        for name in ("scenario1", "scenario2"):
            sc = parse_scenario(bundled_scenario_path(name))
            assert parse_scenario(scenario_to_dict(sc)) == sc


class TestResolve:
    def test_existing_file_wins(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(minimal_doc()), encoding="utf-8")
        assert resolve_scenario_path(str(path)) == path

    def test_bundled_name(self):
        assert resolve_scenario_path("scenario1").name == "scenario1.json"
        assert resolve_scenario_path("scenario2.json").name == "scenario2.json"

    def test_unknown_name(self):
        with pytest.raises(ParseError):
            resolve_scenario_path("no_such_scenario.json")


class TestTelemetryWriter:
    def test_empty_run_header_only(self, tmp_path):
        telemetry = RunTelemetry(n=2, dt=1e-3, capacity=4)
        path = write_telemetry_csv(telemetry, tmp_path / "empty.csv")
        text = path.read_text(encoding="utf-8")
        assert text == telemetry_header(2) + "\n"

    def test_decimation_and_final_row(self, tmp_path):
        telemetry = RunTelemetry(n=1, dt=1e-3, capacity=25)
        for k in range(25):
            telemetry.append(k * 1e-3, {name: np.array([float(k)]) for name in telemetry.data})
        path = write_telemetry_csv(telemetry, tmp_path / "t.csv", interval=0.01)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1 + 3 + 1  # header + rows 0,10,20 + final row 24
        assert lines[1].startswith("0,")
        assert lines[-1].startswith("0.024,")

    def test_angle_columns_in_degrees(self, tmp_path):
        telemetry = RunTelemetry(n=1, dt=1e-3, capacity=2)
        values = {name: np.array([0.0]) for name in telemetry.data}
        values["heading"] = np.array([math.pi])
        telemetry.append(0.0, values)
        path = write_telemetry_csv(telemetry, tmp_path / "deg.csv")
        header = telemetry_header(1).split(",")
        row = path.read_text(encoding="utf-8").splitlines()[1].split(",")
        assert row[header.index("heading1")] == "180"

    def test_nine_significant_digits(self, tmp_path):
        telemetry = RunTelemetry(n=1, dt=1e-3, capacity=2)
        values = {name: np.array([0.0]) for name in telemetry.data}
        values["x"] = np.array([12345.6789123456])
        telemetry.append(0.123456789123, values)
        path = write_telemetry_csv(telemetry, tmp_path / "sig.csv")
        row = path.read_text(encoding="utf-8").splitlines()[1].split(",")
        assert row[0] == "0.123456789"
        assert row[1] == "12345.6789"

    def test_lf_line_endings(self, tmp_path):
        telemetry = RunTelemetry(n=1, dt=1e-3, capacity=2)
        telemetry.append(0.0, {name: np.array([1.0]) for name in telemetry.data})
        path = write_telemetry_csv(telemetry, tmp_path / "lf.csv")
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")


class TestSummary:
    def sample_result(self):
        return RunResult(
            termination="all_intercepted",
            outcomes=(
                AgentOutcome(agent=1, intercepted=True, time=17.271, miss_distance=0.42),
                AgentOutcome(agent=2, intercepted=False, time=None, miss_distance=None),
            ),
            consensus_time=1.809,
            observer_settling_time=1.519,
            salvo_spread=0.012,
            final_time=17.3,
        )

    def test_round_trip_equality(self, tmp_path):
        result = self.sample_result()
        path = write_summary(result, tmp_path / "summary.json", scenario="x", seed=7, dt=1e-3)
        assert read_summary(path) == result

    def test_dict_round_trip(self):
        result = self.sample_result()
        assert result_from_dict(result_to_dict(result)) == result

    def test_summary_is_json_with_metadata(self, tmp_path):
        path = write_summary(
            self.sample_result(), tmp_path / "s.json", scenario="scenario1", seed=7, dt=1e-3
        )
        doc = json.loads(path.read_text(encoding="utf-8"))
        assert doc["scenario"] == "scenario1"
        assert doc["seed"] == 7
        assert doc["termination"] == "all_intercepted"
