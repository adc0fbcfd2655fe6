"""Scenario file parsing, validation, and serialization.

Scenario files are versioned JSON documents with all angles in degrees; the
parser converts to radians once, rejects unknown fields, and reports every
violation with its field path. See the README for the schema.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

from .engine import ObserverInitSpec, Scenario
from .errors import ConfigError, ParseError
from .guidance import GuidanceGains
from .observer import ObserverGains

SCHEMA_VERSION = 1
GRAVITY = 9.81  # m/s^2, used for the g-unit acceleration limit

_TOP_KEYS = {
    "version",
    "name",
    "target",
    "interceptors",
    "sensing_edges",
    "actuation_edges",
    "observer",
    "guidance",
    "sim",
    "seed",
}
_TARGET_KEYS = {"position", "speed", "heading_deg"}
_INTERCEPTOR_KEYS = {"position", "speed", "heading_deg"}
_OBSERVER_KEYS = {"gains", "init"}
_OBSERVER_GAIN_KEYS = {"k1", "k2", "k3", "alpha", "beta"}
_OBSERVER_INIT_KEYS = {
    "seeker_position_jitter",
    "seeker_velocity_jitter",
    "seekerless_position_range",
    "seekerless_velocity_range",
}
_GUIDANCE_KEYS = {"lambda1", "lambda2", "accel_limit_g", "anti_windup", "sign_smoothing"}
_SIM_KEYS = {"dt", "max_time", "capture_radius", "telemetry_interval"}


class _Collector:
    def __init__(self):
        self.errors: list[str] = []

    def add(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def check_keys(self, obj: dict, allowed: set, required: set, path: str) -> None:
        for key in obj:
            if key not in allowed:
                self.add(f"{path}.{key}" if path else key, "unknown field")
        for key in required:
            if key not in obj:
                self.add(f"{path}.{key}" if path else key, "missing required field")

    def number(self, obj: dict, key: str, path: str, default=None):
        if key not in obj:
            return default
        value = obj[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.add(f"{path}.{key}" if path else key, "must be a number")
            return default
        return float(value)

    def pair(self, value, path: str):
        if (
            not isinstance(value, (list, tuple))
            or len(value) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)
        ):
            self.add(path, "must be a pair of numbers")
            return None
        return (float(value[0]), float(value[1]))


def parse_scenario(source) -> Scenario:
    """Parse and fully validate a scenario from a path, JSON string, or dict.

    Raises ParseError carrying every violation with its field path.
    """
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"{path}: cannot read scenario file ({exc})") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ParseError("document: top level must be a JSON object")

    c = _Collector()
    c.check_keys(
        doc,
        _TOP_KEYS,
        {
            "version",
            "target",
            "interceptors",
            "sensing_edges",
            "actuation_edges",
            "observer",
            "guidance",
            "sim",
        },
        "",
    )
    if doc.get("version") not in (None, SCHEMA_VERSION):
        c.add("version", f"unsupported version {doc.get('version')!r}")

    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        c.add("name", "must be a string")
        name = "scenario"

    # Target.
    target = doc.get("target", {})
    tgt_pos, tgt_speed, tgt_heading = (0.0, 0.0), 0.0, 0.0
    if isinstance(target, dict):
        c.check_keys(target, _TARGET_KEYS, _TARGET_KEYS, "target")
        pos = c.pair(target.get("position", (0.0, 0.0)), "target.position")
        tgt_pos = pos if pos else (0.0, 0.0)
        tgt_speed = c.number(target, "speed", "target", 0.0) or 0.0
        tgt_heading = math.radians(c.number(target, "heading_deg", "target", 0.0) or 0.0)
        if tgt_speed < 0.0:
            c.add("target.speed", "must be nonnegative")
    else:
        c.add("target", "must be an object")

    # Interceptors.
    positions, speeds, headings = [], [], []
    interceptors = doc.get("interceptors", [])
    if isinstance(interceptors, list) and interceptors:
        for idx, item in enumerate(interceptors):
            path = f"interceptors[{idx}]"
            if not isinstance(item, dict):
                c.add(path, "must be an object")
                continue
            c.check_keys(item, _INTERCEPTOR_KEYS, _INTERCEPTOR_KEYS, path)
            pos = c.pair(item.get("position", (0.0, 0.0)), f"{path}.position")
            speed = c.number(item, "speed", path, 1.0)
            heading = c.number(item, "heading_deg", path, 0.0)
            positions.append(pos if pos else (0.0, 0.0))
            speeds.append(speed if speed is not None else 1.0)
            headings.append(math.radians(heading if heading is not None else 0.0))
            if speed is not None and speed <= 0.0:
                c.add(f"{path}.speed", "must be positive")
            if speed is not None and speed <= tgt_speed:
                c.add(
                    f"{path}.speed",
                    f"must exceed target speed {tgt_speed} (time-to-go requires "
                    "a positive speed margin)",
                )
    else:
        c.add("interceptors", "must be a non-empty list")

    def edge_list(key: str) -> tuple:
        raw = doc.get(key, [])
        if not isinstance(raw, list):
            c.add(key, "must be a list of [src, dst] pairs")
            return ()
        edges = []
        for idx, edge in enumerate(raw):
            if (
                not isinstance(edge, (list, tuple))
                or len(edge) != 2
                or any(isinstance(v, bool) or not isinstance(v, int) for v in edge)
            ):
                c.add(f"{key}[{idx}]", "must be an [src, dst] integer pair")
                continue
            edges.append((edge[0], edge[1]))
        return tuple(edges)

    sensing_edges = edge_list("sensing_edges")
    actuation_edges = edge_list("actuation_edges")

    # Observer.
    obs = doc.get("observer", {})
    gains_kw = {"k1": 1.0, "k2": 1.0, "k3": 1.0, "alpha": 0.5, "beta": 1.5}
    init_kw = {}
    if isinstance(obs, dict):
        c.check_keys(obs, _OBSERVER_KEYS, {"gains", "init"}, "observer")
        gains = obs.get("gains", {})
        if isinstance(gains, dict):
            c.check_keys(gains, _OBSERVER_GAIN_KEYS, _OBSERVER_GAIN_KEYS, "observer.gains")
            for key in _OBSERVER_GAIN_KEYS:
                value = c.number(gains, key, "observer.gains")
                if value is not None:
                    gains_kw[key] = value
        else:
            c.add("observer.gains", "must be an object")
        init = obs.get("init", {})
        if isinstance(init, dict):
            c.check_keys(init, _OBSERVER_INIT_KEYS, _OBSERVER_INIT_KEYS, "observer.init")
            for key in ("seeker_position_jitter", "seeker_velocity_jitter"):
                value = c.number(init, key, "observer.init")
                if value is not None:
                    init_kw[key] = value
            for key in ("seekerless_position_range", "seekerless_velocity_range"):
                if key in init:
                    pair = c.pair(init[key], f"observer.init.{key}")
                    if pair:
                        init_kw[key] = pair
        else:
            c.add("observer.init", "must be an object")
    else:
        c.add("observer", "must be an object")

    # Guidance.
    guid = doc.get("guidance", {})
    guid_kw = {"lambda1": 1.0, "lambda2": 1.0, "accel_limit_g": 40.0}
    anti_windup = False
    sign_smoothing = 0.0
    if isinstance(guid, dict):
        c.check_keys(
            guid, _GUIDANCE_KEYS, {"lambda1", "lambda2", "accel_limit_g"}, "guidance"
        )
        for key in ("lambda1", "lambda2", "accel_limit_g"):
            value = c.number(guid, key, "guidance")
            if value is not None:
                guid_kw[key] = value
        if "anti_windup" in guid:
            if not isinstance(guid["anti_windup"], bool):
                c.add("guidance.anti_windup", "must be a boolean")
            else:
                anti_windup = guid["anti_windup"]
        value = c.number(guid, "sign_smoothing", "guidance", 0.0)
        sign_smoothing = value if value is not None else 0.0
    else:
        c.add("guidance", "must be an object")

    # Sim block: dt, capture radius, telemetry cadence are optional.
    sim = doc.get("sim", {})
    sim_kw = {"dt": 1e-3, "max_time": 60.0, "capture_radius": 5.0, "telemetry_interval": 0.01}
    if isinstance(sim, dict):
        c.check_keys(sim, _SIM_KEYS, {"max_time"}, "sim")
        for key in _SIM_KEYS:
            value = c.number(sim, key, "sim")
            if value is not None:
                sim_kw[key] = value
    else:
        c.add("sim", "must be an object")

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        c.add("seed", "must be an integer")
        seed = 0

    if c.errors:
        raise ParseError(c.errors)

    try:
        scenario = Scenario(
            name=name,
            target_position=tgt_pos,
            target_speed=tgt_speed,
            target_heading=tgt_heading,
            interceptor_positions=tuple(positions),
            interceptor_speeds=tuple(speeds),
            interceptor_headings=tuple(headings),
            sensing_edges=sensing_edges,
            actuation_edges=actuation_edges,
            observer_gains=ObserverGains(**gains_kw),
            observer_init=ObserverInitSpec(**init_kw),
            guidance_gains=GuidanceGains(
                lambda1=guid_kw["lambda1"],
                lambda2=guid_kw["lambda2"],
                accel_limit=guid_kw["accel_limit_g"] * GRAVITY,
            ),
            seed=seed,
            dt=sim_kw["dt"],
            max_time=sim_kw["max_time"],
            capture_radius=sim_kw["capture_radius"],
            telemetry_interval=sim_kw["telemetry_interval"],
            anti_windup=anti_windup,
            sign_smoothing=sign_smoothing,
        )
        scenario.validate()
    except ConfigError as exc:
        raise ParseError(str(exc)) from exc
    return scenario


def scenario_to_dict(scenario: Scenario) -> dict:
    """Serialize a Scenario back to the JSON document form (angles in degrees)."""
    return {
        "version": SCHEMA_VERSION,
        "name": scenario.name,
        "target": {
            "position": list(scenario.target_position),
            "speed": scenario.target_speed,
            "heading_deg": math.degrees(scenario.target_heading),
        },
        "interceptors": [
            {
                "position": list(pos),
                "speed": speed,
                "heading_deg": math.degrees(heading),
            }
            for pos, speed, heading in zip(
                scenario.interceptor_positions,
                scenario.interceptor_speeds,
                scenario.interceptor_headings,
            )
        ],
        "sensing_edges": [list(e) for e in scenario.sensing_edges],
        "actuation_edges": [list(e) for e in scenario.actuation_edges],
        "observer": {
            "gains": {
                "k1": scenario.observer_gains.k1,
                "k2": scenario.observer_gains.k2,
                "k3": scenario.observer_gains.k3,
                "alpha": scenario.observer_gains.alpha,
                "beta": scenario.observer_gains.beta,
            },
            "init": {
                "seeker_position_jitter": scenario.observer_init.seeker_position_jitter,
                "seeker_velocity_jitter": scenario.observer_init.seeker_velocity_jitter,
                "seekerless_position_range": list(
                    scenario.observer_init.seekerless_position_range
                ),
                "seekerless_velocity_range": list(
                    scenario.observer_init.seekerless_velocity_range
                ),
            },
        },
        "guidance": {
            "lambda1": scenario.guidance_gains.lambda1,
            "lambda2": scenario.guidance_gains.lambda2,
            "accel_limit_g": scenario.guidance_gains.accel_limit / GRAVITY,
            "anti_windup": scenario.anti_windup,
            "sign_smoothing": scenario.sign_smoothing,
        },
        "sim": {
            "dt": scenario.dt,
            "max_time": scenario.max_time,
            "capture_radius": scenario.capture_radius,
            "telemetry_interval": scenario.telemetry_interval,
        },
        "seed": scenario.seed,
    }


def bundled_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (e.g. 'scenario1.json')."""
    if not name.endswith(".json"):
        name = f"{name}.json"
    ref = resources.files("salvosim").joinpath("scenarios", name)
    with resources.as_file(ref) as concrete:
        return Path(concrete)


def resolve_scenario_path(spec: str) -> Path:
    """Resolve a CLI scenario argument: an existing file, else a bundled name."""
    path = Path(spec)
    if path.exists():
        return path
    try:
        bundled = bundled_scenario_path(spec)
    except (FileNotFoundError, ModuleNotFoundError):
        raise ParseError(f"{spec}: no such scenario file or bundled scenario") from None
    if bundled.exists():
        return bundled
    raise ParseError(f"{spec}: no such scenario file or bundled scenario")
