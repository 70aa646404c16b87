import copy
import json
from pathlib import Path

import pytest

from config import scenarios_dir
from harness.scenario import ScenarioError, load_scenario, parse, random_scenario
from network.graph import is_strongly_connected
from radio.airlink import AirLink
from radio.baseband import BasebandLink

BASE = {
    "version": 1,
    "name": "base",
    "topology": {"n": 4, "arcs": [[1, 0], [2, 0], [0, 1], [0, 2], [3, 2], [2, 3], [1, 3]]},
    "x0": [3, 4, 3, 3],
    "channel": {"kind": "constant", "value": 1.0},
    "protocol": "ftc",
    "ranges": {"s": [0, 10], "p": [1, 5]},
    "seed": 11,
}

RANDOM = {
    "topology": {"n": 12, "density": 0.25},
    "x0": {"kind": "uniform", "low": 2.0, "high": 8.0},
    "protocol": "asymptotic",
    "seed": 5,
}


def _with(**changes):
    payload = copy.deepcopy(BASE)
    for key, value in changes.items():
        if value is None:
            payload.pop(key, None)
        else:
            payload[key] = value
    return payload


def test_parse_base_scenario():
    cfg = parse(BASE)
    assert cfg.n == 4
    assert cfg.x0 == (3.0, 4.0, 3.0, 3.0)
    assert cfg.protocol == "ftc"
    assert cfg.link == "airlink"
    assert cfg.rel_tol == 1e-9 and cfg.max_iters == 10_000
    assert isinstance(cfg.build_link(), AirLink)


def test_defaults_fill_optional_fields():
    cfg = parse(_with(channel=None, ranges=None, version=None, seed=None))
    assert cfg.channel.kind == "rayleigh"
    assert (cfg.ranges.s_min, cfg.ranges.s_max) == (0.0, 10.0)
    assert cfg.seed == 0


def test_baseband_link_object():
    cfg = parse(_with(link={"kind": "baseband", "m": 64, "noise_sigma2": 1e-3}))
    assert cfg.link == "baseband"
    assert (cfg.baseband.m, cfg.baseband.pilot_noise_sigma2) == (64, 1e-3)
    assert isinstance(cfg.build_link(), BasebandLink)
    assert parse(_with(link="baseband")).baseband.m == 256


def test_random_parts_resolve_from_seed():
    a, b = parse(RANDOM), parse(RANDOM)
    assert a.topology == b.topology
    assert a.x0 == b.x0
    assert is_strongly_connected(a.topology)
    assert all(2.0 <= v <= 8.0 for v in a.x0)
    other = parse({**RANDOM, "seed": 6})
    assert other.x0 != a.x0


def test_topology_seed_pins_graph_only():
    a = parse({**RANDOM, "topology": {"n": 12, "density": 0.25, "seed": 1}})
    b = parse({**RANDOM, "topology": {"n": 12, "density": 0.25, "seed": 1}, "seed": 9})
    assert a.topology == b.topology
    assert a.x0 != b.x0


def test_seed_override_from_environment(monkeypatch):
    expected = parse({**RANDOM, "seed": 99})
    monkeypatch.setenv("AIRMAX_SEED", "99")
    cfg = parse(RANDOM)
    assert cfg.seed == 99
    assert cfg.topology == expected.topology
    assert cfg.x0 == expected.x0


def test_resolved_scenario_parses_back_to_itself():
    for payload in (BASE, RANDOM, _with(link={"kind": "baseband", "m": 32, "noise_sigma2": 0.0})):
        cfg = parse(payload)
        again = parse(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg


@pytest.mark.parametrize("payload, field", [
    (_with(colour="blue"), "colour"),
    (_with(version=2), "version"),
    (_with(x0=[11, 4, 3, 3]), "x0[0]"),
    (_with(x0=[3, "4", 3, 3]), "x0[1]"),
    (_with(x0=[3, 4, 3]), "x0"),
    (_with(x0=None), "x0"),
    (_with(x0={"kind": "gaussian"}), "x0"),
    (_with(topology=None), "topology"),
    (_with(topology={"n": 3, "arcs": [[1, 1]]}), "topology"),
    (_with(topology={"n": 1, "density": 0.5}), "topology"),
    (_with(protocol="gossip"), "protocol"),
    (_with(protocol=None), "protocol"),
    (_with(ranges={"s": [5, 1], "p": [1, 5]}), "ranges"),
    (_with(ranges={"s": [0, 10]}), "ranges.p"),
    (_with(channel={"kind": "nakagami"}), "channel"),
    (_with(channel={"kind": "rayleigh", "scale": "big"}), "channel.scale"),
    (_with(link="optical"), "link"),
    (_with(link={"kind": "baseband", "m": 0}), "link"),
    (_with(link={"kind": "baseband", "m": 2.5}), "link.m"),
    (_with(link={"kind": "baseband", "m": "64"}), "link.m"),
    (_with(seed=-1), "seed"),
    (_with(seed=True), "seed"),
    (_with(max_iters=0), "max_iters"),
    (_with(max_iters=2.5), "max_iters"),
    (_with(rel_tol=0), "rel_tol"),
])
def test_invalid_fields_are_named(payload, field):
    with pytest.raises(ScenarioError) as excinfo:
        parse(payload)
    assert excinfo.value.field == field
    assert str(excinfo.value).startswith(f"{field}: ")


def test_non_object_root_is_rejected():
    with pytest.raises(ScenarioError):
        parse([1, 2, 3])


def test_load_scenario_uses_file_stem_when_unnamed(tmp_path):
    path = tmp_path / "ring.json"
    path.write_text(json.dumps(_with(name=None)), encoding="utf-8")
    assert load_scenario(path).name == "ring"


def test_load_scenario_reports_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    with pytest.raises(ScenarioError) as excinfo:
        load_scenario(path)
    assert excinfo.value.field == "<root>"


def test_bundled_scenarios_are_valid():
    paths = sorted(Path(scenarios_dir).glob("*.json"))
    assert len(paths) >= 8
    for path in paths:
        cfg = load_scenario(path)
        assert cfg.name == path.stem


def test_random_scenario_is_keyed_by_seed():
    a = random_scenario(15, 3, "ftc")
    b = random_scenario(15, 3, "standard")
    assert a.topology == b.topology and a.x0 == b.x0
    assert a.with_protocol("standard") == b
    assert random_scenario(15, 4, "ftc").x0 != a.x0
