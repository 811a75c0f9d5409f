import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wearsim import kernels
from wearsim.harvest import DAY
from wearsim.tracing import (
    DeviceAgent,
    PathLossModel,
    TracingError,
    detect_encounters,
    detection_range,
    load_agents,
    read_encounters,
    rssi_at,
    tracing_energy,
    write_encounters,
)

MODEL = PathLossModel()


def static(aid, x, y=0.0, horizon=10_000.0, **kw):
    return DeviceAgent(aid, ((0.0, x, y), (horizon, x, y)), **kw)


def test_rssi_examples():
    assert rssi_at(MODEL, 1.0) == -59.0
    assert rssi_at(MODEL, 10.0) == pytest.approx(-79.0)
    assert rssi_at(MODEL, 0.1) == pytest.approx(-39.0)
    assert rssi_at(MODEL, 50.0) == pytest.approx(-59 - 20 * np.log10(50))
    with pytest.raises(TracingError):
        rssi_at(MODEL, 0.0)


def test_noise_is_seeded():
    m = PathLossModel(noise_sigma=4.0, rng_seed=7)
    a = rssi_at(m, np.full(100, 3.0))
    b = rssi_at(m, np.full(100, 3.0))
    np.testing.assert_array_equal(a, b)
    assert np.std(a) == pytest.approx(4.0, rel=0.3)


def test_default_range_envelope():
    assert rssi_at(MODEL, 10.0) >= -90
    assert rssi_at(MODEL, 0.1) >= -90
    assert 10.0 <= detection_range(MODEL, -90) <= 50.0


def test_two_static_agents_two_metres():
    agents = [static("a", 0.0), static("b", 2.0)]
    recs = detect_encounters(agents, MODEL, horizon=1200, min_duration=900, max_gap=5)
    assert [(r.observer, r.observed) for r in recs] == [("a", "b"), ("b", "a")]
    for r in recs:
        assert abs(r.samples - 1200) <= 2
        assert r.start == 0 and r.end == 1199
        assert r.min_distance == pytest.approx(2.0)


def test_fifty_metres_is_out_of_range():
    recs = detect_encounters([static("a", 0.0), static("b", 50.0)], MODEL, 1200, 900, 5)
    assert recs == []


def test_single_agent():
    assert detect_encounters([static("a", 0.0)], MODEL, 1200, 0, 5) == []


def test_walk_by_produces_bounded_encounter():
    # b walks along the x axis at 1 m/s from -100 m to +100 m, a sits at the origin
    a = static("a", 0.0, horizon=200)
    b = DeviceAgent("b", ((0.0, -100.0, 1.0), (200.0, 100.0, 1.0)))
    recs = detect_encounters([a, b], MODEL, 200, 0, 1)
    r = next(r for r in recs if r.observer == "a")
    rng = detection_range(MODEL, -90)
    half = np.sqrt(rng ** 2 - 1.0)
    assert r.start == pytest.approx(100 - half, abs=1.0)
    assert r.end == pytest.approx(100 + half, abs=1.0)
    assert r.min_distance == pytest.approx(1.0)
    assert r.samples <= r.duration / 1.0 + 1


def test_uncovered_waypoints_name_agent():
    short = DeviceAgent("late", ((10.0, 0.0, 0.0), (500.0, 0.0, 0.0)))
    with pytest.raises(TracingError, match="late"):
        detect_encounters([static("a", 0.0), short], MODEL, 100, 0, 5)


def test_waypoints_must_increase():
    with pytest.raises(TracingError):
        DeviceAgent("x", ((0, 0, 0), (0, 1, 1)))


def test_tracing_energy(pm):
    a = static("a", 0.0)
    assert tracing_energy(a, 0.0, pm.profiles, pm.modes) == 0.0
    p = tracing_energy(a, DAY, pm.profiles, pm.modes) / DAY
    assert p == pytest.approx(208.06e-6, rel=1e-3)
    assert 226e-6 * DAY == pytest.approx(19.53, abs=0.01)
    assert tracing_energy(a, 30 * DAY, pm.profiles, pm.modes) < 4435.56


def test_csv_round_trip(tmp_path):
    csv_path = tmp_path / "agents.csv"
    csv_path.write_text("id,t_s,x_m,y_m\nb,0,2,0\na,0,0,0\na,1200,0,0\nb,1200,2,0\n")
    agents = load_agents(csv_path)
    assert [a.id for a in agents] == ["a", "b"]
    recs = detect_encounters(agents, MODEL, 1200, 900, 5)
    buf = io.StringIO()
    write_encounters(recs, buf)
    assert buf.getvalue().splitlines()[0] == "observer,observed,start_s,end_s,min_distance_m,samples"
    out = tmp_path / "enc.csv"
    out.write_text(buf.getvalue())
    assert read_encounters(out) == recs


def test_merge_backends_agree_on_noisy_scene():
    rng = np.random.default_rng(1)
    agents = [DeviceAgent(f"d{i}", tuple((t, *rng.uniform(0, 30, 2)) for t in range(0, 3601, 300)))
              for i in range(5)]
    m = PathLossModel(noise_sigma=3.0, rng_seed=11)
    a = detect_encounters(agents, m, 3600, 60, 10, merge=kernels.merge_runs_numpy)
    b = detect_encounters(agents, m, 3600, 60, 10, merge=kernels.merge_runs_numba)
    assert a == b and a


@st.composite
def scenes(draw):
    n = draw(st.integers(2, 4))
    agents = []
    for i in range(n):
        pts = draw(st.lists(st.tuples(st.floats(0, 40), st.floats(0, 40)), min_size=2, max_size=4))
        times = np.linspace(0, 600, len(pts))
        agents.append(DeviceAgent(f"a{i}", tuple((t, x, y) for t, (x, y) in zip(times, pts)),
                                  rx_sensitivity=-85.0))
    return agents


@settings(max_examples=30, deadline=None)
@given(scenes())
def test_symmetry_without_noise(agents):
    recs = detect_encounters(agents, MODEL, 600, 30, 5)
    fwd = {(r.observer, r.observed, r.start, r.end, r.samples) for r in recs}
    rev = {(r.observed, r.observer, r.start, r.end, r.samples) for r in recs}
    assert fwd == rev


@settings(max_examples=30, deadline=None)
@given(scenes(), st.floats(0, 300), st.floats(0, 300))
def test_fewer_records_with_longer_min_duration(agents, d1, d2):
    lo, hi = sorted((d1, d2))
    assert len(detect_encounters(agents, MODEL, 600, hi, 5)) <= len(detect_encounters(agents, MODEL, 600, lo, 5))


@settings(max_examples=30, deadline=None)
@given(scenes(), st.floats(-95, -60), st.floats(-95, -60))
def test_stricter_sensitivity_fewer_samples(agents, s1, s2):
    lax, strict = sorted((s1, s2))

    def total(sens):
        ag = [DeviceAgent(a.id, a.mobility, a.adv, sens) for a in agents]
        return sum(r.samples for r in detect_encounters(ag, MODEL, 600, 0, 0.5))

    assert total(strict) <= total(lax)


@settings(max_examples=20, deadline=None)
@given(scenes(), st.integers(0, 2**31))
def test_seeded_noise_is_deterministic(agents, seed):
    m = PathLossModel(noise_sigma=5.0, rng_seed=seed)
    assert detect_encounters(agents, m, 600, 0, 5) == detect_encounters(agents, m, 600, 0, 5)


@settings(max_examples=30, deadline=None)
@given(scenes())
def test_record_invariants(agents):
    for r in detect_encounters(agents, PathLossModel(noise_sigma=2.0), 600, 0, 3):
        assert r.end >= r.start and r.samples >= 1
        assert r.samples <= r.duration / 1.0 + 1
