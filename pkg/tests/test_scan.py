import csv
import json
import math

import numpy as np
import pytest

from fewbody import radial, scan
from fewbody.errors import DegenerateFitError, ThresholdNotFoundError
from fewbody.svm import SvmConfig

FAST = SvmConfig(basis_max=25, candidates=10, patience=10, refinement_sweeps=0, seed=4)


def test_inverse_a_and_axis_helpers():
    assert scan.signed_inverse_a_sq(math.inf) == 0.0
    assert scan.signed_inverse_a_sq(-2.0) == -0.25
    assert scan.signed_inverse_a_sq(4.0) == 0.0625
    assert np.allclose(scan.eighth_power([-256.0, 0.0, 1.0]), [-2.0, 0.0, 1.0])


def test_zero_range_scaling_constant():
    assert scan.ZERO_RANGE_SCALING == pytest.approx(22.69, abs=0.01)


def test_power_law_fit_recovers_exact_law():
    radii = {n: 7.0 * (n - 1) ** -1.6 for n in range(3, 9)}
    fit = scan.fit_power_law(radii)
    assert fit.p == pytest.approx(-1.6, abs=1e-12)
    assert fit.C == pytest.approx(7.0, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.predict(5) == pytest.approx(radii[5])
    sub = scan.fit_power_law(radii, fit_range=(4, 6))
    assert sub.n_values == [4, 5, 6]


def test_power_law_fit_rejects_degenerate_input():
    with pytest.raises(DegenerateFitError):
        scan.fit_power_law({3: 1.0, 4: 0.5})
    with pytest.raises(DegenerateFitError):
        scan.fit_power_law({3: 1.0, 4: -0.5, 5: 0.2})


def test_quadratic_root_selection():
    v = np.array([-3.0, -2.5, -2.2])
    g = (v + 2.0) * (v + 5.0)
    assert scan._quadratic_root(v, g, -2.2, -1.0) == pytest.approx(-2.0)
    assert scan._quadratic_root(v, g, -2.2, -2.1) is None


def test_dimer_threshold_is_exact():
    res = scan.find_threshold(2)
    assert res.method == "exact"
    assert res.v0_reduced == pytest.approx(-1.3420023, rel=1e-6)


def test_threshold_requires_a_bound_start():
    with pytest.raises(ThresholdNotFoundError):
        scan.find_threshold(3, 0, FAST, v_bound=-0.5)


def test_channel_energy():
    cfg = FAST
    assert scan.ChannelEnergy(3, cfg)(-2.0) == 0.0
    deep = scan.ChannelEnergy(3, cfg)(-4.0)
    assert deep == pytest.approx(radial.bound_energies(radial.PairPotential(-4.0), 0.5)[0])
    assert scan.ChannelEnergy(4, cfg, known_threshold=-2.1)(-2.0) == 0.0


def test_sweep_records_and_outputs(tmp_path):
    cfg = SvmConfig(basis_max=20, candidates=8, patience=8, refinement_sweeps=0, seed=1,
                    target_states=2)
    recs = scan.sweep_strength(3, [-3.0, -4.0], cfg)
    assert [r.v0 for r in recs] == [-4.0, -3.0]
    assert all(r.ok for r in recs)
    assert recs[0].energies[0] < recs[1].energies[0]
    path = tmp_path / "sweep.csv"
    scan.write_csv(recs, path)
    rows = list(csv.DictReader(open(path)))
    assert list(rows[0]) == scan.CSV_COLUMNS
    scan.write_json([r.to_dict() for r in recs], tmp_path / "sweep.json")
    data = json.loads((tmp_path / "sweep.json").read_text())
    assert data[1]["energies"][0] == pytest.approx(recs[1].energies[0])


def test_json_default_handles_numpy():
    assert json.loads(json.dumps({"x": np.bool_(True), "y": np.float64(2.5),
                                  "z": np.arange(2)}, default=scan._json_default)) == \
        {"x": True, "y": 2.5, "z": [0, 1]}


def test_threshold_stops_at_unresolved_point(monkeypatch):
    # linear gap with its root at -2; past -2.2 the fake basis "overbinds"
    class Fake:
        def __init__(self, v):
            self.energies = [0.5 * (v + 2.0) if v < -2.2 else -0.9]

        def __len__(self):
            return 1

    monkeypatch.setattr(scan, "_solve", lambda spec, cfg, warm, stream: Fake(spec.potential.v0))
    monkeypatch.setattr(scan, "state_msr", lambda ens, state: 1.0)
    res = scan.find_threshold(3, 0, FAST, v_bound=-3.0,
                              channel=scan.ChannelEnergy(3, FAST, known_threshold=-3.0))
    assert all(p.v0 < -2.2 for p in res.points)
    assert res.v0 == pytest.approx(-2.0, abs=1e-9)
