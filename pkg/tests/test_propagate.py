import json

import numpy as np
import pytest

from sbdyn.model import SpinBosonSpec
from sbdyn.propagate import (
    IntegratorConfig,
    TrajectoryRecord,
    propagate_trotter,
    propagate_variational,
)


def test_variational_tracks_exact_evolution_small_system():
    spec = SpinBosonSpec(M=1, n_max=1, epsilon=-1.0)
    rec = propagate_variational(spec, depth=1, t_final=2.0)
    assert rec.ts[0] == 0.0
    assert rec.ts[-1] == pytest.approx(2.0)
    assert rec.infidelity[0] < 1e-12
    assert rec.max_infidelity < 1e-3
    assert 0.0 <= rec.p_z.min() and rec.p_z.max() <= 1.0 + 1e-9
    assert rec.nfev == 1 + 6 * (rec.n_accepted + rec.n_rejected)


def test_variational_observe_hook():
    spec = SpinBosonSpec(M=1, n_max=1, epsilon=-1.0)
    rec = propagate_variational(
        spec, depth=1, t_final=0.5, observe=lambda t, theta: {"theta0": float(theta[0])}
    )
    assert "theta0" in rec.extras
    assert rec.extras["theta0"].shape == rec.ts.shape


def test_trotter_record_shape_and_convergence():
    spec = SpinBosonSpec(M=1, n_max=1, epsilon=-1.0)
    shallow = propagate_trotter(spec, depth=20, t_final=5.0)
    deep = propagate_trotter(spec, depth=200, t_final=5.0)
    assert shallow.ts.shape == (21,)
    assert deep.final_infidelity < shallow.final_infidelity
    assert deep.final_infidelity < 1e-3
    with pytest.raises(Exception):
        propagate_trotter(spec, depth=0)


def test_trotter_depth_one_single_layer():
    spec = SpinBosonSpec(M=1, n_max=1, delta=0.5)
    rec = propagate_trotter(spec, depth=1, t_final=0.1)
    assert rec.ts.shape == (2,)
    assert rec.infidelity[-1] < 1e-3  # tiny step, single layer is accurate


def test_record_serialization_roundtrip(tmp_path):
    rec = TrajectoryRecord(
        ts=np.array([0.0, 1.0]),
        thetas=np.array([[0.0, 0.0], [0.1, -0.2]]),
        p_z=np.array([1.0, 0.8]),
        infidelity=np.array([0.0, 1e-4]),
        nfev=7,
        n_accepted=1,
        n_rejected=0,
        extras={"sampled_p_z": np.array([1.0, 0.81])},
    )
    csv_path = tmp_path / "run.csv"
    rec.to_csv(csv_path)
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "t,p_z,infidelity,sampled_p_z,theta_0,theta_1"
    assert len(lines) == 3

    json_path = tmp_path / "run.json"
    rec.to_json(json_path)
    payload = json.loads(json_path.read_text())
    assert payload["t"] == [0.0, 1.0]
    assert payload["nfev"] == 7
    assert payload["sampled_p_z"] == [1.0, 0.81]


def test_sampled_config_is_looser():
    assert IntegratorConfig.sampled().svd_cutoff > IntegratorConfig.statevector().svd_cutoff
    assert IntegratorConfig.sampled().atol > IntegratorConfig.statevector().atol
