"""Config ingestion and reference-trajectory consistency."""

import json
import math

import numpy as np
import pytest

from maats.scenario import (
    ConfigError,
    ScenarioConfig,
    SpiralTrajectory,
    dump_config,
    load_config,
    spiral_reference,
)


class TestSpiralReference:
    def test_zero_radius_is_hover(self):
        traj = SpiralTrajectory(0.0, 0.0, 0.0, np.array([1.0, 2.0, 3.0]))
        for t in (0.0, 1.7, 12.0):
            ref = traj.at(t)
            np.testing.assert_allclose(ref.pos, [1.0, 2.0, 3.0])
            np.testing.assert_allclose(ref.vel, 0.0)
            np.testing.assert_allclose(ref.acc, 0.0)

    def test_centripetal_magnitude(self):
        r, w = 1.3, 0.8
        traj = SpiralTrajectory(r, w, 0.4, np.zeros(3))
        ref = traj.at(2.1)
        assert np.linalg.norm(ref.acc[:2]) == pytest.approx(r * w * w)
        assert ref.acc[2] == 0.0

    def test_derivatives_match_finite_differences(self):
        traj = SpiralTrajectory(1.0, math.pi / 5.0, 0.05, np.array([0.0, 0.0, 1.0]))
        h = 1e-5
        for t in (0.0, 3.3, 17.9):
            plus, minus = traj.at(t + h), traj.at(t - h)
            fd_vel = (plus.pos - minus.pos) / (2 * h)
            fd_acc = (plus.vel - minus.vel) / (2 * h)
            np.testing.assert_allclose(traj.at(t).vel, fd_vel, atol=1e-6)
            np.testing.assert_allclose(traj.at(t).acc, fd_acc, atol=1e-6)

    def test_functional_alias(self):
        traj = SpiralTrajectory(1.0, 0.5, 0.0, np.zeros(3))
        np.testing.assert_allclose(spiral_reference(traj, 1.0).pos, traj.at(1.0).pos)


class TestLoadConfig:
    def test_empty_document_gives_defaults(self):
        cfg = load_config("")
        assert cfg.plant.n == 4
        assert cfg.plant.m_load == 0.225
        assert cfg.plant.m_uav == 0.5
        assert cfg.plant.inertia == [0.021, 0.0187, 0.0397]
        assert cfg.plant.cable_length == 1.0
        assert cfg.alloc.mu == 0.15
        assert cfg.dt == 1e-3
        assert cfg.duration == 20.0
        params = cfg.plant.to_params()
        assert params.m_uav.shape == (4,)
        assert params.inertia.shape == (4, 3)

    def test_negative_mu_rejected_with_key_name(self):
        with pytest.raises(ConfigError, match="mu"):
            load_config(json.dumps({"alloc": {"mu": -1.0}}))

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="allocc"):
            load_config(json.dumps({"allocc": {}}))

    def test_per_uav_arrays_accepted(self):
        cfg = load_config(
            json.dumps({"plant": {"n": 2, "m_uav": [0.5, 0.6], "cable_length": [1.0, 1.1]}})
        )
        params = cfg.plant.to_params()
        np.testing.assert_allclose(params.m_uav, [0.5, 0.6])
        np.testing.assert_allclose(params.cable_length, [1.0, 1.1])

    def test_wrong_array_length_rejected(self):
        with pytest.raises(ConfigError):
            load_config(json.dumps({"plant": {"n": 3, "m_uav": [0.5, 0.6]}}))

    def test_bad_dt_rejected(self):
        with pytest.raises(ConfigError, match="dt"):
            load_config(json.dumps({"dt": 0.0}))

    def test_round_trip_identical(self):
        cfg = load_config(json.dumps({"alloc": {"mu": 0.75}, "duration": 5.0}))
        again = load_config(dump_config(cfg))
        assert cfg == again
        assert ScenarioConfig.model_validate(json.loads(dump_config(again))) == cfg

    def test_runtime_conversions(self):
        cfg = load_config("")
        gains = cfg.gains.load.to_gains()
        np.testing.assert_allclose(gains.kp, 8.0)
        uav = cfg.gains.uav.to_gains()
        np.testing.assert_allclose(uav.kp, 40.0)
        np.testing.assert_allclose(uav.ki, 2.0)
        settings = cfg.alloc.sqp.to_settings()
        assert settings.kkt_tol == 1e-8
        assert settings.max_iter == 50
        traj = cfg.make_trajectory()
        assert traj.radius == 1.0
        hover = load_config(json.dumps({"trajectory": {"kind": "hover"}}))
        assert hover.make_trajectory().radius == 0.0
