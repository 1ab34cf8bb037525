import numpy as np
import pytest

from sscl import config as cfgmod
from sscl.config import ExperimentConfig


def test_serialize_parse_round_trip_bitwise():
    cfg = ExperimentConfig(dimension=2, cells=(64, 32),
                           flux="diagonal_power(2)", initial="sine(0.5,0.5)",
                           horizon=12.5, segments=400, seed=99, cfl=0.4,
                           times="geometric(1,1.5)", lambdas=(0.5, 0.6),
                           replicas=4, fit_window=(1.0, 12.0))
    text = cfgmod.serialize_config(cfg)
    cfg2 = cfgmod.parse_config(text)
    assert cfg2 == cfg
    assert cfgmod.serialize_config(cfg2) == text
    assert cfgmod.config_hash(cfg) == cfgmod.config_hash(cfg2)


def test_parse_rejects_unknown_key():
    text = "[experiment]\nbogus = 3\n"
    with pytest.raises(ValueError):
        cfgmod.parse_config(text)


def test_parse_rejects_dimension_mismatch():
    cfg = ExperimentConfig(dimension=2, cells=(64,))
    with pytest.raises(ValueError):
        cfgmod.parse_config(cfgmod.serialize_config(cfg))


def test_flux_dimension_checked():
    cfg = ExperimentConfig(dimension=1, cells=(32,), flux="diagonal_power(1)")
    with pytest.raises(ValueError):
        cfgmod.make_flux(cfg)


def test_initial_families():
    cfg = ExperimentConfig(dimension=1, cells=(64,), initial="sine")
    u = cfgmod.make_initial(cfg)
    assert abs(u.mean()) < 1e-15
    cfg = ExperimentConfig(dimension=1, cells=(64,), initial="riemann(1,0)")
    u = cfgmod.make_initial(cfg)
    assert set(np.unique(u.data)) == {0.0, 1.0}
    cfg = ExperimentConfig(dimension=1, cells=(64,), initial="constant(0.3)")
    assert np.all(cfgmod.make_initial(cfg).data == 0.3)
    cfg = ExperimentConfig(dimension=1, cells=(128,),
                           initial="random_fourier(5,3)")
    u = cfgmod.make_initial(cfg)
    assert np.max(np.abs(u.data)) <= 1.0 + 1e-12
    u2 = cfgmod.make_initial(cfg)
    assert np.array_equal(u.data, u2.data)
    cfg = ExperimentConfig(dimension=2, cells=(16, 16), initial="sine")
    u = cfgmod.make_initial(cfg)
    assert u.dim == 2 and abs(u.mean()) < 1e-15


def test_record_times_specs():
    cfg = ExperimentConfig(horizon=10.0, times="geometric(1,2)")
    assert cfgmod.make_record_times(cfg) == (1.0, 2.0, 4.0, 8.0)
    cfg = ExperimentConfig(times="linspace(0,1,5)")
    assert np.allclose(cfgmod.make_record_times(cfg),
                       (0.0, 0.25, 0.5, 0.75, 1.0))
    cfg = ExperimentConfig(times="0.1,0.2,0.7")
    assert cfgmod.make_record_times(cfg) == (0.1, 0.2, 0.7)
    cfg = ExperimentConfig(times="none")
    assert cfgmod.make_record_times(cfg) == ()


def test_replica_seeds_distinct_and_stable():
    cfg = ExperimentConfig(seed=5)
    seeds = [cfgmod.replica_seed(cfg, i) for i in range(16)]
    assert len(set(seeds)) == 16
    assert seeds == [cfgmod.replica_seed(cfg, i) for i in range(16)]
