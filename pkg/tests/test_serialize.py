import numpy as np
import pytest

from circgp import serialize
from circgp.baselines import fit_coupled, fit_ordinary
from circgp.exceptions import DataFormatError
from circgp.model import FitConfig, fit, predict
from circgp.simulate import gen_lhs, gen_rfid_like, gen_wgp_instance

SMALL = FitConfig(iters=200, burnin=100, thin=10, kmin_reset_iter=50)


@pytest.fixture(scope="module")
def inst():
    x = gen_lhs(25, (0, 1), 1)
    return gen_wgp_instance(x, 8.0, 14.0, 0.01, 1.0, 0.05, 5.0, 2)


def test_dataset_round_trip(tmp_path, inst):
    path = tmp_path / "d.csv"
    serialize.save_dataset(path, inst.data)
    back = serialize.load_dataset(path)
    assert np.array_equal(back.x, inst.data.x)
    assert np.array_equal(back.y, inst.data.y)


def test_dataset_parse_error_line_number(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("x,y\n0.1,0.2\noops,3\n")
    with pytest.raises(DataFormatError) as err:
        serialize.load_dataset(path)
    assert err.value.lineno == 3


def test_wgp_trace_round_trip(tmp_path, inst):
    trace = fit(inst.data, SMALL, 3)
    path = tmp_path / "t.txt"
    serialize.save_trace(path, trace)
    back = serialize.load_trace(path, for_data=inst.data)
    assert back.kept == trace.kept
    assert back.seed == 3 and back.method == "wgp"
    for a, b in zip(trace.samples, back.samples):
        assert np.array_equal(a.z, b.z)
        assert np.array_equal(a.part.w, b.part.w)
        assert np.array_equal(a.k, b.k)
        assert (a.alpha, a.tau2, a.nu) == (b.alpha, b.tau2, b.nu)


def test_trace_round_trip_predictions_identical(tmp_path, inst):
    trace = fit(inst.data, SMALL, 4)
    path = tmp_path / "t.txt"
    serialize.save_trace(path, trace)
    back = serialize.load_trace(path, for_data=inst.data)
    grid = np.linspace(0, 1, 15)
    a = predict(trace, inst.data, grid, 5)
    b = predict(back, inst.data, grid, 5)
    assert np.array_equal(a.mean_wrapped, b.mean_wrapped)
    assert np.array_equal(a.variance, b.variance)


def test_coupled_and_ordinary_trace_round_trip(tmp_path, inst):
    for fit_fn in (fit_coupled, fit_ordinary):
        trace = fit_fn(inst.data, SMALL, 6)
        path = tmp_path / f"{trace.method}.txt"
        serialize.save_trace(path, trace)
        back = serialize.load_trace(path, for_data=inst.data)
        assert back.method == trace.method
        assert back.kept == trace.kept
        if trace.method == "coupled":
            for a, b in zip(trace.samples, back.samples):
                assert np.array_equal(a.k, b.k)
        else:
            for a, b in zip(trace.samples, back.samples):
                assert a.eta == b.eta


def test_trace_schema_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("#circgp-trace v999\n")
    with pytest.raises(DataFormatError):
        serialize.load_trace(path)


def test_grouped_round_trip(tmp_path):
    rfid = gen_rfid_like(np.array([2.0, 5.0, 7.0]), 7, censor_frac=0.1)
    path = tmp_path / "g.csv"
    serialize.save_grouped(path, rfid.datasets, rfid.distances)
    datasets, distances = serialize.load_grouped(path)
    assert np.array_equal(distances, rfid.distances)
    for a, b in zip(datasets, rfid.datasets):
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.y, b.y)
        assert a.x_lo == b.x_lo and a.x_hi == b.x_hi


def test_predictions_round_trip(tmp_path, inst):
    trace = fit(inst.data, SMALL, 8)
    pred = predict(trace, inst.data, np.linspace(0, 1, 12), 9)
    path = tmp_path / "p.csv"
    serialize.save_predictions(path, pred)
    back = serialize.load_predictions(path)
    assert np.array_equal(back.mean_wrapped, pred.mean_wrapped)
    assert np.array_equal(back.k_var, pred.k_var)


def test_samples_round_trip(tmp_path):
    x = np.linspace(0, 1, 6)
    samples = np.random.default_rng(10).standard_normal((6, 9))
    path = tmp_path / "s.csv"
    serialize.save_samples(path, x, samples)
    bx, bs = serialize.load_samples(path)
    assert np.array_equal(bx, x)
    assert np.array_equal(bs, samples)
