import math

import numpy as np
import pytest

from fabricmotion import pipeline
from fabricmotion.errors import DomainError, GapFillError, TrajectoryFormatError
from fabricmotion.simulate import generate_dataset
from fabricmotion.trajectory import Trajectory


def _traj(x, tid=0, label=0, rate=40.0):
    x = np.asarray(x, dtype=float)
    return Trajectory(np.arange(x.size) / rate, x, label, "rigid", tid)


@pytest.fixture
def dataset():
    return generate_dataset(1, 2, 10, ["rigid", "fabric(1.0)"], master_seed=0)


class TestCsv:
    def test_round_trip(self, tmp_path):
        data = generate_dataset(1, 2, 1, ["rigid", "fabric(0.5)"], master_seed=1)
        trajs = [t for g in data.values() for t in g][:3]
        path = tmp_path / "t.csv"
        pipeline.write_trajectories(trajs, path)
        back = pipeline.read_trajectories(path)
        assert len(back) == 3
        for a, b in zip(trajs, back):
            assert np.array_equal(a.times, b.times)
            assert np.array_equal(a.positions, b.positions)
            assert (a.label, a.source, a.trajectory_id) == (b.label, b.source, b.trajectory_id)

    def test_schema(self, tmp_path):
        path = tmp_path / "t.csv"
        pipeline.write_trajectories([_traj([0.5, np.nan, 1.0])], path, comment="seed=0")
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == "# seed=0"
        assert lines[1] == "trajectory_id,class,sensor,t,x"
        assert lines[2] == "0,0,rigid,0.000000,0.5"
        assert lines[3] == "0,0,rigid,0.025000,"

    def test_gaps_loaded(self, tmp_path):
        path = tmp_path / "t.csv"
        rows = [(0.0, "1"), (0.5, "2"), (1.0, ""), (1.5, "4"), (2.0, "5")]
        path.write_text("trajectory_id,class,sensor,t,x\n" + "".join(f"7,1,wrist,{t},{x}\n" for t, x in rows))
        (t,) = pipeline.read_trajectories(path)
        assert t.has_gaps and t.missing.tolist() == [False, False, True, False, False]
        assert t.source == "ingested" and t.meta["sensor"] == "wrist"
        assert pipeline.fill_gaps(t).positions[2] == pytest.approx(3.0)

    def test_text_position(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("trajectory_id,class,sensor,t,x\n0,0,rigid,0.0,1\n0,0,rigid,0.025,abc\n")
        with pytest.raises(TrajectoryFormatError) as err:
            pipeline.read_trajectories(path)
        assert err.value.line == 3
        assert "line 3" in str(err.value)

    def test_uneven_spacing(self, tmp_path):
        path = tmp_path / "t.csv"
        rows = "".join(f"0,0,rigid,{t},0\n" for t in (0.0, 0.025, 0.05, 0.08))
        path.write_text("trajectory_id,class,sensor,t,x\n" + rows)
        with pytest.raises(TrajectoryFormatError):
            pipeline.read_trajectories(path)

    @pytest.mark.parametrize("body", ["a,b,c,d,e\n", "trajectory_id,class,sensor,t,x\n0,0,rigid,0.0\n",
                                      "trajectory_id,class,sensor,t,x\n0,3,rigid,0.0,1\n0,3,rigid,1.0,1\n",
                                      "trajectory_id,class,sensor,t,x\n0,0,rigid,0,1\n1,0,rigid,0,1\n"
                                      "0,0,rigid,1,1\n"])
    def test_malformed(self, tmp_path, body):
        path = tmp_path / "t.csv"
        path.write_text(body)
        with pytest.raises(TrajectoryFormatError):
            pipeline.read_trajectories(path)


class TestFillGaps:
    def test_identity(self):
        t = _traj(np.sin(np.arange(50)))
        assert pipeline.fill_gaps(t) is t

    def test_cubic_interior_exact(self):
        # natural end conditions only perturb a cubic near the ends; that error
        # decays geometrically per knot, so interior gaps come back exact
        t = np.arange(80) / 40
        x = 2 * t**3 - t**2 + 0.5 * t - 1
        y = x.copy()
        y[[38, 39, 40, 55]] = np.nan
        assert np.abs(pipeline.fill_gaps(_traj(y)).positions - x).max() < 1e-9

    def test_present_unchanged(self):
        x = np.sin(np.arange(100) / 7)
        y = x.copy()
        y[40:43] = np.nan
        filled = pipeline.fill_gaps(_traj(y)).positions
        keep = ~np.isnan(y)
        assert filled[keep].tobytes() == x[keep].tobytes()

    def test_sinusoid(self):
        t = np.arange(200) / 40
        x = np.sin(2.0 * t + 0.3)
        y = x.copy()
        y[100:103] = np.nan
        assert np.abs(pipeline.fill_gaps(_traj(y)).positions - x).max() < 1e-3

    def test_boundary_gap(self):
        with pytest.raises(GapFillError):
            pipeline.fill_gaps(_traj([np.nan, 1, 2, 3]))
        with pytest.raises(GapFillError):
            pipeline.fill_gaps(_traj([0, 1, 2, np.nan]))

    def test_oversized_gap(self):
        y = np.arange(20, dtype=float)
        y[5:11] = np.nan
        with pytest.raises(GapFillError):
            pipeline.fill_gaps(_traj(y))


class TestWindow:
    def test_rows(self):
        w = pipeline.window(_traj([1, 2, 3, 4, 5], tid=4, label=1), 3)
        assert w.features.tolist() == [[1, 2, 3], [2, 3, 4], [3, 4, 5]]
        assert w.labels.tolist() == [1, 1, 1]
        assert w.source_ids.tolist() == [4, 4, 4]

    def test_full_and_single(self):
        t = _traj(np.arange(7))
        assert len(pipeline.window(t, 7)) == 1
        w1 = pipeline.window(t, 1)
        assert len(w1) == 7 and w1.features.ravel().tolist() == list(range(7))

    def test_stride(self):
        w = pipeline.window(_traj(np.arange(10)), 4, stride=3)
        assert w.features[:, 0].tolist() == [0, 3, 6]

    def test_too_long(self):
        with pytest.raises(DomainError):
            pipeline.window(_traj(np.arange(5)), 6)
        with pytest.raises(DomainError):
            pipeline.window(_traj(np.arange(5)), 2, stride=0)

    def test_gaps_refused(self):
        with pytest.raises(DomainError):
            pipeline.window(_traj([0, np.nan, 1]), 2)

    def test_row_count(self, dataset):
        trajs = dataset["rigid"]
        w = pipeline.build_windows(trajs, 40)
        assert len(w) == sum(len(t) - 40 + 1 for t in trajs)
        assert w.window_seconds == pytest.approx(1.0)

    def test_window_samples(self):
        assert pipeline.window_samples(0.025, 40) == 1
        assert pipeline.window_samples(2.0, 40) == 80


class TestSplit:
    def test_balanced(self, dataset):
        data = generate_dataset(1, 2, 20, ["rigid"], master_seed=0)["rigid"]
        tr, te = pipeline.split_by_trajectory(data, 0.5, np.random.default_rng(0))
        for side in (tr, te):
            assert sum(t.label == 0 for t in side) == 10
            assert sum(t.label == 1 for t in side) == 10

    def test_partition(self, dataset):
        trajs = dataset["fabric(1.0)"]
        tr, te = pipeline.split_by_trajectory(trajs, 0.5, np.random.default_rng(3))
        ids_tr = {t.trajectory_id for t in tr}
        ids_te = {t.trajectory_id for t in te}
        assert not ids_tr & ids_te
        assert ids_tr | ids_te == {t.trajectory_id for t in trajs}
        wtr, wte = pipeline.build_windows(tr, 10), pipeline.build_windows(te, 10)
        assert not set(wtr.source_ids) & set(wte.source_ids)

    def test_deterministic(self, dataset):
        trajs = dataset["rigid"]
        a = pipeline.split_by_trajectory(trajs, 0.5, np.random.default_rng(8))
        b = pipeline.split_by_trajectory(trajs, 0.5, np.random.default_rng(8))
        assert [t.trajectory_id for t in a[0]] == [t.trajectory_id for t in b[0]]

    def test_too_few(self):
        trajs = generate_dataset(1, 2, 1, ["rigid"])["rigid"]
        with pytest.raises(DomainError):
            pipeline.split_by_trajectory(trajs)

    def test_window_split(self, dataset):
        w = pipeline.build_windows(dataset["rigid"], 5)
        tr, te = pipeline.split_windows(w, 0.5, np.random.default_rng(0))
        assert len(tr) + len(te) == len(w)
        assert set(tr.labels) == set(te.labels) == {0, 1}


class TestStandardize:
    def test_constant_column(self):
        x = np.column_stack([np.ones(10), np.arange(10.0)])
        z = pipeline.apply_standardize(pipeline.fit_standardize(x), x)
        assert np.all(z[:, 0] == 0)

    def test_moments(self, dataset):
        w = pipeline.build_windows(dataset["fabric(1.0)"], 12)
        z = pipeline.apply_standardize(pipeline.fit_standardize(w), w).features
        assert np.abs(z.mean(0)).max() < 1e-9
        assert np.abs(z.std(0) - 1).max() < 1e-9

    def test_uses_train_statistics(self, rng):
        train = rng.normal(size=(200, 3))
        test = rng.normal(size=(50, 3)) + 5.0
        params = pipeline.fit_standardize(train)
        z_train_params = pipeline.apply_standardize(params, test)
        own = pipeline.apply_standardize(pipeline.fit_standardize(test), test)
        assert np.abs(z_train_params - own).max() > 1.0
        assert z_train_params.mean() > 3

    def test_empty(self):
        with pytest.raises(DomainError):
            pipeline.fit_standardize(np.empty((0, 3)))

    def test_csv_round_trip(self, tmp_path, rng):
        params = pipeline.fit_standardize(rng.normal(size=(30, 4)))
        path = tmp_path / "std.csv"
        params.to_csv(path, comment="seed=1")
        back = pipeline.StandardizationParams.from_csv(path)
        assert np.array_equal(back.mean, params.mean) and np.array_equal(back.std, params.std)
        assert path.read_text().splitlines()[1].startswith("mean,")
