"""Unit tests for the simulation harness: task, partition, client step, metrics."""

import csv

import numpy as np
import pytest

from src.adversary import AttackKind, AttackSpec, build_attack
from src.aggregation.rain import hamming_normalized
from src.client.mechanism import sign_of
from src.exceptions import DomainError
from src.harness.client import local_gradient, poisoned_dataset, randomize_and_share
from src.harness.diagnostics import alignment_check
from src.harness.metrics import MetricsWriter, read_metrics, summarize_weights, write_summary_csv
from src.harness.partition import ClientDataset, group_members, partition_indices, partition_noniid
from src.harness.task import (
    SyntheticTask,
    accuracy,
    apply_trigger,
    attack_success_rate,
    model_dimension,
    root_direction,
    softmax_gradient,
)
from src.ring.prg import seed_from_int
from src.ring.sharing import reconstruct
from src.schemas.metrics import ExperimentSummary, RoundMetrics


@pytest.fixture(scope="module")
def task() -> SyntheticTask:
    return SyntheticTask.generate(
        d_feat=20, num_classes=10, num_train=5000, num_test=1000, num_calibration=1000, seed=3
    )


@pytest.fixture(scope="module")
def small_task() -> SyntheticTask:
    return SyntheticTask.generate(d_feat=4, num_classes=3, num_train=600, num_test=300, num_calibration=200, seed=11)


class TestSyntheticTask:
    """Tests for the synthetic classification task."""

    def test_dimension(self, task):
        """Test d = M * (d_feat + 1)."""
        assert task.dimension == model_dimension(20, 10) == 210
        assert task.initial_model().shape == (210,)

    def test_generating_model_is_accurate(self, task):
        """Test the generating classifier separates the classes."""
        assert accuracy(task.true_weights, task.x_test, task.y_test, task.num_classes) >= 0.95

    def test_deterministic(self):
        """Test the same seed gives the same splits."""
        a = SyntheticTask.generate(d_feat=3, num_classes=2, num_train=20, num_test=5, num_calibration=5, seed=9)
        b = SyntheticTask.generate(d_feat=3, num_classes=2, num_train=20, num_test=5, num_calibration=5, seed=9)
        assert np.array_equal(a.x_train, b.x_train)
        assert np.array_equal(a.y_test, b.y_test)

    def test_invalid_shape(self):
        """Test one class or zero features is refused."""
        with pytest.raises(DomainError):
            SyntheticTask.generate(d_feat=3, num_classes=1, num_train=5, num_test=5, num_calibration=5, seed=0)

    def test_gradient_matches_finite_difference(self, small_task):
        """Test the analytic gradient against a central difference of the mean log-loss."""
        rng = np.random.default_rng(0)
        w = rng.normal(scale=0.1, size=small_task.dimension)
        x, y = small_task.x_train[:50], small_task.y_train[:50]

        def loss(v: np.ndarray) -> float:
            weights = v[:12].reshape(3, 4)
            z = x @ weights.T + v[12:]
            z -= z.max(axis=1, keepdims=True)
            return float(np.mean(np.log(np.exp(z).sum(axis=1)) - z[np.arange(len(y)), y]))

        grad = softmax_gradient(w, x, y, 3)
        for j in (0, 5, 13):
            e = np.zeros_like(w)
            e[j] = 1e-6
            assert grad[j] == pytest.approx((loss(w + e) - loss(w - e)) / 2e-6, abs=1e-5)

    def test_empty_gradient(self):
        """Test an empty dataset contributes a zero gradient."""
        grad = softmax_gradient(np.zeros(6), np.zeros((0, 2)), np.zeros(0, dtype=np.int64), 2)
        assert list(grad) == [0.0] * 6

    def test_root_direction_tracks_population_gradient(self, task):
        """Test the calibration sign direction is close to the sign of a large-sample gradient."""
        w = task.initial_model()
        reference = root_direction(task.x_calibration, task.y_calibration, w, task.num_classes)
        population = sign_of(softmax_gradient(w, task.x_train, task.y_train, task.num_classes))
        assert hamming_normalized(reference.signs, population) < 0.2

    def test_root_direction_empty(self, task):
        """Test an empty calibration set is refused."""
        with pytest.raises(DomainError):
            root_direction(np.zeros((0, 20)), np.zeros(0, dtype=np.int64), task.initial_model(), 10)

    def test_trigger_and_asr(self, task):
        """Test the trigger overwrites leading features and a constant predictor has full ASR."""
        triggered = apply_trigger(task.x_test[:3], 2, 4.0)
        assert np.all(triggered[:, :2] == 4.0)
        assert np.array_equal(triggered[:, 2:], task.x_test[:3, 2:])

        # All weight on the bias of class 0
        w = np.zeros(task.dimension)
        w[200] = 10.0
        assert attack_success_rate(w, task.x_test, task.y_test, 10, 1, 4.0, target_label=0) == 1.0
        assert attack_success_rate(w, task.x_test, task.y_test, 10, 1, 4.0, target_label=1) == 0.0


class TestPartition:
    """Tests for the probabilistic non-IID split."""

    def test_single_label_groups(self):
        """Test q = 1 gives client i only label i mod M."""
        labels = np.random.default_rng(1).integers(0, 10, size=2000)
        parts = partition_indices(labels, 20, 10, 1.0, seed=5)
        for i, idx in enumerate(parts):
            assert len(idx) > 0
            assert set(labels[idx].tolist()) == {i % 10}

    def test_own_group_fraction(self):
        """Test q = 0.5 routes about half of the points to their own label group."""
        labels = np.random.default_rng(2).integers(0, 10, size=10000)
        parts = partition_indices(labels, 20, 10, 0.5, seed=5)
        own = sum(int(np.sum(labels[idx] == i % 10)) for i, idx in enumerate(parts))
        assert abs(own / len(labels) - 0.5) < 0.06

    def test_iid_limit(self):
        """Test q = 1/M spreads labels evenly."""
        labels = np.random.default_rng(3).integers(0, 10, size=10000)
        parts = partition_indices(labels, 10, 10, 0.1, seed=5)
        own = sum(int(np.sum(labels[idx] == i)) for i, idx in enumerate(parts))
        assert abs(own / len(labels) - 0.1) < 0.03

    def test_fewer_clients_than_classes(self):
        """Test K < M still places every point exactly once."""
        assert group_members(3, 5) == [[0], [1], [2], [0], [1]]
        labels = np.random.default_rng(4).integers(0, 5, size=500)
        parts = partition_indices(labels, 3, 5, 0.7, seed=1)
        assert np.array_equal(np.sort(np.concatenate(parts)), np.arange(500))

    def test_deterministic(self, small_task):
        """Test the same seed gives the same partition."""
        a = partition_noniid(small_task.x_train, small_task.y_train, 6, 3, 0.5, seed=8)
        b = partition_noniid(small_task.x_train, small_task.y_train, 6, 3, 0.5, seed=8)
        assert all(np.array_equal(p.y, r.y) for p, r in zip(a, b, strict=True))
        assert sum(len(p) for p in a) == 600

    def test_q_below_iid(self):
        """Test q < 1/M is refused."""
        with pytest.raises(DomainError):
            partition_indices(np.zeros(10, dtype=np.int64), 4, 4, 0.2, seed=0)

    def test_label_out_of_range(self):
        """Test labels must lie in [0, M)."""
        with pytest.raises(DomainError):
            partition_indices(np.array([0, 3]), 2, 3, 0.5, seed=0)


class TestClientStep:
    """Tests for one simulated client's round."""

    @pytest.fixture
    def data(self) -> ClientDataset:
        rng = np.random.default_rng(6)
        return ClientDataset(0, rng.normal(size=(7, 4)), np.full(7, 2, dtype=np.int64))

    def test_backdoor_poisoning(self, data, np_rng):
        """Test ceil(0.5 * n) points carry the trigger and the target label."""
        spec = AttackSpec(kind=AttackKind.SCALING, target_label=0, poison_fraction=0.5)
        poisoned = poisoned_dataset(data, build_attack(spec), spec, 3, np_rng)
        chosen = poisoned.y == 0
        assert int(np.sum(chosen)) == 4
        assert np.all(poisoned.x[chosen, 0] == 4.0)
        assert np.array_equal(poisoned.x[~chosen], data.x[~chosen])
        assert np.all(data.y == 2)

    def test_label_flip_poisoning(self, data, np_rng):
        """Test label flipping maps l to M - l - 1 without touching features."""
        spec = AttackSpec(kind=AttackKind.LABEL_FLIP)
        poisoned = poisoned_dataset(data, build_attack(spec), spec, 3, np_rng)
        assert np.all(poisoned.y == 0)
        assert np.array_equal(poisoned.x, data.x)

    def test_benign_gradient(self, data, np_rng):
        """Test without an attack the client reports its clean gradient."""
        w = np.zeros(15)
        grad = local_gradient(data, w, 3, None, None, 0.1, np_rng)
        assert np.array_equal(grad, softmax_gradient(w, data.x, data.y, 3))

    def test_randomize_and_share(self, np_rng):
        """Test the step is seed-deterministic and its shares reconstruct to the bits."""
        raw = np_rng.normal(scale=0.1, size=12)
        seed = seed_from_int(77)
        first = randomize_and_share(raw, 3, 0.05, 0.06, seed, 2, 97, share=True)
        again = randomize_and_share(raw, 3, 0.05, 0.06, seed, 2, 97, share=True)
        assert np.array_equal(first.update.bits, again.update.bits)
        s0, s1 = first.shares
        assert list(reconstruct(s0, s1)) == [int(b) for b in first.update.bits]
        assert first.update.client_hint == 3

    def test_plaintext_step_has_no_shares(self, np_rng):
        """Test share=False skips sharing."""
        step = randomize_and_share(np.zeros(4), 0, 0.05, 0.06, seed_from_int(1), 0, 97, share=False)
        assert step.shares is None
        assert len(step.update) == 4


class TestMetrics:
    """Tests for the metrics stream and summaries."""

    @staticmethod
    def _round(index: int) -> RoundMetrics:
        return RoundMetrics(
            round=index,
            accuracy=0.5,
            max_abs_g=0.2,
            dp_holds_realized=True,
            epsilon_local=8.0,
            epsilon_amplified=8.0,
        )

    @staticmethod
    def _summary(rho: float = 0.0) -> ExperimentSummary:
        return ExperimentSummary(
            seed=1,
            mode="plaintext",
            aggregator="rain",
            attack="none",
            rho=rho,
            epsilon=8.0,
            sigma=0.06,
            num_clients=6,
            dimension=15,
            rounds=2,
            final_accuracy=0.9,
            aborted_rounds=0,
            no_trust_rounds=0,
            epsilon_amplified=8.0,
        )

    def test_summarize_weights(self):
        """Test min, median, max and mean, and None for an empty group."""
        summary = summarize_weights(np.array([0.1, 0.3, 0.2]))
        assert (summary.min, summary.median, summary.max) == (0.1, 0.2, 0.3)
        assert summary.mean == pytest.approx(0.2)
        assert summary.count == 3
        assert summarize_weights(np.array([])) is None

    def test_writer(self, run_dir):
        """Test rounds then the summary land in metrics.jsonl and summary.csv."""
        writer = MetricsWriter(run_dir)
        writer.write_round(self._round(0))
        writer.write_round(self._round(1))
        writer.write_summary(self._summary())

        records = read_metrics(writer.jsonl_path)
        assert [r["record"] for r in records] == ["round", "round", "summary"]
        assert records[1]["round"] == 1
        assert all(r["schema_version"] == 1 for r in records)

        with writer.csv_path.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1
        assert rows[0]["final_accuracy"] == "0.9"
        assert rows[0]["final_asr"] == ""

    def test_writer_truncates(self, run_dir):
        """Test a new writer starts a fresh metrics file."""
        MetricsWriter(run_dir).write_round(self._round(0))
        assert read_metrics(MetricsWriter(run_dir).jsonl_path) == []

    def test_summary_csv_extra_columns(self, tmp_path):
        """Test sweep columns come first, one row per point."""
        path = tmp_path / "sweep.csv"
        write_summary_csv(path, [self._summary(0.1), self._summary(0.2)], [{"rho": 0.1}, {"rho": 0.2}])
        with path.open() as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        assert header[0] == "rho"
        assert [r[0] for r in rows] == ["0.1", "0.2"]


class TestAlignmentCheck:
    """Tests for the measured alignment of RAIN under Sign-Gaussian noise."""

    def test_cosine_meets_bound(self, small_task):
        """Test the aggregated sign agrees with the true sign at least as well as one client."""
        report = alignment_check(small_task, rounds=5, num_clients=50, seed=4)
        assert report.cosines
        assert report.sigma == pytest.approx(2.0 / 3.0 * 1.001)
        assert report.mean_cosine >= report.mean_bound
        assert report.mean_bound > 0.6

    def test_invalid_arguments(self, small_task):
        """Test rounds and clients must be positive."""
        with pytest.raises(DomainError):
            alignment_check(small_task, rounds=0, num_clients=5, seed=0)
