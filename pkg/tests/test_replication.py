"""Tests for stable_convolve.replication module."""

import numpy as np
import pytest

from stable_convolve.errors import (
    DegenerateRunError,
    ReplicaBatchError,
    StableConvolveError,
)
from stable_convolve.replication import (
    THREADS_ENV,
    ReplicaRunResult,
    resolve_threads,
    run_replicas,
)


def index_task(replicas):
    return np.array([[float(r), float(r) ** 2] for r in replicas])


def noisy_task(replicas):
    out = []
    for r in replicas:
        rng = np.random.default_rng(r)
        out.append(rng.standard_cauchy(3))
    return np.array(out)


class TestRunReplicas:
    """Tests for run_replicas."""

    def test_rows_in_replica_order(self):
        """Test that rows come back in replica order across batches."""
        result = run_replicas(index_task, n_replicas=10, batch_size=3)
        assert result.replicas_processed == 10
        np.testing.assert_array_equal(result.values[:, 0], np.arange(10))

    def test_first_replica_offset(self):
        """Test that replica numbering starts at first_replica."""
        result = run_replicas(index_task, n_replicas=4, batch_size=2, first_replica=7)
        np.testing.assert_array_equal(result.values[:, 0], [7, 8, 9, 10])

    @pytest.mark.parametrize("batch_size,n_jobs", [(1, 1), (4, 2), (64, 4)])
    def test_layout_does_not_change_values(self, batch_size, n_jobs):
        """Test that batch size and worker count leave the rows unchanged."""
        reference = run_replicas(noisy_task, n_replicas=20, batch_size=7, n_jobs=1).values
        result = run_replicas(noisy_task, n_replicas=20, batch_size=batch_size, n_jobs=n_jobs)
        np.testing.assert_array_equal(result.values, reference)

    def test_empty_run(self):
        """Test that zero replicas give an empty result."""
        result = run_replicas(index_task, n_replicas=0)
        assert result.replicas_processed == 0
        assert result.values.size == 0
        assert result.degenerate_fraction == 0.0

    def test_degenerate_rows_counted(self):
        """Test that rows with a non-finite entry are counted as degenerate."""

        def task(replicas):
            return np.array([[np.inf if r == 3 else 1.0, 0.0] for r in replicas])

        result = run_replicas(task, n_replicas=10, batch_size=4)
        assert result.degenerate == 1
        np.testing.assert_array_equal(np.flatnonzero(~result.finite_mask), [3])

    def test_errors_captured(self):
        """Test that a failing batch is recorded instead of raised."""

        def task(replicas):
            if 5 in replicas:
                raise ValueError("boom")
            return index_task(replicas)

        result = run_replicas(task, n_replicas=10, batch_size=5)
        assert result.errors == 1
        assert result.replicas_processed == 5
        assert "ValueError: boom" in result.error_details[0]
        with pytest.raises(RuntimeError, match="1 replica batches failed"):
            result.check_errors()

    def test_check_errors_raises_package_error(self):
        """Test that failed batches surface as a ReplicaBatchError with details."""

        def task(replicas):
            raise ValueError("boom")

        result = run_replicas(task, n_replicas=6, batch_size=3)
        with pytest.raises(ReplicaBatchError) as info:
            result.check_errors("in test")
        assert isinstance(info.value, StableConvolveError)
        assert info.value.failed == 2
        assert len(info.value.details) == 2
        assert "in test" in str(info.value)

    def test_wrong_row_count(self):
        """Test that a batch returning the wrong number of rows is an error."""
        result = run_replicas(lambda replicas: np.zeros((1, 2)), n_replicas=4, batch_size=2)
        assert result.errors == 2
        assert "expected 2 rows" in result.error_details[0]


class TestDegenerateRule:
    """Tests for the 1% degenerate-replica rule."""

    def make_result(self, degenerate, processed):
        result = ReplicaRunResult()
        result.degenerate = degenerate
        result.replicas_processed = processed
        return result

    def test_at_limit_passes(self):
        """Test that exactly 1% degenerate replicas is tolerated."""
        self.make_result(10, 1000).check_degenerate()

    def test_above_limit_raises(self):
        """Test error when more than 1% of replicas are degenerate."""
        with pytest.raises(DegenerateRunError) as info:
            self.make_result(11, 1000).check_degenerate("sup-moment")
        assert info.value.degenerate == 11
        assert info.value.replicas == 1000


class TestResolveThreads:
    """Tests for worker-count resolution."""

    def test_explicit_value(self, monkeypatch):
        """Test that an explicit count wins over the environment."""
        monkeypatch.setenv(THREADS_ENV, "8")
        assert resolve_threads(3) == 3

    def test_environment(self, monkeypatch):
        """Test that the environment supplies the default."""
        monkeypatch.setenv(THREADS_ENV, "4")
        assert resolve_threads() == 4

    def test_default(self, monkeypatch):
        """Test that the default is one worker."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert resolve_threads() == 1

    def test_invalid_environment(self, monkeypatch):
        """Test that a non-integer environment value falls back to 1."""
        monkeypatch.setenv(THREADS_ENV, "many")
        assert resolve_threads() == 1

    def test_clamped_to_one(self):
        """Test that nonpositive counts resolve to one worker."""
        assert resolve_threads(0) == 1
