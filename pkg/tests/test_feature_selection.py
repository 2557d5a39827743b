import math

import numpy as np
import pytest

from gbfrs.dataset import Dataset
from gbfrs.feature_selection import (
    MODE_BALL,
    MODE_CLASSIC,
    check_reduction,
    forward_select,
    significance,
)
from gbfrs.fuzzy_rough import classic_dependency, weighted_dependency
from gbfrs.granular_ball import generate

from conftest import make_blobs, random_dataset
from oracles import naive_ball_dependency


def random_ball_set(rng, **kwargs):
    ds = random_dataset(rng, **kwargs)
    return ds, generate(ds, 0.8, int(rng.integers(1 << 16)))


class TestSignificance:
    def test_empty_base_is_single_attribute_dependency(self):
        rng = np.random.default_rng(0)
        ds, gbs = random_ball_set(rng, d=5)
        for a in range(5):
            sig = significance(a, (), gbs)
            expected = weighted_dependency(gbs, (a,), C=1).value
            assert sig == pytest.approx(expected, abs=1e-15)

    def test_member_attribute_rejected(self):
        rng = np.random.default_rng(1)
        _, gbs = random_ball_set(rng, d=4)
        with pytest.raises(ValueError):
            significance(1, (1, 2), gbs)

    def test_iterative_equals_direct_difference(self):
        """The linked-C formula must equal the plain difference at C=|B|+1.

        Both express the same number through the sqrt(C_i/C_{i+1}) rescaling
        of the base subset's dependency.
        """
        rng = np.random.default_rng(2)
        for _ in range(50):
            ds, gbs = random_ball_set(rng)
            d = ds.d
            size = int(rng.integers(1, d))
            B = tuple(sorted(rng.choice(d, size=size, replace=False)))
            rest = [a for a in range(d) if a not in B]
            a = int(rng.choice(rest))
            iterative = significance(a, B, gbs)
            c_ext = float(len(B) + 1)
            direct = (
                weighted_dependency(gbs, B + (a,), C=c_ext).value
                - weighted_dependency(gbs, B, C=c_ext).value
            )
            assert iterative == pytest.approx(direct, abs=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            ds, gbs = random_ball_set(rng)
            size = int(rng.integers(1, ds.d))
            B = tuple(sorted(rng.choice(ds.d, size=size, replace=False)))
            rest = [a for a in range(ds.d) if a not in B]
            a = int(rng.choice(rest))
            assert significance(a, B, gbs) >= -1e-12

    def test_duplicated_column_routes_agree(self):
        """A copied column: both significance routes agree and SIG >= 0.

        When the duplicate copies the whole current subset the distances
        scale uniformly by sqrt((i+1)/i), so the extended dependency at
        C=i+1 equals the base at C=i exactly.
        """
        rng = np.random.default_rng(4)
        base = rng.uniform(0, 1, size=(30, 1))
        X = np.hstack([base, base, rng.uniform(0, 1, size=(30, 1))])
        y = rng.integers(0, 2, size=30)
        y[:2] = [0, 1]
        ds = Dataset.from_arrays(X, y)
        gbs = generate(ds, 0.8, 7)

        iterative = significance(1, (0,), gbs)
        direct = (
            weighted_dependency(gbs, (0, 1), C=2).value
            - weighted_dependency(gbs, (0,), C=2).value
        )
        assert iterative == pytest.approx(direct, abs=1e-12)
        assert iterative >= -1e-12
        # uniform scaling: dependency of the doubled column at C=2 equals
        # the single column's at C=1, so the schedule sees zero gain
        w1 = weighted_dependency(gbs, (0,), C=1).value
        w2 = weighted_dependency(gbs, (0, 1), C=2).value
        assert w2 == pytest.approx(w1, abs=1e-12)

    def test_fixed_c_mode(self):
        rng = np.random.default_rng(5)
        ds, gbs = random_ball_set(rng, d=4)
        sig = significance(2, (0,), gbs, c_mode=4.0)
        expected = (
            weighted_dependency(gbs, (0, 2), C=4.0).value
            - weighted_dependency(gbs, (0,), C=4.0).value
        )
        assert sig == pytest.approx(expected, abs=1e-15)


class TestForwardSelect:
    def test_saturated_dependency_stops_after_one(self):
        # attribute 0 alone separates the classes completely
        ds = Dataset.from_arrays(
            [[0.0, 0.5], [0.0, 0.5], [1.0, 0.5], [1.0, 0.5]], [0, 0, 1, 1]
        )
        gbs = generate(ds, 1.0, 0)
        trace = forward_select(gbs, ds, MODE_BALL)
        assert trace.chosen == (0,)
        assert trace.stopped_reason == "no-gain"
        assert trace.dependency_path[0] == pytest.approx(1.0)

    def test_informative_column_chosen_first(self, toy_1d):
        # 2-D data: column 0 is the separable toy, column 1 is noise; the
        # single-attribute dependencies must rank column 0 on top
        rng = np.random.default_rng(6)
        X = np.hstack([toy_1d.features, rng.uniform(0, 1, size=(4, 1))])
        ds = Dataset.from_arrays(X, toy_1d.labels)
        gbs = generate(ds, 1.0, 0, initial_ball_count=2)
        w_informative, _ = naive_ball_dependency(gbs, (0,), 1.0)
        w_noise, _ = naive_ball_dependency(gbs, (1,), 1.0)
        assert w_informative > w_noise
        trace = forward_select(gbs, ds, MODE_BALL)
        assert trace.chosen[0] == 0

    def test_identical_attributes_pick_exactly_one(self):
        rng = np.random.default_rng(7)
        col = rng.uniform(0, 1, size=(40, 1))
        X = np.repeat(col, 4, axis=1)
        y = rng.integers(0, 2, size=40)
        y[:2] = [0, 1]
        ds = Dataset.from_arrays(X, y)
        gbs = generate(ds, 0.8, 3)
        trace = forward_select(gbs, ds, MODE_BALL)
        assert len(trace.chosen) == 1
        assert trace.stopped_reason == "no-gain"

    def test_dependency_path_strictly_increasing(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            ds, gbs = random_ball_set(rng)
            trace = forward_select(gbs, ds, MODE_BALL)
            path = trace.dependency_path
            assert all(b > a for a, b in zip(path, path[1:]))
            assert len(trace.chosen) == len(path) == len(trace.significance_path)

    def test_accepted_sig_positive(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            ds, gbs = random_ball_set(rng)
            trace = forward_select(gbs, ds, MODE_BALL)
            assert all(s > 0 for s in trace.significance_path)

    def test_classic_mode_matches_singleton_ball_mode(self):
        rng = np.random.default_rng(10)
        for _ in range(5):
            ds = random_dataset(rng, n=30)
            singles = generate(ds, 1.0, 0, singletons=True)
            t_ball = forward_select(singles, ds, MODE_BALL)
            t_classic = forward_select(None, ds, MODE_CLASSIC)
            assert t_ball.chosen == t_classic.chosen
            np.testing.assert_allclose(
                t_ball.dependency_path, t_classic.dependency_path, atol=1e-10
            )

    def test_at_most_d_rounds(self):
        rng = np.random.default_rng(11)
        ds, gbs = random_ball_set(rng, d=5)
        trace = forward_select(gbs, ds, MODE_BALL)
        assert len(trace.chosen) <= 5
        assert len(trace.round_best_significance) <= 5 + 1

    def test_convergence_diagnostic(self):
        """On a trace that stops for lack of gain, the best remaining
        significance in the stopping round must not exceed the first round's.

        Exhausted traces (every attribute accepted) carry no stopping round,
        so the comparison only applies to no-gain stops.
        """
        rng = np.random.default_rng(12)
        checked = 0
        for trial in range(30):
            ds = make_blobs(n_per=20, noise_dims=int(rng.integers(0, 3)), seed=trial)
            gbs = generate(ds, 0.8, trial)
            trace = forward_select(gbs, ds, MODE_BALL)
            series = trace.round_best_significance
            if trace.stopped_reason == "no-gain" and len(series) >= 2:
                checked += 1
                assert series[-1] <= series[0] + 1e-12
        assert checked >= 5

    def test_tie_breaks_to_smallest_index(self):
        rng = np.random.default_rng(13)
        col = rng.uniform(0, 1, size=(30, 1))
        X = np.hstack([col, col])
        y = rng.integers(0, 2, size=30)
        y[:2] = [0, 1]
        ds = Dataset.from_arrays(X, y)
        gbs = generate(ds, 0.8, 1)
        trace = forward_select(gbs, ds, MODE_BALL)
        assert trace.chosen[0] == 0

    def test_classic_against_point_dependency_path(self):
        # every recorded dependency equals a from-scratch computation
        rng = np.random.default_rng(14)
        ds = random_dataset(rng, n=25, d=4)
        trace = forward_select(None, ds, MODE_CLASSIC)
        for step, value in enumerate(trace.dependency_path):
            subset = trace.chosen[: step + 1]
            expected = classic_dependency(ds, subset, C=float(step + 1)).value
            assert value == pytest.approx(expected, abs=1e-12)

    def test_serialization(self):
        rng = np.random.default_rng(15)
        ds, gbs = random_ball_set(rng)
        trace = forward_select(gbs, ds, MODE_BALL, purity_threshold=0.8, seed=5)
        payload = trace.to_dict()
        assert payload["mode"] == MODE_BALL
        assert payload["chosen"] == list(trace.chosen)
        assert payload["stopped_reason"] in ("no-gain", "exhausted")


class TestCheckReduction:
    def test_full_set_on_nonredundant_data(self):
        rng = np.random.default_rng(16)
        X = rng.uniform(0, 1, size=(40, 3))
        y = (X[:, 0] + X[:, 1] + X[:, 2] > 1.5).astype(int)
        ds = Dataset.from_arrays(X, y)
        gbs = generate(ds, 0.9, 2)
        assert check_reduction(tuple(range(3)), gbs)

    def test_duplicated_column_not_a_reduct(self):
        # the whole set duplicates one column, so dropping the copy keeps
        # the scheduled dependency unchanged: condition (i) fails
        rng = np.random.default_rng(17)
        col = rng.uniform(0, 1, size=(40, 1))
        X = np.hstack([col, col])
        y = rng.integers(0, 2, size=40)
        y[:2] = [0, 1]
        ds = Dataset.from_arrays(X, y)
        gbs = generate(ds, 0.8, 3)
        assert not check_reduction((0, 1), gbs)

    def test_subset_with_lower_dependency_not_a_reduct(self):
        # dropping a genuinely informative attribute breaks condition (ii)
        rng = np.random.default_rng(18)
        X = rng.uniform(0, 1, size=(50, 3))
        y = (X[:, 2] > 0.5).astype(int)
        ds = Dataset.from_arrays(X, y)
        gbs = generate(ds, 0.9, 4)
        assert not check_reduction((0, 1), gbs)
