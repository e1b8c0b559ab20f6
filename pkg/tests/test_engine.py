import math
import warnings

import numpy as np
import pytest

from maxmargin.dataset import Dataset, Label
from maxmargin.datagen import GenSpec, gen_planted
from maxmargin.engine import (
    SEED,
    Candidate,
    CandidateKind,
    EngineConfig,
    StepCase,
    apply_update,
    epoch_of,
    init_state,
    iteration_cap,
    select_candidate,
    train_active,
    train_offline,
    verify_separation,
)
from maxmargin.errors import (
    CoincidentSeeds,
    DegenerateSegment,
    EpsOutOfRange,
    MissingLabels,
    NonPositiveInput,
    SingleClass,
)
from maxmargin.geometry import Slab, diameter_upper_bound, shrink_slab
from maxmargin.oracles import exact_counterexample, pool_labeling_oracle, sampled_counterexample
from maxmargin.reference import hull_distance_2d, planted_margin_bounds

SQUARE = Dataset.from_lists([(-1, 0), (-1, 1), (1, 0), (1, 1)], [-1, -1, 1, 1])


def hull_dist(data):
    return hull_distance_2d(data.class_points(Label.BLACK), data.class_points(Label.WHITE))


class TestInitState:
    def test_unit(self):
        s = init_state((0, 0), (1, 0))
        assert s.ell == 1
        assert s.iteration == 0
        assert s.b_weights == {SEED: 1.0}

    def test_coincident(self):
        with pytest.raises(CoincidentSeeds):
            init_state((0, 0), (0, 0))

    def test_norm(self):
        assert init_state((-1, 1), (1, 0), 3, 4).ell == pytest.approx(math.sqrt(5))
        assert init_state((-1, 1), (1, 0), 3, 4).w_weights == {4: 1.0}


class TestSelectCandidate:
    state = init_state((0, 0), (4, 0))

    def test_in_slab_closest_to_middle(self):
        data = Dataset.from_lists([(2, 5), (2.9, 0)], [1, -1])
        # mid-hyperplane x=2: distances 0 and 0.9
        dists = [abs(p[0] - 2) for p in data.points]
        assert dists == pytest.approx([0, 0.9])
        assert select_candidate(self.state, data, 0.5) == Candidate(CandidateKind.IN_SLAB, 0)

    def test_converged(self):
        data = Dataset.from_lists([(-1, 0), (5, 0)], [-1, 1])
        assert select_candidate(self.state, data, 0.5).kind is CandidateKind.CONVERGED

    def test_misclassified_lowest_index(self):
        data = Dataset.from_lists([(-1, 0), (5, 0)], [1, -1])
        assert select_candidate(self.state, data, 0.5) == Candidate(CandidateKind.MISCLASSIFIED, 0)

    def test_tie_lowest_index(self):
        data = Dataset.from_lists([(2, 1), (2, -1), (2, 0)], [1, 1, -1])
        assert select_candidate(self.state, data, 0.5) == Candidate(CandidateKind.IN_SLAB, 0)

    def test_points_between_shrunk_and_full_slab_are_not_candidates(self):
        # t = 0.1 lies in the full slab but not in the slab shrunk by 0.5
        data = Dataset.from_lists([(0.4, 0)], [-1])
        assert select_candidate(self.state, data, 0.5).kind is CandidateKind.CONVERGED

    def test_missing_labels(self):
        with pytest.raises(MissingLabels):
            select_candidate(self.state, Dataset.from_lists([(1, 1)]), 0.5)


class TestApplyUpdate:
    state = init_state((0, 0), (4, 0), 0, 1)

    def test_white_unclamped(self):
        s, rec = apply_update(self.state, (3, 3), 2, Label.WHITE)
        np.testing.assert_allclose(s.w, [3.6, 1.2], atol=1e-15)
        np.testing.assert_array_equal(s.b, [0, 0])
        assert s.ell == pytest.approx(math.sqrt(14.4), rel=1e-15)
        assert s.ell == pytest.approx(3.79473, abs=1e-5)
        assert s.w_weights == pytest.approx({1: 0.6, 2: 0.4})
        assert rec.iteration == 1 and rec.ell_before == 4 and rec.ell_after == s.ell
        assert rec.in_slab_unclamped

    def test_white_clamped(self):
        s, rec = apply_update(self.state, (2, 1), 2, Label.WHITE)
        np.testing.assert_array_equal(s.w, [2, 1])
        assert s.ell == pytest.approx(math.sqrt(5))
        assert s.w_weights == {2: 1.0}
        assert rec.geometry.clamped and not rec.in_slab_unclamped

    def test_black(self):
        s, _ = apply_update(self.state, (1, 2), 2, Label.BLACK)
        np.testing.assert_allclose(s.b, [0.8, 1.6], atol=1e-15)
        assert s.ell == pytest.approx(math.sqrt(12.8))
        assert s.ell == pytest.approx(3.57771, abs=1e-5)
        assert s.b_weights == pytest.approx({0: 0.2, 2: 0.8})

    def test_point_on_own_witness(self):
        with pytest.raises(DegenerateSegment):
            apply_update(self.state, (4, 0), 1, Label.WHITE)

    def test_certificates(self):
        pts = np.array([(0, 0), (4, 0), (3, 3)], float)
        s, _ = apply_update(self.state, pts[2], 2, Label.WHITE)
        assert s.certificate_errors(pts, [-1, 1, 1]) == []
        assert s.certificate_errors(pts, [-1, 1, -1])  # foreign index detected


class TestIterationCap:
    def test_examples(self):
        assert 256 * (1 / (0.5 * 1)) ** 2 == 1024
        assert iteration_cap(1, 1, 0.5, 256) == 1024
        assert iteration_cap(10, 0.5, 0.2, 256) == 2_560_000

    def test_domain(self):
        with pytest.raises(NonPositiveInput):
            iteration_cap(1, 1, 0, 256)
        with pytest.raises(NonPositiveInput):
            iteration_cap(0, 1, 0.5)
        with pytest.raises(NonPositiveInput):
            iteration_cap(1, -1, 0.5)
        with pytest.raises(EpsOutOfRange):
            iteration_cap(1, 1, 1.0)

    def test_epochs(self):
        assert epoch_of(8, 8) == 1
        assert epoch_of(8, 4.5) == 1
        assert epoch_of(8, 4) == 2
        assert epoch_of(8, 1.9) == 3


class TestTrainOffline:
    def test_two_points(self):
        data = Dataset.from_lists([(0, 0), (1, 0)], [-1, 1])
        r = train_offline(data, EngineConfig(0.1))
        assert r.converged and r.iterations == 1
        assert r.final_ell == 1 and r.width == pytest.approx(0.9)
        assert r.trace[0].case is StepCase.TERMINAL
        assert r.case_a_count == 1 and r.case_b_count == 0

    def test_square_with_seeds(self):
        dist = hull_dist(SQUARE)
        assert dist == 2
        r = train_offline(SQUARE, EngineConfig(0.25), seeds=(1, 2))
        assert r.converged
        assert 2 - 1e-12 <= r.final_ell <= 8 / 3 + 1e-12
        assert verify_separation(SQUARE, r.final_slab).certified

    def test_planted_5d(self):
        data, u = gen_planted(GenSpec(dim=5, n=100, margin=0.5, diam=10, seed=7))
        cert = planted_margin_bounds(data, u)
        assert cert.lower >= 0.5 - 1e-12
        r = train_offline(data, EngineConfig(0.2))
        assert r.converged
        assert r.final_ell >= cert.lower - 1e-12
        assert r.iterations <= iteration_cap(10, 0.5, 0.2, 256)
        assert r.final_ell <= r.diam_ub

    def test_errors(self):
        with pytest.raises(MissingLabels):
            train_offline(SQUARE.unlabeled(), EngineConfig(0.1))
        with pytest.raises(SingleClass):
            train_offline(Dataset.from_lists([(0, 0), (1, 1)], [1, 1]), EngineConfig(0.1))
        with pytest.raises(SingleClass):
            train_offline(SQUARE, EngineConfig(0.1), seeds=(2, 1))
        with pytest.raises(EpsOutOfRange):
            EngineConfig(1.0)

    def test_cap_exceeded_is_a_report(self):
        data, _ = gen_planted(GenSpec(2, 200, 1.0, 20.0, 3))
        r = train_offline(data, EngineConfig(0.1, explicit_cap=2))
        assert not r.converged
        assert r.iterations == 2 == len(r.trace)
        assert r.iteration_cap == 2

    def test_conflicting_duplicates(self):
        data = Dataset.from_lists([(0, 0), (2, 0), (0, 0), (1, 5)], [-1, 1, 1, -1])
        with pytest.warns(RuntimeWarning, match="cannot be separated"):
            r = train_offline(data, EngineConfig(0.2, explicit_cap=500))
        assert not r.converged

    def test_report_invariants_and_epochs(self):
        data, _ = gen_planted(GenSpec(2, 200, 1.0, 20.0, 11))
        r = train_offline(data, EngineConfig(0.1))
        assert r.iterations == r.case_a_count + r.case_b_count == len(r.trace)
        assert [rec.iteration for rec in r.trace] == list(range(1, r.iterations + 1))
        assert sum(e.iterations for e in r.epochs) == r.iterations
        for e in r.epochs:
            assert r.diam_ub / 2 ** e.epoch < e.ell_start <= r.diam_ub / 2 ** (e.epoch - 1)
        assert r.final_slab == shrink_slab(Slab(r.final_state.b, r.final_state.w), 0.1)

    def test_determinism(self):
        data, _ = gen_planted(GenSpec(3, 150, 0.4, 8.0, 5))
        a = train_offline(data, EngineConfig(0.15))
        b = train_offline(data, EngineConfig(0.15))
        assert a == b
        assert a.trace == b.trace


@pytest.mark.parametrize("seed", range(25))
def test_trace_invariants(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.choice([10, 60]))
    ratio = float(rng.choice([4, 12]))
    eps = float(rng.choice([0.15, 0.3]))
    data, _ = gen_planted(GenSpec(2, n, 1.0, ratio, seed))
    dist = hull_dist(data)
    d_ub = diameter_upper_bound(data.points)
    bad = []

    def check(state, rec):
        bad.extend(state.certificate_errors(data.points, data.labels))
        assert state.ell >= dist - 1e-9

    r = train_offline(data, EngineConfig(eps), callback=check)
    assert r.converged and not bad
    for rec in r.trace:
        assert rec.ell_after <= rec.ell_before + 1e-12
        if rec.in_slab_unclamped:
            bound = (1 - (eps * rec.ell_before / (4 * d_ub)) ** 2) * rec.ell_before
            assert rec.ell_after <= bound + 1e-9
    assert dist - 1e-9 <= r.final_ell <= dist / (1 - eps) + 1e-9
    assert r.iterations <= iteration_cap(d_ub, dist, eps)
    assert verify_separation(data, r.final_slab) == (0, 0, pytest.approx((1 - eps) * r.final_ell))


class TestTrainActive:
    def test_two_point_pool(self):
        data = Dataset.from_lists([(0, 0), (1, 0)], [-1, 1])
        lab = pool_labeling_oracle(data)
        cex = exact_counterexample(data)
        r = train_active(lab, cex, data.points, 0, 1, EngineConfig(0.1))
        assert r.converged and r.iterations == 1
        assert r.labeling_calls == 0 and lab.calls == 0
        assert r.counterexample_calls == 1 == cex.calls

    def test_square_matches_offline(self):
        lab = pool_labeling_oracle(SQUARE)
        cex = exact_counterexample(SQUARE)
        active = train_active(lab, cex, SQUARE.points, 1, 2, EngineConfig(0.25))
        offline = train_offline(SQUARE, EngineConfig(0.25), seeds=(1, 2))
        assert active.trace == offline.trace
        assert active == offline

    def test_sampled_m0_stops_at_first_check(self):
        data, _ = gen_planted(GenSpec(2, 40, 1.0, 5.0, 2))
        lab = pool_labeling_oracle(data)
        cex = sampled_counterexample(lab, data.points, 0, rng_seed=1)
        anchors = data.meta["anchors"]
        r = train_active(lab, cex, data.points, anchors[0], anchors[1], EngineConfig(0.2))
        assert r.converged
        assert r.trace[-1].case is StepCase.TERMINAL
        assert r.counterexample_calls == 1 and cex.calls == 1
        assert r.labeling_calls + r.counterexample_calls == r.iterations

    def test_vector_seeds(self):
        data = Dataset.from_lists([(-2, 0), (2, 0), (0.5, 3)], [-1, 1, 1])
        r = train_active(pool_labeling_oracle(data), exact_counterexample(data), data.points,
                         (-1, 0), (1, 0), EngineConfig(0.1))
        assert r.converged
        assert r.final_state.certificate_errors(data.points) == []
        assert verify_separation(data, r.final_slab).certified

    def test_label_cache(self):
        data, _ = gen_planted(GenSpec(2, 80, 1.0, 10.0, 4))
        labels = data.labels
        lab = pool_labeling_oracle(data)
        b1 = int(np.flatnonzero(labels == -1)[0])
        w1 = int(np.flatnonzero(labels == 1)[0])
        r = train_active(lab, exact_counterexample(data), data.points, b1, w1, EngineConfig(0.1))
        queried = {rec.chosen_index for rec in r.trace if rec.case is StepCase.SLAB_POINT}
        assert lab.calls == len(queried - {b1, w1})
        assert r.labeling_calls == r.case_b_count

    def test_coincident_seeds(self):
        with pytest.raises(CoincidentSeeds):
            train_active(pool_labeling_oracle(SQUARE), exact_counterexample(SQUARE),
                         SQUARE.points, (0, 0), (0, 0), EngineConfig(0.1))

    def test_oracle_errors_propagate(self):
        class Broken:
            calls = 0

            def query(self, slab):
                raise RuntimeError("offline")

        data = Dataset.from_lists([(0, 0), (1, 0)], [-1, 1])
        with pytest.raises(RuntimeError, match="offline"):
            train_active(pool_labeling_oracle(data), Broken(), data.points, 0, 1, EngineConfig(0.1))


class TestVerify:
    def test_examples(self):
        s = Slab((0, 0), (1, 0))
        assert verify_separation(Dataset.from_lists([(0.5, 0)], [1]), s).interior_count == 1
        assert verify_separation(Dataset.from_lists([(-1, 0)], [1]), s).misclassified_count == 1
        ok = verify_separation(Dataset.from_lists([(-1, 0), (2, 0)], [-1, 1]), s)
        assert ok == (0, 0, 1.0) and ok.certified

    def test_needs_labels(self):
        with pytest.raises(MissingLabels):
            verify_separation(SQUARE.unlabeled(), Slab((0, 0), (1, 0)))

    def test_swapped_anchors_flag_everything(self):
        r = train_offline(SQUARE, EngineConfig(0.25))
        bad = verify_separation(SQUARE, r.final_slab.swapped())
        assert bad.misclassified_count == SQUARE.n


def test_no_warning_on_clean_data():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        train_offline(SQUARE, EngineConfig(0.3))
