import numpy as np
import pytest

from convseq import PipelineConfig
from convseq.datasetio import (
    VariationSpec,
    generate_synthetic_traverse,
    synthesize_frames,
)
from convseq.matcher import match_images
from convseq.pipeline import (
    encode_query_frame,
    encode_reference_frame,
    pairwise_scores,
    run_benchmark,
    run_matching,
)

CFG = PipelineConfig(image_width=64, image_height=64, cell_width=16, cell_height=16)


@pytest.fixture(scope="module")
def tiny_frames():
    q, r = synthesize_frames(3, 10, VariationSpec(), frame_size=(64, 64), step_px=12)
    return q, r


@pytest.fixture(scope="module")
def encoded(tiny_frames):
    q_frames, r_frames = tiny_frames
    queries = [encode_query_frame(f, CFG) for f in q_frames]
    refs = [encode_reference_frame(f, CFG) for f in r_frames]
    return queries, refs


class TestEncoding:
    def test_query_and_reference_descriptors_agree(self, tiny_frames):
        raw = tiny_frames[0][0]
        qf = encode_query_frame(raw, CFG)
        rd = encode_reference_frame(raw, CFG)
        np.testing.assert_array_equal(qf.descriptor.vectors, rd.vectors)

    def test_query_rows_are_gathered_descriptor_rows(self, encoded):
        q = encoded[0][0]
        np.testing.assert_array_equal(
            q.query.vectors, q.descriptor.vectors[q.query.roi.region_indices]
        )
        assert q.query.image_entropy == q.entropy


class TestPairwiseScores:
    def test_equals_direct_matcher_loop(self, encoded):
        queries, refs = encoded
        pm = pairwise_scores(queries, refs)
        for i in (0, 3, 7):
            for j in (0, 5, 9):
                assert pm[i, j] == match_images(queries[i].query, refs[j])

    def test_threaded_identical_to_serial(self, encoded):
        queries, refs = encoded
        pm1 = pairwise_scores(queries, refs, threads=1)
        pm4 = pairwise_scores(queries, refs, threads=4)
        np.testing.assert_array_equal(pm1, pm4)


class TestRunMatching:
    def test_identity_pair_matches_itself(self, encoded):
        queries, refs = encoded
        results, decisions, starts = run_matching(queries, refs, CFG)
        assert len(results) == len(decisions) == len(starts)
        for res in results:
            assert res.best_ref_start == res.query_start

    def test_reference_shorter_than_k_skipped(self, encoded):
        queries, refs = encoded
        cfg = CFG.with_fixed_k(4)
        results, _, starts = run_matching(queries, refs[:3], cfg)
        assert results == []
        assert starts == []


class TestRunBenchmark:
    def test_identity_benchmark_end_to_end(self, tmp_path):
        q, r, gt = generate_synthetic_traverse(
            9, 12, VariationSpec(), tmp_path, frame_size=(64, 64)
        )
        run = run_benchmark(q, q, CFG, gt)
        assert run.report.accuracy == 1.0
        assert run.report.auc_pr == 1.0
        assert run.report.n_matched == run.report.n_queries == 12
        assert run.report.t_e > 0
        assert run.report.pcu > 0

    def test_threads_do_not_change_predictions(self, tmp_path):
        spec = VariationSpec(shift_px=4, brightness_gain=1.2, noise_level=3.0)
        q, r, gt = generate_synthetic_traverse(
            13, 10, spec, tmp_path, frame_size=(64, 64)
        )
        run1 = run_benchmark(q, r, CFG, gt, threads=1)
        run4 = run_benchmark(q, r, CFG, gt, threads=4)
        assert [(x.query_start, x.predicted_ref, x.score) for x in run1.records] == [
            (x.query_start, x.predicted_ref, x.score) for x in run4.records
        ]
