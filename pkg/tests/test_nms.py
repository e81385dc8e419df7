import numpy as np

from urbansense.detector import Detection, jaccard, nms


def det(score, box, name="person"):
    return Detection(class_name=name, score=score, box=tuple(box))


def exhaustive_greedy(dets, iou_threshold, top_k):
    """Simulation oracle: literal greedy suppression with no vectorization."""
    remaining = sorted(dets, key=lambda d: -d.score)
    kept = []
    while remaining and len(kept) < top_k:
        best = remaining.pop(0)
        kept.append(best)
        remaining = [d for d in remaining
                     if jaccard(np.asarray(best.box), np.asarray(d.box))
                     <= iou_threshold]
    return kept


def test_identical_boxes_keep_highest_score():
    box = (0.1, 0.1, 0.4, 0.4)
    out = nms([det(0.8, box), det(0.9, box)], iou_threshold=0.45, top_k=10)
    assert len(out) == 1
    assert out[0].score == 0.9


def test_disjoint_boxes_all_survive():
    dets = [det(0.9, (0.0, 0.0, 0.2, 0.2)),
            det(0.8, (0.4, 0.4, 0.6, 0.6)),
            det(0.7, (0.8, 0.8, 1.0, 1.0))]
    out = nms(dets, iou_threshold=0.45, top_k=10)
    assert len(out) == 3


def test_top_k_cap():
    dets = [det(0.9 - 0.1 * i, (0.1 * i, 0.0, 0.1 * i + 0.05, 0.05))
            for i in range(5)]
    out = nms(dets, iou_threshold=0.45, top_k=2)
    assert len(out) == 2


def test_crafted_overlapping_chain():
    dets = [det(0.95, (0.00, 0.0, 0.30, 0.3)),
            det(0.90, (0.02, 0.0, 0.32, 0.3)),   # heavy overlap with first
            det(0.85, (0.25, 0.0, 0.55, 0.3)),   # moderate overlap with first
            det(0.80, (0.27, 0.0, 0.57, 0.3)),
            det(0.75, (0.70, 0.0, 1.00, 0.3))]
    got = nms(dets, iou_threshold=0.45, top_k=10)
    want = exhaustive_greedy(dets, 0.45, 10)
    assert [(d.score, d.box) for d in got] == [(d.score, d.box) for d in want]


def test_matches_exhaustive_simulation_on_random_instances():
    rng = np.random.default_rng(11)
    for trial in range(100):
        n = int(rng.integers(1, 15))
        dets = []
        for _ in range(n):
            xy = rng.random(2) * 0.6
            wh = rng.uniform(0.05, 0.4, 2)
            dets.append(det(float(rng.random()),
                            (xy[0], xy[1], min(1.0, xy[0] + wh[0]),
                             min(1.0, xy[1] + wh[1]))))
        iou = float(rng.choice([0.3, 0.45, 0.6]))
        k = int(rng.integers(1, 10))
        got = nms(dets, iou_threshold=iou, top_k=k)
        want = exhaustive_greedy(dets, iou, k)
        assert [(d.score, d.box) for d in got] == [(d.score, d.box) for d in want], (
            f"trial {trial}")


def test_output_scores_non_increasing_and_separated():
    rng = np.random.default_rng(12)
    dets = []
    for _ in range(40):
        xy = rng.random(2) * 0.7
        wh = rng.uniform(0.05, 0.3, 2)
        dets.append(det(float(rng.random()),
                        (xy[0], xy[1], xy[0] + wh[0], xy[1] + wh[1])))
    out = nms(dets, iou_threshold=0.5, top_k=100)
    scores = [d.score for d in out]
    assert scores == sorted(scores, reverse=True)
    for i in range(len(out)):
        for j in range(i + 1, len(out)):
            assert jaccard(np.asarray(out[i].box), np.asarray(out[j].box)) <= 0.5


def test_empty_input():
    assert nms([], iou_threshold=0.5, top_k=5) == []
