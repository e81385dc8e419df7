import numpy as np
import numpy.testing as npt

from urbansense.detector import center_to_corner, corner_to_center, jaccard, match


def brute_force_match(gt_boxes, gt_classes, defaults, threshold):
    """Independent re-derivation of the two matching rules with plain loops."""
    d = len(defaults)
    corners = center_to_corner(defaults)
    matched_gt = [-1] * d
    matched_class = [0] * d
    g = len(gt_boxes)
    if g == 0:
        return matched_gt, matched_class
    ov = [[float(jaccard(np.asarray(gt_boxes[j]), corners[i]))
           for i in range(d)] for j in range(g)]

    forced = set()
    for j in range(g):
        candidates = sorted(range(d), key=lambda i: (-ov[j][i], i))
        for i in candidates:
            if i not in forced:
                forced.add(i)
                matched_gt[i] = j
                matched_class[i] = int(gt_classes[j])
                break

    for i in range(d):
        if i in forced:
            continue
        best_j = min(range(g), key=lambda j: (-ov[j][i], j))
        if ov[best_j][i] > threshold:
            matched_gt[i] = best_j
            matched_class[i] = int(gt_classes[best_j])
    return matched_gt, matched_class


def test_exact_overlap_single_positive():
    defaults = corner_to_center(np.array([
        [0.1, 0.1, 0.4, 0.4],
        [0.6, 0.6, 0.9, 0.9],
        [0.0, 0.0, 1.0, 1.0],
    ]))
    gts = np.array([[0.1, 0.1, 0.4, 0.4]])
    a = match(gts, np.array([2]), defaults, threshold=0.5)
    assert a.num_pos == 1
    assert a.matched_gt[0] == 0 and a.matched_class[0] == 2
    assert a.matched_gt[1] == -1 and a.matched_gt[2] == -1


def test_empty_ground_truth_all_negative():
    defaults = corner_to_center(np.array([[0.0, 0.0, 0.5, 0.5]] * 4))
    a = match(np.zeros((0, 4)), np.zeros(0, dtype=int), defaults)
    assert a.num_pos == 0
    assert np.all(a.neg)
    assert np.all(a.matched_class == 0)


def test_hand_placed_instance_matches_brute_force():
    defaults = corner_to_center(np.array([
        [0.00, 0.00, 0.50, 0.50],
        [0.25, 0.25, 0.75, 0.75],
        [0.50, 0.50, 1.00, 1.00],
    ]))
    gts = np.array([[0.05, 0.05, 0.45, 0.45],
                    [0.55, 0.55, 0.95, 0.95]])
    classes = np.array([1, 3])
    a = match(gts, classes, defaults, threshold=0.3)
    bg, bc = brute_force_match(gts, classes, defaults, 0.3)
    npt.assert_array_equal(a.matched_gt, bg)
    npt.assert_array_equal(a.matched_class, bc)


def test_random_instances_match_brute_force():
    rng = np.random.default_rng(7)
    for trial in range(30):
        d = int(rng.integers(3, 12))
        g = int(rng.integers(0, 4))
        defaults = np.concatenate(
            [rng.random((d, 2)), rng.uniform(0.05, 0.5, (d, 2))], axis=1)
        lo = rng.random((g, 2)) * 0.7
        hi = lo + rng.uniform(0.05, 0.3, (g, 2))
        gts = np.concatenate([lo, hi], axis=1)
        classes = rng.integers(1, 5, g)
        threshold = float(rng.choice([0.3, 0.5, 0.7]))
        a = match(gts, classes, defaults, threshold=threshold)
        bg, bc = brute_force_match(gts, classes, defaults, threshold)
        npt.assert_array_equal(a.matched_gt, bg, err_msg=f"trial {trial}")
        npt.assert_array_equal(a.matched_class, bc, err_msg=f"trial {trial}")


def test_every_ground_truth_keeps_a_positive():
    # forced best-match holds regardless of threshold
    rng = np.random.default_rng(8)
    for _ in range(50):
        d = int(rng.integers(4, 16))
        g = int(rng.integers(1, min(4, d)))
        defaults = np.concatenate(
            [rng.random((d, 2)), rng.uniform(0.05, 0.5, (d, 2))], axis=1)
        lo = rng.random((g, 2)) * 0.7
        hi = lo + rng.uniform(0.05, 0.3, (g, 2))
        gts = np.concatenate([lo, hi], axis=1)
        a = match(gts, np.ones(g, dtype=int), defaults, threshold=0.99)
        covered = set(a.matched_gt[a.pos])
        assert covered == set(range(g))


def test_pos_neg_partition():
    rng = np.random.default_rng(9)
    defaults = np.concatenate(
        [rng.random((20, 2)), rng.uniform(0.05, 0.5, (20, 2))], axis=1)
    gts = np.array([[0.2, 0.2, 0.6, 0.6]])
    a = match(gts, np.array([1]), defaults)
    assert np.all(a.pos ^ a.neg)
