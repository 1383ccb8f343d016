import numpy as np
import pytest

import srnkit


def test_anchor_census():
    anchors = srnkit.generate_anchors()
    assert len(anchors) == 174720
    assert [anchors.level_count(l) for l in range(6)] == [
        131072, 32768, 8192, 2048, 512, 128,
    ]
    boxes = anchors.boxes
    assert boxes.shape == (174720, 4)
    scales = np.sqrt((boxes[:, 2] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 1]))
    assert scales.min() == pytest.approx(8.0)
    assert scales.max() == pytest.approx(362.03867196751236)

    stats = srnkit.anchor_stats()
    assert stats["total"] == 174720
    assert stats["per_level"] == [131072, 32768, 8192, 2048, 512, 128]


def test_match_thresholds():
    anchors = np.array([[0, 0, 10, 10], [0, 0, 10, 5], [100, 100, 110, 110]], float)
    gts = np.array([[0, 0, 10, 10]], float)
    gt_index, max_iou = srnkit.match(anchors, gts, theta_p=0.7, theta_n=0.3)
    assert gt_index.tolist() == [0, -2, -1]
    assert max_iou == pytest.approx([1.0, 0.5, 0.0])


def test_encode_decode_round_trip():
    rng = np.random.default_rng(3)
    centers = rng.uniform(-200, 200, size=(500, 2))
    sizes = rng.uniform(1, 300, size=(500, 2))
    anchors = np.hstack([centers - sizes / 2, centers + sizes / 2])
    centers2 = rng.uniform(-200, 200, size=(500, 2))
    # Size ratios stay under the decode clamp so the trip is lossless.
    sizes2 = sizes * np.exp(rng.uniform(-4, 4, size=(500, 2)))
    gts = np.hstack([centers2 - sizes2 / 2, centers2 + sizes2 / 2])
    back = srnkit.decode(anchors, srnkit.encode(gts, anchors))
    np.testing.assert_allclose(back, gts, rtol=1e-9, atol=1e-9)


def test_focal_and_smooth_l1():
    assert srnkit.focal_loss(0.5, True, alpha=1.0, gamma=0.0) == pytest.approx(
        -np.log(0.5), abs=1e-12
    )
    losses = srnkit.smooth_l1(np.array([[0.5, 0, 0, 0]]), np.zeros((1, 4)))
    assert losses == pytest.approx([0.125])


def test_nms_collapses_duplicates():
    dets = np.array(
        [
            [0, 0, 10, 10, 0.9],
            [0.5, 0, 10.5, 10, 0.8],  # heavy overlap, suppressed
            [50, 50, 60, 60, 0.7],
        ]
    )
    kept = srnkit.nms(dets, iou_threshold=0.4)
    assert kept.shape == (2, 5)
    assert kept[:, 4].tolist() == [0.9, 0.7]


def test_inference_and_eval_on_oracle_scene():
    anchors = srnkit.generate_anchors()
    scene = srnkit.synth_scene(
        anchors, face_count=6, min_scale=40, max_scale=200, oracle_scores=True, seed=11
    )
    dets = srnkit.run_inference(
        anchors,
        scene["first_scores"],
        scene["first_deltas"],
        scene["second_scores"],
        scene["second_deltas"],
        1024,
        1024,
    )
    assert dets.shape[0] <= 750
    assert (np.diff(dets[:, 4]) <= 0).all()

    perfect = dets[dets[:, 4] > 0.5]
    assert perfect.shape[0] == scene["faces"].shape[0]

    faces = np.zeros((scene["faces"].shape[0], 10))
    faces[:, 0] = scene["faces"][:, 0]
    faces[:, 1] = scene["faces"][:, 1]
    faces[:, 2] = scene["faces"][:, 2] - scene["faces"][:, 0]
    faces[:, 3] = scene["faces"][:, 3] - scene["faces"][:, 1]
    curves = srnkit.evaluate([("synth/img.jpg", faces)], {"synth/img.jpg": dets})
    for subset in ("easy", "medium", "hard"):
        assert curves[subset]["ap"] == pytest.approx(1.0, abs=1e-6)


def test_stem_summary():
    original = srnkit.stem_summary("resnet_original")
    assert original["params"] == 9408
    assert original["trace"][-1]["cumulative_stride"] == 4
    new = srnkit.stem_summary("new_resnet", 1024, 1024)
    assert new["params"] == 21296
    assert new["trace"][-1]["out_channels"] == 32
    with pytest.raises(Exception):
        srnkit.stem_summary("vgg")
