import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtmt_ssimv.intra import PredictedBlock, predict_np
from qtmt_ssimv.media_io import Plane, Rect
from qtmt_ssimv.ssim import ssim_sub_cu
from qtmt_ssimv.ssimv import (MT_MODES, SPLIT_MODES, SplitMode, compute_ssimv, sub_cu_layout,
                              v_bt, v_qt, v_tt)

from conftest import random_plane

scores = st.floats(-1, 1, allow_nan=False)


def area(r):
    return r.w * r.h


@pytest.mark.parametrize("mode", SPLIT_MODES)
@pytest.mark.parametrize("size", [(32, 32), (16, 8), (64, 16)])
def test_layout_tiles_cu(mode, size):
    cu = Rect(8, 4, *size)
    regions = sub_cu_layout(mode, cu).regions
    cover = np.zeros((cu.y1, cu.x1), int)
    for r in regions:
        assert cu.contains(r)
        cover[r.y:r.y1, r.x:r.x1] += 1
    assert np.all(cover[cu.y:, cu.x:] == 1)
    assert len({area(r) for r in regions}) == 1


def test_layout_examples():
    qt = sub_cu_layout(SplitMode.QT, Rect(0, 0, 32, 32)).regions
    assert qt == (Rect(0, 0, 16, 16), Rect(16, 0, 16, 16), Rect(0, 16, 16, 16), Rect(16, 16, 16, 16))
    tth = sub_cu_layout(SplitMode.TTH, Rect(0, 0, 32, 32)).regions
    assert [r.size for r in tth] == [(32, 8)] * 4 and [r.y for r in tth] == [0, 8, 16, 24]
    btv = sub_cu_layout(SplitMode.BTV, Rect(0, 0, 16, 8)).regions
    assert btv == (Rect(0, 0, 8, 8), Rect(8, 0, 8, 8))
    bth = sub_cu_layout(SplitMode.BTH, Rect(0, 0, 16, 8)).regions
    assert bth == (Rect(0, 0, 16, 4), Rect(0, 4, 16, 4))
    ttv = sub_cu_layout(SplitMode.TTV, Rect(0, 0, 16, 8)).regions
    assert [r.x for r in ttv] == [0, 4, 8, 12]


def test_layout_errors():
    with pytest.raises(ValueError):
        sub_cu_layout(SplitMode.TTH, Rect(0, 0, 16, 6))
    with pytest.raises(ValueError):
        sub_cu_layout(SplitMode.BTV, Rect(0, 0, 5, 8))
    with pytest.raises(ValueError):
        sub_cu_layout(SplitMode.NP, Rect(0, 0, 8, 8))


def test_hand_values():
    assert v_qt((1, 1, 1, 1)) == 0
    assert v_qt((1, 0, 1, 0)) == pytest.approx(0.5)
    assert v_qt((0.9, 0.7, 0.9, 0.7)) == pytest.approx(0.1)
    assert v_bt((0.4, 0.4)) == 0
    assert v_bt((0.95, 0.80)) == pytest.approx(0.15)
    assert v_bt((0.80, 0.95)) == pytest.approx(0.15)
    assert v_tt((1, 1, 1, 1)) == 0
    assert v_tt((0.8, 0.6, 0.6, 0.8)) == pytest.approx(0.2)
    assert v_tt((0.6, 0.8, 0.8, 0.6)) == pytest.approx(0.2)


def oracle_v(mode, s):
    # pairs written out from the definitions
    if mode == SplitMode.QT:
        a1, a2, a3, a4 = s
        return (abs(a1 - a2) + abs(a1 - a3) + abs(a2 - a4) + abs(a3 - a4)) / 4
    if mode in (SplitMode.BTH, SplitMode.BTV):
        return abs(s[0] - s[1])
    c1, c2, c3, c4 = s
    return (abs(c1 - c2) + abs((c1 + c4) - (c2 + c3)) + abs(c3 - c4)) / 4


def test_random_tuples_against_recomputation(rng):
    for _ in range(200):
        s4 = rng.uniform(-1, 1, 4).tolist()
        s2 = rng.uniform(-1, 1, 2).tolist()
        assert abs(v_qt(s4) - oracle_v(SplitMode.QT, s4)) < 1e-15
        assert abs(v_tt(s4) - oracle_v(SplitMode.TTH, s4)) < 1e-15
        assert abs(v_bt(s2) - oracle_v(SplitMode.BTH, s2)) < 1e-15


@given(st.tuples(scores, scores, scores, scores))
def test_nonnegative_and_bounds(s):
    assert v_qt(s) >= 0 and v_tt(s) >= 0 and v_bt(s[:2]) >= 0
    pairwise = max(abs(a - b) for a in s for b in s)
    assert v_qt(s) <= pairwise + 1e-15
    c1, c2, c3, c4 = s
    assert abs(c1 + c4 - c2 - c3) <= abs(c1 - c2) + abs(c4 - c3) + 1e-12
    assert v_tt(s) <= 2 * (abs(c1 - c2) + abs(c3 - c4)) / 4 + 1e-12


@given(st.tuples(scores, scores, scores, scores))
def test_qt_relabel_symmetry(s):
    a1, a2, a3, a4 = s
    assert v_qt((a4, a3, a2, a1)) == pytest.approx(v_qt(s), abs=1e-15)
    # transposing the quadrants swaps a2 and a3
    assert v_qt((a1, a3, a2, a4)) == pytest.approx(v_qt(s), abs=1e-15)


def test_identity_prediction_gives_zero():
    rng = np.random.default_rng(5)
    plane = random_plane(rng, 32, 32, 10)
    pred = PredictedBlock(Rect(0, 0, 32, 32), plane.samples.astype(np.int32), 0)
    res = compute_ssimv(plane, pred, SPLIT_MODES)
    assert set(res.values) == set(SPLIT_MODES)
    assert all(abs(v) < 1e-12 for v in res.values.values())


def test_restricted_permitted_set(rng):
    plane = random_plane(rng, 32, 32)
    pred = predict_np(plane, Rect(0, 0, 32, 32))
    res = compute_ssimv(plane, pred, {SplitMode.BTH})
    assert list(res.values) == [SplitMode.BTH]
    assert SplitMode.BTH in res and SplitMode.QT not in res
    with pytest.raises(ValueError):
        compute_ssimv(plane, pred, {SplitMode.NP})


@pytest.mark.parametrize("size", [(32, 32), (16, 16), (32, 16), (8, 32), (16, 8), (64, 64)])
def test_compositional_oracle(rng, size):
    plane = random_plane(rng, 80, 80, 10, smooth=True)
    for _ in range(3):
        w, h = size
        rect = Rect(int(rng.integers(0, 80 - w + 1)), int(rng.integers(0, 80 - h + 1)), w, h)
        pred = predict_np(plane, rect)
        modes = [m for m in SPLIT_MODES if not (m in (SplitMode.TTH,) and h < 16)
                 and not (m == SplitMode.TTV and w < 16)
                 and not (m == SplitMode.BTH and h < 8) and not (m == SplitMode.BTV and w < 8)]
        # the printed variant takes square roots of near-zero variances on flat
        # predictions, which magnifies summation-order rounding
        for variant, tol in (("standard", 1e-12), ("paper-literal", 1e-7)):
            res = compute_ssimv(plane, pred, modes, variant=variant)
            for m in modes:
                regions = sub_cu_layout(m, rect).regions
                s = [ssim_sub_cu(plane, pred, r, variant=variant) for r in regions]
                assert np.allclose(res.region_ssim[m], s, atol=tol, rtol=0)
                assert abs(res[m] - oracle_v(m, s)) < 2 * tol


def test_transposition_duality(rng):
    plane = random_plane(rng, 64, 64, 10, smooth=True)
    for rect in (Rect(8, 16, 32, 16), Rect(0, 0, 32, 32), Rect(16, 4, 16, 32)):
        pred = predict_np(plane, rect)
        t_pred = PredictedBlock(rect.transposed(), pred.samples.T.copy(), pred.mode_id)
        a = compute_ssimv(plane, pred, SPLIT_MODES if rect.w == rect.h else MT_MODES)
        b = compute_ssimv(plane.transposed(), t_pred, SPLIT_MODES if rect.w == rect.h else MT_MODES)
        assert abs(a[SplitMode.TTV] - b[SplitMode.TTH]) < 1e-10
        assert abs(a[SplitMode.TTH] - b[SplitMode.TTV]) < 1e-10
        assert abs(a[SplitMode.BTV] - b[SplitMode.BTH]) < 1e-10
        assert abs(a[SplitMode.BTH] - b[SplitMode.BTV]) < 1e-10
        if SplitMode.QT in a:
            assert abs(a[SplitMode.QT] - b[SplitMode.QT]) < 1e-10


def test_result_accessors(rng):
    plane = random_plane(rng, 32, 32)
    res = compute_ssimv(plane, predict_np(plane, Rect(0, 0, 32, 32)), SPLIT_MODES)
    assert len(res.diffs(SplitMode.QT)) == 4 and len(res.diffs(SplitMode.TTV)) == 3
    assert res.diffs(SplitMode.BTH) == (res[SplitMode.BTH],)
    d = res.as_dict()
    assert set(d["values"]) == {"QT", "BTH", "BTV", "TTH", "TTV"}
    assert len(d["region_ssim"]["TTH"]) == 4
