import math

import numpy as np
import pytest

from tableplan.geometry import Footprint, Workspace
from tableplan.weighting import ObjectCharacteristics, hecp_weights, heti_weights

WS10 = Workspace(10.0, 10.0)


def chars(*fps):
    return [ObjectCharacteristics(fp) for fp in fps]


def test_characteristics_validation():
    fp = Footprint.disc(1.0)
    with pytest.raises(ValueError):
        ObjectCharacteristics(fp, mass=-1.0)
    with pytest.raises(ValueError):
        ObjectCharacteristics(fp, impedance=-0.5)


def test_hecp_identical_objects_equal_weights():
    cs = chars(*[Footprint.disc(0.7)] * 5)
    w = hecp_weights(cs, WS10)
    assert all(x == pytest.approx(w[0]) for x in w)


def test_hecp_single_unit_disc_hand_value():
    # s_mean = pi, r_mean = 1, w = (pi + pi + 2 pi) / (8 * 8)
    w = hecp_weights(chars(Footprint.disc(1.0)), WS10)
    assert w == [pytest.approx(4.0 * math.pi / 64.0)]
    assert w[0] == pytest.approx(0.19635, abs=1e-5)


def test_hecp_formula_recomputed_independently():
    cs = chars(Footprint.rectangle(2.0, 1.0), Footprint.disc(0.5),
               Footprint.ellipse(1.5, 0.75))
    w = hecp_weights(cs, WS10)
    areas = [c.footprint.area for c in cs]
    perims = [c.footprint.perimeter for c in cs]
    s_mean = sum(areas) / 3.0
    r_mean = math.sqrt(s_mean / math.pi)
    denom = (10.0 - 2.0 * r_mean) ** 2
    for got, s, c in zip(w, areas, perims):
        assert got == pytest.approx((s + s_mean + r_mean * c) / denom)


def test_hecp_large_squares_outweigh_small():
    big = Footprint.rectangle(3.0, 3.0)
    small = Footprint.rectangle(1.0, 1.0)
    w = hecp_weights(chars(big, big, small, small, small), WS10)
    assert min(w[0], w[1]) > max(w[2], w[3], w[4])


def test_hecp_degenerate_workspace_rejected():
    with pytest.raises(ValueError):
        hecp_weights(chars(Footprint.disc(2.0)), Workspace(3.0, 3.0))
    with pytest.raises(ValueError):
        hecp_weights([], WS10)


def test_hecp_scale_equivariant_ranking():
    rng = np.random.default_rng(9)
    for lam in (0.5, 2.0, 7.0):
        base = []
        scaled = []
        for _ in range(8):
            w_, h_ = rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)
            base.append(ObjectCharacteristics(Footprint.rectangle(w_, h_)))
            scaled.append(ObjectCharacteristics(Footprint.rectangle(lam * w_, lam * h_)))
        ranks = np.argsort(hecp_weights(base, WS10))
        ranks_scaled = np.argsort(hecp_weights(scaled, Workspace(10.0 * lam, 10.0 * lam)))
        assert list(ranks) == list(ranks_scaled)


def test_hecp_growing_one_object_never_lowers_its_rank():
    rng = np.random.default_rng(17)
    for _ in range(20):
        cs = [ObjectCharacteristics(Footprint.rectangle(rng.uniform(0.4, 1.6),
                                                        rng.uniform(0.4, 1.6)))
              for _ in range(6)]
        k = int(rng.integers(6))
        w_before = hecp_weights(cs, WS10)
        grown = list(cs)
        w_, h_ = cs[k].footprint.params
        grown[k] = ObjectCharacteristics(Footprint.rectangle(w_ * 1.5, h_ * 1.5))
        w_after = hecp_weights(grown, WS10)
        rank_before = sum(1 for j in range(6) if w_before[j] < w_before[k])
        rank_after = sum(1 for j in range(6) if w_after[j] < w_after[k])
        assert w_after[k] > w_before[k]
        assert rank_after >= rank_before


def test_heti_passthrough():
    fp = Footprint.disc(1.0)
    cs = [ObjectCharacteristics(fp, impedance=2.0),
          ObjectCharacteristics(fp, impedance=5.0),
          ObjectCharacteristics(fp, impedance=1.0)]
    assert heti_weights(cs) == [2.0, 5.0, 1.0]


def test_heti_area_fallback():
    cs = chars(Footprint.rectangle(1.0, 1.0), Footprint.rectangle(3.0, 3.0))
    assert heti_weights(cs) == [pytest.approx(1.0), pytest.approx(9.0)]


def test_heti_fallback_chain_mixed():
    fp = Footprint.disc(1.0)
    cs = [ObjectCharacteristics(fp, impedance=3.0),
          ObjectCharacteristics(fp, mass=7.0),
          ObjectCharacteristics(fp, mass=2.0, impedance=4.0)]
    assert heti_weights(cs) == [3.0, 7.0, 4.0]


def test_heti_independent_of_other_objects():
    fp_a = Footprint.rectangle(1.0, 2.0)
    alone = heti_weights([ObjectCharacteristics(fp_a)])
    crowded = heti_weights([ObjectCharacteristics(fp_a),
                            ObjectCharacteristics(Footprint.disc(3.0), mass=9.0)])
    assert alone[0] == crowded[0]
