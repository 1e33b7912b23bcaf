import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agprice.data_model import ItemId, PriceQuantityPanel
from agprice.errors import EmptyLinks, NonPositiveGrowth, UndefinedRatio, YearPairInvalid
from agprice.index_numbers import (
    average_annual_growth,
    chain,
    growth_links,
    tfp_indices,
    tfp_link,
    tornqvist_input_link,
    tornqvist_output_link,
)

from conftest import REF_INPUT_LINKS, REF_OUTPUT_LINKS, REF_TFP_LINKS, random_panel


def oracle_link(panel, kind, t0, t1):
    """Term-by-term evaluation of the Tornqvist formula with plain floats."""
    a, b = panel.years.index(t0), panel.years.index(t1)
    rows = [k for k, it in enumerate(panel.items) if it.kind.value == kind]
    v0 = [float(panel.price[k, a]) * float(panel.quantity[k, a]) for k in rows]
    v1 = [float(panel.price[k, b]) * float(panel.quantity[k, b]) for k in rows]
    total = 0.0
    for n, k in enumerate(rows):
        weight = 0.5 * (v0[n] / sum(v0) + v1[n] / sum(v1))
        if weight:
            total += weight * math.log(float(panel.quantity[k, b]) / float(panel.quantity[k, a]))
    return math.exp(total)


def panel_from(outputs_q, inputs_q, outputs_p=None, inputs_p=None):
    items = [ItemId(f"y{j}", "output") for j in range(len(outputs_q))]
    items += [ItemId(f"x{i}", "input") for i in range(len(inputs_q))]
    q = np.array(list(outputs_q) + list(inputs_q), dtype=float)
    p = np.ones_like(q) if outputs_p is None else np.array(list(outputs_p) + list(inputs_p), dtype=float)
    return PriceQuantityPanel.from_arrays(items, range(2000, 2000 + q.shape[1]), p, q)


def test_unchanged_quantities_give_unit_link():
    panel = panel_from([[3.0, 3.0]], [[2.0, 2.0], [5.0, 5.0]], [[1.0, 9.0]], [[1.0, 4.0], [2.0, 7.0]])
    assert tornqvist_output_link(panel, 2000, 2001) == 1.0
    assert tornqvist_input_link(panel, 2000, 2001) == 1.0


def test_single_output_doubles():
    panel = panel_from([[3.0, 6.0]], [[2.0, 2.0]])
    assert tornqvist_output_link(panel, 2000, 2001) == pytest.approx(2.0, rel=1e-15)


def test_single_input_halved():
    panel = panel_from([[3.0, 3.0]], [[2.0, 1.0]])
    assert tornqvist_input_link(panel, 2000, 2001) == pytest.approx(0.5, rel=1e-15)


def test_two_outputs_equal_shares():
    # equal values in both years: quantities x2 and x8, prices adjusted to keep 50/50
    panel = panel_from([[1.0, 2.0], [1.0, 8.0]], [[1.0, 1.0]], [[1.0, 4.0], [1.0, 1.0]], [[1.0, 1.0]])
    expected = math.exp(0.5 * math.log(2.0) + 0.5 * math.log(8.0))
    assert expected == pytest.approx(4.0, rel=1e-15)
    assert tornqvist_output_link(panel, 2000, 2001) == pytest.approx(expected, rel=1e-14)


def test_two_inputs_shifting_shares():
    # cost shares (0.25, 0.75) then (0.35, 0.65); quantity ratios 1.2 and 0.9
    q = [[1.0, 1.2], [1.0, 0.9]]
    p = [[0.25, 0.35 / 1.2], [0.75, 0.65 / 0.9]]
    panel = panel_from([[1.0, 1.0]], q, [[1.0, 1.0]], p)
    expected = math.exp(0.30 * math.log(1.2) + 0.70 * math.log(0.9))
    assert expected == pytest.approx(0.9811245218124159, rel=1e-15)
    assert tornqvist_input_link(panel, 2000, 2001) == pytest.approx(expected, rel=1e-13)


def test_link_requires_adjacent_years():
    panel = random_panel(np.random.default_rng(0), n_years=3)
    with pytest.raises(YearPairInvalid):
        tornqvist_output_link(panel, 2000, 2002)
    with pytest.raises(YearPairInvalid):
        tornqvist_input_link(panel, 2001, 2000)


def test_zero_quantity_with_zero_weight_is_skipped():
    # x1 absent in both years: zero share, skipped
    panel = panel_from([[1.0, 1.0]], [[2.0, 4.0], [0.0, 0.0]])
    assert tornqvist_input_link(panel, 2000, 2001) == pytest.approx(2.0, rel=1e-15)


def test_zero_quantity_with_positive_weight_is_undefined():
    panel = panel_from([[1.0, 1.0]], [[2.0, 4.0], [1.0, 0.0]])
    with pytest.raises(UndefinedRatio):
        tornqvist_input_link(panel, 2000, 2001)


@pytest.mark.parametrize(
    "out, inp, expected",
    [(1.0, 1.0, 1.0), (1.21, 1.41, 1.21 / 1.41), (1.06, 0.96, 1.06 / 0.96)],
)
def test_tfp_link(out, inp, expected):
    assert tfp_link(out, inp) == expected


def test_tfp_link_reference_patterns():
    assert round(tfp_link(1.21, 1.41), 3) == 0.858
    assert round(tfp_link(1.06, 0.96), 3) == 1.104


def test_tfp_link_rejects_non_positive():
    with pytest.raises(NonPositiveGrowth):
        tfp_link(0.0, 1.0)


def test_chain_empty_and_two_links():
    assert chain([], 2010).as_dict() == {2010: 1.0}
    s = chain([1.10, 1.11], 2010)
    assert s.years == (2010, 2011, 2012)
    assert s[2011] == 1.10
    assert s[2012] == pytest.approx(1.221, rel=1e-15)
    assert chain([1.0] * 5, 2010).values.tolist() == [1.0] * 6


def test_chain_rejects_bad_links():
    with pytest.raises(NonPositiveGrowth):
        chain([1.0, -0.5], 2010)


@pytest.mark.parametrize(
    "column, mean",
    [(REF_TFP_LINKS, 12.5 / 12), (REF_INPUT_LINKS, 11.79 / 12), (REF_OUTPUT_LINKS, 12.16 / 12)],
)
def test_reference_link_averages(column, mean):
    assert average_annual_growth(column) == pytest.approx(mean, rel=1e-14)


def test_reference_reported_averages():
    assert round(average_annual_growth(REF_INPUT_LINKS), 2) == 0.98
    assert round(average_annual_growth(REF_OUTPUT_LINKS), 2) == 1.01
    assert round(average_annual_growth(REF_TFP_LINKS), 2) == 1.04


def test_average_options():
    assert average_annual_growth([1.7] * 4) == pytest.approx(1.7, rel=1e-15)
    assert average_annual_growth([2.0, 8.0], method="geometric") == pytest.approx(4.0, rel=1e-15)
    with pytest.raises(EmptyLinks):
        average_annual_growth([])


def test_growth_link_consistency():
    for g in growth_links(random_panel(np.random.default_rng(3), n_years=6)):
        assert g.to_year == g.from_year + 1
        assert abs(g.tfp_growth - g.output_growth / g.input_growth) <= 1e-12


def test_fixed_base_agrees_with_chain_for_two_years():
    panel = random_panel(np.random.default_rng(9), n_years=2)
    chained = tfp_indices(panel, "chain")
    fixed = tfp_indices(panel, "fixed")
    for a, b in zip(chained, fixed):
        np.testing.assert_allclose(a.values, b.values, rtol=1e-14)


def test_fixed_base_compares_with_first_year():
    panel = random_panel(np.random.default_rng(10), n_years=4)
    _, out, _ = tfp_indices(panel, "fixed")
    assert out[2003] == pytest.approx(oracle_link(panel, "output", 2000, 2003), rel=1e-13)


panel_seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=120, deadline=None)
@given(panel_seeds, st.integers(1, 4), st.integers(1, 4))
def test_links_match_oracle(seed, n_in, n_out):
    panel = random_panel(np.random.default_rng(seed), n_in, n_out, 3)
    for t0, t1 in ((2000, 2001), (2001, 2002)):
        assert tornqvist_output_link(panel, t0, t1) == pytest.approx(oracle_link(panel, "output", t0, t1), rel=1e-12)
        assert tornqvist_input_link(panel, t0, t1) == pytest.approx(oracle_link(panel, "input", t0, t1), rel=1e-12)


@settings(max_examples=120, deadline=None)
@given(panel_seeds, st.floats(0.01, 100.0))
def test_price_scale_invariance(seed, c):
    panel = random_panel(np.random.default_rng(seed))
    scaled = panel.scaled(price=c)
    for a, b in zip(growth_links(panel), growth_links(scaled)):
        assert b.output_growth == pytest.approx(a.output_growth, rel=1e-12)
        assert b.input_growth == pytest.approx(a.input_growth, rel=1e-12)


@settings(max_examples=120, deadline=None)
@given(panel_seeds, st.floats(0.01, 100.0), st.sampled_from(["input", "output"]))
def test_quantity_scale_homogeneity(seed, c, kind):
    panel = random_panel(np.random.default_rng(seed), n_years=2)
    q = panel.quantity.copy()
    rows = panel.rows(kind)
    q[rows, 1] *= c
    scaled = PriceQuantityPanel.from_arrays(panel.items, panel.years, panel.price, q)
    link = tornqvist_input_link if kind == "input" else tornqvist_output_link
    assert link(scaled, 2000, 2001) == pytest.approx(c * link(panel, 2000, 2001), rel=1e-12)


@settings(max_examples=120, deadline=None)
@given(panel_seeds)
def test_identity_and_chain_consistency(seed):
    rng = np.random.default_rng(seed)
    panel = random_panel(rng, n_years=3)
    q = np.repeat(panel.quantity[:, :1], 3, axis=1)
    flat = PriceQuantityPanel.from_arrays(panel.items, panel.years, panel.price, q)
    for g in growth_links(flat):
        assert abs(g.output_growth - 1.0) <= 1e-12 and abs(g.input_growth - 1.0) <= 1e-12
    a, b = rng.uniform(0.2, 5.0, size=2)
    assert abs(chain([a, b], 2000)[2002] - a * b) <= 1e-12 * a * b
