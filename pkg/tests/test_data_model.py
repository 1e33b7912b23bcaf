import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agprice.data_model import (
    CostObservation,
    IndexSeries,
    ItemId,
    PanelRecord,
    PriceQuantityPanel,
    ShareVector,
    shares_from_panel,
    validate_panel,
)
from agprice.errors import (
    DuplicateCell,
    InvalidShares,
    MissingCell,
    NegativeQuantity,
    NonPositivePrice,
    TooFewYears,
    ValidationError,
    YearNotInPanel,
    ZeroAggregate,
)


def records(price=2.0):
    return [
        PanelRecord("grain", "output", 2019, 10.0, 5.0),
        PanelRecord("grain", "output", 2020, 11.0, 6.0),
        PanelRecord("labour", "input", 2019, price, 3.0),
        PanelRecord("labour", "input", 2020, 2.5, 3.5),
    ]


def test_validate_complete_panel():
    panel = validate_panel(records())
    assert panel.years == (2019, 2020)
    assert [i.name for i in panel.items] == ["grain", "labour"]
    assert panel.price[1, 0] == 2.0
    assert panel.quantity[0, 1] == 6.0


def test_validate_is_idempotent():
    panel = validate_panel(records())
    assert validate_panel(panel) is panel
    assert validate_panel(panel.records()) == panel


def test_zero_price_rejected():
    with pytest.raises(NonPositivePrice) as err:
        validate_panel(records(price=0.0))
    assert (err.value.item, err.value.year) == ("labour", 2019)


def test_single_year_rejected():
    with pytest.raises(TooFewYears):
        validate_panel([PanelRecord("g", "output", 2019, 1.0, 1.0), PanelRecord("l", "input", 2019, 1.0, 1.0)])


@pytest.mark.parametrize(
    "bad, error",
    [
        (PanelRecord("labour", "input", 2020, 2.5, -1.0), NegativeQuantity),
        (PanelRecord("labour", "input", 2019, 2.5, 1.0), DuplicateCell),
    ],
)
def test_cell_errors(bad, error):
    rows = records()
    if error is NegativeQuantity:
        rows[-1] = bad
    else:
        rows.append(bad)
    with pytest.raises(error):
        validate_panel(rows)


def test_missing_cell_names_the_cell():
    with pytest.raises(MissingCell) as err:
        validate_panel(records()[:-1])
    assert (err.value.item, err.value.year) == ("labour", 2020)


def test_year_without_output_rejected():
    rows = records()
    rows[1] = PanelRecord("grain", "output", 2020, 11.0, 0.0)
    with pytest.raises(ZeroAggregate):
        validate_panel(rows)


def test_kind_must_be_consistent():
    rows = records() + [PanelRecord("grain", "input", 2021, 1.0, 1.0)]
    with pytest.raises(ValidationError):
        validate_panel(rows)


def test_single_input_share_is_one():
    panel = validate_panel(records())
    assert shares_from_panel(panel, 2019, "input").as_dict() == {"labour": 1.0}


def test_equal_values_split_evenly():
    items = [ItemId("y", "output"), ItemId("a", "input"), ItemId("b", "input")]
    panel = PriceQuantityPanel.from_arrays(items, [1, 2], [[1, 1], [2, 1], [4, 1]], [[1, 1], [2, 1], [1, 1]])
    assert shares_from_panel(panel, 1, "input").values.tolist() == [0.5, 0.5]


def test_reported_input_shares():
    weights = [48, 16, 12, 12, 8, 3, 2]
    names = ["human", "machine", "animal", "fertiliser", "seed", "ppc", "manure"]
    items = [ItemId("crop", "output")] + [ItemId(n, "input") for n in names]
    price = [[1.0, 1.0]] + [[2.0, 2.0]] * 7
    quantity = [[1.0, 1.0]] + [[w / 2.0, w / 2.0] for w in weights]
    panel = PriceQuantityPanel.from_arrays(items, [2019, 2020], price, quantity)
    shares = shares_from_panel(panel, 2019, "input")
    # the rounded percentages add to 101, so they hold only at 2 decimals
    np.testing.assert_allclose(shares.values, np.array(weights) / 101.0, rtol=1e-14)
    assert np.round(shares.values, 2).tolist() == [0.48, 0.16, 0.12, 0.12, 0.08, 0.03, 0.02]


def test_unknown_year():
    with pytest.raises(YearNotInPanel):
        shares_from_panel(validate_panel(records()), 1999, "input")


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(0.01, 1e4), min_size=1, max_size=8),
    st.floats(1e-3, 1e3),
)
def test_shares_sum_to_one_and_ignore_price_scale(values, scale):
    n = len(values)
    items = [ItemId("y", "output")] + [ItemId(f"x{i}", "input") for i in range(n)]
    price = np.vstack([[1.0, 1.0], np.column_stack([values, values])])
    quantity = np.ones((n + 1, 2))
    panel = PriceQuantityPanel.from_arrays(items, [1, 2], price, quantity)
    s = shares_from_panel(panel, 1, "input")
    assert abs(s.values.sum() - 1.0) <= 1e-9
    scaled = shares_from_panel(panel.scaled(price=scale), 1, "input")
    np.testing.assert_allclose(scaled.values, s.values, rtol=1e-12, atol=1e-15)


def test_share_vector_checks():
    with pytest.raises(InvalidShares):
        ShareVector(("a", "b"), [0.5, 0.6])
    with pytest.raises(InvalidShares):
        ShareVector(("a", "b"), [1.2, -0.2])
    loose = ShareVector(("a", "b"), [1.2, -0.2], bounded=False)
    assert loose.out_of_range == ("a", "b")
    assert ShareVector(("a", "b"), [0.25, 0.75])["b"] == 0.75


def test_cost_observation_share_reconstruction():
    obs = CostObservation.from_quantities(100.0, {"a": 2.0, "b": 5.0}, {"a": 20.0, "b": 12.0}, 3.0)
    assert obs.cost_shares.as_dict() == pytest.approx({"a": 0.4, "b": 0.6}, abs=1e-15)
    obs.check_quantities({"a": 20.0, "b": 12.0})
    with pytest.raises(InvalidShares):
        obs.check_quantities({"a": 20.0, "b": 12.001})
    with pytest.raises(InvalidShares):
        CostObservation.from_quantities(100.0, {"a": 2.0, "b": 5.0}, {"a": 20.0, "b": 13.0}, 3.0)


def test_cost_observation_rejects_bad_values():
    shares = ShareVector(("a", "b"), [0.5, 0.5])
    with pytest.raises(NonPositivePrice):
        CostObservation(1.0, ("a", "b"), [1.0, 0.0], 1.0, shares)
    with pytest.raises(ValidationError):
        CostObservation(1.0, ("a", "b"), [1.0, 1.0], 0.0, shares)
    with pytest.raises(ValidationError):
        CostObservation(-1.0, ("a", "b"), [1.0, 1.0], 1.0, shares)


def test_index_series_base_must_be_one():
    IndexSeries(2010, (2010, 2011), [1.0, 1.2])
    with pytest.raises(ValidationError):
        IndexSeries(2010, (2010, 2011), [1.1, 1.2])
    with pytest.raises(ValidationError):
        IndexSeries(2010, (2010, 2011), [1.0, 0.0])


def test_types_are_immutable():
    panel = validate_panel(records())
    with pytest.raises(ValueError):
        panel.price[0, 0] = 3.0
