"""Tornqvist-Theil output, input and TFP indices.

Each adjacent pair of years gives a link

    ln(Q_t / Q_{t-1}) = sum_k 0.5 * (s_{k,t} + s_{k,t-1}) * ln(q_{k,t} / q_{k,t-1})

with revenue shares for outputs and cost shares for inputs. TFP growth is
the output link divided by the input link, and links are chained into an
index with value 1 in the base year.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from agprice.data_model import IndexKind, IndexSeries, Kind, PriceQuantityPanel, shares_from_panel
from agprice.errors import EmptyLinks, NonPositiveGrowth, UndefinedRatio, YearPairInvalid


@dataclass(frozen=True)
class GrowthLink:
    from_year: int
    to_year: int
    output_growth: float
    input_growth: float
    tfp_growth: float


def _log_link(panel: PriceQuantityPanel, kind: Kind, t_prev: int, t: int, *, adjacent: bool = True) -> float:
    a = panel.year_index(t_prev)
    b = panel.year_index(t)
    if adjacent and b != a + 1:
        raise YearPairInvalid(f"{t_prev} -> {t} is not an adjacent pair in {panel.years}")
    if a == b:
        raise YearPairInvalid(f"cannot link year {t} to itself")
    weights = 0.5 * (shares_from_panel(panel, t_prev, kind).values + shares_from_panel(panel, t, kind).values)
    rows = panel.rows(kind)
    total = 0.0
    for k, wgt in zip(rows, weights):
        if wgt == 0.0:
            continue
        q0, q1 = panel.quantity[k, a], panel.quantity[k, b]
        if q0 == 0.0 or q1 == 0.0:
            raise UndefinedRatio(
                f"{panel.items[k].name!r} has zero quantity in {t_prev} or {t} but a positive share weight"
            )
        total += wgt * math.log(q1 / q0)
    return total


def tornqvist_output_link(panel: PriceQuantityPanel, t_prev: int, t: int) -> float:
    """Output quantity growth from ``t_prev`` to ``t`` (revenue-share weights)."""
    return math.exp(_log_link(panel, Kind.OUTPUT, t_prev, t))


def tornqvist_input_link(panel: PriceQuantityPanel, t_prev: int, t: int) -> float:
    """Input quantity growth from ``t_prev`` to ``t`` (cost-share weights)."""
    return math.exp(_log_link(panel, Kind.INPUT, t_prev, t))


def tfp_link(output_growth: float, input_growth: float) -> float:
    if not (output_growth > 0.0 and input_growth > 0.0):
        raise NonPositiveGrowth(f"growth ratios must be > 0, got {output_growth!r}, {input_growth!r}")
    return output_growth / input_growth


def growth_links(panel: PriceQuantityPanel) -> list[GrowthLink]:
    links = []
    for t_prev, t in zip(panel.years, panel.years[1:]):
        out = tornqvist_output_link(panel, t_prev, t)
        inp = tornqvist_input_link(panel, t_prev, t)
        links.append(GrowthLink(t_prev, t, out, inp, tfp_link(out, inp)))
    return links


def chain(
    links: Sequence[float],
    base_year: int,
    years: Sequence[int] | None = None,
    kind: IndexKind | str = IndexKind.TFP,
) -> IndexSeries:
    """Cumulative product of links, anchored at 1 in ``base_year``.

    ``years`` labels the series (base year first); it defaults to consecutive
    calendar years. An empty link list gives the one-point series.
    """
    links = [float(x) for x in links]
    if any(not (x > 0.0) for x in links):
        raise NonPositiveGrowth(f"links must be > 0, got {links}")
    if years is None:
        years = [base_year + k for k in range(len(links) + 1)]
    years = list(years)
    if len(years) != len(links) + 1 or years[0] != base_year:
        raise YearPairInvalid("years must start at the base year and number one more than the links")
    values = [1.0]
    for x in links:
        values.append(values[-1] * x)
    return IndexSeries(base_year, tuple(years), np.array(values), kind)


def average_annual_growth(links: Sequence[float], method: str = "arithmetic") -> float:
    """Mean of a column of annual link values.

    The arithmetic mean is the reporting convention; ``method="geometric"``
    gives the compound-rate alternative.
    """
    links = [float(x) for x in links]
    if not links:
        raise EmptyLinks("cannot average an empty list of links")
    if method == "arithmetic":
        return math.fsum(links) / len(links)
    if method == "geometric":
        if any(x <= 0.0 for x in links):
            raise NonPositiveGrowth("geometric mean needs positive links")
        return math.exp(math.fsum(math.log(x) for x in links) / len(links))
    raise ValueError(f"unknown averaging method {method!r}")


def tfp_indices(
    panel: PriceQuantityPanel, mode: str = "chain"
) -> tuple[IndexSeries, IndexSeries, IndexSeries]:
    """Input, output and TFP index series over the panel's years.

    ``mode="chain"`` multiplies adjacent-year links. ``mode="fixed"`` compares
    every year directly with the first year.
    """
    base = panel.years[0]
    if mode == "chain":
        links = growth_links(panel)
        return (
            chain([g.input_growth for g in links], base, panel.years, IndexKind.INPUT),
            chain([g.output_growth for g in links], base, panel.years, IndexKind.OUTPUT),
            chain([g.tfp_growth for g in links], base, panel.years, IndexKind.TFP),
        )
    if mode == "fixed":
        inp, out = [1.0], [1.0]
        for t in panel.years[1:]:
            inp.append(math.exp(_log_link(panel, Kind.INPUT, base, t, adjacent=False)))
            out.append(math.exp(_log_link(panel, Kind.OUTPUT, base, t, adjacent=False)))
        tfp = [o / i for o, i in zip(out, inp)]
        return (
            IndexSeries(base, panel.years, np.array(inp), IndexKind.INPUT),
            IndexSeries(base, panel.years, np.array(out), IndexKind.OUTPUT),
            IndexSeries(base, panel.years, np.array(tfp), IndexKind.TFP),
        )
    raise ValueError(f"unknown index mode {mode!r}")
