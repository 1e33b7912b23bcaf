"""Validated domain types shared by the computation modules."""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from agprice.errors import (
    DuplicateCell,
    InvalidShares,
    MissingCell,
    NegativeQuantity,
    NonPositiveOutput,
    NonPositivePrice,
    TooFewYears,
    ValidationError,
    YearNotInPanel,
    ZeroAggregate,
)

SHARE_SUM_TOL = 1e-9
SHARE_RECONSTRUCTION_TOL = 1e-6


class Kind(str, enum.Enum):
    INPUT = "input"
    OUTPUT = "output"

    @classmethod
    def parse(cls, value: str | Kind) -> Kind:
        if isinstance(value, Kind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"kind must be 'input' or 'output', got {value!r}") from None


@dataclass(frozen=True)
class ItemId:
    name: str
    kind: Kind

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name.strip():
            raise ValidationError("item name must be a non-empty string")
        object.__setattr__(self, "kind", Kind.parse(self.kind))


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ShareVector:
    """Named fractions summing to one.

    ``bounded=False`` relaxes the [0, 1] range check; it is used for shares
    predicted by a fitted cost function, which may leave the unit interval.
    """

    items: tuple[str, ...]
    values: np.ndarray
    bounded: bool = True

    def __post_init__(self) -> None:
        items = tuple(self.items)
        values = _frozen(self.values)
        if values.shape != (len(items),) or not items:
            raise InvalidShares("share vector needs one value per item")
        if len(set(items)) != len(items):
            raise InvalidShares(f"duplicate item names in share vector: {items}")
        if not np.all(np.isfinite(values)):
            raise InvalidShares("shares must be finite")
        if self.bounded and (np.any(values < 0.0) or np.any(values > 1.0)):
            raise InvalidShares(f"shares outside [0, 1]: {dict(zip(items, values.tolist()))}")
        total = math.fsum(values.tolist())
        if abs(total - 1.0) > SHARE_SUM_TOL:
            raise InvalidShares(f"shares sum to {total!r}, expected 1")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(cls, shares: Mapping[str, float], bounded: bool = True) -> ShareVector:
        return cls(tuple(shares), np.array(list(shares.values()), dtype=float), bounded)

    def __getitem__(self, item: str) -> float:
        try:
            return float(self.values[self.items.index(item)])
        except ValueError:
            raise KeyError(item) from None

    def __len__(self) -> int:
        return len(self.items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ShareVector):
            return NotImplemented
        return self.items == other.items and np.array_equal(self.values, other.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.items, self.values.tolist()))

    @property
    def out_of_range(self) -> tuple[str, ...]:
        """Items whose share lies outside [0, 1]."""
        return tuple(i for i, v in zip(self.items, self.values) if v < 0.0 or v > 1.0)


@dataclass(frozen=True)
class PanelRecord:
    """One unvalidated row of a price/quantity panel."""

    item: str
    kind: str | Kind
    year: int
    price: float
    quantity: float


@dataclass(frozen=True, eq=False)
class PriceQuantityPanel:
    """Prices and quantities for every (item, year) cell.

    ``price`` and ``quantity`` are read-only arrays of shape
    ``(len(items), len(years))``. Build instances through
    :func:`validate_panel` or :meth:`from_arrays`, both of which check the
    invariants.
    """

    items: tuple[ItemId, ...]
    years: tuple[int, ...]
    price: np.ndarray
    quantity: np.ndarray

    @classmethod
    def from_arrays(
        cls,
        items: Sequence[ItemId],
        years: Sequence[int],
        price,
        quantity,
    ) -> PriceQuantityPanel:
        panel = cls(tuple(items), tuple(int(y) for y in years), _frozen(price), _frozen(quantity))
        _check_panel(panel)
        return panel

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PriceQuantityPanel):
            return NotImplemented
        return (
            self.items == other.items
            and self.years == other.years
            and np.array_equal(self.price, other.price)
            and np.array_equal(self.quantity, other.quantity)
        )

    def year_index(self, year: int) -> int:
        try:
            return self.years.index(year)
        except ValueError:
            raise YearNotInPanel(f"year {year} not in panel years {self.years}") from None

    def rows(self, kind: Kind | str) -> list[int]:
        kind = Kind.parse(kind)
        return [k for k, it in enumerate(self.items) if it.kind is kind]

    def names(self, kind: Kind | str) -> tuple[str, ...]:
        return tuple(self.items[k].name for k in self.rows(kind))

    def records(self) -> list[PanelRecord]:
        return [
            PanelRecord(it.name, it.kind, y, float(self.price[k, t]), float(self.quantity[k, t]))
            for k, it in enumerate(self.items)
            for t, y in enumerate(self.years)
        ]

    def scaled(self, *, price: float = 1.0, quantity: float = 1.0) -> PriceQuantityPanel:
        """Copy with every price and/or quantity multiplied by a constant."""
        return PriceQuantityPanel.from_arrays(
            self.items, self.years, self.price * price, self.quantity * quantity
        )


def _check_panel(panel: PriceQuantityPanel) -> None:
    names = [it.name for it in panel.items]
    if len(set(names)) != len(names):
        raise ValidationError(f"item names must be unique, got {names}")
    if len(panel.years) < 2:
        raise TooFewYears(f"panel needs at least 2 years, got {len(panel.years)}")
    if any(b <= a for a, b in zip(panel.years, panel.years[1:])):
        raise ValidationError(f"years must be strictly increasing: {panel.years}")
    shape = (len(panel.items), len(panel.years))
    if panel.price.shape != shape or panel.quantity.shape != shape:
        raise ValidationError(f"price/quantity arrays must have shape {shape}")
    for k, it in enumerate(panel.items):
        for t, y in enumerate(panel.years):
            p, q = panel.price[k, t], panel.quantity[k, t]
            if not math.isfinite(p) or p <= 0.0:
                raise NonPositivePrice(it.name, y, f"got {p!r}")
            if not math.isfinite(q) or q < 0.0:
                raise NegativeQuantity(it.name, y, f"got {q!r}")
    for kind in Kind:
        rows = panel.rows(kind)
        if not rows:
            raise ValidationError(f"panel has no {kind.value} items")
        for t, y in enumerate(panel.years):
            if not np.any(panel.quantity[rows, t] > 0.0):
                raise ZeroAggregate(f"all {kind.value} quantities are zero in {y}")


def validate_panel(raw: Iterable[PanelRecord] | PriceQuantityPanel) -> PriceQuantityPanel:
    """Assemble and check a panel from loose records.

    Items keep their first-seen order; years are sorted. A validated panel
    passed back in is re-checked and returned as an equal panel.
    """
    if isinstance(raw, PriceQuantityPanel):
        _check_panel(raw)
        return raw

    items: dict[str, ItemId] = {}
    cells: dict[tuple[str, int], tuple[float, float]] = {}
    for rec in raw:
        item = ItemId(rec.item, rec.kind)
        seen = items.setdefault(item.name, item)
        if seen.kind is not item.kind:
            raise ValidationError(f"item {item.name!r} declared as both input and output")
        key = (item.name, int(rec.year))
        if key in cells:
            raise DuplicateCell(*key)
        cells[key] = (float(rec.price), float(rec.quantity))

    years = sorted({y for _, y in cells})
    if len(years) < 2:
        raise TooFewYears(f"panel needs at least 2 years, got {len(years)}")
    price = np.empty((len(items), len(years)))
    quantity = np.empty_like(price)
    for k, name in enumerate(items):
        for t, y in enumerate(years):
            if (name, y) not in cells:
                raise MissingCell(name, y)
            price[k, t], quantity[k, t] = cells[name, y]
    return PriceQuantityPanel.from_arrays(list(items.values()), years, price, quantity)


def shares_from_panel(panel: PriceQuantityPanel, year: int, kind: Kind | str) -> ShareVector:
    """Value shares (price times quantity over the kind's total) for one year."""
    kind = Kind.parse(kind)
    t = panel.year_index(year)
    rows = panel.rows(kind)
    values = panel.price[rows, t] * panel.quantity[rows, t]
    total = values.sum()
    if total <= 0.0:
        raise ZeroAggregate(f"all {kind.value} quantities are zero in {year}")
    return ShareVector(panel.names(kind), values / total)


@dataclass(frozen=True, eq=False)
class CostObservation:
    """One row of a translog estimation sample."""

    total_cost: float
    inputs: tuple[str, ...]
    input_prices: np.ndarray
    output_level: float
    cost_shares: ShareVector
    obs_id: str = ""

    def __post_init__(self) -> None:
        inputs = tuple(self.inputs)
        prices = _frozen(self.input_prices)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "input_prices", prices)
        if prices.shape != (len(inputs),):
            raise ValidationError("one price per input is required")
        if not (math.isfinite(self.total_cost) and self.total_cost > 0.0):
            raise ValidationError(f"observation {self.obs_id!r}: total cost must be > 0")
        if not (math.isfinite(self.output_level) and self.output_level > 0.0):
            raise NonPositiveOutput(f"observation {self.obs_id!r}: output level must be > 0")
        for name, p in zip(inputs, prices):
            if not (math.isfinite(p) and p > 0.0):
                raise NonPositivePrice(name, None, f"observation {self.obs_id!r}, got {p!r}")
        if self.cost_shares.items != inputs:
            raise ValidationError(
                f"observation {self.obs_id!r}: share items {self.cost_shares.items} "
                f"do not match inputs {inputs}"
            )

    @classmethod
    def from_quantities(
        cls,
        total_cost: float,
        prices: Mapping[str, float],
        quantities: Mapping[str, float],
        output_level: float,
        obs_id: str = "",
    ) -> CostObservation:
        """Build an observation from input quantities, checking w*x/C against the shares."""
        names = tuple(prices)
        w = np.array([prices[n] for n in names], dtype=float)
        x = np.array([quantities[n] for n in names], dtype=float)
        shares = w * x / total_cost
        if abs(shares.sum() - 1.0) > SHARE_RECONSTRUCTION_TOL:
            raise InvalidShares(
                f"observation {obs_id!r}: input spending {w @ x!r} does not match total cost {total_cost!r}"
            )
        return cls(total_cost, names, w, output_level, ShareVector(names, shares / shares.sum()), obs_id)

    def check_quantities(self, quantities: Mapping[str, float]) -> None:
        """Raise if supplied quantities disagree with the stored shares beyond 1e-6."""
        for name, w in zip(self.inputs, self.input_prices):
            implied = w * quantities[name] / self.total_cost
            if abs(implied - self.cost_shares[name]) > SHARE_RECONSTRUCTION_TOL:
                raise InvalidShares(
                    f"observation {self.obs_id!r}: share of {name!r} is {self.cost_shares[name]!r} "
                    f"but w*x/C gives {implied!r}"
                )


class IndexKind(str, enum.Enum):
    INPUT = "input"
    OUTPUT = "output"
    TFP = "tfp"


@dataclass(frozen=True, eq=False)
class IndexSeries:
    base_year: int
    years: tuple[int, ...]
    values: np.ndarray
    kind: IndexKind = IndexKind.TFP
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        years = tuple(int(y) for y in self.years)
        values = _frozen(self.values)
        object.__setattr__(self, "years", years)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", IndexKind(self.kind))
        if values.shape != (len(years),):
            raise ValidationError("index series needs one value per year")
        if self.base_year not in years:
            raise ValidationError(f"base year {self.base_year} not among {years}")
        if values[years.index(self.base_year)] != 1.0:
            raise ValidationError("index must equal 1 in its base year")
        if not np.all(values > 0.0):
            raise ValidationError("index values must be positive")

    def __getitem__(self, year: int) -> float:
        return float(self.values[self.years.index(year)])

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.years, self.values.tolist()))
