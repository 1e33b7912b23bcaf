"""Price-growth decomposition and the Strategic Support Price.

For each factor or product the unit-price growth between a base and a
terminal period is multiplied by its elasticity; the contributions add up to
a net effect, which is bounded and then scales the CACP MSP:

    SSP = MSP * (1 - net effect)

Benchmarks: the C2 + 50% price and policy gaps measured against the target
price.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from agprice.data_model import ItemId
from agprice.errors import (
    EmptyContributions,
    InvalidBounds,
    MissingElasticity,
    NonPositiveCost,
    NonPositiveMsp,
    NonPositivePrice,
    NonPositiveTarget,
    ValidationError,
)

DEFAULT_BOUNDS = (-2.0, 0.8)


def round_half_up(x: float, decimals: int = 0) -> float:
    """Round a float as written in decimal, halves away from zero."""
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def price_growth(base: float, terminal: float) -> float:
    if not base > 0.0:
        raise NonPositivePrice("base", None, f"got {base!r}")
    if not terminal > 0.0:
        raise NonPositivePrice("terminal", None, f"got {terminal!r}")
    return (terminal - base) / base


def contribution(growth: float, elasticity: float) -> float:
    return growth * elasticity


def net_effect(contributions: Iterable[float]) -> float:
    values = [float(c) for c in contributions]
    if not values:
        raise EmptyContributions("net effect needs at least one contribution")
    return math.fsum(values)


def _check_bounds(bounds: Sequence[float]) -> tuple[float, float]:
    lower, upper = (float(b) for b in bounds)
    if not lower < upper:
        raise InvalidBounds(f"lower bound {lower!r} must be below upper bound {upper!r}")
    return lower, upper


def clamp_net_effect(raw: float, bounds: Sequence[float] = DEFAULT_BOUNDS) -> tuple[float, bool]:
    lower, upper = _check_bounds(bounds)
    clamped = min(max(raw, lower), upper)
    return clamped, clamped != raw


def strategic_support_price(msp: float, net_effect_clamped: float) -> int:
    if not msp > 0.0:
        raise NonPositiveMsp(f"MSP must be > 0, got {msp!r}")
    return int(round_half_up(msp * (1.0 - net_effect_clamped)))


def swaminathan_price(cost_c2: float) -> int:
    """C2 cost plus a 50% margin, rounded half-up to whole units."""
    if not cost_c2 > 0.0:
        raise NonPositiveCost(f"C2 cost must be > 0, got {cost_c2!r}")
    return int(round_half_up(1.5 * cost_c2))


def gap_percent(target_price: float, msp: float, base: str = "target") -> float:
    """Shortfall of the MSP below a target price, in percent.

    The default measures it against the target price; ``base="msp"``
    measures the same gap against the MSP instead.
    """
    if not target_price > 0.0:
        raise NonPositiveTarget(f"target price must be > 0, got {target_price!r}")
    if base == "target":
        return (target_price - msp) / target_price * 100.0
    if base == "msp":
        if not msp > 0.0:
            raise NonPositiveMsp(f"MSP must be > 0, got {msp!r}")
        return (target_price - msp) / msp * 100.0
    raise ValueError(f"unknown gap base {base!r}")


@dataclass(frozen=True)
class PriceChange:
    item: ItemId
    base_price: float
    terminal_price: float
    growth: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "growth", price_growth(self.base_price, self.terminal_price))


@dataclass(frozen=True)
class PolicyScenario:
    """Inputs for one crop's SSP evaluation.

    ``net_effect_decimals`` is the precision the net effect is reported at
    before it scales the MSP; ``None`` applies it at full precision.
    """

    crop: str
    changes: tuple[PriceChange, ...]
    elasticities: Mapping[str, float]
    msp_cacp: float
    cost_a2fl: float
    cost_c2: float
    bounds: tuple[float, float] = DEFAULT_BOUNDS
    net_effect_decimals: int | None = 2
    gap_base: str = "target"

    def __post_init__(self) -> None:
        object.__setattr__(self, "changes", tuple(self.changes))
        object.__setattr__(self, "elasticities", dict(self.elasticities))
        object.__setattr__(self, "bounds", _check_bounds(self.bounds))
        if not self.changes:
            raise ValidationError(f"scenario {self.crop!r} lists no price changes")
        names = [c.item.name for c in self.changes]
        if len(set(names)) != len(names):
            raise ValidationError(f"scenario {self.crop!r} repeats an item: {names}")
        for name in names:
            if name not in self.elasticities:
                raise MissingElasticity(f"scenario {self.crop!r}: no elasticity for {name!r}")
        if not self.msp_cacp > 0.0:
            raise NonPositiveMsp(f"scenario {self.crop!r}: MSP must be > 0")
        if not (self.cost_c2 > 0.0 and self.cost_a2fl > 0.0):
            raise NonPositiveCost(f"scenario {self.crop!r}: costs must be > 0")

    @classmethod
    def from_dict(cls, d: Mapping) -> PolicyScenario:
        try:
            items = d["items"]
            changes, elasticities = [], {}
            for it in items:
                changes.append(
                    PriceChange(ItemId(it["name"], it.get("kind", "input")), float(it["base_price"]), float(it["terminal_price"]))
                )
                if "elasticity" in it:
                    elasticities[it["name"]] = float(it["elasticity"])
            return cls(
                crop=str(d["crop"]),
                changes=tuple(changes),
                elasticities=elasticities,
                msp_cacp=float(d["msp_cacp"]),
                cost_a2fl=float(d["cost_a2fl"]),
                cost_c2=float(d["cost_c2"]),
                bounds=tuple(d.get("bounds", DEFAULT_BOUNDS)),
                net_effect_decimals=d.get("net_effect_decimals", 2),
                gap_base=d.get("gap_base", "target"),
            )
        except KeyError as exc:
            raise ValidationError(f"scenario is missing required key {exc}") from None

    def to_dict(self) -> dict:
        return {
            "crop": self.crop,
            "msp_cacp": self.msp_cacp,
            "cost_a2fl": self.cost_a2fl,
            "cost_c2": self.cost_c2,
            "bounds": list(self.bounds),
            "net_effect_decimals": self.net_effect_decimals,
            "gap_base": self.gap_base,
            "items": [
                {
                    "name": c.item.name,
                    "kind": c.item.kind.value,
                    "base_price": c.base_price,
                    "terminal_price": c.terminal_price,
                    "elasticity": self.elasticities[c.item.name],
                }
                for c in self.changes
            ],
        }


@dataclass(frozen=True)
class SspResult:
    crop: str
    growth: dict[str, float]
    contributions: dict[str, float]
    net_effect_raw: float
    net_effect_clamped: float
    was_clamped: bool
    net_effect_applied: float
    msp_cacp: float
    cost_a2fl: float
    cost_c2: float
    ssp: int
    swaminathan_price: int
    gap_cacp_vs_swaminathan_pct: float
    gap_cacp_vs_ssp_pct: float

    def to_dict(self) -> dict:
        return {
            "crop": self.crop,
            "growth": dict(self.growth),
            "contributions": dict(self.contributions),
            "net_effect_raw": self.net_effect_raw,
            "net_effect_clamped": self.net_effect_clamped,
            "net_effect_applied": self.net_effect_applied,
            "was_clamped": self.was_clamped,
            "cost_a2fl": self.cost_a2fl,
            "cost_c2": self.cost_c2,
            "msp_cacp": self.msp_cacp,
            "swaminathan_price": self.swaminathan_price,
            "gap_cacp_vs_swaminathan_pct": self.gap_cacp_vs_swaminathan_pct,
            "ssp": self.ssp,
            "gap_cacp_vs_ssp_pct": self.gap_cacp_vs_ssp_pct,
        }


def evaluate_scenario(scenario: PolicyScenario) -> SspResult:
    growth = {c.item.name: c.growth for c in scenario.changes}
    contrib = {name: contribution(g, scenario.elasticities[name]) for name, g in growth.items()}
    raw = net_effect(contrib.values())
    clamped, was_clamped = clamp_net_effect(raw, scenario.bounds)
    applied = clamped
    if scenario.net_effect_decimals is not None:
        applied = min(max(round_half_up(clamped, scenario.net_effect_decimals), scenario.bounds[0]), scenario.bounds[1])
    ssp = strategic_support_price(scenario.msp_cacp, applied)
    swam = swaminathan_price(scenario.cost_c2)
    return SspResult(
        crop=scenario.crop,
        growth=growth,
        contributions=contrib,
        net_effect_raw=raw,
        net_effect_clamped=clamped,
        was_clamped=was_clamped,
        net_effect_applied=applied,
        msp_cacp=scenario.msp_cacp,
        cost_a2fl=scenario.cost_a2fl,
        cost_c2=scenario.cost_c2,
        ssp=ssp,
        swaminathan_price=swam,
        gap_cacp_vs_swaminathan_pct=gap_percent(swam, scenario.msp_cacp, scenario.gap_base),
        gap_cacp_vs_ssp_pct=gap_percent(ssp, scenario.msp_cacp, scenario.gap_base),
    )


def format_table(results: Sequence[SspResult]) -> str:
    """Plain-text comparison of pricing methods, one column per crop."""
    rows = [
        ("Cost A2+FL", lambda r: f"{r.cost_a2fl:,.0f}"),
        ("Cost C2", lambda r: f"{r.cost_c2:,.0f}"),
        ("MSP recommended by CACP", lambda r: f"{r.msp_cacp:,.0f}"),
        ("Swaminathan MSP (C2+50%)", lambda r: f"{r.swaminathan_price:,.0f}"),
        ("Gap: CACP vs Swaminathan (%)", lambda r: f"{r.gap_cacp_vs_swaminathan_pct:.2f}"),
        ("Net effect", lambda r: f"{r.net_effect_applied:.2f}" + (" (bounded)" if r.was_clamped else "")),
        ("Strategic Support Price", lambda r: f"{r.ssp:,.0f}"),
        ("Gap: CACP MSP vs SSP (%)", lambda r: f"{r.gap_cacp_vs_ssp_pct:.2f}"),
    ]
    label_w = max(len(label) for label, _ in rows)
    cols = [r.crop for r in results]
    col_w = max([12] + [len(c) for c in cols])
    lines = ["Particulars".ljust(label_w) + "".join(c.rjust(col_w + 2) for c in cols)]
    lines.append("-" * len(lines[0]))
    for label, fmt in rows:
        lines.append(label.ljust(label_w) + "".join(fmt(r).rjust(col_w + 2) for r in results))
    return "\n".join(lines) + "\n"
