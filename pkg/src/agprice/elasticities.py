"""Allen partial elasticities of substitution and input-demand elasticities.

For a translog cost function evaluated at cost shares S:

    sigma_ii = (a_ii + S_i^2 - S_i) / S_i^2
    sigma_ij = (a_ij + S_i S_j) / (S_i S_j)        i != j
    eta_ij   = sigma_ij * S_j

The output column is d ln x_i / d ln y for the derived demand
x_i = S_i C / w_i, i.e. d ln C / d ln y + a_iy / S_i.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from agprice.data_model import CostObservation, ShareVector
from agprice.errors import ValidationError, ZeroShare
from agprice.translog import (
    TranslogCoefficients,
    output_cost_elasticity,
    predict_log_cost,
    predicted_shares,
)


def _check_share(s: float, label: str = "share") -> None:
    if not s > 0.0:
        raise ZeroShare(f"{label} must be > 0, got {s!r}")
    if s > 1.0:
        raise ValidationError(f"{label} must be <= 1, got {s!r}")


def allen_own(alpha_ii: float, share_i: float) -> float:
    _check_share(share_i)
    return (alpha_ii + share_i * share_i - share_i) / (share_i * share_i)


def allen_cross(alpha_ij: float, share_i: float, share_j: float) -> float:
    _check_share(share_i)
    _check_share(share_j)
    return (alpha_ij + share_i * share_j) / (share_i * share_j)


def price_elasticity(sigma_ij: float, share_j: float) -> float:
    _check_share(share_j)
    return sigma_ij * share_j


@dataclass(frozen=True, eq=False)
class ElasticityReport:
    inputs: tuple[str, ...]
    allen: np.ndarray
    price: np.ndarray
    output_elasticity: np.ndarray
    shares_used: ShareVector

    @property
    def own_price_all_negative(self) -> bool:
        return bool(np.all(np.diag(self.price) < 0.0))

    def table(self) -> list[dict]:
        """Rows laid out as factor x (factors..., output)."""
        rows = []
        for i, name in enumerate(self.inputs):
            row = {"factor": name}
            row.update(zip(self.inputs, self.price[i].tolist()))
            row["output"] = float(self.output_elasticity[i])
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "shares_used": self.shares_used.as_dict(),
            "allen": self.allen.tolist(),
            "price": self.price.tolist(),
            "output_elasticity": self.output_elasticity.tolist(),
            "own_price_all_negative": self.own_price_all_negative,
        }


def full_report(
    coeffs: TranslogCoefficients,
    evaluation_shares: ShareVector,
    output_level: float,
    w,
) -> ElasticityReport:
    """Allen, price and output elasticities at the given evaluation point."""
    if evaluation_shares.items != coeffs.inputs:
        raise ValidationError(
            f"evaluation shares cover {evaluation_shares.items}, coefficients cover {coeffs.inputs}"
        )
    s = evaluation_shares.values
    for name, v in zip(coeffs.inputs, s):
        _check_share(float(v), f"share of {name!r}")
    a = coeffs.alpha_ij
    n = len(s)
    allen = np.empty((n, n))
    for i in range(n):
        allen[i, i] = allen_own(a[i, i], s[i])
        for j in range(i + 1, n):
            allen[i, j] = allen[j, i] = allen_cross(a[i, j], s[i], s[j])
    price = allen * s[None, :]
    output = output_cost_elasticity(coeffs, w, output_level) + coeffs.alpha_iy / s
    return ElasticityReport(coeffs.inputs, allen, price, output, evaluation_shares)


def report_at_point(coeffs: TranslogCoefficients, w, y: float) -> ElasticityReport:
    """Elasticities at the shares the cost function itself predicts at (w, y)."""
    return full_report(coeffs, predicted_shares(coeffs, w, y), y, w)


def log_derived_demand(coeffs: TranslogCoefficients, w, y: float) -> np.ndarray:
    """ln x_i = ln S_i + ln C - ln w_i."""
    shares = predicted_shares(coeffs, w, y).values
    if np.any(shares <= 0.0):
        raise ZeroShare(f"predicted shares must be positive, got {shares.tolist()}")
    return np.log(shares) + predict_log_cost(coeffs, w, y) - np.log(np.asarray(w, dtype=float))


def finite_difference_elasticities(
    coeffs: TranslogCoefficients, w, y: float, step: float = 1e-5
) -> tuple[np.ndarray, np.ndarray]:
    """Central differences of ln x_i in log prices and log output.

    Returns ``(price, output)`` matrices with the same layout as
    :class:`ElasticityReport`; independent of the closed-form path.
    """
    w = np.asarray(w, dtype=float)
    n = w.size
    price = np.empty((n, n))
    for j in range(n):
        up, dn = w.copy(), w.copy()
        up[j] *= math.exp(step)
        dn[j] *= math.exp(-step)
        price[:, j] = (log_derived_demand(coeffs, up, y) - log_derived_demand(coeffs, dn, y)) / (2 * step)
    output = (
        log_derived_demand(coeffs, w, y * math.exp(step)) - log_derived_demand(coeffs, w, y * math.exp(-step))
    ) / (2 * step)
    return price, output


def mean_shares(observations: Sequence[CostObservation]) -> ShareVector:
    if not observations:
        raise ValidationError("no observations to average")
    inputs = observations[0].inputs
    s = np.mean([o.cost_shares.values for o in observations], axis=0)
    return ShareVector(inputs, s / s.sum())
