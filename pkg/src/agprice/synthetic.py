"""Random constraint-satisfying translog systems and data drawn from them.

Used for round-trip checks of the estimator and for demo fixtures.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from agprice.data_model import CostObservation, ShareVector
from agprice.translog import TranslogCoefficients, predict_log_cost, predicted_shares


def random_coefficients(
    rng: np.random.Generator,
    inputs: Sequence[str] = ("labour", "fertiliser", "machine"),
    second_order: float = 0.05,
    cobb_douglas: bool = False,
) -> TranslogCoefficients:
    n = len(inputs)
    alpha_i = rng.dirichlet(np.full(n, 4.0))
    centre = np.eye(n) - np.full((n, n), 1.0 / n)
    if cobb_douglas:
        alpha_ij = np.zeros((n, n))
        alpha_iy = np.zeros(n)
        alpha_yy = 0.0
    else:
        b = rng.normal(scale=second_order, size=(n, n))
        alpha_ij = centre @ (0.5 * (b + b.T)) @ centre
        alpha_ij = 0.5 * (alpha_ij + alpha_ij.T)
        alpha_iy = centre @ rng.normal(scale=second_order / 2, size=n)
        alpha_yy = float(rng.normal(scale=second_order))
    return TranslogCoefficients.from_matrix(
        list(inputs),
        float(rng.normal(1.0, 0.5)),
        alpha_i,
        float(rng.uniform(0.7, 1.2)),
        alpha_ij,
        alpha_yy,
        alpha_iy,
    )


def simulate_observations(
    coeffs: TranslogCoefficients,
    n_obs: int,
    rng: np.random.Generator,
    cost_noise: float = 0.0,
    share_noise: float = 0.0,
    price_spread: float = 0.3,
    output_spread: float = 0.5,
) -> list[CostObservation]:
    """Draw observations at random (w, y); redraws points whose shares leave (0, 1)."""
    n = len(coeffs.inputs)
    out: list[CostObservation] = []
    while len(out) < n_obs:
        w = np.exp(rng.normal(scale=price_spread, size=n))
        y = float(np.exp(rng.normal(scale=output_spread)))
        s = predicted_shares(coeffs, w, y).values.copy()
        if share_noise:
            eps = rng.normal(scale=share_noise, size=n)
            s += eps - eps.mean()
        if np.any(s <= 0.0) or np.any(s >= 1.0):
            continue
        s[-1] = 1.0 - s[:-1].sum()
        cost = float(np.exp(predict_log_cost(coeffs, w, y) + rng.normal(scale=cost_noise)))
        out.append(
            CostObservation(cost, coeffs.inputs, w, y, ShareVector(coeffs.inputs, s), obs_id=str(len(out) + 1))
        )
    return out
