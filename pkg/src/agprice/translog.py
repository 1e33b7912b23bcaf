"""Translog cost function and its joint estimation with cost-share equations.

The cost function is

    ln C = a0 + sum_i a_i ln w_i + a_y ln y + 1/2 sum_ij a_ij ln w_i ln w_j
           + 1/2 a_yy (ln y)^2 + sum_i a_iy ln w_i ln y

with shares S_i = a_i + a_iy ln y + sum_j a_ij ln w_j. Linear homogeneity is
imposed by dividing cost and prices by a numeraire input price, symmetry by
estimating each a_ij once. The stacked system (cost equation plus the
retained share equations) is fitted by iterated feasible GLS or by a single
stacked least-squares pass.
"""

from __future__ import annotations

import enum
import math
import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from agprice.data_model import CostObservation, ShareVector
from agprice.errors import (
    ConstraintViolation,
    InsufficientObservations,
    NonPositiveOutput,
    NonPositivePrice,
    NotConvergedWarning,
    NumeraireNotFound,
    SingularSystem,
    ValidationError,
)

CONSTRAINT_TOL = 1e-10
CONDITION_LIMIT = 1e12


class Estimator(str, enum.Enum):
    ITERATED_FGLS = "iterated_fgls"
    STACKED_RLS = "stacked_rls"


@dataclass(frozen=True, eq=False)
class TranslogCoefficients:
    """Fitted translog parameters for a fixed, ordered list of inputs.

    The symmetric ``alpha_ij`` block is stored once as its upper triangle;
    :attr:`alpha_ij` mirrors it on read, so ``[i, j]`` and ``[j, i]`` are the
    same float. Use :meth:`from_matrix` to build from a full matrix.
    """

    inputs: tuple[str, ...]
    alpha0: float
    alpha_i: np.ndarray
    alpha_y: float
    alpha_ij_upper: np.ndarray
    alpha_yy: float
    alpha_iy: np.ndarray
    numeraire: str

    def __post_init__(self) -> None:
        n = len(self.inputs)
        object.__setattr__(self, "inputs", tuple(self.inputs))
        for name, size in (("alpha_i", n), ("alpha_iy", n), ("alpha_ij_upper", n * (n + 1) // 2)):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (size,):
                raise ValidationError(f"{name} must have {size} entries, got shape {arr.shape}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        for name in ("alpha0", "alpha_y", "alpha_yy"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if n < 2:
            raise ValidationError("a translog cost system needs at least 2 inputs")
        if self.numeraire not in self.inputs:
            raise NumeraireNotFound(f"numeraire {self.numeraire!r} not among inputs {self.inputs}")
        a = self.alpha_ij
        if abs(self.alpha_i.sum() - 1.0) > CONSTRAINT_TOL:
            raise ConstraintViolation(f"alpha_i sum to {self.alpha_i.sum()!r}, not 1")
        if np.max(np.abs(a.sum(axis=1))) > CONSTRAINT_TOL:
            raise ConstraintViolation(f"alpha_ij rows do not sum to 0: {a.sum(axis=1)}")
        if abs(self.alpha_iy.sum()) > CONSTRAINT_TOL:
            raise ConstraintViolation(f"alpha_iy sum to {self.alpha_iy.sum()!r}, not 0")

    @classmethod
    def from_matrix(
        cls,
        inputs: Sequence[str],
        alpha0: float,
        alpha_i,
        alpha_y: float,
        alpha_ij,
        alpha_yy: float,
        alpha_iy,
        numeraire: str | None = None,
    ) -> TranslogCoefficients:
        a = np.asarray(alpha_ij, dtype=float)
        if a.shape != (len(inputs), len(inputs)) or not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
            raise ValidationError("alpha_ij must be a symmetric n x n matrix")
        upper = a[np.triu_indices(len(inputs))]
        return cls(
            tuple(inputs), alpha0, alpha_i, alpha_y, upper, alpha_yy, alpha_iy,
            inputs[-1] if numeraire is None else numeraire,
        )

    @property
    def alpha_ij(self) -> np.ndarray:
        n = len(self.inputs)
        a = np.zeros((n, n))
        iu = np.triu_indices(n)
        a[iu] = self.alpha_ij_upper
        a[(iu[1], iu[0])] = self.alpha_ij_upper
        return a

    def cross(self, i: str, j: str) -> float:
        a, b = sorted((self.inputs.index(i), self.inputs.index(j)))
        n = len(self.inputs)
        return float(self.alpha_ij_upper[a * n - a * (a - 1) // 2 + (b - a)])

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "numeraire": self.numeraire,
            "alpha0": self.alpha0,
            "alpha_i": dict(zip(self.inputs, self.alpha_i.tolist())),
            "alpha_y": self.alpha_y,
            "alpha_ij": {i: dict(zip(self.inputs, row)) for i, row in zip(self.inputs, self.alpha_ij.tolist())},
            "alpha_yy": self.alpha_yy,
            "alpha_iy": dict(zip(self.inputs, self.alpha_iy.tolist())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> TranslogCoefficients:
        try:
            inputs = list(d["inputs"])
            return cls.from_matrix(
                inputs,
                d["alpha0"],
                [d["alpha_i"][i] for i in inputs],
                d["alpha_y"],
                [[d["alpha_ij"][i][j] for j in inputs] for i in inputs],
                d["alpha_yy"],
                [d["alpha_iy"][i] for i in inputs],
                d.get("numeraire", inputs[-1]),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed coefficient document: missing {exc}") from None


@dataclass(frozen=True)
class EstimationOptions:
    max_iterations: int = 100
    convergence_tol: float = 1e-8
    numeraire: str | None = None
    dropped_share_equation: str | None = None
    estimator: Estimator = Estimator.ITERATED_FGLS

    def __post_init__(self) -> None:
        object.__setattr__(self, "estimator", Estimator(self.estimator))
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be positive")
        if not self.convergence_tol > 0.0:
            raise ValidationError("convergence_tol must be positive")


@dataclass(frozen=True)
class FitReport:
    coefficients: TranslogCoefficients
    iterations_used: int
    converged: bool
    residual_variance_per_equation: dict[str, float]
    sample_size: int
    dropped_share_equation: str
    estimator: Estimator
    free_parameters: np.ndarray = field(repr=False)


def _check_point(w, y) -> tuple[np.ndarray, float]:
    w = np.asarray(w, dtype=float)
    if np.any(~(w > 0.0)):
        raise NonPositivePrice("w", None, f"got {w.tolist()}")
    if not y > 0.0:
        raise NonPositiveOutput(f"output level must be > 0, got {y!r}")
    return np.log(w), math.log(y)


def predict_log_cost(coeffs: TranslogCoefficients, w, y: float) -> float:
    lw, ly = _check_point(w, y)
    return float(
        coeffs.alpha0
        + coeffs.alpha_i @ lw
        + coeffs.alpha_y * ly
        + 0.5 * lw @ coeffs.alpha_ij @ lw
        + 0.5 * coeffs.alpha_yy * ly * ly
        + (coeffs.alpha_iy @ lw) * ly
    )


def predicted_shares(coeffs: TranslogCoefficients, w, y: float) -> ShareVector:
    """Cost shares implied by Shephard's lemma; not clipped to [0, 1]."""
    lw, ly = _check_point(w, y)
    s = coeffs.alpha_i + coeffs.alpha_iy * ly + coeffs.alpha_ij @ lw
    return ShareVector(coeffs.inputs, s, bounded=False)


def output_cost_elasticity(coeffs: TranslogCoefficients, w, y: float) -> float:
    """d ln C / d ln y at (w, y)."""
    lw, ly = _check_point(w, y)
    return float(coeffs.alpha_y + coeffs.alpha_yy * ly + coeffs.alpha_iy @ lw)


def normalize_by_numeraire(observations: Sequence[CostObservation], numeraire: str) -> list[CostObservation]:
    """Divide cost and every input price by the numeraire's price, row by row."""
    out = []
    for obs in observations:
        if numeraire not in obs.inputs:
            raise NumeraireNotFound(f"numeraire {numeraire!r} not among inputs {obs.inputs}")
        p = obs.input_prices[obs.inputs.index(numeraire)]
        out.append(
            CostObservation(
                obs.total_cost / p, obs.inputs, obs.input_prices / p, obs.output_level, obs.cost_shares, obs.obs_id
            )
        )
    return out


class _Design:
    """Maps the free (constraint-eliminated) parameters to the stacked system."""

    def __init__(self, inputs: tuple[str, ...], numeraire: str, dropped: str) -> None:
        self.inputs = inputs
        self.k = inputs.index(numeraire)
        self.free = [i for i in range(len(inputs)) if i != self.k]
        m = len(self.free)
        self.m = m
        self.pairs = [(a, b) for a in range(m) for b in range(a, m)]
        self.n_params = 1 + m + 1 + len(self.pairs) + 1 + m
        self.share_eqs = [i for i in range(len(inputs)) if i != inputs.index(dropped)]
        self.eq_names = ["cost"] + [f"share_{inputs[i]}" for i in self.share_eqs]

    def slices(self):
        m, npair = self.m, len(self.pairs)
        return {
            "alpha0": 0,
            "alpha_f": slice(1, 1 + m),
            "alpha_y": 1 + m,
            "pairs": slice(2 + m, 2 + m + npair),
            "alpha_yy": 2 + m + npair,
            "alpha_fy": slice(3 + m + npair, 3 + 2 * m + npair),
        }

    def build(self, obs: Sequence[CostObservation]) -> tuple[np.ndarray, np.ndarray]:
        """Dependent array (T, n_eq) and regressor array (T, n_eq, n_params)."""
        T, m, sl = len(obs), self.m, self.slices()
        logw = np.log(np.array([o.input_prices for o in obs]))
        lw = logw[:, self.free] - logw[:, [self.k]]
        ly = np.log(np.array([o.output_level for o in obs]))
        lc = np.log(np.array([o.total_cost for o in obs])) - logw[:, self.k]
        shares = np.array([o.cost_shares.values for o in obs])

        cost = np.zeros((T, self.n_params))
        cost[:, sl["alpha0"]] = 1.0
        cost[:, sl["alpha_f"]] = lw
        cost[:, sl["alpha_y"]] = ly
        pair_cols = [0.5 * lw[:, a] ** 2 if a == b else lw[:, a] * lw[:, b] for a, b in self.pairs]
        cost[:, sl["pairs"]] = np.column_stack(pair_cols)
        cost[:, sl["alpha_yy"]] = 0.5 * ly**2
        cost[:, sl["alpha_fy"]] = lw * ly[:, None]

        free_share = np.zeros((m, T, self.n_params))
        p0 = sl["pairs"].start
        for f in range(m):
            free_share[f, :, 1 + f] = 1.0
            free_share[f, :, sl["alpha_fy"].start + f] = ly
        for c, (a, b) in enumerate(self.pairs):
            free_share[a, :, p0 + c] += lw[:, b]
            if a != b:
                free_share[b, :, p0 + c] += lw[:, a]

        ys, xs = [lc], [cost]
        for i in self.share_eqs:
            if i == self.k:
                ys.append(shares[:, i] - 1.0)
                xs.append(-free_share.sum(axis=0))
            else:
                ys.append(shares[:, i])
                xs.append(free_share[self.free.index(i)])
        return np.column_stack(ys), np.stack(xs, axis=1)

    def coefficients(self, theta: np.ndarray) -> TranslogCoefficients:
        sl, m, n = self.slices(), self.m, len(self.inputs)
        a_f = theta[sl["alpha_f"]]
        a_fy = theta[sl["alpha_fy"]]
        b = np.zeros((m, m))
        for c, (r, s) in enumerate(self.pairs):
            b[r, s] = b[s, r] = theta[sl["pairs"]][c]
        alpha_i = np.empty(n)
        alpha_iy = np.empty(n)
        alpha_ij = np.empty((n, n))
        alpha_i[self.free] = a_f
        alpha_i[self.k] = 1.0 - a_f.sum()
        alpha_iy[self.free] = a_fy
        alpha_iy[self.k] = -a_fy.sum()
        alpha_ij[np.ix_(self.free, self.free)] = b
        alpha_ij[self.free, self.k] = alpha_ij[self.k, self.free] = -b.sum(axis=1)
        alpha_ij[self.k, self.k] = b.sum()
        return TranslogCoefficients.from_matrix(
            self.inputs, theta[0], alpha_i, theta[sl["alpha_y"]], alpha_ij,
            theta[sl["alpha_yy"]], alpha_iy, self.inputs[self.k],
        )


def _check_rank(X: np.ndarray) -> None:
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0.0):
        raise SingularSystem("a regressor column is identically zero")
    sv = np.linalg.svd(X / norms, compute_uv=False)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > CONDITION_LIMIT:
        raise SingularSystem(f"design matrix condition number {sv[0] / sv[-1]:.3g} exceeds {CONDITION_LIMIT:g}")


def _solve(Y: np.ndarray, X: np.ndarray, sigma: np.ndarray | None) -> np.ndarray:
    T, n_eq, p = X.shape
    if sigma is None:
        yw, xw = Y, X
    else:
        try:
            chol = linalg.cholesky(sigma, lower=True)
        except linalg.LinAlgError:
            raise SingularSystem("residual covariance matrix is not positive definite") from None
        inv_l = linalg.solve_triangular(chol, np.eye(n_eq), lower=True)
        yw = Y @ inv_l.T
        xw = np.einsum("ij,tjp->tip", inv_l, X)
    q, r = np.linalg.qr(xw.reshape(T * n_eq, p))
    return linalg.solve_triangular(r, q.T @ yw.reshape(T * n_eq))


def _residual_cov(Y: np.ndarray, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
    e = Y - X @ theta
    return e.T @ e / Y.shape[0]


def fit(observations: Sequence[CostObservation], options: EstimationOptions | None = None) -> FitReport:
    """Estimate the translog cost system from cost observations.

    Constraints are eliminated before estimation, so the returned
    coefficients satisfy symmetry and homogeneity by construction.
    Iterated FGLS stops when the largest change in any free parameter,
    relative to ``max(|value|, 1)``, falls below ``convergence_tol``, or
    when the residuals vanish (an exact fit has nothing left to reweight).
    """
    options = options or EstimationOptions()
    obs = list(observations)
    if not obs:
        raise InsufficientObservations("no observations supplied")
    inputs = obs[0].inputs
    if len(inputs) < 2:
        raise ValidationError("at least 2 inputs are required")
    if any(o.inputs != inputs for o in obs):
        raise ValidationError("all observations must list the same inputs in the same order")
    numeraire = options.numeraire or inputs[-1]
    if numeraire not in inputs:
        raise NumeraireNotFound(f"numeraire {numeraire!r} not among inputs {inputs}")
    dropped = options.dropped_share_equation or numeraire
    if dropped not in inputs:
        raise ValidationError(f"dropped share equation {dropped!r} is not a modeled input")

    design = _Design(inputs, numeraire, dropped)
    if len(obs) < design.n_params:
        raise InsufficientObservations(
            f"{len(obs)} observations for {design.n_params} free parameters"
        )
    Y, X = design.build(obs)
    _check_rank(X.reshape(-1, design.n_params))

    theta = _solve(Y, X, None)
    iterations, converged = 1, True
    if options.estimator is Estimator.ITERATED_FGLS:
        converged = False
        scale = max(1.0, float(np.mean(Y**2)))
        while True:
            sigma = _residual_cov(Y, X, theta)
            if np.max(np.diag(sigma)) <= 1e-24 * scale:
                converged = True
                break
            if iterations >= options.max_iterations:
                break
            new = _solve(Y, X, sigma)
            iterations += 1
            change = np.max(np.abs(new - theta) / np.maximum(np.abs(theta), 1.0))
            theta = new
            if change < options.convergence_tol:
                converged = True
                break
        if not converged:
            warnings.warn(
                f"iterated FGLS did not converge in {options.max_iterations} iterations",
                NotConvergedWarning,
                stacklevel=2,
            )

    sigma = _residual_cov(Y, X, theta)
    return FitReport(
        coefficients=design.coefficients(theta),
        iterations_used=iterations,
        converged=converged,
        residual_variance_per_equation=dict(zip(design.eq_names, np.diag(sigma).tolist())),
        sample_size=len(obs),
        dropped_share_equation=dropped,
        estimator=options.estimator,
        free_parameters=theta,
    )
