# wave_twin/harness/Explain.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Global explanation of a twin through a linear surrogate.

The surrogate regresses each graph's mean predicted target magnitude on the
scenario descriptors (turning ratios, driving behavior, signal summary). For
a linear model the Shapley value of feature j on instance i is exactly
coef_j * (x_ij - mean_j).
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from wave_twin.constants.DTwin import DModule, DTrain, DTwinErr, DTwinMsgText
from wave_twin.graphs.SimGraph import CONTEXT_NAMES, SimGraph
from wave_twin.harness.Metrics import predict
from wave_twin.twins.TwinModel import TwinModel
from wave_twin.utils.TwinErrors import InvalidArgumentError, ShapeError
from wave_twin.utils.TwinLog import TwinLog


@dataclass(frozen=True)
class LinearSurrogate:
    """
    Attributes:
        names (Tuple[str, ...]): Feature names
        coef (np.ndarray): One coefficient per feature; zero for constant features
        intercept (float): Response mean
        means (np.ndarray): Feature means of the fitted design
        r2 (float): Coefficient of determination on the fitted data
        ridge (bool): The rank-deficient fallback was used
    """

    names: Tuple[str, ...]
    coef: np.ndarray
    intercept: float
    means: np.ndarray
    r2: float
    ridge: bool

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.intercept + (np.asarray(x, dtype=np.float64) - self.means) @ self.coef

    def shapley(self, x: np.ndarray) -> np.ndarray:
        """instances x features attributions; each row sums to predict(x) - intercept."""
        return self.coef * (np.asarray(x, dtype=np.float64) - self.means)


def fit_linear_surrogate(
    x: np.ndarray,
    y: np.ndarray,
    names: Optional[Sequence[str]] = None,
    ridge_lambda: float = DTrain.RIDGE_LAMBDA,
    log: Optional[TwinLog] = None,
) -> LinearSurrogate:
    """
    Ordinary least squares on centered data.

    Constant columns are left out of the fit and get coefficient zero. A
    rank-deficient design falls back to ridge regression and logs a warning.

    Raises:
        ShapeError: x is not instances x features matching y
        InvalidArgumentError: No instance
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ShapeError(
            DTwinErr.SHAPE.format(op="surrogate", a=x.shape, b=y.shape), x.shape, y.shape
        )
    if x.shape[0] == 0:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    n, f = x.shape
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(f))
    if len(names) != f:
        raise InvalidArgumentError(f"{len(names)} names for {f} features")
    means = x.mean(axis=0)
    y_mean = float(y.mean())
    xc = x - means
    yc = y - y_mean
    live = np.ptp(x, axis=0) > 0
    coef = np.zeros(f)
    ridge = False
    design = xc[:, live]
    if design.shape[1] > 0:
        rank = int(np.linalg.matrix_rank(design))
        if rank < design.shape[1]:
            ridge = True
            (log or TwinLog(DModule.EXPLAIN)).warning(
                DTwinMsgText.RIDGE.format(rank=rank, cols=design.shape[1], lam=ridge_lambda)
            )
            gram = design.T @ design + ridge_lambda * np.eye(design.shape[1])
            coef[live] = np.linalg.solve(gram, design.T @ yc)
        else:
            coef[live] = np.linalg.lstsq(design, yc, rcond=None)[0]
    resid = yc - xc @ coef
    ss_tot = float(yc @ yc)
    ss_res = float(resid @ resid)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return LinearSurrogate(names, coef, y_mean, means, r2, ridge)


@dataclass(frozen=True)
class Explanation:
    """
    Attributes:
        surrogate (LinearSurrogate): The fitted surrogate
        features (np.ndarray): graphs x features design
        response (np.ndarray): Mean predicted target magnitude per graph
        attributions (np.ndarray): graphs x features Shapley values
        ranking (List[Tuple[str, float, float]]): (feature, mean |value|,
            coefficient), largest first
        lane_groups (Dict[str, float]): Mean predicted target magnitude per
            lane group
    """

    surrogate: LinearSurrogate
    features: np.ndarray
    response: np.ndarray
    attributions: np.ndarray
    ranking: List[Tuple[str, float, float]]
    lane_groups: Dict[str, float]


def rank_attributions(
    surrogate: LinearSurrogate, attributions: np.ndarray
) -> List[Tuple[str, float, float]]:
    magnitude = np.abs(attributions).mean(axis=0)
    # stable: ties keep feature order
    order = np.argsort(-magnitude, kind="stable")
    return [(surrogate.names[j], float(magnitude[j]), float(surrogate.coef[j])) for j in order]


def explain_linear(
    model: TwinModel,
    graphs: Sequence[SimGraph],
    log: Optional[TwinLog] = None,
) -> Explanation:
    """
    Fit the surrogate on a twin's reconstructions and rank the features.

    Raises:
        InvalidArgumentError: No graph, or no graph with a physical target lane
    """
    if not graphs:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    log = log or TwinLog(DModule.EXPLAIN)
    preds = predict(model, graphs)
    features, response = [], []
    by_group: Dict[str, List[float]] = {}
    for pred, g in zip(preds, graphs):
        rows = g.metric_rows()
        if not rows.any():
            continue
        features.append(g.context())
        response.append(float(pred[rows].mean()))
        tags = g.groups()
        for slot in np.flatnonzero(rows):
            by_group.setdefault(tags[slot], []).append(float(pred[slot].mean()))
    if not features:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    x = np.array(features)
    y = np.array(response)
    surrogate = fit_linear_surrogate(x, y, CONTEXT_NAMES, log=log)
    attributions = surrogate.shapley(x)
    return Explanation(
        surrogate=surrogate,
        features=x,
        response=y,
        attributions=attributions,
        ranking=rank_attributions(surrogate, attributions),
        lane_groups={k: float(np.mean(v)) for k, v in sorted(by_group.items())},
    )


def write_attributions(explanation: Explanation, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "feature", "mean_abs_shap", "coef"])
        for i, (name, value, coef) in enumerate(explanation.ranking, start=1):
            writer.writerow([i, name, repr(value), repr(coef)])
