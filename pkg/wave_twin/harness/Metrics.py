# wave_twin/harness/Metrics.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Multi-resolution error metrics and reference predictors.

Errors are measured in vehicles per bucket on the target rows that hold a
physical lane. Coarser resolutions sum consecutive buckets of prediction and
truth alike before the error is taken; a factor that does not divide the
window is applied to the leading floor(w / factor) * factor buckets.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from wave_twin.constants.DTwin import DTrain, DTwinErr
from wave_twin.core.Waveform import rebucket_array
from wave_twin.graphs.GraphBatch import GraphBatch
from wave_twin.graphs.SimGraph import SimGraph
from wave_twin.ndiff.Tensor import no_grad
from wave_twin.twins.TwinModel import TwinModel
from wave_twin.utils.TwinErrors import InvalidArgumentError, ShapeError

ZERO = "zero"
MEAN = "mean"


@dataclass(frozen=True)
class ErrorStats:
    seconds: int
    mae: float
    rmse: float


@dataclass(frozen=True)
class MetricsReport:
    """
    Attributes:
        aggregations (Dict[int, ErrorStats]): Errors keyed by bucket seconds
        val_mse (float): Masked MSE over every non-dummy entry of the
            validation graphs
        val_rmse (float): Target RMSE at the base resolution on the
            validation graphs
        ci95 (float): 1.96 x val_rmse
        graphs (int): Number of evaluated graphs
        lanes (int): Number of evaluated target lanes
        rounded (bool): Predictions were clamped and rounded first
    """

    aggregations: Dict[int, ErrorStats]
    val_mse: float
    val_rmse: float
    ci95: float
    graphs: int
    lanes: int
    rounded: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)

    def mae(self, seconds: int) -> float:
        return self.aggregations[seconds].mae

    def rmse(self, seconds: int) -> float:
        return self.aggregations[seconds].rmse

    def to_dict(self) -> Dict[str, Any]:
        return {
            "aggregations": {
                str(s): {"mae": e.mae, "rmse": e.rmse} for s, e in sorted(self.aggregations.items())
            },
            "val_mse": self.val_mse,
            "val_rmse": self.val_rmse,
            "ci95": self.ci95,
            "graphs": self.graphs,
            "lanes": self.lanes,
            "rounded": self.rounded,
            **self.extra,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricsReport":
        known = {"aggregations", "val_mse", "val_rmse", "ci95", "graphs", "lanes", "rounded"}
        return cls(
            aggregations={
                int(s): ErrorStats(int(s), float(e["mae"]), float(e["rmse"]))
                for s, e in data["aggregations"].items()
            },
            val_mse=float(data["val_mse"]),
            val_rmse=float(data["val_rmse"]),
            ci95=float(data["ci95"]),
            graphs=int(data["graphs"]),
            lanes=int(data["lanes"]),
            rounded=bool(data.get("rounded", False)),
            extra={k: v for k, v in data.items() if k not in known},
        )


def ci95(rmse: float) -> float:
    return DTrain.CI_Z * rmse


def aggregate_errors(
    pred: np.ndarray,
    truth: np.ndarray,
    bucket_seconds: int,
    factors: Sequence[int] = DTrain.AGGREGATIONS,
) -> Dict[int, ErrorStats]:
    """
    MAE and RMSE of lanes x w arrays at several resolutions.

    Raises:
        ShapeError: pred and truth differ in shape
        InvalidArgumentError: No lane to score
    """
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise ShapeError(
            DTwinErr.SHAPE.format(op="metrics", a=pred.shape, b=truth.shape),
            pred.shape,
            truth.shape,
        )
    if pred.ndim != 2 or pred.shape[0] == 0:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    w = pred.shape[1]
    out: Dict[int, ErrorStats] = {}
    for f in factors:
        usable = (w // f) * f
        if usable == 0:
            continue
        diff = rebucket_array(pred[:, :usable], f) - rebucket_array(truth[:, :usable], f)
        out[f * bucket_seconds] = ErrorStats(
            f * bucket_seconds,
            float(np.mean(np.abs(diff))),
            float(np.sqrt(np.mean(diff * diff))),
        )
    return out


def _target_rows(preds: Sequence[np.ndarray], graphs: Sequence[SimGraph]) -> Any:
    if len(preds) != len(graphs):
        raise InvalidArgumentError(f"{len(preds)} predictions for {len(graphs)} graphs")
    p, t = [], []
    for pred, g in zip(preds, graphs):
        pred = np.asarray(pred, dtype=np.float64)
        if pred.shape != g.y.shape:
            raise ShapeError(
                DTwinErr.SHAPE.format(op="prediction", a=pred.shape, b=g.y.shape),
                pred.shape,
                g.y.shape,
            )
        rows = g.metric_rows()
        p.append(pred[rows])
        t.append(g.y[rows])
    if not p:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    return np.concatenate(p), np.concatenate(t)


def _masked_mse(preds: Sequence[np.ndarray], graphs: Sequence[SimGraph]) -> float:
    total, count = 0.0, 0
    for pred, g in zip(preds, graphs):
        mask = g.loss_mask()
        d = np.asarray(pred, dtype=np.float64)[mask] - g.y[mask]
        total += float(np.sum(d * d))
        count += int(mask.sum())
    return total / count if count else 0.0


def round_counts(pred: np.ndarray) -> np.ndarray:
    """Clamp at zero and round half to even, as imputed counts are."""
    return np.rint(np.clip(pred, 0.0, None))


def metrics_from_predictions(
    preds: Sequence[np.ndarray],
    graphs: Sequence[SimGraph],
    val_preds: Optional[Sequence[np.ndarray]] = None,
    val_graphs: Optional[Sequence[SimGraph]] = None,
    rounded: bool = False,
    factors: Sequence[int] = DTrain.AGGREGATIONS,
) -> MetricsReport:
    """
    Score full node-matrix predictions against their graphs.

    Without a separate validation set the scored graphs serve as one.

    Raises:
        InvalidArgumentError: Empty split or no target lane
        ShapeError: A prediction does not match its graph
    """
    if not graphs:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    if val_graphs is None or val_preds is None:
        val_preds, val_graphs = preds, graphs
    if rounded:
        preds = [round_counts(p) for p in preds]
        val_preds = [round_counts(p) for p in val_preds]
    bucket_seconds = graphs[0].bucket_seconds
    pred, truth = _target_rows(preds, graphs)
    vpred, vtruth = _target_rows(val_preds, val_graphs)
    aggregations = aggregate_errors(pred, truth, bucket_seconds, factors)
    val_rmse = aggregate_errors(vpred, vtruth, bucket_seconds, (1,))[bucket_seconds].rmse
    return MetricsReport(
        aggregations=aggregations,
        val_mse=_masked_mse(val_preds, val_graphs),
        val_rmse=val_rmse,
        ci95=ci95(val_rmse),
        graphs=len(graphs),
        lanes=int(pred.shape[0]),
        rounded=rounded,
    )


def predict(
    model: TwinModel, graphs: Sequence[SimGraph], batch_size: int = DTrain.BATCH_SIZE
) -> List[np.ndarray]:
    """Reconstructions of every graph in evaluation mode, N x w each."""
    mode = model.training
    model.eval()
    out: List[np.ndarray] = []
    try:
        with no_grad():
            for start in range(0, len(graphs), batch_size):
                batch = GraphBatch.collate(graphs[start : start + batch_size])
                out.extend(batch.split(model.forward(batch).data))
    finally:
        model.train(mode)
    return out


def evaluate(
    model: TwinModel,
    graphs: Sequence[SimGraph],
    val_graphs: Optional[Sequence[SimGraph]] = None,
    rounded: bool = False,
    batch_size: int = DTrain.BATCH_SIZE,
) -> MetricsReport:
    """
    Score a trained twin on raw float reconstructions of the target rows.

    Raises:
        InvalidArgumentError: Empty split
    """
    if not graphs:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    preds = predict(model, graphs, batch_size)
    val_preds = predict(model, val_graphs, batch_size) if val_graphs else None
    return metrics_from_predictions(
        preds, graphs, val_preds, val_graphs if val_graphs else None, rounded=rounded
    )


def zero_predictions(graphs: Sequence[SimGraph]) -> List[np.ndarray]:
    """Observed rows copied, every target row zero."""
    return [np.array(g.x) for g in graphs]


def slot_means(train: Sequence[SimGraph]) -> np.ndarray:
    """
    Per-slot mean count over the training buckets where the slot is physical.

    Slots that are dummy in every training graph get zero.
    """
    n = train[0].n_nodes
    total = np.zeros(n)
    count = np.zeros(n)
    for g in train:
        live = ~g.dummy_mask
        total[live] += g.y[live].sum(axis=1)
        count[live] += g.w
    return np.divide(total, count, out=np.zeros(n), where=count > 0)


def mean_predictions(train: Sequence[SimGraph], graphs: Sequence[SimGraph]) -> List[np.ndarray]:
    """Observed rows copied, target rows filled with their training slot mean."""
    means = slot_means(train)
    out = []
    for g in graphs:
        pred = np.array(g.x)
        rows = g.target_mask
        pred[rows] = means[rows][:, None]
        pred[g.dummy_mask] = 0.0
        out.append(pred)
    return out


def baselines(
    train: Sequence[SimGraph],
    graphs: Sequence[SimGraph],
    val_graphs: Optional[Sequence[SimGraph]] = None,
) -> Dict[str, MetricsReport]:
    """
    Zero and training-mean predictors, scored exactly like a model.

    Raises:
        InvalidArgumentError: Empty training or evaluation split
    """
    if not train or not graphs:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    val = list(val_graphs) if val_graphs else None
    return {
        ZERO: metrics_from_predictions(
            zero_predictions(graphs), graphs, zero_predictions(val) if val else None, val
        ),
        MEAN: metrics_from_predictions(
            mean_predictions(train, graphs),
            graphs,
            mean_predictions(train, val) if val else None,
            val,
        ),
    }
