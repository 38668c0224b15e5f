# wave_twin/harness/Trainer.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from wave_twin.constants.DTwin import DModule, DTwin, DTwinErr, DTwinMsgText
from wave_twin.graphs.GraphBatch import GraphBatch
from wave_twin.graphs.SimGraph import SimGraph
from wave_twin.ndiff.Adam import Adam, AdamState
from wave_twin.ndiff.Checkpoint import load_checkpoint, save_checkpoint
from wave_twin.ndiff.Tensor import no_grad, precision
from wave_twin.twins.TwinConfig import TrainConfig, TwinConfig
from wave_twin.twins.TwinModel import TwinModel
from wave_twin.utils.TwinErrors import DivergenceError, InvalidArgumentError
from wave_twin.utils.TwinLog import TwinLog

HISTORY_FIELDS = ("epoch", "train_loss", "val_loss")


@dataclass(frozen=True)
class DatasetSplit:
    train: List[int]
    val: List[int]
    test: List[int]

    def part(self, name: str) -> List[int]:
        if name == "all":
            return sorted(self.train + self.val + self.test)
        return list(getattr(self, name))

    def to_dict(self) -> Dict[str, List[int]]:
        return {"train": self.train, "val": self.val, "test": self.test}


def split_dataset(n: int, fractions: Sequence[float], seed: int) -> DatasetSplit:
    """
    Seeded shuffle of range(n) cut into train, validation and test indices.

    The first two parts get floor(fraction * n) graphs, the test part the
    rest. Each part is returned sorted.
    """
    order = np.random.default_rng(seed).permutation(n).tolist()
    n_train = int(fractions[0] * n)
    n_val = int(fractions[1] * n)
    return DatasetSplit(
        train=sorted(order[:n_train]),
        val=sorted(order[n_train : n_train + n_val]),
        test=sorted(order[n_train + n_val :]),
    )


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float


@dataclass
class TrainResult:
    """
    Outcome of a training run. The model holds the best weights on return.
    """

    history: List[EpochStats] = field(default_factory=list)
    best_epoch: int = 0
    best_val: float = float("inf")
    steps: int = 0
    stopped_early: bool = False
    optimizer: Optional[AdamState] = None


def dataset_loss(model: TwinModel, graphs: Sequence[SimGraph], batch_size: int) -> float:
    """
    Masked MSE over all entries of all graphs, in evaluation mode.

    Raises:
        InvalidArgumentError: If there is no graph
    """
    if not graphs:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    mode = model.training
    model.eval()
    total, count = 0.0, 0
    try:
        with no_grad():
            for start in range(0, len(graphs), batch_size):
                batch = GraphBatch.collate(graphs[start : start + batch_size])
                n = int(batch.loss_mask.sum())
                if n == 0:
                    continue
                total += model.loss(model.forward(batch), batch).item() * n
                count += n
    finally:
        model.train(mode)
    return total / count if count else 0.0


class Trainer:
    """
    Adam training loop with early stopping on validation loss.

    Validation loss must improve by more than min_delta to reset the
    patience counter. Without validation graphs the training loss is
    monitored instead.
    """

    def __init__(
        self, model: TwinModel, config: TrainConfig, log: Optional[TwinLog] = None
    ) -> None:
        self.model = model
        self.config = config
        self.log = log or TwinLog(DModule.TRAINER)
        self.optimizer = Adam(
            model.parameters(),
            AdamState(lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.eps),
        )

    def _rng(self, *key: int) -> np.random.Generator:
        if self.config.deterministic:
            return np.random.default_rng([self.config.seed, *key])
        return np.random.default_rng()

    def fit(self, train: Sequence[SimGraph], val: Sequence[SimGraph]) -> TrainResult:
        """
        Train in the configured float precision. The model is back in
        float64 on return, whether or not training succeeded.

        Raises:
            InvalidArgumentError: No training graphs
            DivergenceError: NaN or infinite loss or gradient, with epoch and step
        """
        if not train:
            raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
        dtype = np.dtype(self.config.dtype)
        self.model.to(dtype)
        try:
            with precision(dtype):
                return self._fit(train, val)
        finally:
            self.model.to(np.float64)

    def _fit(self, train: Sequence[SimGraph], val: Sequence[SimGraph]) -> TrainResult:
        cfg = self.config
        result = TrainResult(optimizer=self.optimizer.state)
        best_state = self.model.state_dict()
        wait = 0
        dropout_rng = self._rng(2)
        self.model.train()
        for epoch in range(1, cfg.max_epochs + 1):
            order = self._rng(1, epoch).permutation(len(train))
            losses = []
            for start in range(0, len(order), cfg.batch_size):
                if cfg.max_steps is not None and result.steps >= cfg.max_steps:
                    break
                picked = order[start : start + cfg.batch_size]
                batch = GraphBatch.collate([train[i] for i in picked])
                step = result.steps + 1
                loss = self.model.loss(self.model.forward(batch, dropout_rng), batch)
                value = loss.item()
                if not np.isfinite(value):
                    raise DivergenceError(
                        DTwinErr.DIVERGED.format(epoch=epoch, step=step), epoch, step
                    )
                self.optimizer.zero_grad()
                loss.backward()
                try:
                    self.optimizer.step()
                except DivergenceError as e:
                    e.epoch, e.step = epoch, step
                    raise
                result.steps = step
                losses.append(value)
            if not losses:
                break
            train_loss = float(np.mean(losses))
            val_loss = (
                dataset_loss(self.model, val, cfg.batch_size)
                if val
                else dataset_loss(self.model, train, cfg.batch_size)
            )
            result.history.append(EpochStats(epoch, train_loss, val_loss))
            self.log.info(DTwinMsgText.EPOCH.format(epoch=epoch, train=train_loss, val=val_loss))
            if val_loss < result.best_val - cfg.min_delta:
                result.best_val = val_loss
                result.best_epoch = epoch
                best_state = self.model.state_dict()
                wait = 0
            else:
                wait += 1
                if wait >= cfg.patience:
                    result.stopped_early = True
                    self.log.info(DTwinMsgText.EARLY_STOP.format(epoch=epoch, best=result.best_val))
                    break
        self.model.load_state_dict(best_state)
        self.model.eval()
        return result


def write_history(history: Sequence[EpochStats], path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_FIELDS)
        for row in history:
            writer.writerow([row.epoch, repr(row.train_loss), repr(row.val_loss)])


def read_history(path: Union[str, Path]) -> List[EpochStats]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            EpochStats(int(r["epoch"]), float(r["train_loss"]), float(r["val_loss"]))
            for r in csv.DictReader(fh)
        ]


def save_model(
    model: TwinModel,
    path: Union[str, Path],
    train_config: Optional[TrainConfig] = None,
    result: Optional[TrainResult] = None,
) -> None:
    header: Dict[str, Any] = {
        "tool_version": DTwin.VERSION,
        "twin": model.config.model_dump(mode="json"),
        "train": train_config.model_dump(mode="json") if train_config else None,
    }
    if result is not None:
        header.update(
            {
                "steps": result.steps,
                "best_epoch": result.best_epoch,
                "best_val": result.best_val,
                "adam": result.optimizer.hyper() if result.optimizer else None,
            }
        )
    save_checkpoint(path, model.state_dict(), header)


def load_model(
    path: Union[str, Path], log: Optional[TwinLog] = None
) -> Tuple[TwinModel, Dict[str, Any]]:
    """
    Rebuild a twin from a checkpoint written by save_model().

    Raises:
        ConfigError: Unreadable checkpoint or configuration
    """
    params, header = load_checkpoint(path)
    model = TwinModel(TwinConfig.load(header["twin"]), log)
    model.load_state_dict(params)
    model.eval()
    return model, header


def train(
    model: TwinModel,
    graphs: Sequence[SimGraph],
    config: TrainConfig,
    out_dir: Optional[Union[str, Path]] = None,
    log: Optional[TwinLog] = None,
) -> Tuple[TrainResult, DatasetSplit]:
    """
    Split the dataset, fit the model and optionally write its artifacts.

    With out_dir set, writes checkpoint.bin (best weights), history.csv and
    split.json there.

    Raises:
        InvalidArgumentError: Empty dataset or empty training split
        DivergenceError: Training diverged
    """
    if not graphs:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    split = split_dataset(len(graphs), config.split, config.seed)
    trainer = Trainer(model, config, log)
    result = trainer.fit([graphs[i] for i in split.train], [graphs[i] for i in split.val])
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_model(model, out / "checkpoint.bin", config, result)
        write_history(result.history, out / "history.csv")
        (out / "split.json").write_text(json.dumps(split.to_dict()) + "\n")
    return result, split
