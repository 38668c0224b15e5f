# wave_twin/harness/Latents.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import pdist
from scipy.stats import spearmanr

from wave_twin.constants.DTwin import DTrain, DTwinErr
from wave_twin.graphs.GraphBatch import GraphBatch
from wave_twin.graphs.SimGraph import SimGraph
from wave_twin.ndiff.Tensor import no_grad
from wave_twin.twins.TwinModel import TwinModel
from wave_twin.utils.TwinErrors import InvalidArgumentError

PCA_COMPONENTS = 2
MAX_DISTANCE_ROWS = 1000


@dataclass(frozen=True)
class LatentTable:
    """
    Encoder outputs of the physical lane slots, one row per (graph, slot).

    Attributes:
        graph_ids (np.ndarray): Dataset position of each row's graph
        slots (np.ndarray): Template slot of each row
        groups (Tuple[str, ...]): Lane-group tag of each row
        values (np.ndarray): rows x z latents
    """

    graph_ids: np.ndarray
    slots: np.ndarray
    groups: Tuple[str, ...]
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.groups)

    def group_means(self) -> Mapping[str, np.ndarray]:
        tags = np.array(self.groups)
        return {g: self.values[tags == g].mean(axis=0) for g in sorted(set(self.groups))}


def export_latents(
    model: TwinModel,
    graphs: Sequence[SimGraph],
    grouping: Optional[Sequence[str]] = None,
    batch_size: int = DTrain.BATCH_SIZE,
) -> LatentTable:
    """
    Collect encoder-output latents for every non-dummy slot.

    Args:
        model (TwinModel): Trained twin
        graphs (Sequence[SimGraph]): Graphs to encode
        grouping (Optional[Sequence[str]]): Group tag per template slot,
            the template's lane groups by default

    Raises:
        InvalidArgumentError: No graph given, or a grouping of the wrong length
    """
    if not graphs:
        raise InvalidArgumentError(DTwinErr.EMPTY_SPLIT)
    tags = tuple(grouping) if grouping is not None else graphs[0].groups()
    if len(tags) != graphs[0].n_nodes:
        raise InvalidArgumentError(f"grouping has {len(tags)} tags for {graphs[0].n_nodes} slots")
    ids: List[int] = []
    slots: List[int] = []
    groups: List[str] = []
    values: List[np.ndarray] = []
    mode = model.training
    model.eval()
    try:
        with no_grad():
            for start in range(0, len(graphs), batch_size):
                batch = GraphBatch.collate(graphs[start : start + batch_size])
                model.forward(batch)
                for b, latent in enumerate(batch.split(model.last_latents)):
                    g = batch.graphs[b]
                    for slot in np.flatnonzero(~g.dummy_mask):
                        ids.append(start + b)
                        slots.append(int(slot))
                        groups.append(tags[slot])
                        values.append(latent[slot])
    finally:
        model.train(mode)
    width = model.config.hidden
    return LatentTable(
        graph_ids=np.array(ids, dtype=np.int64),
        slots=np.array(slots, dtype=np.int64),
        groups=tuple(groups),
        values=np.array(values).reshape(-1, width),
    )


def pca_project(
    values: np.ndarray, components: int = PCA_COMPONENTS
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Principal-component projection via SVD of the centered matrix.

    Each axis is signed so its largest-magnitude loading is positive.
    Missing components (fewer rows or columns than requested) are zero.

    Returns:
        Tuple[np.ndarray, np.ndarray]: rows x components projection and the
        explained-variance ratio per component
    """
    x = np.asarray(values, dtype=np.float64)
    rows = x.shape[0]
    proj = np.zeros((rows, components))
    ratio = np.zeros(components)
    if rows == 0:
        return proj, ratio
    centered = x - x.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    k = min(components, vt.shape[0])
    axes = vt[:k]
    signs = np.sign(axes[np.arange(k), np.argmax(np.abs(axes), axis=1)])
    signs[signs == 0] = 1.0
    axes = axes * signs[:, None]
    proj[:, :k] = centered @ axes.T
    var = s * s
    if var.sum() > 0:
        ratio[:k] = var[:k] / var.sum()
    return proj, ratio


def distance_rank_correlation(
    full: np.ndarray, projected: np.ndarray, max_rows: int = MAX_DISTANCE_ROWS
) -> float:
    """
    Spearman correlation between the pairwise distances of two embeddings.

    Larger tables are thinned to max_rows evenly spaced rows.
    """
    full = np.asarray(full, dtype=np.float64)
    projected = np.asarray(projected, dtype=np.float64)
    if full.shape[0] > max_rows:
        keep = np.linspace(0, full.shape[0] - 1, max_rows).astype(np.int64)
        full, projected = full[keep], projected[keep]
    rho = spearmanr(pdist(full), pdist(projected)).correlation
    return float(rho)


def write_latents(table: LatentTable, path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        dims = [f"z{i}" for i in range(table.values.shape[1])]
        writer.writerow(["graph", "slot", "group"] + dims)
        for i in range(len(table)):
            writer.writerow(
                [int(table.graph_ids[i]), int(table.slots[i]), table.groups[i]]
                + [repr(float(v)) for v in table.values[i]]
            )


def write_projection(
    table: LatentTable, projection: np.ndarray, path: Union[str, Path]
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        pcs = [f"pc{i + 1}" for i in range(projection.shape[1])]
        writer.writerow(["graph", "slot", "group"] + pcs)
        for i in range(len(table)):
            writer.writerow(
                [int(table.graph_ids[i]), int(table.slots[i]), table.groups[i]]
                + [repr(float(v)) for v in projection[i]]
            )
