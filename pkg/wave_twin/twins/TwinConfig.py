# wave_twin/twins/TwinConfig.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from wave_twin.constants.DTwin import DTrain, DTwin, DTwinErr, DVariant
from wave_twin.graphs.GraphTemplate import TemplateKind
from wave_twin.utils.TwinErrors import ConfigError


class TwinKind(str, Enum):
    EXT = "ext"
    INF = "inf"

    @property
    def template(self) -> TemplateKind:
        return TemplateKind.EXIT if self == TwinKind.EXT else TemplateKind.INFLOW


class Encoder(str, Enum):
    GAT = "gat"
    GCN = "gcn"
    SAGE = "sage"


VARIANTS: Dict[str, Dict[str, Any]] = {
    DVariant.GATCONV_EXT: {"kind": TwinKind.EXT, "encoder": Encoder.GAT},
    DVariant.GATCONV_INF: {"kind": TwinKind.INF, "encoder": Encoder.GAT},
    DVariant.SAGECONV_EXT: {"kind": TwinKind.EXT, "encoder": Encoder.SAGE},
    DVariant.GCNCONV_EXT: {"kind": TwinKind.EXT, "encoder": Encoder.GCN},
    DVariant.GATCONV_ABLATED: {
        "kind": TwinKind.EXT,
        "encoder": Encoder.GAT,
        "use_self_attention": False,
    },
}


def load_json(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Raises:
        ConfigError: Unreadable file or not a JSON object
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as e:
        raise ConfigError(DTwinErr.CONFIG.format(detail=f"{path}: {e}")) from e
    if not isinstance(data, dict):
        raise ConfigError(DTwinErr.CONFIG.format(detail=f"{path} is not a JSON object"))
    return data


class TwinConfig(BaseModel):
    """
    Architecture of one digital twin.

    Exit twins use one encoder layer. Inflow twins use two GAT layers, the
    first concatenating its heads and the second averaging them.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: TwinKind = TwinKind.EXT
    encoder: Encoder = Encoder.GAT
    use_self_attention: bool = True
    sa_projections: bool = True
    hidden: int = Field(DTrain.HIDDEN, ge=1)
    gat_heads: int = Field(DTrain.HEADS, ge=1)
    gat_layers: Optional[int] = None
    dropout: float = Field(DTrain.DROPOUT, ge=0.0, lt=1.0)
    w: int = Field(DTwin.W, ge=1)
    sa_dim: int = Field(DTrain.SA_DIM, ge=1)
    sa_heads: int = Field(DTrain.SA_HEADS, ge=1)
    edge_proj_dim: int = Field(DTrain.EDGE_PROJ_DIM, ge=1)
    leaky_slope: Optional[float] = None
    strict: bool = False
    seed: int = 0
    variant: Optional[str] = None

    @model_validator(mode="after")
    def _check(self) -> "TwinConfig":
        if self.kind == TwinKind.INF and self.encoder != Encoder.GAT:
            raise ValueError(f"inflow twins need the gat encoder, got {self.encoder.value}")
        want = 1 if self.kind == TwinKind.EXT else 2
        if self.gat_layers is not None and self.gat_layers != want:
            raise ValueError(
                f"{self.kind.value} twins use {want} encoder layer(s), got {self.gat_layers}"
            )
        if self.variant is not None and self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant}")
        return self

    @property
    def layers(self) -> int:
        return 1 if self.kind == TwinKind.EXT else 2

    @property
    def template(self) -> TemplateKind:
        return self.kind.template

    @classmethod
    def load(cls, data: Dict[str, Any]) -> "TwinConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(DTwinErr.CONFIG.format(detail=e)) from e

    @classmethod
    def for_variant(cls, name: str, **overrides: Any) -> "TwinConfig":
        """
        A variant's configuration with optional field overrides.

        Raises:
            ConfigError: Unknown variant or invalid override
        """
        if name not in VARIANTS:
            raise ConfigError(
                DTwinErr.CONFIG.format(
                    detail=f"unknown variant {name}, expected one of {', '.join(DVariant.ALL)}"
                )
            )
        data: Dict[str, Any] = dict(VARIANTS[name])
        data.update(overrides)
        data["variant"] = name
        return cls.load(data)


class TrainConfig(BaseModel):
    """
    Optimizer and loop settings.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    lr: float = Field(DTrain.LR, ge=0.0)
    beta1: float = DTrain.BETA1
    beta2: float = DTrain.BETA2
    eps: float = DTrain.EPS
    max_epochs: int = Field(DTrain.MAX_EPOCHS, ge=1)
    max_steps: Optional[int] = Field(None, ge=1)
    batch_size: int = Field(DTrain.BATCH_SIZE, ge=1)
    patience: int = Field(DTrain.PATIENCE, ge=1)
    min_delta: float = Field(DTrain.MIN_DELTA, ge=0.0)
    split: Tuple[float, float, float] = DTrain.SPLIT
    seed: int = 0
    deterministic: bool = True
    dtype: Literal["float32", "float64"] = DTrain.DTYPE  # type: ignore[assignment]

    @model_validator(mode="after")
    def _check(self) -> "TrainConfig":
        if any(f < 0 for f in self.split) or abs(sum(self.split) - 1.0) > 1e-9:
            raise ValueError(f"split fractions {self.split} must be non-negative and sum to 1")
        return self

    @classmethod
    def load(cls, data: Dict[str, Any]) -> "TrainConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise ConfigError(DTwinErr.CONFIG.format(detail=e)) from e
