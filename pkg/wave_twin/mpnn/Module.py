# wave_twin/mpnn/Module.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

from typing import Any, Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from wave_twin.constants.DTwin import DTwinErr
from wave_twin.ndiff import Ops
from wave_twin.ndiff.Tensor import Tensor
from wave_twin.utils.TwinErrors import ConfigError, ShapeError


def glorot(
    rng: np.random.Generator, fan_in: int, fan_out: int, shape: Tuple[int, ...]
) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Module:
    """
    Base class for layers and models.

    Parameters are Tensor attributes created with add_param(); sub-modules
    are Module attributes. parameters() walks both with dotted names in
    attribute order.
    """

    def __init__(self) -> None:
        self._params: Dict[str, Tensor] = {}
        self._children: Dict[str, "Module"] = {}
        self.training = True

    def __setattr__(self, name: str, value: object) -> None:
        if isinstance(value, Module) and name != "_children":
            self.__dict__.setdefault("_children", {})[name] = value
        object.__setattr__(self, name, value)

    def add_param(self, name: str, value: np.ndarray) -> Tensor:
        tensor = Tensor(np.array(value, dtype=np.float64), requires_grad=True, name=name)
        self._params[name] = tensor
        object.__setattr__(self, name, tensor)
        return tensor

    def named_modules(self, prefix: str = "") -> Iterator[Tuple[str, "Module"]]:
        yield prefix, self
        for name, child in self._children.items():
            yield from child.named_modules(f"{prefix}{name}.")

    def parameters(self) -> Dict[str, Tensor]:
        out: Dict[str, Tensor] = {}
        for prefix, module in self.named_modules():
            for name, tensor in module._params.items():
                out[f"{prefix}{name}"] = tensor
        return out

    def n_params(self) -> int:
        return sum(p.size for p in self.parameters().values())

    def train(self, mode: bool = True) -> "Module":
        for _, module in self.named_modules():
            module.training = mode
        return self

    def eval(self) -> "Module":
        return self.train(False)

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.zero_grad()

    def to(self, dtype: Any) -> "Module":
        """Cast every parameter to dtype and drop stale gradients."""
        for p in self.parameters().values():
            p.data = p.data.astype(dtype)
            p.zero_grad()
        return self

    def param_dtype(self) -> np.dtype:
        params = list(self.parameters().values())
        return params[0].data.dtype if params else np.dtype(np.float64)

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {k: p.data.copy() for k, p in self.parameters().items()}

    def load_state_dict(self, state: Mapping[str, np.ndarray]) -> None:
        """
        Raises:
            ConfigError: Missing, unexpected or misshapen parameters
        """
        params = self.parameters()
        if set(state) != set(params):
            missing = sorted(set(params) - set(state))
            extra = sorted(set(state) - set(params))
            raise ConfigError(f"checkpoint mismatch: missing {missing}, unexpected {extra}")
        for name, p in params.items():
            value = np.asarray(state[name], dtype=p.data.dtype)
            if value.shape != p.shape:
                raise ShapeError(
                    DTwinErr.SHAPE.format(op=f"load {name}", a=value.shape, b=p.shape),
                    value.shape,
                    p.shape,
                )
            p.data = value.copy()


class Linear(Module):
    """
    y = x W + b over the last axis. Bias starts at zero.
    """

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        rng: np.random.Generator,
        bias: bool = True,
    ) -> None:
        super().__init__()
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.add_param("weight", glorot(rng, in_dim, out_dim, (in_dim, out_dim)))
        self.bias: Optional[Tensor] = None
        if bias:
            self.add_param("bias", np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        out = Ops.matmul(x, self.weight)  # type: ignore[attr-defined]
        if self.bias is not None:
            out = Ops.add(out, self.bias)
        return out
