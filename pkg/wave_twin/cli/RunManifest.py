# wave_twin/cli/RunManifest.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

from wave_twin.constants.DTwin import DTwin
from wave_twin.utils.TwinErrors import ConfigError

MANIFEST = "manifest.json"


@dataclass
class RunManifest:
    """
    Record of one command run, written once into its output directory.

    Attributes:
        command (str): Sub-command name
        config (Dict[str, Any]): Effective configuration after flag overrides
        seed (int): Master seed
        artifacts (Dict[str, str]): Artifact name to file name in the run directory
        version (str): Tool version
        started (float): Start time, seconds since the epoch
        wall_clock_s (float): Run duration
    """

    command: str
    config: Dict[str, Any]
    seed: int
    artifacts: Dict[str, str] = field(default_factory=dict)
    version: str = DTwin.VERSION
    started: float = field(default_factory=time.time)
    wall_clock_s: float = 0.0

    def add(self, name: str, path: Union[str, Path]) -> Path:
        path = Path(path)
        self.artifacts[name] = path.name
        return path

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "artifacts": dict(sorted(self.artifacts.items())),
            "version": self.version,
            "started": self.started,
            "wall_clock_s": self.wall_clock_s,
        }

    def write(self, out_dir: Union[str, Path]) -> Path:
        """Stamp the wall clock and write manifest.json, replacing any earlier one."""
        self.wall_clock_s = time.time() - self.started
        path = Path(out_dir) / MANIFEST
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def read(cls, out_dir: Union[str, Path]) -> "RunManifest":
        """
        Raises:
            ConfigError: Missing or malformed manifest
        """
        path = Path(out_dir) / MANIFEST
        try:
            data = json.loads(path.read_text())
            return cls(**data)
        except (OSError, ValueError, TypeError) as e:
            raise ConfigError(f"bad run manifest {path}: {e}") from e
