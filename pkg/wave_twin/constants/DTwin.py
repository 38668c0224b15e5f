# wave_twin/constants/DTwin.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

import logging
from typing import Dict, Tuple


# Project globals
class DTwin:
    """
    Global project constants and version information.

    Contains the current version string, the protocol version used by the
    corpus workers and the canonical waveform window settings.
    """

    PROTOCOL_VERSION = 1
    VERSION: str = "0.3.0"

    # Observation window: 80 buckets of 5 seconds
    W: int = 80
    BUCKET_SECONDS: int = 5
    SATURATION: int = 8
    TMC_HORIZON_S: int = 2400


# Environment variables
class DEnv:
    """
    Environment variable names read by the command line tools.
    """

    DETERMINISTIC: str = "WAVE_TWIN_DETERMINISTIC"
    LOGLEVEL: str = "WAVE_TWIN_LOGLEVEL"


# TwinMsg class constants
class DTwinMsg:
    """
    Atribute definitions for TwinMsg class messages.
    """

    ID: str = "id"
    SENDER: str = "sender"
    TARGET: str = "target"
    METHOD: str = "method"
    PAYLOAD: str = "payload"
    V: str = "version"


# Corpus worker RPC methods
class DMethod:
    SIMULATE: str = "simulate"
    STOP: str = "stop"
    RESULT: str = "result"
    ERROR: str = "error"


# TwinLog levels
class DTwinLog:
    """
    Logging level constants for TwinLog configuration.

    Defines string constants for different logging levels that map
    to Python's standard logging levels via the LOG_LEVELS dictionary.
    """

    INFO: str = "info"
    DEBUG: str = "debug"
    WARNING: str = "warning"
    ERROR: str = "error"
    CRITICAL: str = "critical"
    DEFAULT: str = "warning"


# TwinLog levels dictionary
# Mapping of TwinLog level strings to Python logging level integers.
LOG_LEVELS: Dict[str, int] = {
    DTwinLog.INFO: logging.INFO,
    DTwinLog.DEBUG: logging.DEBUG,
    DTwinLog.WARNING: logging.WARNING,
    DTwinLog.ERROR: logging.ERROR,
    DTwinLog.CRITICAL: logging.CRITICAL,
    DTwinLog.DEFAULT: logging.WARNING,
}


# Wave Twin modules
class DModule:
    """
    Module identifier constants for Wave Twin components.

    Provides standardized string identifiers for the different components,
    used in logging and component identification.
    """

    CORE: str = "TwinCore"
    SIGNAL: str = "SignalPlan"
    SIMKIT: str = "SimKit"
    SIM_SERVER: str = "SimServer"
    SIM_CLIENT: str = "SimClient"
    CORPUS: str = "Corpus"
    GRAPHS: str = "Graphs"
    NDIFF: str = "NDiff"
    MPNN: str = "Mpnn"
    TWINS: str = "TwinModel"
    TRAINER: str = "Trainer"
    METRICS: str = "Metrics"
    EXPLAIN: str = "Explain"
    CLI: str = "WaveTwinCli"


# Approaches and movements
class DApproach:
    NB: str = "NB"
    SB: str = "SB"
    EB: str = "EB"
    WB: str = "WB"
    ORDER: Tuple[str, ...] = ("NB", "SB", "EB", "WB")


class DMovement:
    LEFT: str = "L"
    THROUGH: str = "T"
    RIGHT: str = "R"
    ORDER: Tuple[str, ...] = ("L", "T", "R")


class DLeg:
    """
    Departure legs of the intersection (where outgoing lanes lead).
    """

    NORTH: str = "N"
    SOUTH: str = "S"
    EAST: str = "E"
    WEST: str = "W"
    ORDER: Tuple[str, ...] = ("N", "S", "E", "W")


# Departure leg reached by each (approach, movement)
MOVEMENT_LEG: Dict[Tuple[str, str], str] = {
    ("EB", "T"): "E",
    ("EB", "L"): "N",
    ("EB", "R"): "S",
    ("WB", "T"): "W",
    ("WB", "L"): "S",
    ("WB", "R"): "N",
    ("NB", "T"): "N",
    ("NB", "L"): "W",
    ("NB", "R"): "E",
    ("SB", "T"): "S",
    ("SB", "L"): "E",
    ("SB", "R"): "W",
}


# Driving behavior parameter ranges
class DDrv:
    """
    Driving behavior field names and their sampling ranges.
    """

    FIELDS: Tuple[str, ...] = (
        "accel",
        "decel",
        "emergency_decel",
        "min_gap",
        "sigma",
        "tau",
        "lc_strategic",
        "lc_cooperative",
        "lc_speed_gain",
    )
    RANGES: Dict[str, Tuple[float, float]] = {
        "accel": (1.6, 3.6),
        "decel": (3.0, 6.0),
        "emergency_decel": (6.0, 12.0),
        "min_gap": (1.0, 4.0),
        "sigma": (0.1, 1.0),
        "tau": (0.1, 3.0),
        "lc_strategic": (0.1, 3.0),
        "lc_cooperative": (0.1, 1.0),
        "lc_speed_gain": (0.1, 3.0),
    }
    # Simulator-only speed factor, not a model feature
    SPEED_FACTOR_MEAN: Tuple[float, float] = (1.0, 1.5)
    SPEED_FACTOR_SD: Tuple[float, float] = (0.1, 2.0)
    SPEED_FACTOR_CLIP: Tuple[float, float] = (0.5, 2.0)


# Ring-and-barrier signal settings
class DSignal:
    """
    NEMA ring-and-barrier defaults.

    Phase 2 and 6 are the coordinated major-street (EB/WB) throughs. The
    barrier separates {1, 2, 5, 6} from {3, 4, 7, 8}.
    """

    N_PHASES: int = 8
    RING1: Tuple[int, ...] = (1, 2, 3, 4)
    RING2: Tuple[int, ...] = (5, 6, 7, 8)
    CYCLE_STANDARD: Tuple[int, int] = (120, 240)
    CYCLE_FIELD: Tuple[int, int] = (150, 240)
    CYCLE_RANGES: Dict[str, Tuple[int, int]] = {
        "standard": (120, 240),
        "field": (150, 240),
    }

    # Field-sheet style defaults (seconds)
    MIN_GREEN_LEFT: int = 7
    MAX_GREEN_LEFT: int = 40
    MIN_GREEN_THROUGH: int = 15
    MAX_GREEN_THROUGH: int = 90
    YELLOW: int = 4
    ALL_RED: int = 2


# Governing phase of each (approach, movement); rights follow their through
PHASE_OF: Dict[Tuple[str, str], int] = {
    ("WB", "L"): 1,
    ("EB", "T"): 2,
    ("EB", "R"): 2,
    ("SB", "L"): 3,
    ("NB", "T"): 4,
    ("NB", "R"): 4,
    ("EB", "L"): 5,
    ("WB", "T"): 6,
    ("WB", "R"): 6,
    ("NB", "L"): 7,
    ("SB", "T"): 8,
    ("SB", "R"): 8,
}


# Simulator settings
class DSim:
    """
    Mesoscopic simulator constants.
    """

    SETBACK_M: float = 500.0
    SPACING_RULE_M: float = 750.0
    FREE_FLOW_MS: float = 13.89
    DISCHARGE_SPEED_MS: float = 4.0
    MIN_HEADWAY_S: float = 1.5
    STARTUP_BASE_S: float = 2.0
    REF_ACCEL: float = 2.6
    FLUSH_CYCLES: int = 2
    MAX_EXTRA_FLUSH_CYCLES: int = 20
    BASE_RATE_MAJOR: float = 600.0
    BASE_RATE_MINOR: float = 300.0
    # Seconds from stop-bar to exit detector per movement
    CROSSING_S: Dict[str, int] = {"L": 4, "T": 3, "R": 2}
    # Daytime (6 am to 8 pm) demand profile, relative to the base rate
    HOUR_PROFILE: Tuple[float, ...] = (
        0.55,
        0.95,
        1.20,
        0.90,
        0.75,
        0.80,
        0.85,
        0.85,
        0.80,
        0.90,
        1.05,
        1.20,
        1.10,
        0.80,
    )
    REGIMES: Tuple[str, ...] = ("real", "random", "mixed")
    # Receive timeout between worker liveness checks
    WORKER_POLL_MS: int = 1000


# Graph templates
class DGraph:
    """
    Common template sizes for exit and inflow simulation graphs.
    """

    EXIT: str = "exit"
    INFLOW: str = "inflow"
    EXIT_INCOMING: int = 22
    EXIT_OUTGOING: int = 11
    EXIT_NODES: int = 33
    EXIT_EDGES: int = 22
    INF_LAYERS: int = 4
    INF_STOPBAR: int = 6
    INF_INFLOW: int = 3
    INF_SLOTS: int = 9
    INF_NODES: int = 36
    INF_INTRA_EDGES: int = 72
    INF_PILLAR_EDGES: int = 108
    INF_EDGES: int = 180
    EDGE_DIM: int = 29
    TMC_DIM: int = 12
    DRV_DIM: int = 9
    SIG_DIM: int = 8
    TEMPLATE_VERSION: int = 1
    DATASET_VERSION: int = 1


# Training settings
class DTrain:
    """
    Optimizer, training and evaluation defaults.
    """

    LR: float = 0.001
    BETA1: float = 0.9
    BETA2: float = 0.999
    EPS: float = 1e-8
    MAX_EPOCHS: int = 30
    PATIENCE: int = 5
    MIN_DELTA: float = 1e-5
    BATCH_SIZE: int = 8
    SPLIT: Tuple[float, float, float] = (0.8, 0.1, 0.1)
    AGGREGATIONS: Tuple[int, ...] = (1, 2, 3, 4)
    CI_Z: float = 1.96
    RIDGE_LAMBDA: float = 1e-6
    HIDDEN: int = 32
    HEADS: int = 2
    DROPOUT: float = 0.1
    SA_DIM: int = 8
    SA_HEADS: int = 2
    EDGE_PROJ_DIM: int = 8
    GRADCHECK_H: float = 1e-5
    GRADCHECK_TOL: float = 1e-4
    GRADCHECK_ATOL: float = 1e-8
    DTYPE: str = "float32"
    DTYPES: Tuple[str, ...] = ("float32", "float64")


# Model variant names
class DVariant:
    GATCONV_EXT: str = "gatconv-ext"
    GATCONV_INF: str = "gatconv-inf"
    SAGECONV_EXT: str = "sageconv-ext"
    GCNCONV_EXT: str = "gcnconv-ext"
    GATCONV_ABLATED: str = "gatconv-ablated"
    ALL: Tuple[str, ...] = (
        "gatconv-ext",
        "gatconv-inf",
        "sageconv-ext",
        "gcnconv-ext",
        "gatconv-ablated",
    )


# Error messages
class DTwinErr:
    """
    Message templates for the Wave Twin exception classes.

    Use .format() method to substitute actual values.
    """

    REBUCKET: str = "rebucket factor {factor} does not divide window {w}"
    NEGATIVE_COUNT: str = "negative count {value} at index {index}"
    WINDOW: str = "waveform {lane_id} has {got} buckets, expected {want}"
    DRV_RANGE: str = "driving behavior {name}={value} outside [{lo}, {hi}]"
    TMC_ROW: str = "turning ratios for {approach} sum to {total}, expected 1"
    TMC_ENTRY: str = "turning ratio {value} outside [0, 1]"
    CAPACITY: str = "approach {approach} exceeds template capacity: {detail}"
    SLOT: str = "lane {lane_id} mapped to slot {slot}: {detail}"
    UNMAPPED: str = "lane {lane_id} has no slot in the {template} template"
    FEASIBILITY: str = "infeasible ring budget: {detail}"
    PLAN: str = "invalid signal plan: {detail}"
    SHAPE: str = "shape mismatch in {op}: {a} vs {b}"
    EMPTY_SOFTMAX: str = "softmax over an empty axis {axis}"
    EMPTY_MASK: str = "loss mask selects no entries"
    NON_SCALAR: str = "backward needs a scalar loss, got shape {shape}"
    NAN_GRAD: str = "NaN gradient for parameter {name}"
    DIVERGED: str = "loss diverged at epoch {epoch} step {step}"
    CONFIG: str = "configuration error: {detail}"
    EMPTY_SPLIT: str = "dataset split is empty"
    CORPUS: str = "scenario {index} failed: {detail}"
    WORKER_DIED: str = "worker {worker} exited with code {code}"


# Warnings and progress messages
class DTwinMsgText:
    """
    Message templates for Wave Twin logging and user feedback.

    Contains formatted string templates with placeholders for dynamic
    values. Use .format() method to substitute actual values.
    """

    SATURATION: str = "{count} buckets clipped at saturation {cap}"
    NON_CONSERVATION: str = (
        "{left} vehicles still inside the network after a {flush}s flush tail"
    )
    ISOLATED: str = "{count} nodes have no in-edges and no self-loop"
    RIDGE: str = "rank-deficient design ({rank} < {cols}), ridge fallback {lam}"
    EPOCH: str = "epoch {epoch}: train_loss={train:.6f} val_loss={val:.6f}"
    EARLY_STOP: str = "early stop at epoch {epoch}, best val_loss={best:.6f}"
    SCENARIO: str = "scenario {index} seed={seed} topology={topology}"
    WORKER_UP: str = "SimServer bound to {endpoint}"
    WORKER_CLEANUP: str = "SimServer cleanup complete"
    WORKER_ERROR: str = "SimServer error: {e}"
    CLIENT_CONNECTED: str = "SimClient connected to {endpoint}"
    CLIENT_CLEANUP: str = "SimClient cleanup complete"
    RECEIVE: str = "Received request: {message}"
    SENT: str = "Sent response: {response}"


# CLI help and status messages
class DCliMsg:
    """
    Message templates for the wave-twin command line.
    """

    DESCRIPTION: str = (
        "Wave Twin - intersection waveform simulator and graph digital twins"
    )
    LOGLEVEL_HELP: str = "Log level: DEBUG, INFO, WARNING, ERROR or CRITICAL"
    SEED_HELP: str = "Master seed (default: {seed})"
    OUT_HELP: str = "Output run directory"
    JOBS_HELP: str = "Maximum number of worker processes (default: 1)"
    TOPOLOGY_HELP: str = "Topology JSON file or a shipped topology name"
    SCENARIOS_HELP: str = "Number of scenarios to simulate"
    REGIME_HELP: str = "Demand regime: real, random or mixed"
    CYCLE_HELP: str = "Cycle length range: standard (120-240s) or field (150-240s)"
    KIND_HELP: str = "Graph kind: exit or inflow"
    VARIANT_HELP: str = "Model variant: {variants}"
    CONFIG_HELP: str = "JSON configuration file (flags override its values)"
    MISSING_FILE: str = "file not found: {path}"
    EMPTY_INPUT: str = "input has no records: {path}"
    SUMMARY: str = "{kind} graphs: nodes={nodes} edges={edges} edge_dim={edge_dim}"
    GRADCHECK_LINE: str = "{name:<24} max_rel_err={err:.3e} {status}"
    GRADCHECK_MAX: str = "max relative error {err:.3e}"
    WROTE: str = "wrote {path}"
    ERROR: str = "wave-twin error: {e}"
