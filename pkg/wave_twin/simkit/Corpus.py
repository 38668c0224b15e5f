# wave_twin/simkit/Corpus.py
#
#   Wave Twin
#    Author: Nadim-Daniel Ghaznavi
#    Copyright: (c) 2025-2026 Nadim-Daniel Ghaznavi
#    License: GPL 3.0

"""
Seeded scenario corpora.

Every scenario gets a child seed spawned from the master seed. The child
seed alone determines its plan, demand and vehicles, so scenarios can be
simulated in any process and merged back by index.
"""

import json
import multiprocessing
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from wave_twin.constants.DTwin import DMethod, DModule, DSim, DTwin, DTwinErr, DTwinMsgText
from wave_twin.core.SimRecord import SimulationRecord
from wave_twin.core.Topology import IntersectionTopology
from wave_twin.signal.SignalPlan import SignalConstraints, SignalTimingPlan, sample_plan
from wave_twin.simkit.Demand import DemandScenario, Regime, sample_scenario
from wave_twin.simkit.IntersectionSim import IntersectionSim
from wave_twin.simkit.SimClient import SimClient
from wave_twin.simkit.SimServer import serve
from wave_twin.utils.TwinErrors import (
    CorpusError,
    InvalidArgumentError,
    TwinError,
    WorkerTimeout,
)
from wave_twin.utils.TwinLog import TwinLog
from wave_twin.utils.TwinMsg import TwinMsg

MIXED = "mixed"


@dataclass(frozen=True)
class ScenarioJob:
    """
    Everything a worker needs to reproduce one scenario.
    """

    index: int
    seed: int
    topology: Dict[str, Any]
    regime: Regime
    constraints: Dict[str, Any]
    w: int = DTwin.W
    bucket_seconds: int = DTwin.BUCKET_SECONDS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "seed": self.seed,
            "topology": self.topology,
            "regime": Regime(self.regime).value,
            "constraints": self.constraints,
            "w": self.w,
            "bucket_seconds": self.bucket_seconds,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScenarioJob":
        return cls(
            index=int(data["index"]),
            seed=int(data["seed"]),
            topology=data["topology"],
            regime=Regime(data["regime"]),
            constraints=data["constraints"],
            w=int(data["w"]),
            bucket_seconds=int(data["bucket_seconds"]),
        )


def child_seeds(master_seed: int, n: int) -> List[int]:
    return [
        int(child.generate_state(1)[0])
        for child in np.random.SeedSequence(master_seed).spawn(n)
    ]


def regime_for(regime: str, index: int) -> Regime:
    """Mixed corpora alternate real and random scenarios by index."""
    if regime == MIXED:
        return Regime.REAL if index % 2 == 0 else Regime.RANDOM
    return Regime(regime)


def make_jobs(
    n_scenarios: int,
    topologies: Sequence[IntersectionTopology],
    regime: str,
    seed: int,
    constraints: Optional[SignalConstraints] = None,
    w: int = DTwin.W,
    bucket_seconds: int = DTwin.BUCKET_SECONDS,
) -> List[ScenarioJob]:
    """
    Scenario i uses child seed i and topology i mod len(topologies).

    Raises:
        InvalidArgumentError: If n_scenarios < 1 or no topology is given
    """
    if n_scenarios < 1:
        raise InvalidArgumentError(f"n_scenarios must be at least 1, got {n_scenarios}")
    if not topologies:
        raise InvalidArgumentError("at least one topology is required")
    if regime != MIXED:
        Regime(regime)
    limits = (constraints or SignalConstraints()).model_dump(mode="json")
    docs = [t.to_doc().model_dump(mode="json", exclude_none=True) for t in topologies]
    return [
        ScenarioJob(
            index=i,
            seed=s,
            topology=docs[i % len(docs)],
            regime=regime_for(regime, i),
            constraints=limits,
            w=w,
            bucket_seconds=bucket_seconds,
        )
        for i, s in enumerate(child_seeds(seed, n_scenarios))
    ]


def draw_job(
    job: ScenarioJob,
) -> Tuple[IntersectionTopology, SignalTimingPlan, DemandScenario]:
    """The topology, plan and demand a job stands for."""
    topology = IntersectionTopology.from_doc(job.topology)
    rng = np.random.default_rng(job.seed)
    plan = sample_plan(rng, SignalConstraints.model_validate(job.constraints))
    scenario = sample_scenario(rng, topology, job.regime, job.seed)
    return topology, plan, scenario


def manifest_entry(
    job: ScenarioJob, plan: SignalTimingPlan, scenario: DemandScenario, record: SimulationRecord
) -> Dict[str, Any]:
    return {
        "index": job.index,
        "seed": job.seed,
        "topology": record.intersection_id,
        "regime": scenario.regime.value,
        "cycle": plan.cycle_length_s,
        "offset": plan.offset_s,
        "barrier": plan.barrier_time_s,
        "greens": [p.green for p in plan.phases],
        "rates": list(scenario.rates),
        "tmc": scenario.tmc.to_list(),
        "drv": scenario.drv.to_dict(),
        "speed_factor": [scenario.speed_factor_mean, scenario.speed_factor_sd],
        "hour": scenario.hour,
        "warnings": len(record.warnings),
    }


def run_job(
    job: ScenarioJob, log: Optional[TwinLog] = None
) -> Tuple[SimulationRecord, Dict[str, Any]]:
    topology, plan, scenario = draw_job(job)
    sim = IntersectionSim(topology, job.w, job.bucket_seconds, log=log)
    record = sim.simulate(plan, scenario)
    return record, manifest_entry(job, plan, scenario, record)


class SimPool:
    """
    A fixed set of SimServer worker processes on ipc endpoints.

    Jobs are dealt round-robin in batches of one per worker; replies are
    yielded in job order, so the output matches the in-process path. A
    worker that exits before answering fails its job with a CorpusError.
    """

    def __init__(
        self, jobs: int, log: Optional[TwinLog] = None, poll_ms: int = DSim.WORKER_POLL_MS
    ) -> None:
        self.size = jobs
        self.log = log or TwinLog(DModule.CORPUS)
        self._tmp = tempfile.TemporaryDirectory(prefix="wave-twin-")
        ctx = multiprocessing.get_context("spawn")
        self.endpoints = [
            f"ipc://{Path(self._tmp.name) / f'worker-{i}.sock'}" for i in range(jobs)
        ]
        self.procs = [
            ctx.Process(target=serve, args=(ep,), daemon=True) for ep in self.endpoints
        ]
        for proc in self.procs:
            proc.start()
        self.clients = [
            SimClient(ep, id=f"{DModule.SIM_CLIENT}-{i}", timeout_ms=poll_ms)
            for i, ep in enumerate(self.endpoints)
        ]

    def run(self, jobs: Sequence[ScenarioJob]) -> Iterator[Tuple[SimulationRecord, Dict[str, Any]]]:
        for start in range(0, len(jobs), self.size):
            batch = jobs[start : start + self.size]
            for client, job in zip(self.clients, batch):
                client.submit(
                    TwinMsg(sender=DModule.CORPUS, method=DMethod.SIMULATE, payload=job.to_dict())
                )
            for worker, job in enumerate(batch):
                reply = self._collect(worker, job)
                payload = reply.payload()
                if reply.method() != DMethod.RESULT:
                    raise CorpusError(
                        DTwinErr.CORPUS.format(
                            index=job.index,
                            detail=f"{payload.get('type')}: {payload.get('error')}",
                        ),
                        job.index,
                    )
                yield SimulationRecord.from_dict(payload["record"]), payload["entry"]

    def _collect(self, worker: int, job: ScenarioJob) -> TwinMsg:
        """
        Raises:
            CorpusError: The worker process exited before answering
        """
        proc = self.procs[worker]
        while True:
            try:
                return self.clients[worker].collect()
            except WorkerTimeout:
                if proc.is_alive():
                    continue
                detail = DTwinErr.WORKER_DIED.format(worker=worker, code=proc.exitcode)
                raise CorpusError(
                    DTwinErr.CORPUS.format(index=job.index, detail=detail), job.index
                ) from None

    def close(self) -> None:
        for client in self.clients:
            try:
                client.stop_worker()
            except TwinError as e:
                self.log.warning(DTwinMsgText.WORKER_ERROR.format(e=e))
            client._cleanup()
        for proc in self.procs:
            proc.join(timeout=5)
            if proc.is_alive():
                proc.terminate()
        self._tmp.cleanup()

    def __enter__(self) -> "SimPool":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()


def generate_corpus(
    n_scenarios: int,
    topologies: Sequence[IntersectionTopology],
    regime: str,
    seed: int,
    constraints: Optional[SignalConstraints] = None,
    w: int = DTwin.W,
    bucket_seconds: int = DTwin.BUCKET_SECONDS,
    jobs: int = 1,
    log: Optional[TwinLog] = None,
) -> Iterator[Tuple[SimulationRecord, Dict[str, Any]]]:
    """
    Simulate n seeded scenarios and yield (record, manifest entry) pairs.

    Records come out in scenario-index order whatever the worker count.

    Args:
        n_scenarios (int): Number of scenarios, at least 1
        topologies (Sequence[IntersectionTopology]): Cycled by index
        regime (str): real, random or mixed
        seed (int): Master seed
        constraints (Optional[SignalConstraints]): Signal limits
        w (int): Buckets per record
        bucket_seconds (int): Bucket width
        jobs (int): Worker processes; 1 runs in-process
        log (Optional[TwinLog]): Progress logger

    Raises:
        CorpusError: A scenario failed, carrying its index
    """
    log = log or TwinLog(DModule.CORPUS)
    todo = make_jobs(n_scenarios, topologies, regime, seed, constraints, w, bucket_seconds)
    if jobs <= 1:
        for job in todo:
            log.debug(
                DTwinMsgText.SCENARIO.format(
                    index=job.index, seed=job.seed, topology=job.topology["intersection_id"]
                )
            )
            try:
                yield run_job(job, log)
            except TwinError as e:
                raise CorpusError(
                    DTwinErr.CORPUS.format(index=job.index, detail=e), job.index
                ) from e
        return
    with SimPool(min(jobs, len(todo)), log) as pool:
        yield from pool.run(todo)


def write_corpus(
    pairs: Iterable[Tuple[SimulationRecord, Dict[str, Any]]],
    records_path: Union[str, Path],
    manifest_path: Union[str, Path],
    header: Dict[str, Any],
) -> int:
    """
    Write records as JSON Lines and the manifest as one JSON document.

    Returns:
        int: Number of records written

    Raises:
        CorpusError: An I/O failure, carrying the index of the scenario
    """
    entries: List[Dict[str, Any]] = []
    index = 0
    try:
        with open(records_path, "w", encoding="utf-8") as fh:
            for index, (record, entry) in enumerate(pairs):
                fh.write(record.to_json())
                fh.write("\n")
                entries.append(entry)
        manifest = dict(header)
        manifest["scenarios"] = entries
        Path(manifest_path).write_text(json.dumps(manifest, indent=2) + "\n")
    except OSError as e:
        raise CorpusError(DTwinErr.CORPUS.format(index=index, detail=e), index) from e
    return len(entries)
