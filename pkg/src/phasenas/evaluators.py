"""Error-objective providers and the canonical-key objective cache.

Two evaluators ship here:

* :class:`SurrogateEvaluator` is a cheap deterministic stand-in for training.
  Error decays exponentially with the genome's normalized connection count,
  plus a small keyed perturbation so ties in connectivity do not collapse.
* :class:`ExternalEvaluator` talks to a child process over line-delimited
  JSON: one ``{"id", "genome", "architecture"}`` request per line on stdin,
  one ``{"id", "error"}`` reply per line on stdout.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from .complexity import estimate_complexity
from .dedup import NetworkKey, canonical_network
from .encoding import (
    EncodingConfig,
    NetworkArchitecture,
    NetworkGenome,
    architecture_document,
    decode_network,
    format_genome,
    max_phase_connections,
)

SEED_ENV_VAR = "PHASENAS_SEED"


class EvaluationError(RuntimeError):
    """An evaluator could not produce a valid error value."""


class EvaluationTimeout(EvaluationError):
    pass


class ErrorRangeError(EvaluationError):
    pass


@dataclass(frozen=True)
class ObjectiveVector:
    error: float
    complexity: float

    def __post_init__(self):
        if not (math.isfinite(self.error) and math.isfinite(self.complexity)):
            raise ValueError(f"objectives must be finite: {self}")
        if not 0.0 <= self.error <= 1.0:
            raise ValueError(f"error must lie in [0, 1], got {self.error}")
        if self.complexity < 0:
            raise ValueError(f"complexity must be non-negative, got {self.complexity}")

    def as_tuple(self) -> tuple[float, float]:
        return (self.error, self.complexity)


class Evaluator(Protocol):
    name: str

    def evaluate(self, genome: NetworkGenome, arch: NetworkArchitecture) -> float: ...


# -- surrogate -------------------------------------------------------------

@dataclass(frozen=True)
class SurrogateConfig:
    e_min: float = 0.05
    e_max: float = 0.60
    beta: float = 3.0
    rho: float = 0.02


def keyed_noise(key: NetworkKey, amplitude: float) -> float:
    """Uniform value in [-amplitude, amplitude] fixed by the canonical key."""
    h = hashlib.sha256(b"surrogate-noise")
    for part in key:
        h.update(len(part).to_bytes(2, "big"))
        h.update(part)
    u = int.from_bytes(h.digest()[:8], "big") / 2.0 ** 64
    return amplitude * (2.0 * u - 1.0)


def surrogate_error(genome: NetworkGenome, arch: NetworkArchitecture,
                    params: SurrogateConfig = SurrogateConfig()) -> float:
    conns = sum(pg.connections for pg in arch.phase_graphs)
    most = sum(max_phase_connections(pg.n_o) for pg in arch.phase_graphs)
    u = conns / most
    err = params.e_min + (params.e_max - params.e_min) * math.exp(-params.beta * u)
    err += keyed_noise(canonical_network(genome), params.rho)
    return min(1.0, max(0.0, err))


class SurrogateEvaluator:
    def __init__(self, params: SurrogateConfig | None = None):
        self.params = params or SurrogateConfig()
        self.name = "surrogate"

    def evaluate(self, genome: NetworkGenome, arch: NetworkArchitecture) -> float:
        return surrogate_error(genome, arch, self.params)


# -- external process ------------------------------------------------------

class _Child:
    """One long-lived evaluator process with a background stdout reader."""

    def __init__(self, argv: Sequence[str], env: dict[str, str]):
        self.proc = subprocess.Popen(
            list(argv), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL, text=True, bufsize=1, env=env)
        self.lines: queue.Queue[str | None] = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        for line in self.proc.stdout:
            self.lines.put(line)
        self.lines.put(None)

    def alive(self) -> bool:
        return self.proc.poll() is None

    def kill(self):
        if self.alive():
            self.proc.kill()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            pass
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass


class ExternalEvaluator:
    """Delegate error evaluation to external processes, one request in flight each.

    ``command`` is an argv list or a shell-style string. Up to ``workers``
    children are started lazily and reused. A child that times out, exits, or
    sends garbage is killed and replaced on the next request.
    """

    def __init__(self, command: str | Sequence[str], timeout: float = 3600.0,
                 seed: int | None = None, workers: int = 1):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.argv:
            raise ValueError("external evaluator command is empty")
        self.timeout = timeout
        self.seed = seed
        self.name = "external:" + " ".join(self.argv)
        self._idle: queue.Queue[_Child | None] = queue.Queue()
        for _ in range(max(1, workers)):
            self._idle.put(None)
        self._ids = 0
        self._lock = threading.Lock()

    def _spawn(self) -> _Child:
        env = dict(os.environ)
        if self.seed is not None:
            env[SEED_ENV_VAR] = str(self.seed)
        try:
            return _Child(self.argv, env)
        except OSError as exc:
            raise EvaluationError(f"cannot launch {self.argv[0]!r}: {exc}") from exc

    def _next_id(self) -> int:
        with self._lock:
            self._ids += 1
            return self._ids

    def evaluate(self, genome: NetworkGenome, arch: NetworkArchitecture) -> float:
        child = self._idle.get()
        try:
            if child is None or not child.alive():
                child = self._spawn()
            err = self._request(child, genome, arch)
        except EvaluationError:
            if child is not None:
                child.kill()
            self._idle.put(None)
            raise
        self._idle.put(child)
        return err

    def _request(self, child: _Child, genome: NetworkGenome,
                 arch: NetworkArchitecture) -> float:
        req_id = self._next_id()
        msg = {"id": req_id, "genome": format_genome(genome),
               "architecture": architecture_document(arch)}
        try:
            child.proc.stdin.write(json.dumps(msg, sort_keys=True) + "\n")
            child.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EvaluationError(f"evaluator process closed its input: {exc}") from exc
        try:
            line = child.lines.get(timeout=self.timeout)
        except queue.Empty:
            raise EvaluationTimeout(
                f"no reply to request {req_id} within {self.timeout} s") from None
        if line is None:
            code = child.proc.wait()
            raise EvaluationError(f"evaluator exited with status {code} before replying")
        try:
            reply = json.loads(line)
            rid, err = reply["id"], reply["error"]
        except (ValueError, KeyError, TypeError) as exc:
            raise EvaluationError(f"malformed reply {line.strip()!r}") from exc
        if rid != req_id:
            raise EvaluationError(f"reply id {rid!r} does not match request {req_id}")
        if isinstance(err, bool) or not isinstance(err, (int, float)):
            raise EvaluationError(f"error field is not a number: {err!r}")
        err = float(err)
        if not (math.isfinite(err) and 0.0 <= err <= 1.0):
            raise ErrorRangeError(f"error {err} outside [0, 1]")
        return err

    def close(self):
        while True:
            try:
                child = self._idle.get_nowait()
            except queue.Empty:
                break
            if child is not None:
                child.kill()


def external_evaluate(genome: NetworkGenome, arch: NetworkArchitecture,
                      command: str | Sequence[str], timeout: float = 3600.0,
                      seed: int | None = None) -> float:
    """One-shot evaluation through a freshly launched child."""
    ev = ExternalEvaluator(command, timeout=timeout, seed=seed)
    try:
        return ev.evaluate(genome, arch)
    finally:
        ev.close()


# -- cache -----------------------------------------------------------------

@dataclass
class CacheEntry:
    objectives: ObjectiveVector
    evaluator: str
    evaluated_at: float


@dataclass
class ObjectiveCache:
    """At most one entry per canonical key; concurrent misses evaluate once."""

    entries: dict[NetworkKey, CacheEntry] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _pending: dict[NetworkKey, threading.Event] = field(default_factory=dict, repr=False)

    def __contains__(self, key: NetworkKey) -> bool:
        return key in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, key: NetworkKey) -> ObjectiveVector | None:
        entry = self.entries.get(key)
        return entry.objectives if entry else None

    def put(self, key: NetworkKey, obj: ObjectiveVector, evaluator: str = "") -> None:
        with self._lock:
            self.entries.setdefault(key, CacheEntry(obj, evaluator, time.time()))

    def get_or_compute(self, key: NetworkKey, compute: Callable[[], ObjectiveVector],
                       evaluator: str = "") -> ObjectiveVector:
        while True:
            with self._lock:
                entry = self.entries.get(key)
                if entry is not None:
                    return entry.objectives
                waiter = self._pending.get(key)
                if waiter is None:
                    mine = self._pending[key] = threading.Event()
                    break
            waiter.wait()
        try:
            obj = compute()
            with self._lock:
                self.entries[key] = CacheEntry(obj, evaluator, time.time())
            return obj
        finally:
            with self._lock:
                del self._pending[key]
            mine.set()


def evaluate_with_cache(genome: NetworkGenome, evaluator: Evaluator,
                        cache: ObjectiveCache, cfg: EncodingConfig | None = None,
                        key: NetworkKey | None = None) -> ObjectiveVector:
    """Objectives for ``genome``; the evaluator runs only on a cache miss."""
    if cfg is None:
        cfg = EncodingConfig(n_p=genome.n_p, n_o=genome.n_o)
    if key is None:
        key = canonical_network(genome)

    def compute() -> ObjectiveVector:
        arch = decode_network(genome, cfg)
        err = evaluator.evaluate(genome, arch)
        return ObjectiveVector(float(err), float(estimate_complexity(arch).flops))

    return cache.get_or_compute(key, compute, getattr(evaluator, "name", ""))
