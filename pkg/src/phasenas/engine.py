"""Two-stage evolutionary search: crossover/mutation, then model sampling.

:class:`SearchEngine` owns the random source, the append-only archive and
the current population. Every generation ends at a clean boundary that can
be checkpointed to JSON and resumed bit-for-bit.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from .boa import fit_bn, restrict_to_fronts, sample_bn
from .complexity import estimate_complexity
from .dedup import NetworkKey, canonical_network, key_digest
from .encoding import (
    EncodingConfig,
    NetworkGenome,
    decode_network,
    format_genome,
    parse_genome,
    random_genome,
    to_dot,
)
from .evaluators import (
    EvaluationError,
    Evaluator,
    ExternalEvaluator,
    ObjectiveCache,
    ObjectiveVector,
    SurrogateConfig,
    SurrogateEvaluator,
)
from .metrics import hypervolume_2d, normalized_hv, objective_bounds, reference_point, survival_rate
from .moea import environmental_selection, fast_nondominated_sort, rank_population, tournament_select
from .operators import crossover, mutate

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
INITIALIZATION, EXPLORATION, EXPLOITATION, RANDOM = (
    "initialization", "exploration", "exploitation", "random")
# settings that may change between a run and its resumption
RUNTIME_KEYS = frozenset({"workers", "external_timeout"})


class ConfigError(ValueError):
    pass


class ConfigMismatchError(ConfigError):
    pass


class CheckpointError(RuntimeError):
    pass


class SearchError(RuntimeError):
    pass


class SearchAborted(SearchError):
    def __init__(self, message: str, checkpoint: dict, path: Path | None):
        super().__init__(message + (f"; checkpoint written to {path}" if path else ""))
        self.checkpoint = checkpoint
        self.path = path


# -- configuration ---------------------------------------------------------

@dataclass(frozen=True)
class SearchConfig:
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    population_size: int = 40
    exploration_generations: int = 20
    exploitation_generations: int = 10
    p_c: float = 0.9
    p_m: float = 0.02
    seed: int = 0
    evaluator: str = "surrogate"
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)
    external_cmd: str = ""
    external_timeout: float = 3600.0
    workers: int = 1
    dedup_retry_limit: int = 10
    evaluation_retry_limit: int = 10
    survival_rate_switch_threshold: float | None = None
    seed_genomes: tuple[str, ...] = ()
    disable_crossover: bool = False
    crossover_per_phase: bool = False
    exploitation_sampler: str = "bn"
    exploitation_mutation: bool = False
    bn_alpha: float = 1.0
    bn_front_limit: int | None = None
    random_search_mode: bool = False
    random_search_budget: int | None = None

    def __post_init__(self):
        errors = []
        n = self.population_size
        if n < 4 or n % 2:
            errors.append(f"population_size must be even and >= 4, got {n}")
        for name in ("p_c", "p_m"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                errors.append(f"{name} must lie in [0, 1], got {v}")
        for name in ("exploration_generations", "exploitation_generations",
                     "dedup_retry_limit", "evaluation_retry_limit"):
            if getattr(self, name) < 0:
                errors.append(f"{name} must be >= 0")
        t = self.survival_rate_switch_threshold
        if t is not None and not 0.0 <= t <= 1.0:
            errors.append(f"survival_rate_switch_threshold must lie in [0, 1], got {t}")
        if self.evaluator not in ("surrogate", "external"):
            errors.append(f"evaluator must be surrogate or external, got {self.evaluator!r}")
        if self.evaluator == "external" and not self.external_cmd:
            errors.append("evaluator=external requires external_cmd")
        if self.exploitation_sampler not in ("bn", "uniform"):
            errors.append(f"exploitation_sampler must be bn or uniform, got {self.exploitation_sampler!r}")
        if self.workers < 1:
            errors.append("workers must be >= 1")
        if self.bn_alpha < 0:
            errors.append("bn_alpha must be >= 0")
        if self.bn_front_limit is not None and self.bn_front_limit < 1:
            errors.append("bn_front_limit must be >= 1")
        if self.random_search_budget is not None and self.random_search_budget < 0:
            errors.append("random_search_budget must be >= 0")
        for s in self.seed_genomes:
            try:
                parse_genome(s, self.encoding)
            except ValueError as exc:
                errors.append(f"seed genome {s!r}: {exc}")
        if errors:
            raise ConfigError("; ".join(errors))

    @property
    def total_generations(self) -> int:
        return self.exploration_generations + self.exploitation_generations

    def replace(self, **changes) -> "SearchConfig":
        return dataclasses.replace(self, **changes)

    # flat key=value form ---------------------------------------------------

    def to_flat(self) -> dict[str, str]:
        enc = self.encoding
        flat = {
            "n_p": enc.n_p, "n_o": enc.n_o,
            "resolution_schedule": ",".join(map(str, enc.resolution_schedule)),
            "channel_width": enc.channel_width, "input_channels": enc.input_channels,
            "input_resolution": enc.input_resolution,
            "surrogate_e_min": self.surrogate.e_min, "surrogate_e_max": self.surrogate.e_max,
            "surrogate_beta": self.surrogate.beta, "surrogate_rho": self.surrogate.rho,
        }
        for f in dataclasses.fields(self):
            if f.name in ("encoding", "surrogate"):
                continue
            v = getattr(self, f.name)
            if f.name == "seed_genomes":
                v = ";".join(v)
            flat[f.name] = v
        return {k: _fmt(v) for k, v in flat.items()}

    @classmethod
    def from_flat(cls, values: dict[str, str]) -> "SearchConfig":
        unknown = sorted(set(values) - _FLAT_KEYS)
        if unknown:
            raise ConfigError("unknown config keys: " + ", ".join(unknown))
        errors = []
        conv: dict[str, Any] = {}
        for k, raw in values.items():
            try:
                conv[k] = _FLAT_PARSERS[k](raw.strip())
            except ValueError as exc:
                errors.append(f"{k}={raw!r}: {exc}")
        if errors:
            raise ConfigError("invalid config values: " + "; ".join(errors))
        enc_kw = {k: conv.pop(k) for k in list(conv) if k in _ENCODING_KEYS}
        sur_kw = {k[len("surrogate_"):]: conv.pop(k) for k in list(conv) if k.startswith("surrogate_")}
        try:
            enc = EncodingConfig(**enc_kw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(encoding=enc, surrogate=SurrogateConfig(**sur_kw), **conv)

    def dumps(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.to_flat().items())


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _bool(s: str) -> bool:
    low = s.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _opt(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    return lambda s: None if s in ("", "none", "None") else parse(s)


def _ints(s: str) -> tuple[int, ...] | None:
    return tuple(int(x) for x in s.split(",")) if s else None


def _strs(s: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in s.split(";") if x.strip())


_ENCODING_KEYS = {"n_p", "n_o", "resolution_schedule", "channel_width",
                  "input_channels", "input_resolution"}
_FLAT_PARSERS: dict[str, Callable[[str], Any]] = {
    "n_p": int, "n_o": int, "resolution_schedule": _ints, "channel_width": int,
    "input_channels": int, "input_resolution": int,
    "surrogate_e_min": float, "surrogate_e_max": float,
    "surrogate_beta": float, "surrogate_rho": float,
    "population_size": int, "exploration_generations": int,
    "exploitation_generations": int, "p_c": float, "p_m": float, "seed": int,
    "evaluator": str, "external_cmd": str, "external_timeout": float, "workers": int,
    "dedup_retry_limit": int, "evaluation_retry_limit": int,
    "survival_rate_switch_threshold": _opt(float), "seed_genomes": _strs,
    "disable_crossover": _bool, "crossover_per_phase": _bool,
    "exploitation_sampler": str, "exploitation_mutation": _bool,
    "bn_alpha": float, "bn_front_limit": _opt(int),
    "random_search_mode": _bool, "random_search_budget": _opt(int),
}
_FLAT_KEYS = frozenset(_FLAT_PARSERS)


def parse_flat_config(text: str, source: str = "<config>") -> dict[str, str]:
    """``key=value`` lines; ``#`` starts a comment. Bad lines are all reported."""
    values: dict[str, str] = {}
    errors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"{source}:{lineno}: expected key=value, got {line!r}")
            continue
        k, v = (s.strip() for s in line.split("=", 1))
        values[k] = v
    unknown = sorted(set(values) - _FLAT_KEYS)
    if unknown:
        errors.append("unknown config keys: " + ", ".join(unknown))
    if errors:
        raise ConfigError("; ".join(errors))
    return values


def load_config(path: str | os.PathLike | None = None,
                overrides: dict[str, str] | None = None) -> SearchConfig:
    values: dict[str, str] = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        values.update(parse_flat_config(p.read_text(), str(p)))
    values.update(overrides or {})
    return SearchConfig.from_flat(values)


def make_evaluator(cfg: SearchConfig) -> Evaluator:
    if cfg.evaluator == "external":
        return ExternalEvaluator(cfg.external_cmd, timeout=cfg.external_timeout,
                                 seed=cfg.seed, workers=cfg.workers)
    return SurrogateEvaluator(cfg.surrogate)


# -- archive ---------------------------------------------------------------

@dataclass(frozen=True)
class ArchiveRecord:
    genome: NetworkGenome
    key: NetworkKey
    objectives: ObjectiveVector
    generation: int
    stage: str

    @property
    def digest(self) -> str:
        return key_digest(self.key)


@dataclass(frozen=True)
class CreationEvent:
    generation: int
    stage: str
    record: int  # index into the archive
    new: bool  # False when a duplicate was admitted after exhausting retries


class SearchArchive:
    """Append-only, insertion-ordered history; one record per canonical key."""

    def __init__(self):
        self.records: list[ArchiveRecord] = []
        self.index: dict[NetworkKey, int] = {}
        self.events: list[CreationEvent] = []

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, key: NetworkKey) -> bool:
        return key in self.index

    def add(self, genome: NetworkGenome, key: NetworkKey, obj: ObjectiveVector,
            generation: int, stage: str) -> tuple[int, bool]:
        if key in self.index:
            return self.index[key], False
        self.index[key] = len(self.records)
        self.records.append(ArchiveRecord(genome, key, obj, generation, stage))
        return len(self.records) - 1, True

    def genomes(self) -> list[NetworkGenome]:
        return [r.genome for r in self.records]

    def objectives(self) -> np.ndarray:
        if not self.records:
            return np.empty((0, 2))
        return np.array([r.objectives.as_tuple() for r in self.records])

    def front_indices(self) -> list[int]:
        if not self.records:
            return []
        return fast_nondominated_sort(self.objectives())[0]

    def offspring_events(self) -> list[CreationEvent]:
        return [e for e in self.events if e.stage != INITIALIZATION]

    def stage_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.records:
            counts[r.stage] = counts.get(r.stage, 0) + 1
        return counts


@dataclass
class SearchResult:
    front: list[ArchiveRecord]
    archive: SearchArchive
    trace: list[dict]
    config: SearchConfig
    seed: int
    bounds: tuple[list[float], list[float]] | None
    evaluations: int

    @property
    def final_normalized_hv(self) -> float:
        return self.trace[-1]["normalized_hv"] if self.trace else 0.0


# -- engine ----------------------------------------------------------------

class SearchEngine:
    def __init__(self, cfg: SearchConfig, evaluator: Evaluator | None = None,
                 out_dir: str | os.PathLike | None = None):
        self.cfg = cfg
        self.evaluator = evaluator if evaluator is not None else make_evaluator(cfg)
        self._owns_evaluator = evaluator is None
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.rng = np.random.default_rng(cfg.seed)
        self.archive = SearchArchive()
        self.cache = ObjectiveCache()
        self.population: list[int] = []
        self.generation = -1  # last completed generation; 0 is initialization
        self.stage = INITIALIZATION
        self.exploration_done = 0
        self.exploitation_done = 0
        self.rows: list[dict] = []  # generation, stage, survival_rate, evaluations
        self.done = False
        self._boundary: dict | None = None

    # evaluation ------------------------------------------------------------

    def _evaluate_batch(self, items: Sequence[tuple[NetworkGenome, NetworkKey]]
                        ) -> dict[NetworkKey, ObjectiveVector | EvaluationError]:
        todo: dict[NetworkKey, NetworkGenome] = {}
        for g, k in items:
            if k not in self.cache and k not in todo:
                todo[k] = g
        enc = self.cfg.encoding

        def run(key_genome):
            k, g = key_genome
            arch = decode_network(g, enc)
            try:
                err = float(self.evaluator.evaluate(g, arch))
                obj = ObjectiveVector(err, float(estimate_complexity(arch).flops))
            except (EvaluationError, ValueError) as exc:
                return k, exc if isinstance(exc, EvaluationError) else EvaluationError(str(exc))
            return k, obj

        if self.cfg.workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.cfg.workers) as pool:
                done = list(pool.map(run, todo.items()))
        else:
            done = [run(kg) for kg in todo.items()]
        out: dict[NetworkKey, ObjectiveVector | EvaluationError] = {}
        for k, res in done:  # submission order, independent of completion order
            if isinstance(res, ObjectiveVector):
                self.cache.put(k, res, self.evaluator.name)
            out[k] = res
        for _, k in items:
            if k not in out:
                out[k] = self.cache.get(k)
        return out

    # offspring creation ----------------------------------------------------

    def _unique_child(self, make: Callable[[], NetworkGenome],
                      taken: set[NetworkKey]) -> tuple[NetworkGenome, NetworkKey]:
        child = make()
        key = canonical_network(child)
        for _ in range(self.cfg.dedup_retry_limit):
            if key not in self.archive and key not in taken:
                break
            child = make()
            key = canonical_network(child)
        return child, key

    def _produce(self, make: Callable[[], NetworkGenome], count: int, generation: int,
                 stage: str, initial: Sequence[NetworkGenome] = ()) -> list[int]:
        """Create, evaluate and archive ``count`` individuals; returns record indices."""
        slots: list[tuple[NetworkGenome, NetworkKey]] = []
        taken: set[NetworkKey] = set()
        for i in range(count):
            if i < len(initial):
                g = initial[i]
                item = (g, canonical_network(g))
            else:
                item = self._unique_child(make, taken)
            slots.append(item)
            taken.add(item[1])
        failures = 0
        while True:
            results = self._evaluate_batch(slots)
            bad = [i for i, (_, k) in enumerate(slots)
                   if isinstance(results[k], EvaluationError)]
            if not bad:
                break
            for i in bad:
                failures += 1
                log.warning("evaluation failed for %s: %s",
                            format_genome(slots[i][0]), results[slots[i][1]])
            if failures > self.cfg.evaluation_retry_limit:
                raise self._abort(f"{failures} failed evaluations in generation {generation}")
            taken = {k for i, (_, k) in enumerate(slots) if i not in bad}
            for i in bad:
                slots[i] = self._unique_child(make, taken)
                taken.add(slots[i][1])
        indices = []
        for g, k in slots:
            idx, new = self.archive.add(g, k, results[k], generation, stage)
            self.archive.events.append(CreationEvent(generation, stage, idx, new))
            indices.append(idx)
        return indices

    def _abort(self, message: str) -> SearchAborted:
        ckpt = self._boundary or self.state()
        path = None
        if self.out_dir is not None:
            path = self.out_dir / "checkpoint.json"
            _write(path, json.dumps(ckpt, sort_keys=True))
        return SearchAborted(message, ckpt, path)

    # stages ----------------------------------------------------------------

    def initialize(self) -> None:
        cfg = self.cfg
        seeds = [parse_genome(s, cfg.encoding) for s in cfg.seed_genomes][:cfg.population_size]
        self.population = self._produce(lambda: random_genome(self.rng, cfg.encoding),
                                        cfg.population_size, 0, INITIALIZATION, seeds)
        self._finish_generation(0, INITIALIZATION, None)

    def _ranked(self):
        recs = [self.archive.records[i] for i in self.population]
        return rank_population([r.genome for r in recs], [r.objectives for r in recs])

    def _exploration_child(self, ranked) -> NetworkGenome:
        cfg = self.cfg
        a = ranked[tournament_select(ranked, self.rng)].genome
        if cfg.disable_crossover:
            child = a
        else:
            b = ranked[tournament_select(ranked, self.rng)].genome
            child = crossover(a, b, self.rng, cfg.p_c, per_phase=cfg.crossover_per_phase)
        return mutate(child, self.rng, cfg.p_m)

    def _exploitation_maker(self) -> Callable[[], NetworkGenome]:
        cfg = self.cfg
        if cfg.exploitation_sampler == "uniform":
            base = lambda: random_genome(self.rng, cfg.encoding)  # noqa: E731
        else:
            genomes = self.archive.genomes()
            if cfg.bn_front_limit is not None:
                genomes = restrict_to_fronts(genomes, self.archive.objectives(), cfg.bn_front_limit)
            bn = fit_bn(genomes, alpha=cfg.bn_alpha)
            base = lambda: sample_bn(bn, self.rng, 1)[0]  # noqa: E731
        if cfg.exploitation_mutation:
            return lambda: mutate(base(), self.rng, cfg.p_m)
        return base

    def step(self) -> None:
        """Run one generation (initialization counts as generation 0)."""
        if self.done:
            return
        self._boundary = self.state()
        if self.generation < 0:
            self.initialize()
            self._advance_stage()
            return
        gen = self.generation + 1
        n = self.cfg.population_size
        if self.stage == EXPLORATION:
            ranked = self._ranked()
            make = lambda: self._exploration_child(ranked)  # noqa: E731
        else:
            make = self._exploitation_maker()
        offspring = self._produce(make, n, gen, self.stage)
        pool = self.population + offspring
        objs = [self.archive.records[i].objectives.as_tuple() for i in pool]
        survivors = environmental_selection(objs, n)
        self.population = [pool[i] for i in survivors]
        rate = survival_rate(range(n, 2 * n), survivors)
        stage = self.stage
        if stage == EXPLORATION:
            self.exploration_done += 1
        else:
            self.exploitation_done += 1
        self._finish_generation(gen, stage, rate)
        t = self.cfg.survival_rate_switch_threshold
        if stage == EXPLORATION and t is not None and rate is not None and rate <= t:
            log.info("survival rate %.3f <= %.3f, switching to exploitation", rate, t)
            self.exploration_done = self.cfg.exploration_generations
        self._advance_stage()

    def _advance_stage(self) -> None:
        cfg = self.cfg
        if self.exploration_done < cfg.exploration_generations:
            self.stage = EXPLORATION
        elif self.exploitation_done < cfg.exploitation_generations:
            self.stage = EXPLOITATION
        else:
            self.done = True

    def _finish_generation(self, gen: int, stage: str, rate: float | None) -> None:
        self.generation = gen
        self.rows.append({"generation": gen, "stage": stage, "survival_rate": rate,
                          "evaluations": len(self.cache)})
        log.debug("generation %d (%s): archive %d, survival %s",
                  gen, stage, len(self.archive), rate)
        if self.out_dir is not None:
            self.write_outputs(final=False)

    def run(self, until_generation: int | None = None) -> SearchResult:
        """Step until done, or until ``until_generation`` has completed."""
        try:
            while not self.done:
                if until_generation is not None and self.generation >= until_generation:
                    break
                self.step()
        finally:
            if self._owns_evaluator and hasattr(self.evaluator, "close") and self.done:
                self.evaluator.close()
        if self.done and self.out_dir is not None:
            self.write_outputs(final=True)
        return self.result()

    # reporting -------------------------------------------------------------

    def bounds(self) -> tuple[np.ndarray, np.ndarray] | None:
        if not self.archive.records:
            return None
        return objective_bounds(self.archive.objectives())

    def trace(self) -> list[dict]:
        """Per-generation rows; HV uses the current archive's bounds for every row."""
        bounds = self.bounds()
        objs = self.archive.objectives()
        gens = np.array([r.generation for r in self.archive.records])
        rows = []
        for row in self.rows:
            if bounds is None:
                hv = nhv = 0.0
            else:
                pts = objs[gens <= row["generation"]]
                nhv = normalized_hv(pts, bounds)
                hv = hypervolume_2d(pts, reference_point(bounds))
            rows.append({"generation": row["generation"], "stage": row["stage"],
                         "hv": hv, "normalized_hv": nhv,
                         "survival_rate": row["survival_rate"],
                         "evaluations_so_far": row["evaluations"]})
        return rows

    def result(self) -> SearchResult:
        front = [self.archive.records[i] for i in self.archive.front_indices()]
        b = self.bounds()
        bounds = None if b is None else (b[0].tolist(), b[1].tolist())
        return SearchResult(front=front, archive=self.archive, trace=self.trace(),
                            config=self.cfg, seed=self.cfg.seed, bounds=bounds,
                            evaluations=len(self.cache))

    def write_outputs(self, final: bool = True) -> None:
        out = self.out_dir
        if out is None:
            return
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "config.cfg", self.cfg.dumps())
        _write(out / "trace.csv", trace_csv(self.trace()))
        _write(out / "archive.csv", archive_csv(self.archive.records))
        _write(out / "checkpoint.json", json.dumps(self.state(), sort_keys=True))
        if not final:
            return
        front = [self.archive.records[i] for i in self.archive.front_indices()]
        _write(out / "front.csv", archive_csv(front))
        b = self.bounds()
        summary = {
            "seed": self.cfg.seed,
            "archive_size": len(self.archive),
            "evaluations": len(self.cache),
            "offspring_events": len(self.archive.offspring_events()),
            "stage_counts": self.archive.stage_counts(),
            "front_size": len(front),
            "normalization_bounds": None if b is None else
            {"min": b[0].tolist(), "max": b[1].tolist()},
        }
        _write(out / "summary.json", json.dumps(summary, indent=1, sort_keys=True) + "\n")
        dot_dir = out / "dot"
        dot_dir.mkdir(exist_ok=True)
        for old in dot_dir.glob("*.dot"):
            old.unlink()
        for rank, rec in enumerate(sorted(front, key=lambda r: r.objectives.complexity)):
            arch = decode_network(rec.genome, self.cfg.encoding)
            _write(dot_dir / f"front_{rank:03d}_{rec.digest}.dot",
                   to_dot(arch, name=f"front_{rank:03d}"))

    # checkpointing ---------------------------------------------------------

    def state(self) -> dict:
        return {
            "version": CHECKPOINT_VERSION,
            "config": self.cfg.to_flat(),
            "rng": self.rng.bit_generator.state,
            "generation": self.generation,
            "stage": self.stage,
            "exploration_done": self.exploration_done,
            "exploitation_done": self.exploitation_done,
            "done": self.done,
            "population": list(self.population),
            "archive": [[format_genome(r.genome), r.objectives.error,
                         r.objectives.complexity, r.generation, r.stage]
                        for r in self.archive.records],
            "events": [[e.generation, e.stage, e.record, e.new] for e in self.archive.events],
            "rows": [[r["generation"], r["stage"], r["survival_rate"], r["evaluations"]]
                     for r in self.rows],
        }

    def checkpoint(self, path: str | os.PathLike) -> None:
        _write(Path(path), json.dumps(self.state(), sort_keys=True))

    @classmethod
    def from_state(cls, state: dict, cfg: SearchConfig | None = None,
                   evaluator: Evaluator | None = None,
                   out_dir: str | os.PathLike | None = None) -> "SearchEngine":
        if state.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {state.get('version')!r}")
        try:
            stored = SearchConfig.from_flat(state["config"])
        except (KeyError, ConfigError) as exc:
            raise CheckpointError(f"checkpoint config unreadable: {exc}") from exc
        if cfg is None:
            cfg = stored
        else:
            a, b = stored.to_flat(), cfg.to_flat()
            diff = sorted(k for k in a if k not in RUNTIME_KEYS and a[k] != b.get(k))
            if diff:
                raise ConfigMismatchError(
                    "config differs from checkpoint in: " + ", ".join(
                        f"{k} ({a[k]!r} vs {b.get(k)!r})" for k in diff))
        eng = cls(cfg, evaluator=evaluator, out_dir=out_dir)
        try:
            eng.rng.bit_generator.state = state["rng"]
            eng.generation = int(state["generation"])
            eng.stage = state["stage"]
            eng.exploration_done = int(state["exploration_done"])
            eng.exploitation_done = int(state["exploitation_done"])
            eng.done = bool(state["done"])
            for text, err, cx, gen, stage in state["archive"]:
                g = parse_genome(text, cfg.encoding)
                k = canonical_network(g)
                obj = ObjectiveVector(float(err), float(cx))
                eng.archive.add(g, k, obj, int(gen), stage)
                eng.cache.put(k, obj, "checkpoint")
            eng.archive.events = [CreationEvent(int(g), s, int(r), bool(n))
                                  for g, s, r, n in state["events"]]
            eng.population = [int(i) for i in state["population"]]
            eng.rows = [{"generation": g, "stage": s, "survival_rate": r, "evaluations": e}
                        for g, s, r, e in state["rows"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"corrupt checkpoint: {exc}") from exc
        if any(i >= len(eng.archive) for i in eng.population):
            raise CheckpointError("corrupt checkpoint: population index out of range")
        return eng

    @classmethod
    def resume(cls, path: str | os.PathLike, cfg: SearchConfig | None = None,
               evaluator: Evaluator | None = None,
               out_dir: str | os.PathLike | None = None) -> "SearchEngine":
        try:
            state = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
        return cls.from_state(state, cfg, evaluator, out_dir)


# -- public entry points ---------------------------------------------------

def run_search(cfg: SearchConfig, evaluator: Evaluator | None = None,
               out_dir: str | os.PathLike | None = None) -> SearchResult:
    if cfg.random_search_mode:
        return run_random_search(cfg, evaluator=evaluator, out_dir=out_dir)
    return SearchEngine(cfg, evaluator, out_dir).run()


def resume(path: str | os.PathLike, cfg: SearchConfig | None = None,
           evaluator: Evaluator | None = None,
           out_dir: str | os.PathLike | None = None) -> SearchResult:
    """Continue a checkpointed run; a finished run returns its stored result."""
    return SearchEngine.resume(path, cfg, evaluator, out_dir).run()


class _RandomEngine(SearchEngine):
    def __init__(self, cfg, evaluator, out_dir, budget):
        super().__init__(cfg, evaluator, out_dir)
        self.budget = budget

    def run(self, until_generation=None) -> SearchResult:
        cfg = self.cfg
        gen = 0
        while len(self.archive) < self.budget:
            n = min(cfg.population_size, self.budget - len(self.archive))
            taken: set[NetworkKey] = set()
            batch = []
            attempts = 0
            while len(batch) < n:
                g = random_genome(self.rng, cfg.encoding)
                k = canonical_network(g)
                attempts += 1
                if k in self.archive or k in taken:
                    if attempts > 1000 * n:
                        raise SearchError("cannot find enough unique genomes for the budget")
                    continue
                taken.add(k)
                batch.append(g)
            self._produce(lambda: random_genome(self.rng, cfg.encoding), n, gen, RANDOM, batch)
            self._finish_generation(gen, RANDOM, None)
            gen += 1
        self.done = True
        if not self.archive.records:
            raise SearchError("random search with zero budget has an empty front")
        if self.out_dir is not None:
            self.write_outputs(final=True)
        if self._owns_evaluator and hasattr(self.evaluator, "close"):
            self.evaluator.close()
        return self.result()


def run_random_search(cfg: SearchConfig, budget: int | None = None,
                      evaluator: Evaluator | None = None,
                      out_dir: str | os.PathLike | None = None) -> SearchResult:
    """Uniformly sample ``budget`` unique genomes (default: the search's budget)."""
    if budget is None:
        budget = cfg.random_search_budget
    if budget is None:
        budget = cfg.population_size * (1 + cfg.total_generations)
    return _RandomEngine(cfg, evaluator, out_dir, budget).run()


# -- comparisons -----------------------------------------------------------

def paired_normalized_hv(*point_sets) -> list[float]:
    """Normalized HV of each set under bounds taken from their union."""
    sets = [np.asarray(s, dtype=float).reshape(-1, 2) for s in point_sets]
    bounds = objective_bounds(np.vstack(sets))
    return [normalized_hv(s, bounds) for s in sets]


def compare_exploitation_samplers(cfg: SearchConfig, count: int = 120,
                                  evaluator: Evaluator | None = None) -> tuple[float, float]:
    """Normalized HV of ``count`` model-sampled vs ``count`` uniform genomes.

    The model is fitted on the archive left by the exploration stage alone.
    """
    explore = cfg.replace(exploitation_generations=0)
    eng = SearchEngine(explore, evaluator)
    eng.run()
    bn = fit_bn(eng.archive, alpha=cfg.bn_alpha)
    rng = np.random.default_rng([cfg.seed, 1])
    sampled = sample_bn(bn, rng, count)
    uniform = [random_genome(rng, cfg.encoding) for _ in range(count)]
    pts = []
    for genomes in (sampled, uniform):
        items = [(g, canonical_network(g)) for g in genomes]
        res = eng._evaluate_batch(items)
        pts.append([res[k].as_tuple() for _, k in items])
    hv_bn, hv_uniform = paired_normalized_hv(*pts)
    return hv_bn, hv_uniform


# -- files -----------------------------------------------------------------

def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def trace_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["generation", "stage", "hv", "normalized_hv", "survival_rate",
                "evaluations_so_far"])
    for r in rows:
        w.writerow([r["generation"], r["stage"], repr(r["hv"]), repr(r["normalized_hv"]),
                    "" if r["survival_rate"] is None else repr(r["survival_rate"]),
                    r["evaluations_so_far"]])
    return buf.getvalue()


def archive_csv(records: Sequence[ArchiveRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["genome", "key", "error", "flops", "generation", "stage"])
    for r in records:
        w.writerow([format_genome(r.genome), r.digest, repr(r.objectives.error),
                    repr(r.objectives.complexity), r.generation, r.stage])
    return buf.getvalue()
