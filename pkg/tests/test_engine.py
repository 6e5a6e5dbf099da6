import json

import numpy as np
import pytest

from phasenas.dedup import canonical_network
from phasenas.engine import (
    CheckpointError,
    ConfigError,
    ConfigMismatchError,
    SearchConfig,
    SearchEngine,
    SearchError,
    compare_exploitation_samplers,
    load_config,
    parse_flat_config,
    resume,
    run_random_search,
    run_search,
)
from phasenas.moea import nondominated_indices

SMALL = SearchConfig(population_size=12, exploration_generations=4,
                     exploitation_generations=2, seed=5)
FILES = ("config.cfg", "trace.csv", "archive.csv", "checkpoint.json",
         "front.csv", "summary.json")


def read_all(d):
    out = {name: (d / name).read_bytes() for name in FILES}
    out.update({p.name: p.read_bytes() for p in sorted((d / "dot").glob("*.dot"))})
    return out


# -- config -------------------------------------------------------------------

def test_config_roundtrip():
    cfg = SMALL.replace(seed_genomes=(" ".join(["1-00-000-0000-00000-0"] * 3),),
                        survival_rate_switch_threshold=0.2, bn_front_limit=3)
    assert SearchConfig.from_flat(cfg.to_flat()) == cfg


def test_config_errors_are_collected():
    with pytest.raises(ConfigError) as info:
        SearchConfig(population_size=3, p_c=2.0, workers=0)
    msg = str(info.value)
    assert "population_size" in msg and "p_c" in msg and "workers" in msg


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        parse_flat_config("bogus = 1\nseed = 2\n")


def test_missing_config_file_named(tmp_path):
    missing = tmp_path / "nope.cfg"
    with pytest.raises(ConfigError, match="nope.cfg"):
        load_config(missing)


def test_load_config_with_overrides(tmp_path):
    p = tmp_path / "a.cfg"
    p.write_text("# comment\nseed = 4\npopulation_size = 20  # trailing\n")
    cfg = load_config(p, {"seed": "9"})
    assert cfg.seed == 9 and cfg.population_size == 20


def test_external_needs_command():
    with pytest.raises(ConfigError, match="external_cmd"):
        SearchConfig(evaluator="external")


# -- runs ---------------------------------------------------------------------

def test_zero_generations_is_initialization_only():
    res = run_search(SMALL.replace(exploration_generations=0, exploitation_generations=0))
    assert len(res.archive) == 12
    assert [r["generation"] for r in res.trace] == [0]
    assert res.archive.stage_counts() == {"initialization": 12}


def test_bookkeeping():
    res = run_search(SMALL)
    n = 12
    assert len(res.archive.offspring_events()) == n * 6
    assert res.archive.stage_counts() == {"initialization": n, "exploration": 4 * n,
                                          "exploitation": 2 * n}
    assert len(res.archive) == n * 7
    assert res.evaluations == len(res.archive)
    assert [r["generation"] for r in res.trace] == list(range(7))
    stages = [r["stage"] for r in res.trace]
    assert stages == ["initialization"] + ["exploration"] * 4 + ["exploitation"] * 2
    hv = [r["normalized_hv"] for r in res.trace]
    assert all(a <= b + 1e-12 for a, b in zip(hv, hv[1:]))
    assert len({canonical_network(r.genome) for r in res.archive.records}) == len(res.archive)
    objs = res.archive.objectives()
    assert sorted(nondominated_indices(objs)) == sorted(
        res.archive.records.index(r) for r in res.front)


def test_determinism_bitwise(tmp_path):
    run_search(SMALL, out_dir=tmp_path / "a")
    run_search(SMALL, out_dir=tmp_path / "b")
    assert read_all(tmp_path / "a") == read_all(tmp_path / "b")


def test_different_seeds_differ():
    a = run_search(SMALL)
    b = run_search(SMALL.replace(seed=6))
    assert [str(r.genome) for r in a.archive.records] != [str(r.genome) for r in b.archive.records]


def test_resume_matches_uninterrupted(tmp_path):
    cfg = SMALL.replace(exploration_generations=8, exploitation_generations=4)
    run_search(cfg, out_dir=tmp_path / "full")
    eng = SearchEngine(cfg, out_dir=tmp_path / "part")
    eng.run(until_generation=10)
    assert eng.generation == 10 and not eng.done
    del eng
    resume(tmp_path / "part" / "checkpoint.json", cfg, out_dir=tmp_path / "part")
    assert read_all(tmp_path / "full") == read_all(tmp_path / "part")


def test_resume_with_different_workers_allowed(tmp_path):
    eng = SearchEngine(SMALL, out_dir=tmp_path)
    eng.run(until_generation=2)
    res = resume(tmp_path / "checkpoint.json", SMALL.replace(workers=3))
    assert res.trace[-1]["generation"] == 6


def test_resume_config_mismatch(tmp_path):
    eng = SearchEngine(SMALL, out_dir=tmp_path)
    eng.run(until_generation=2)
    with pytest.raises(ConfigMismatchError, match="p_m"):
        resume(tmp_path / "checkpoint.json", SMALL.replace(p_m=0.1))
    with pytest.raises(ConfigMismatchError, match="population_size"):
        resume(tmp_path / "checkpoint.json", SMALL.replace(population_size=14))


def test_resume_completed_run_is_stable(tmp_path):
    first = run_search(SMALL, out_dir=tmp_path)
    before = read_all(tmp_path)
    again = resume(tmp_path / "checkpoint.json", out_dir=tmp_path)
    assert [str(r.genome) for r in again.archive.records] == \
        [str(r.genome) for r in first.archive.records]
    assert read_all(tmp_path) == before


def test_corrupt_checkpoint(tmp_path):
    p = tmp_path / "checkpoint.json"
    p.write_text("{not json")
    with pytest.raises(CheckpointError):
        resume(p)
    p.write_text(json.dumps({"version": 99}))
    with pytest.raises(CheckpointError):
        resume(p)


def test_workers_do_not_change_results():
    a = run_search(SMALL)
    b = run_search(SMALL.replace(workers=4))
    assert [(str(r.genome), r.objectives) for r in a.archive.records] == \
        [(str(r.genome), r.objectives) for r in b.archive.records]


def test_seed_genomes_enter_initial_population():
    seeds = (" ".join(["1-11-111-1111-11111-1"] * 3), " ".join(["0-00-000-0000-00000-0"] * 3))
    res = run_search(SMALL.replace(seed_genomes=seeds, exploration_generations=0,
                                   exploitation_generations=0))
    texts = [str(r.genome) for r in res.archive.records]
    assert texts[:2] == list(seeds)


def test_no_crossover_children_are_one_flip_from_a_parent():
    cfg = SMALL.replace(disable_crossover=True, exploitation_generations=0)
    eng = SearchEngine(cfg)
    eng.step()
    while not eng.done:
        parents = np.array([eng.archive.records[i].genome.to_array() for i in eng.population])
        gen = eng.generation + 1
        eng.step()
        for rec in eng.archive.records:
            if rec.generation == gen:
                d = (parents != rec.genome.to_array()).sum(axis=1).min()
                assert d <= 1


def test_survival_switch_ends_exploration_early():
    res = run_search(SMALL.replace(survival_rate_switch_threshold=1.0))
    counts = res.archive.stage_counts()
    assert counts["exploration"] == 12 and counts["exploitation"] == 24
    assert [r["stage"] for r in res.trace][1:] == ["exploration"] + ["exploitation"] * 2


def test_uniform_exploitation_and_front_limit_run():
    for cfg in (SMALL.replace(exploitation_sampler="uniform"),
                SMALL.replace(bn_front_limit=1, exploitation_mutation=True)):
        res = run_search(cfg)
        assert res.archive.stage_counts()["exploitation"] == 24


# -- random search --------------------------------------------------------------

def test_random_search_budget():
    res = run_random_search(SMALL)
    assert len(res.archive) == 12 * 7
    assert set(res.archive.stage_counts()) == {"random"}
    res = run_random_search(SMALL, budget=17)
    assert len(res.archive) == 17


def test_random_search_zero_budget():
    with pytest.raises(SearchError):
        run_random_search(SMALL, budget=0)


def test_random_mode_via_run_search():
    res = run_search(SMALL.replace(random_search_mode=True, random_search_budget=30))
    assert len(res.archive) == 30


def test_sampler_comparison_returns_pair():
    hv_bn, hv_u = compare_exploitation_samplers(SMALL, count=20)
    assert 0 <= hv_bn <= 1.0201 and 0 <= hv_u <= 1.0201


# -- outputs ------------------------------------------------------------------

def test_output_files(tmp_path):
    res = run_search(SMALL, out_dir=tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["archive_size"] == len(res.archive)
    assert summary["offspring_events"] == 72
    assert len(list((tmp_path / "dot").glob("*.dot"))) == len(res.front)
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0].startswith("generation,stage,hv,normalized_hv")
    assert len(lines) == 8
    cfg = load_config(tmp_path / "config.cfg")
    assert cfg == SMALL
