"""Command-line entry point: ``phasenas {search,evaluate,census,hv,export-dot}``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .complexity import estimate_complexity
from .dedup import redundancy_census
from .encoding import EncodingConfig, GenomeParseError, decode_network, parse_genome, to_dot
from .engine import (
    CheckpointError,
    ConfigError,
    SearchEngine,
    SearchError,
    load_config,
    run_random_search,
    run_search,
)
from .evaluators import EvaluationError, SurrogateConfig, surrogate_error
from .metrics import hypervolume_2d

EXIT_USAGE = 1
EXIT_RUNTIME = 2

ABLATIONS = {
    "none": {},
    "random-search": {"random_search_mode": "true"},
    "no-crossover": {"disable_crossover": "true"},
    "uniform-exploitation": {"exploitation_sampler": "uniform"},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phasenas", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("search", help="run an architecture search")
    s.add_argument("--config", help="flat key=value config file")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--evaluator", choices=["surrogate", "external"])
    s.add_argument("--external-cmd")
    s.add_argument("--ablation", choices=sorted(ABLATIONS), default="none")
    s.add_argument("--out", help="run directory (default: runs/<ablation>-seed<seed>)")
    s.add_argument("--set", dest="overrides", type=_pair, action="append", default=[],
                   metavar="KEY=VALUE", help="override any config key")
    s.add_argument("--resume", action="store_true",
                   help="continue from the checkpoint in --out")

    e = sub.add_parser("evaluate", help="decode a genome and report its objectives")
    e.add_argument("genome")
    e.add_argument("--config", help="config file supplying the encoding settings")

    c = sub.add_parser("census", help="count distinct phase phenotypes per node count")
    c.add_argument("n_o", type=int, nargs="+")
    c.add_argument("--sep", default=",")

    h = sub.add_parser("hv", help="hypervolume of a 2-objective front file")
    h.add_argument("front")
    h.add_argument("--ref", required=True, help="reference point, e.g. 4,4")

    d = sub.add_parser("export-dot", help="write a genome's architecture as DOT")
    d.add_argument("genome")
    d.add_argument("--config")
    d.add_argument("-o", "--output")
    return p


def _encoding_for(genome: str, config: str | None) -> EncodingConfig:
    if config:
        return load_config(config).encoding
    chunks = genome.split(" ")
    try:
        return EncodingConfig(n_p=len(chunks), n_o=chunks[0].count("-") + 1)
    except ValueError as exc:
        raise GenomeParseError(f"cannot infer the encoding: {exc}", 0) from None


def cmd_search(args) -> int:
    overrides = dict(args.overrides)
    for flag, key in (("seed", "seed"), ("workers", "workers"),
                      ("evaluator", "evaluator"), ("external_cmd", "external_cmd")):
        v = getattr(args, flag)
        if v is not None:
            overrides[key] = str(v)
    overrides.update(ABLATIONS[args.ablation])
    cfg = load_config(args.config, overrides)
    out = Path(args.out or f"runs/{args.ablation}-seed{cfg.seed}")
    if args.resume:
        result = SearchEngine.resume(out / "checkpoint.json", cfg, out_dir=out).run()
    elif cfg.random_search_mode:
        result = run_random_search(cfg, out_dir=out)
    else:
        result = run_search(cfg, out_dir=out)
    print(f"run directory: {out}")
    print(f"archive: {len(result.archive)} genomes, {result.evaluations} evaluations")
    print(f"final normalized hv: {result.final_normalized_hv:.6f}")
    print(f"front ({len(result.front)}):")
    for rec in sorted(result.front, key=lambda r: r.objectives.complexity):
        print(f"  {rec.objectives.error:.4f}  {rec.objectives.complexity:>14.0f}  {rec.genome}")
    return 0


def cmd_evaluate(args) -> int:
    enc = _encoding_for(args.genome, args.config)
    g = parse_genome(args.genome, enc)
    arch = decode_network(g, enc)
    rep = estimate_complexity(arch)
    params = load_config(args.config).surrogate if args.config else SurrogateConfig()
    for i, (pg, res) in enumerate(zip(arch.phase_graphs, arch.resolutions), 1):
        note = " (pass-through)" if pg.is_empty else ""
        print(f"phase {i} @ {res}x{res}: nodes={sorted(pg.active_nodes)} "
              f"edges={sorted(pg.edges)} in={sorted(pg.input_attached)} "
              f"out={sorted(pg.output_attached)} skip={int(pg.skip)}{note}")
    print(f"active_nodes: {rep.active_nodes}")
    print(f"active_connections: {rep.active_connections}")
    print(f"params: {rep.params}")
    print(f"flops: {rep.flops}")
    print(f"surrogate_error: {surrogate_error(g, arch, params):.6f}")
    return 0


def cmd_census(args) -> int:
    w = csv.writer(sys.stdout, delimiter=args.sep, lineterminator="\n")
    w.writerow(["n_o", "total", "unique", "ratio"])
    for n in args.n_o:
        total, unique = redundancy_census(n)
        w.writerow([n, total, unique, f"{unique / total:.6f}"])
    return 0


def read_front(path: str) -> list[tuple[float, float]]:
    text = Path(path).read_text()
    rows = [r for r in csv.reader(text.splitlines()) if r and not r[0].startswith("#")]
    if not rows:
        return []
    header = [c.strip().lower() for c in rows[0]]
    if "error" in header and ("flops" in header or "complexity" in header):
        i = header.index("error")
        j = header.index("flops" if "flops" in header else "complexity")
        return [(float(r[i]), float(r[j])) for r in rows[1:]]
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]
    return [(float(r[0]), float(r[1])) for r in rows]


def cmd_hv(args) -> int:
    try:
        ref = tuple(float(x) for x in args.ref.split(","))
    except ValueError:
        raise UsageError(f"bad --ref {args.ref!r}") from None
    if len(ref) != 2:
        raise UsageError("--ref needs two comma-separated values")
    print(repr(hypervolume_2d(read_front(args.front), ref)))
    return 0


def cmd_export_dot(args) -> int:
    enc = _encoding_for(args.genome, args.config)
    dot = to_dot(decode_network(parse_genome(args.genome, enc), enc))
    if args.output:
        Path(args.output).write_text(dot)
    else:
        sys.stdout.write(dot)
    return 0


COMMANDS = {"search": cmd_search, "evaluate": cmd_evaluate, "census": cmd_census,
            "hv": cmd_hv, "export-dot": cmd_export_dot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, GenomeParseError, ConfigError) as exc:
        print(f"phasenas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SearchError, EvaluationError, CheckpointError, NotImplementedError,
            OSError, ValueError) as exc:
        print(f"phasenas: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
