"""Command-line interface.

Subcommands: parse, dt, kernel, gram, correlate, props, bench. One RunConfig
(dim, lambda, composition, seed, weight convention) governs the lexicon,
permutations, and gamma, so embeddings from separate invocations are
comparable exactly when their configs match; a hash of the config is stored
in embedding-file headers and checked on read.

Exit codes: 0 success, 1 input error, 2 config error, 3 enumeration cap.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis
from . import distributed as dist
from . import exact
from .embedding import (SHUFFLED_CONVOLUTION, SHUFFLED_PRODUCT, NodeLexicon,
                        make_spec)
from .tree import Tree, TreeParseError, parse_tree, read_corpus, serialize_tree

FORMAT_VERSION = 1
_KIND_BY_NAME = {"conv": SHUFFLED_CONVOLUTION, "prod": SHUFFLED_PRODUCT}


@dataclass
class RunConfig:
    dim: int = 8192
    lam: float = 0.4
    composition: str = "conv"
    master_seed: int = 42
    weights: str = "recursion"
    cd_compatible: bool = False

    def validate(self) -> None:
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if not 0.0 < self.lam <= 1.0:
            raise ConfigError("lambda must be in (0, 1]")
        if self.composition not in _KIND_BY_NAME:
            raise ConfigError(f"unknown composition {self.composition!r}")
        if self.weights not in ("recursion", "node_count"):
            raise ConfigError(f"unknown weight convention {self.weights!r}")

    def header(self) -> dict:
        h = {"format_version": FORMAT_VERSION, "dim": self.dim, "lambda": self.lam,
             "composition": self.composition, "seed": self.master_seed,
             "weight_convention": self.weights}
        h["config_hash"] = hashlib.sha256(
            json.dumps(h, sort_keys=True).encode()).hexdigest()[:16]
        return h


class ConfigError(ValueError):
    pass


def _num(v: float) -> str:
    return format(v, ".10g")


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dim", type=int, default=8192)
    p.add_argument("--lambda", dest="lam", type=float, default=0.4)
    p.add_argument("--composition", choices=("conv", "prod"), default="conv")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--weights", choices=("recursion", "node_count"),
                   default="recursion")
    p.add_argument("--cd-compatible", action="store_true",
                   help="multiply distributed kernel values by lambda to match "
                        "the exact kernel's scale")


def _config_from(args) -> RunConfig:
    cfg = RunConfig(args.dim, args.lam, args.composition, args.seed,
                    args.weights, getattr(args, "cd_compatible", False))
    cfg.validate()
    return cfg


def _build(cfg: RunConfig):
    spec = make_spec(_KIND_BY_NAME[cfg.composition], cfg.dim, cfg.master_seed)
    lex = NodeLexicon(cfg.master_seed, cfg.dim)
    return spec, lex


def _write_sidecar(output: str, cfg: RunConfig, extra: dict | None = None) -> None:
    payload = {"config": cfg.header(), **(extra or {})}
    with open(output + ".config.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)


def _load_corpus(args) -> list[Tree]:
    if getattr(args, "synthetic", None):
        gen = (analysis.grammar_trees if args.synthetic_style == "grammar"
               else analysis.random_trees)
        corpus_seed = (args.seed if args.synthetic_seed is None
                       else args.synthetic_seed)
        return gen(
            args.synthetic, corpus_seed, min_nodes=args.min_nodes,
            max_nodes=args.max_nodes, n_nonterminals=args.vocab_nt,
            n_terminals=args.vocab_t)
    if not args.corpus:
        raise ConfigError("either a corpus file or --synthetic N is required")
    return read_corpus(args.corpus)


def _add_synthetic_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--synthetic", type=int, metavar="N",
                   help="generate N seeded random trees instead of reading a file")
    p.add_argument("--synthetic-style", choices=("uniform", "grammar"),
                   default="uniform",
                   help="'uniform' draws labels independently; 'grammar' reuses "
                        "a small seeded rule set so trees share subtrees")
    p.add_argument("--synthetic-seed", type=int, default=None,
                   help="corpus seed (defaults to --seed)")
    p.add_argument("--min-nodes", type=int, default=4)
    p.add_argument("--max-nodes", type=int, default=15)
    p.add_argument("--vocab-nt", type=int, default=50)
    p.add_argument("--vocab-t", type=int, default=200)


# ----------------------------------------------------------------------
# Subcommands

def cmd_parse(args) -> int:
    n_ok = 0
    errors = []
    try:
        fh = open(args.input, encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    with fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                parse_tree(stripped)
                n_ok += 1
            except TreeParseError as exc:
                errors.append((lineno, str(exc)))
    for lineno, msg in errors:
        print(f"line {lineno}: {msg}", file=sys.stderr)
    print(f"{n_ok} trees, {len(errors)} errors")
    return 1 if errors else 0


def cmd_dt(args) -> int:
    cfg = _config_from(args)
    trees = _load_corpus(args)
    spec, lex = _build(cfg)
    header = cfg.header()
    if cfg.composition == "conv" and args.dim & (args.dim - 1):
        print("warning: direct convolution fallback (dim not a power of two)",
              file=sys.stderr)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for t in trees:
            dt = dist.distributed_tree(spec, lex, t, cfg.lam)
            fh.write(json.dumps({"tree": serialize_tree(t),
                                 "vector": dt.vector.tolist()}) + "\n")
    print(f"wrote {len(trees)} distributed trees to {args.output}")
    return 0


def read_dt_file(path, expected_header: dict | None = None):
    """Read a distributed-tree corpus file; returns (header, list of vectors)."""
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if expected_header is not None and header["config_hash"] != expected_header["config_hash"]:
            raise ConfigError("config hash mismatch between file and run config")
        records = [json.loads(line) for line in fh if line.strip()]
    return header, [np.asarray(r["vector"]) for r in records]


def cmd_kernel(args) -> int:
    cfg = _config_from(args)
    t1 = parse_tree(args.tree1)
    t2 = parse_tree(args.tree2)
    if args.method == "tk":
        value = exact.tk_exact(t1, t2, cfg.lam)
    elif args.method == "tk-fast":
        value = exact.tk_fast(t1, t2, cfg.lam)
    elif args.method == "oracle":
        value = exact.tk_by_feature_map(
            t1, t2, cfg.lam, dist.FragmentWeights(cfg.weights, cfg.lam))
    else:
        spec, lex = _build(cfg)
        a = dist.distributed_tree(spec, lex, t1, cfg.lam)
        b = dist.distributed_tree(spec, lex, t2, cfg.lam)
        value = dist.dtk(a, b)
        if cfg.cd_compatible:
            value *= cfg.lam
    print(_num(value))
    return 0


def cmd_gram(args) -> int:
    cfg = _config_from(args)
    trees = _load_corpus(args)
    spec, lex = (None, None)
    if args.kernel.startswith("dtk"):
        spec, lex = _build(cfg)
    gm = analysis.gram_matrix(trees, args.kernel, spec, lex, cfg.lam)
    gm.write_csv(args.output)
    _write_sidecar(args.output, cfg, {"kernel": args.kernel, "n_trees": len(trees)})
    print(f"wrote {len(trees)}x{len(trees)} gram matrix to {args.output}")
    return 0


def cmd_correlate(args) -> int:
    cfg = _config_from(args)
    trees = _load_corpus(args)
    lambdas = [float(x) for x in args.lambdas.split(",")]
    spec, lex = _build(cfg)
    report = analysis.correlation_experiment(trees, lambdas, spec, lex,
                                             max_pairs=args.max_pairs,
                                             seed=cfg.master_seed)
    _emit_report(report, args, cfg)
    for p in report.points:
        rho = "n/a" if p["spearman"] is None else _num(p["spearman"])
        print(f"lambda={p['lambda']:g} spearman={rho}")
    return 0


def cmd_props(args) -> int:
    cfg = _config_from(args)
    specs = [make_spec(SHUFFLED_CONVOLUTION, cfg.dim, cfg.master_seed),
             make_spec(SHUFFLED_PRODUCT, cfg.dim, cfg.master_seed)]
    norms = analysis.norm_drift_experiment(args.max_k, args.samples, specs)
    ortho = analysis.orthogonality_experiment(args.max_k, args.samples, specs)
    payload = {"norm_drift": json.loads(norms.to_json()),
               "orthogonality": json.loads(ortho.to_json())}
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
        _write_sidecar(args.output, cfg)
        print(f"wrote property report to {args.output}")
    else:
        print(json.dumps(payload, indent=2))
    return 0


def cmd_bench(args) -> int:
    cfg = _config_from(args)
    trees = _load_corpus(args)
    spec, lex = _build(cfg)
    report = analysis.timing_benchmark(trees, spec, lex, cfg.lam,
                                       reps=args.reps, warmup=args.warmup)
    _emit_report(report, args, cfg)
    for p in report.points:
        print(f"nodes [{p['bin_low']},{p['bin_high']}): "
              f"dtk_dot={_num(p['dtk_dot'])}s tk_exact={_num(p['tk_exact'])}s")
    return 0


def _emit_report(report, args, cfg) -> None:
    if not args.output:
        return
    if args.format == "csv":
        report.write_csv(args.output)
    else:
        report.write_json(args.output)
    _write_sidecar(args.output, cfg)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtk",
        description="Distributed tree kernels: embed trees as dense vectors "
                    "so kernel evaluation is a dot product "
                    "(defaults: dim=8192, lambda=0.4)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate a corpus file of trees")
    p.add_argument("input")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("dt", help="embed a corpus as distributed trees "
                                  "(defaults: dim=8192, lambda=0.4)")
    p.add_argument("corpus", nargs="?")
    p.add_argument("--output", "-o", required=True)
    _add_config_flags(p)
    _add_synthetic_flags(p)
    p.set_defaults(fn=cmd_dt)

    p = sub.add_parser("kernel", help="kernel value of two trees "
                                      "(defaults: dim=8192, lambda=0.4)")
    p.add_argument("tree1")
    p.add_argument("tree2")
    p.add_argument("--method", choices=("dtk", "tk", "tk-fast", "oracle"),
                   default="dtk")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_kernel)

    p = sub.add_parser("gram", help="pairwise kernel matrix over a corpus "
                                    "(defaults: dim=8192, lambda=0.4)")
    p.add_argument("corpus", nargs="?")
    p.add_argument("--kernel", choices=("dtk", "tk", "dtk_normalized",
                                        "tk_normalized"), default="dtk")
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_config_flags(p)
    _add_synthetic_flags(p)
    p.set_defaults(fn=cmd_gram)

    p = sub.add_parser("correlate", help="distributed-vs-exact kernel rank "
                                         "correlation (defaults: dim=8192)")
    p.add_argument("corpus", nargs="?")
    p.add_argument("--lambdas", default="0.2,0.4,0.6,0.8,1.0")
    p.add_argument("--max-pairs", type=int, default=500)
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    _add_config_flags(p)
    _add_synthetic_flags(p)
    p.set_defaults(fn=cmd_correlate)

    p = sub.add_parser("props", help="binding-operator statistics "
                                     "(defaults: dim=8192)")
    p.add_argument("--max-k", type=int, default=20)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--output", "-o")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_props)

    p = sub.add_parser("bench", help="timing curves for kernel evaluation "
                                     "(defaults: dim=8192, lambda=0.4)")
    p.add_argument("corpus", nargs="?")
    p.add_argument("--reps", type=int, default=30)
    p.add_argument("--warmup", type=int, default=5)
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("csv", "json"), default="json")
    _add_config_flags(p)
    _add_synthetic_flags(p)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (TreeParseError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except dist.EnumerationCapExceeded as exc:
        print(f"enumeration cap: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
