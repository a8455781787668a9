"""Command-line frontend: profile/gate inspection, alignment runs, benchmark
kernels, sensitivity sweeps and process-variation reports.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 runtime contract violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import device, gates, kernels, perf, scheduler
from .array import ArrayError, ArrayGeometry, ComputeExclusivityError, PresetContractError
from .isa import IsaError, SmcError
from .kernels import AlignmentRunConfig, KernelError
from .perf import LedgerError
from .profiles import ProfileError, TechnologyProfile, load_profile, shipped_profile

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_CONTRACT = 4


class ConfigError(ValueError):
    def __init__(self, field: str, msg: str):
        super().__init__(f"config field '{field}': {msg}")
        self.field = field


def _load_profile_arg(name_or_path: str) -> TechnologyProfile:
    p = Path(name_or_path)
    if p.suffix == ".json" or p.exists():
        return load_profile(p)
    return shipped_profile(name_or_path)


def _emit(path: Path | None, name: str, content: str) -> None:
    if path is None:
        sys.stdout.write(content)
        if not content.endswith("\n"):
            sys.stdout.write("\n")
    else:
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(content)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- run configuration ---------------------------------------------------------

_CONFIG_FIELDS = {
    "profile": str,
    "arrays": int,
    "rows": int,
    "cols": int,
    "fragment_len": int,
    "pattern_len": int,
    "n_patterns": int,
    "mutation_rate": float,
    "policy": str,
    "output_mode": str,
    "seed": int,
    "kmer_k": int,
    "sample_mode": str,
}

_POLICIES = ("naive", "naive_opt", "oracular", "oracular_opt", "kmer", "kmer_opt")


def run_config_from_json(path: str | Path) -> AlignmentRunConfig:
    """Parse and validate a run config file with field-level errors."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError("<file>", str(e)) from None
    kw = {}
    for key, value in raw.items():
        if key not in _CONFIG_FIELDS:
            raise ConfigError(key, "unknown field")
        want = _CONFIG_FIELDS[key]
        if want is float and isinstance(value, int):
            value = float(value)
        if not isinstance(value, want):
            raise ConfigError(key, f"expected {want.__name__}, got {type(value).__name__}")
        kw[key] = value
    cfg = AlignmentRunConfig(**kw)
    validate_run_config(cfg)
    return cfg


def validate_run_config(cfg: AlignmentRunConfig) -> None:
    if cfg.arrays < 1:
        raise ConfigError("arrays", "must be >= 1")
    if cfg.rows < 1:
        raise ConfigError("rows", "must be >= 1")
    if cfg.cols < 1:
        raise ConfigError("cols", "must be >= 1")
    if cfg.pattern_len < 1:
        raise ConfigError("pattern_len", "must be >= 1")
    if cfg.fragment_len < cfg.pattern_len:
        raise ConfigError("fragment_len", "must be >= pattern_len")
    if cfg.n_patterns < 1:
        raise ConfigError("n_patterns", "must be >= 1")
    if not 0.0 <= cfg.mutation_rate <= 1.0:
        raise ConfigError("mutation_rate", "must lie in [0, 1]")
    if cfg.policy not in _POLICIES:
        raise ConfigError("policy", f"must be one of {', '.join(_POLICIES)}")
    if cfg.output_mode not in ("score_buffer", "store_all"):
        raise ConfigError("output_mode", "must be score_buffer or store_all")
    if cfg.sample_mode not in ("spread", "uniform"):
        raise ConfigError("sample_mode", "must be spread or uniform")
    if cfg.policy.startswith("kmer") and not 1 <= cfg.kmer_k <= cfg.pattern_len:
        raise ConfigError("kmer_k", "must lie in [1, pattern_len]")
    try:
        shipped_profile(cfg.profile)
    except ProfileError as e:
        raise ConfigError("profile", str(e)) from None


# -- subcommands ------------------------------------------------------------------

def cmd_gates(args) -> int:
    profile = _load_profile_arg(args.profile)
    rows = []
    for name in device.standard_gate_names(profile) + ("nand", "or", "xor"):
        fam = device.GATE_FAMILIES[name]
        win = device.solve_gate_window(name, profile)
        doc = profile.gate_windows.get(name)
        rows.append({
            "gate": name,
            "inputs": fam.n_inputs,
            "preset": fam.preset,
            "feasible": win is not None,
            "solved_window_v": list(win) if win else None,
            "documented_window_v": list(doc) if doc else None,
        })
    mids = {r["gate"]: (r["solved_window_v"][0] + r["solved_window_v"][1]) / 2
            for r in rows if r["solved_window_v"]}
    ordering_ok = (mids["inv"] > mids["nor"] > mids["maj3"] > mids["maj5"]
                   and mids["copy"] > mids["nor"])
    trace = device.xor_infeasibility_trace(profile)
    report = {
        "profile": profile.name,
        "gates": rows,
        "window_ordering_inv_nor_maj3_maj5": ordering_ok,
        "xor_infeasibility": {
            str(p): {
                "currents_ua": [c * 1e6 for c in d["currents_a"]],
                "required_switching_ones_counts": d["required_switching_ones_counts"],
                "is_prefix_of_current_order": d["is_prefix_of_current_order"],
            }
            for p, d in trace["presets"].items()
        },
    }
    if args.format == "json":
        _emit(args.out_dir, "gates.json", _json(report))
    else:
        lines = [f"profile: {profile.name}"]
        for r in rows:
            win = (f"{r['solved_window_v'][0]:.4f}-{r['solved_window_v'][1]:.4f} V"
                   if r["solved_window_v"] else "infeasible")
            doc = (f" (documented {r['documented_window_v'][0]}-{r['documented_window_v'][1]} V)"
                   if r["documented_window_v"] else "")
            lines.append(f"  {r['gate']:5s} n={r['inputs']} preset={r['preset']} "
                         f"window {win}{doc}")
        lines.append(f"window ordering inv/copy > nor > maj3 > maj5: {ordering_ok}")
        lines.append("xor: no single-step window for either preset "
                     "(switching set is not a ones-count prefix)")
        _emit(args.out_dir, "gates.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def _config_from_args(args, validate: bool = True) -> AlignmentRunConfig:
    if args.config:
        cfg = run_config_from_json(args.config)
    else:
        cfg = AlignmentRunConfig()
    overrides = {}
    for field in ("profile", "policy", "seed", "output_mode", "rows", "cols",
                  "fragment_len", "pattern_len", "n_patterns"):
        v = getattr(args, field, None)
        if v is not None:
            overrides[field] = v
    if overrides:
        cfg = cfg.replace(**overrides)
    if validate:
        validate_run_config(cfg)
    return cfg


def cmd_align(args) -> int:
    cfg = _config_from_args(args, validate=False)
    updates = {}
    if args.reference:
        refs = kernels.read_sequences(args.reference)
        if not refs:
            raise ConfigError("reference", "no sequences in file")
        updates["reference"] = "".join(refs)
    if args.patterns:
        pats = kernels.read_sequences(args.patterns)
        if not pats:
            raise ConfigError("patterns", "no sequences in file")
        if any(len(p) != len(pats[0]) for p in pats):
            raise ConfigError("patterns", "patterns must share one length")
        updates.update(patterns=tuple(pats), pattern_len=len(pats[0]),
                       n_patterns=len(pats))
    if updates:
        cfg = cfg.replace(**updates)
    validate_run_config(cfg)
    records, ledger, n_patterns = kernels.run_alignment_workload(cfg)

    out = args.out_dir
    _emit(out, "scores.csv", kernels.records_to_csv(records))
    _emit(out, "ledger.json", ledger.to_json() + "\n")
    report = perf.throughput(ledger, n_patterns, include_shares=True)
    summary = {
        "config": {k: getattr(cfg, k) for k in _CONFIG_FIELDS},
        "records": len(records),
        "throughput": report.to_dict(),
        "stage_shares": report.stage_shares,
    }
    _emit(out, "summary.json", _json(summary))

    if args.verify:
        reference, patterns = kernels.generate_workload(cfg)
        geometry = ArrayGeometry(cfg.arrays, cfg.rows, cfg.cols)
        folded, _ = kernels.layout_reference(
            reference, cfg.fragment_len, geometry, cfg.pattern_len,
            output_mode=cfg.output_mode)
        cache: dict[tuple[int, int], np.ndarray] = {}
        bad = 0
        for rec in records:
            key = (rec.pattern_id, rec.row)
            if key not in cache:
                cache[key] = kernels.sliding_scores(folded.fragments[rec.row],
                                                    patterns[rec.pattern_id])
            if rec.score != int(cache[key][rec.loc]):
                bad += 1
        if bad:
            print(f"verification FAILED: {bad} of {len(records)} records "
                  "disagree with the software oracle", file=sys.stderr)
            return EXIT_VERIFY
        print(f"verified {len(records)} records against the software oracle")
    return EXIT_OK


def cmd_bench(args) -> int:
    profile = _load_profile_arg(args.profile)
    rng = np.random.default_rng(args.seed)
    out = args.out_dir
    if args.kernel == "bitcount":
        vectors = [int(v) for v in rng.integers(0, 2 ** 32, size=args.size, dtype=np.uint64)]
        counts, ledger = kernels.kernel_bitcount(vectors, 32, profile)
        ok = counts == [v.bit_count() for v in vectors]
        result = {"kernel": "bitcount", "vectors": len(vectors), "counts": counts}
    elif args.kernel == "stringmatch":
        words = ["".join(rng.choice(list("abcdefgh"), size=int(rng.integers(4, 12))))
                 for _ in range(args.size)]
        query = words[0][:4]
        hits, _records, ledger = kernels.kernel_stringmatch(words, query, profile)
        expect = sum(w[i:i + len(query)] == query
                     for w in words for i in range(len(w) - len(query) + 1))
        ok = hits == expect
        result = {"kernel": "stringmatch", "query": query, "occurrences": hits,
                  "expected": expect}
    elif args.kernel == "rc4":
        text = bytes(rng.integers(0, 256, size=args.size, dtype=np.uint8))
        key = b"benchkey"
        cipher, ledger = kernels.kernel_rc4(text, key, profile)
        plain, ledger2 = kernels.kernel_rc4(cipher, key, profile)
        ledger = ledger + ledger2
        ok = plain == text and cipher != text
        result = {"kernel": "rc4", "bytes": len(text),
                  "roundtrip_ok": plain == text}
    elif args.kernel == "wordcount":
        vocab = ["tide", "spin", "torque", "layer", "cell", "row"]
        words = [vocab[i] for i in rng.integers(0, len(vocab), size=args.size)]
        queries = vocab[:4]
        counts, ledger = kernels.kernel_wordcount(words, queries, profile)
        from collections import Counter
        expect = Counter(words)
        ok = all(counts[q] == expect[q] for q in queries)
        result = {"kernel": "wordcount", "counts": counts}
    else:
        raise ConfigError("kernel", f"unknown kernel {args.kernel!r}")

    result["throughput"] = perf.throughput(ledger, args.size).to_dict()
    _emit(out, f"bench_{args.kernel}.json", _json(result))
    _emit(out, f"bench_{args.kernel}_ledger.json", ledger.to_json() + "\n")
    if args.verify and not ok:
        print(f"verification FAILED for kernel {args.kernel}", file=sys.stderr)
        return EXIT_VERIFY
    if args.verify:
        print(f"kernel {args.kernel} verified against the software oracle")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    values: list = []
    for tok in args.values.split(","):
        tok = tok.strip()
        values.append(int(tok) if tok.isdigit() else tok)
    if args.axis == "pattern_length":
        points = perf.sweep(cfg, "pattern_len", values)
    elif args.axis == "profile":
        points = perf.sweep(cfg, "profile", values)
    elif args.axis == "rows":
        points = perf.sweep(cfg, "rows", values)
    else:
        raise ConfigError("axis", f"unknown sweep axis {args.axis!r}")
    lines = ["axis_value,match_rate_per_s,power_mw,compute_efficiency"]
    for v, rep in points:
        lines.append(f"{v},{rep.match_rate_per_s!r},{rep.power_mw!r},"
                     f"{rep.compute_efficiency!r}")
    _emit(args.out_dir, "sweep.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_variation(args) -> int:
    profile = _load_profile_arg(args.profile)
    deltas = [float(t) / 100.0 for t in args.deltas.split(",")]
    reports = device.variation_sweep(profile, deltas)
    body = []
    for r in reports:
        body.append({
            "delta_pct": r.scenario * 100.0,
            "windows_v": {g: list(w) for g, w in sorted(r.windows.items())},
            "overlaps": [list(p) for p in r.overlaps],
        })
    if args.format == "json":
        _emit(args.out_dir, "variation.json", _json({"profile": profile.name,
                                                     "scenarios": body}))
    else:
        lines = [f"profile: {profile.name}"]
        for r in body:
            lines.append(f"delta {r['delta_pct']:+.0f}%:")
            for g, w in r["windows_v"].items():
                lines.append(f"  {g:5s} {w[0]:.4f}-{w[1]:.4f} V")
            lines.append("  overlaps: " + (", ".join("-".join(p) for p in r["overlaps"])
                                           or "none"))
        _emit(args.out_dir, "variation.txt", "\n".join(lines) + "\n")
    return EXIT_OK


# -- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mtjpim",
        description="Step-accurate MTJ resistive-divider in-memory pattern "
                    "matching simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out-dir", type=Path, default=None,
                       help="write artifacts here instead of stdout")
        p.add_argument("--format", choices=("json", "csv", "text"), default="json")

    g = sub.add_parser("gates", help="gate library, windows, infeasibility trace")
    g.add_argument("--profile", default="near_term")
    common(g)
    g.set_defaults(fn=cmd_gates)

    a = sub.add_parser("align", help="run the two-phase alignment end to end")
    a.add_argument("--config", type=Path, default=None)
    a.add_argument("--reference", type=Path, default=None,
                   help="FASTA or plain-text reference")
    a.add_argument("--patterns", type=Path, default=None,
                   help="FASTA or one-per-line patterns")
    a.add_argument("--profile", default=None)
    a.add_argument("--policy", default=None, choices=_POLICIES)
    a.add_argument("--output-mode", dest="output_mode", default=None,
                   choices=("score_buffer", "store_all"))
    a.add_argument("--seed", type=int, default=None)
    a.add_argument("--rows", type=int, default=None)
    a.add_argument("--cols", type=int, default=None)
    a.add_argument("--fragment-len", dest="fragment_len", type=int, default=None)
    a.add_argument("--pattern-len", dest="pattern_len", type=int, default=None)
    a.add_argument("--n-patterns", dest="n_patterns", type=int, default=None)
    a.add_argument("--verify", action="store_true",
                   help="check every score against the software oracle")
    common(a)
    a.set_defaults(fn=cmd_align)

    b = sub.add_parser("bench", help="run one benchmark kernel")
    b.add_argument("kernel", choices=("bitcount", "stringmatch", "rc4", "wordcount"))
    b.add_argument("--profile", default="near_term")
    b.add_argument("--size", type=int, default=64)
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--verify", action="store_true")
    common(b)
    b.set_defaults(fn=cmd_bench)

    s = sub.add_parser("sweep", help="sensitivity sweep over one axis")
    s.add_argument("--axis", default="pattern_length",
                   choices=("pattern_length", "profile", "rows"))
    s.add_argument("--values", default="100,200,300")
    s.add_argument("--config", type=Path, default=None)
    s.add_argument("--profile", default=None)
    s.add_argument("--policy", default=None, choices=_POLICIES)
    s.add_argument("--seed", type=int, default=None)
    common(s)
    s.set_defaults(fn=cmd_sweep)

    v = sub.add_parser("variation", help="re-solve gate windows under "
                                         "switching-current variation")
    v.add_argument("--profile", default="near_term")
    v.add_argument("--deltas", default="-20,-10,-5,0,5,10,20",
                   help="comma-separated percentages")
    common(v)
    v.set_defaults(fn=cmd_variation)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, ProfileError, KernelError, LedgerError,
            scheduler.SchedulerError, device.DeviceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (PresetContractError, ComputeExclusivityError, SmcError) as e:
        print(f"contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except (ArrayError, IsaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
