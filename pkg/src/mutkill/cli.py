"""Batch pipeline driver: parse -> mutate -> TCE -> symbolic generation ->
kill matrix -> minimization -> report.

One binary with per-stage subcommands (`mutate`, `tce`, `gen`, `matrix`,
`minimize`, `report`) plus `all` for the whole pipeline.  Configuration is a
key=value file; unknown keys are rejected.  Identical manifests (including
the RNG seed) produce byte-identical output files.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import interp, lts as L, mutation, parser as P, solver as S, symex

DEFAULT_OPERATORS = mutation.SUPPORTED_OPERATORS


class ConfigError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunManifest:
    program: str
    out_dir: str
    seeds: Optional[str] = None
    mode: str = "semu"
    config: symex.Config = field(default_factory=symex.Config)
    operators: Tuple[str, ...] = DEFAULT_OPERATORS
    solver: str = "bounded"
    external_solver_cmd: Optional[str] = None
    step_budget: int = interp.DEFAULT_STEP_BUDGET


@dataclass(frozen=True)
class Report:
    generated: int
    tce_equivalent: int
    tce_duplicate: int
    explored: int
    surviving: int
    killed: int
    minimized_size: int
    per_mutant: Tuple[Tuple[int, str], ...]  # id -> killed | survived
    stats_text: str

    def as_text(self) -> str:
        lines = [
            f"mutants_generated={self.generated}",
            f"tce_equivalent={self.tce_equivalent}",
            f"tce_duplicate={self.tce_duplicate}",
            f"mutants_explored={self.explored}",
            f"mutants_surviving={self.surviving}",
            f"mutants_killed={self.killed}",
            f"minimized_suite_size={self.minimized_size}",
        ]
        for mid, outcome in self.per_mutant:
            lines.append(f"mutant_{mid}={outcome}")
        lines.append("")
        lines.append(self.stats_text.rstrip("\n"))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Config file
# ---------------------------------------------------------------------------

_BOOLS = {"true": True, "false": False, "1": True, "0": False}

_CONFIG_KEYS = {
    "PL", "CW", "PP", "PSS", "MPD", "NSD", "NTPM", "MODE",
    "BUDGET_SECONDS", "MAX_STATES", "MAX_DEPTH", "RNG_SEED",
    "USE_PRECONDITION", "OPERATORS", "STEP_BUDGET",
}


def parse_config(text: str, program: str = "", out_dir: str = "",
                 seeds: Optional[str] = None) -> RunManifest:
    """key=value lines, '#' comments; unknown keys rejected.  Unset keys take
    the selected defaults (PL=GMD2MS, CW=0, PP=0.25, PSS=RND, MPD=2,
    NSD=False, NTPM=5)."""
    cfg = {}
    operators: Tuple[str, ...] = DEFAULT_OPERATORS
    step_budget = interp.DEFAULT_STEP_BUDGET
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key == "PL":
                cfg["pl"] = value
            elif key == "CW":
                cfg["cw"] = int(value)
            elif key == "PP":
                cfg["pp"] = float(value)
            elif key == "PSS":
                cfg["pss"] = value
            elif key == "MPD":
                cfg["mpd"] = int(value)
            elif key == "NSD":
                cfg["nsd"] = _parse_bool(value)
            elif key == "NTPM":
                cfg["ntpm"] = int(value)
            elif key == "MODE":
                cfg["mode"] = value
            elif key == "BUDGET_SECONDS":
                cfg["budget_seconds"] = float(value)
            elif key == "MAX_STATES":
                cfg["max_states"] = int(value)
            elif key == "MAX_DEPTH":
                cfg["max_depth"] = int(value)
            elif key == "RNG_SEED":
                cfg["rng_seed"] = int(value)
            elif key == "USE_PRECONDITION":
                cfg["use_precondition"] = _parse_bool(value)
            elif key == "STEP_BUDGET":
                step_budget = int(value)
            elif key == "OPERATORS":
                operators = tuple(op.strip() for op in value.split(",") if op.strip())
        except (ValueError, ConfigError) as e:
            raise ConfigError(f"line {lineno}: {e}") from None
    try:
        config = symex.Config(**cfg)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return RunManifest(program=program, out_dir=out_dir, seeds=seeds,
                       mode=config.mode, config=config, operators=operators,
                       step_budget=step_budget)


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v not in _BOOLS:
        raise ConfigError(f"expected boolean, got {value!r}")
    return _BOOLS[v]


# ---------------------------------------------------------------------------
# Seed and test files
# ---------------------------------------------------------------------------


def parse_valuation(line: str) -> Dict[str, int]:
    out: Dict[str, int] = {}
    for pair in line.split(","):
        pair = pair.strip()
        if not pair:
            continue
        if "=" not in pair:
            raise ConfigError(f"expected name=value, got {pair!r}")
        name, value = (p.strip() for p in pair.split("=", 1))
        out[name] = int(value)
    return out


def read_seeds(text: str) -> List[Dict[str, int]]:
    seeds = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            seeds.append(parse_valuation(line))
    return seeds


def format_tests(tests: Sequence[symex.GeneratedTest]) -> str:
    lines = []
    for t in tests:
        lines.append(f"# mutant={t.mutant_id} site={t.site} k={t.k}")
        lines.append(interp.format_valuation(t.valuation()))
    return "\n".join(lines) + ("\n" if lines else "")


def read_tests(text: str) -> List[Dict[str, int]]:
    return read_seeds(text)


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def _stage(name):
    def wrap(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as e:  # tag the failing stage for the caller
            raise StageError(name, e) from e
    return wrap


def _load_program(path: str) -> L.Lts:
    with open(path, encoding="utf-8") as f:
        text = f.read()
    return L.lower_to_lts(P.parse_program(P.SourceProgram(text, path)))


def _make_handle(manifest: RunManifest, lts: L.Lts) -> S.SolverHandle:
    domains = lts.input_domains
    if manifest.solver == "external":
        if not manifest.external_solver_cmd:
            raise ConfigError("--external-solver-cmd required with --solver external")
        return S.SolverHandle.external(domains, manifest.external_solver_cmd)
    return S.SolverHandle.bounded(domains)


def _write(out_dir: str, name: str, content: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w", encoding="utf-8") as f:
        f.write(content)


def run_pipeline(manifest: RunManifest) -> Report:
    lts = _stage("parse")(_load_program, manifest.program)
    mutants = _stage("mutate")(mutation.generate_mutants, lts, manifest.operators)
    _write(manifest.out_dir, "mutants.tsv", mutation.mutants_tsv(mutants))

    tce = _stage("tce")(mutation.tce_filter, lts, mutants)
    _write(manifest.out_dir, "tce.tsv", mutation.tce_tsv(tce, mutants))
    kept = tce.kept()

    meta = _stage("meta")(mutation.build_meta_mutant, lts, mutants)
    seeds: List[Dict[str, int]] = []
    if manifest.seeds:
        with open(manifest.seeds, encoding="utf-8") as f:
            seeds = read_seeds(f.read())

    cfg = dataclasses.replace(manifest.config, mode=manifest.mode)
    handle = _make_handle(manifest, lts)
    tests, stats = _stage("gen")(symex.explore, meta, set(kept), seeds, cfg, handle)
    _write(manifest.out_dir, "tests.txt", format_tests(tests))
    _write(manifest.out_dir, "stats.txt", stats.as_text())

    suite = seeds + [t.valuation() for t in tests]
    km = _stage("matrix")(interp.compute_kill_matrix, meta, kept, suite,
                          manifest.step_budget)
    _write(manifest.out_dir, "matrix.csv", interp.matrix_csv(km))

    chosen = _stage("minimize")(interp.greedy_minimize, km)
    minimized = "\n".join(
        interp.format_valuation(dict(km.tests[i])) for i in chosen)
    _write(manifest.out_dir, "minimized.txt", minimized + ("\n" if minimized else ""))

    surviving = interp.surviving_mutants(km)
    per_mutant = tuple(
        (m, "survived" if m in surviving else "killed") for m in kept)
    report = Report(
        generated=len(mutants),
        tce_equivalent=len(tce.equivalent),
        tce_duplicate=sum(len(g) for g in tce.duplicate_groups),
        explored=len(kept),
        surviving=len(surviving),
        killed=len(kept) - len(surviving),
        minimized_size=len(chosen),
        per_mutant=per_mutant,
        stats_text=stats.as_text(),
    )
    _write(manifest.out_dir, "report.txt", report.as_text())
    return report


# ---------------------------------------------------------------------------
# Command line
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--program", required=True, help="MiniImp source file (.mimp)")
    p.add_argument("--seeds", help="seed file, one name=value list per line")
    p.add_argument("--mode", choices=["semu", "infection-only", "vanilla"],
                   default=None)
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--rng-seed", type=int, default=None)
    p.add_argument("--solver", choices=["bounded", "external"], default="bounded")
    p.add_argument("--external-solver-cmd", default=None)
    p.add_argument("--operators", default=None,
                   help="comma-separated operator subset")
    p.add_argument("--tests", help="generated-test file (matrix/minimize/report)")


def _manifest_from_args(args: argparse.Namespace) -> RunManifest:
    text = ""
    if args.config:
        with open(args.config, encoding="utf-8") as f:
            text = f.read()
    manifest = parse_config(text, program=args.program, out_dir=args.out,
                            seeds=args.seeds)
    cfg = manifest.config
    if args.mode:
        cfg = dataclasses.replace(cfg, mode=args.mode)
    if args.budget_seconds is not None:
        cfg = dataclasses.replace(cfg, budget_seconds=args.budget_seconds)
    if args.rng_seed is not None:
        cfg = dataclasses.replace(cfg, rng_seed=args.rng_seed)
    operators = manifest.operators
    if args.operators:
        operators = tuple(op.strip() for op in args.operators.split(",") if op.strip())
    return dataclasses.replace(
        manifest, mode=cfg.mode, config=cfg, operators=operators,
        solver=args.solver, external_solver_cmd=args.external_solver_cmd)


def _cmd_mutate(manifest: RunManifest, args) -> int:
    lts = _stage("parse")(_load_program, manifest.program)
    mutants = _stage("mutate")(mutation.generate_mutants, lts, manifest.operators)
    _write(manifest.out_dir, "mutants.tsv", mutation.mutants_tsv(mutants))
    print(f"generated {len(mutants)} mutants -> {manifest.out_dir}/mutants.tsv")
    return 0


def _cmd_tce(manifest: RunManifest, args) -> int:
    lts = _stage("parse")(_load_program, manifest.program)
    mutants = _stage("mutate")(mutation.generate_mutants, lts, manifest.operators)
    tce = _stage("tce")(mutation.tce_filter, lts, mutants)
    _write(manifest.out_dir, "tce.tsv", mutation.tce_tsv(tce, mutants))
    print(f"equivalent={len(tce.equivalent)} duplicates="
          f"{sum(len(g) for g in tce.duplicate_groups)} "
          f"surviving={len(tce.surviving)} -> {manifest.out_dir}/tce.tsv")
    return 0


def _cmd_gen(manifest: RunManifest, args) -> int:
    lts = _stage("parse")(_load_program, manifest.program)
    mutants = _stage("mutate")(mutation.generate_mutants, lts, manifest.operators)
    tce = _stage("tce")(mutation.tce_filter, lts, mutants)
    meta = _stage("meta")(mutation.build_meta_mutant, lts, mutants)
    seeds: List[Dict[str, int]] = []
    if manifest.seeds:
        with open(manifest.seeds, encoding="utf-8") as f:
            seeds = read_seeds(f.read())
    cfg = dataclasses.replace(manifest.config, mode=manifest.mode)
    handle = _make_handle(manifest, lts)
    tests, stats = _stage("gen")(symex.explore, meta, set(tce.kept()), seeds,
                                 cfg, handle)
    _write(manifest.out_dir, "tests.txt", format_tests(tests))
    _write(manifest.out_dir, "stats.txt", stats.as_text())
    print(f"generated {len(tests)} tests -> {manifest.out_dir}/tests.txt")
    return 0


def _matrix_for_args(manifest: RunManifest, args):
    lts = _stage("parse")(_load_program, manifest.program)
    mutants = _stage("mutate")(mutation.generate_mutants, lts, manifest.operators)
    tce = _stage("tce")(mutation.tce_filter, lts, mutants)
    meta = _stage("meta")(mutation.build_meta_mutant, lts, mutants)
    suite: List[Dict[str, int]] = []
    if manifest.seeds:
        with open(manifest.seeds, encoding="utf-8") as f:
            suite += read_seeds(f.read())
    if args.tests:
        with open(args.tests, encoding="utf-8") as f:
            suite += read_tests(f.read())
    km = _stage("matrix")(interp.compute_kill_matrix, meta, tce.kept(), suite,
                          manifest.step_budget)
    return km


def _cmd_matrix(manifest: RunManifest, args) -> int:
    km = _matrix_for_args(manifest, args)
    _write(manifest.out_dir, "matrix.csv", interp.matrix_csv(km))
    print(f"{len(km.tests)} tests x {len(km.mutant_ids)} mutants -> "
          f"{manifest.out_dir}/matrix.csv")
    return 0


def _cmd_minimize(manifest: RunManifest, args) -> int:
    km = _matrix_for_args(manifest, args)
    chosen = interp.greedy_minimize(km)
    content = "\n".join(interp.format_valuation(dict(km.tests[i])) for i in chosen)
    _write(manifest.out_dir, "minimized.txt", content + ("\n" if content else ""))
    print(f"minimized suite: {len(chosen)} tests -> {manifest.out_dir}/minimized.txt")
    return 0


def _cmd_all(manifest: RunManifest, args) -> int:
    report = run_pipeline(manifest)
    print(report.as_text(), end="")
    return 0


_COMMANDS = {
    "mutate": _cmd_mutate,
    "tce": _cmd_tce,
    "gen": _cmd_gen,
    "matrix": _cmd_matrix,
    "minimize": _cmd_minimize,
    "report": _cmd_all,
    "all": _cmd_all,
}


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mutkill",
        description="mutation-based test generation over MiniImp programs")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        _add_common(sub.add_parser(name))
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](_manifest_from_args(args), args)
    except (StageError, ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
