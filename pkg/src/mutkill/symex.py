"""Forking breadth-first symbolic execution over a meta-mutant.

The engine explores states in lock step by depth.  Original states fork a
mutant copy on first arrival at each targeted mutation point; the mutant
copy takes the mutated transition and must pass an infection check (its
state provably differs from some same-prefix original state) to stay alive.
Post-fork branching locations are counted against the checkpoint window;
at checkpoints a configurable proportion of branches is kept and pruned
branches may emit early tests from the prefix-difference constraint.  At
terminal locations the full kill constraint (output disequality) is solved.

Three modes share the machinery: `semu` (all of the above), `infection-only`
(solve the state-difference constraint right at the mutation point and drop
the mutant), and `vanilla` (ignore mutants; one test per terminal path).
"""

from __future__ import annotations

import itertools
import math
import random
import time
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from . import solver as S
from . import terms as T
from .interp import run_lts
from .lts import Lts, MUT_ID, distance_to_output
from .mutation import MetaMutant
from .terms import BoolTerm, Cmp, IntTerm, Lit, Var

FOLLOW = "follow"
RELEASE = "release"
PRUNE = "prune"

KEEP = "keep"

SITE_CHECKPOINT = "checkpoint"
SITE_TERMINAL = "terminal"


class DepthMismatch(Exception):
    pass


@dataclass(frozen=True)
class Config:
    pl: str = "GMD2MS"  # GMD2MS | SMD2MS
    cw: int = 0
    pp: float = 0.25
    pss: str = "RND"  # RND | MDO
    mpd: int = 2
    nsd: bool = False
    ntpm: int = 5
    mode: str = "semu"  # semu | infection-only | vanilla
    budget_seconds: float = 60.0
    max_states: Optional[int] = None
    max_depth: int = 200
    rng_seed: int = 0
    use_precondition: bool = True

    def __post_init__(self):
        if self.pl not in ("GMD2MS", "SMD2MS"):
            raise ValueError(f"bad PL {self.pl!r}")
        if self.pss not in ("RND", "MDO"):
            raise ValueError(f"bad PSS {self.pss!r}")
        if not 0.0 <= self.pp <= 1.0:
            raise ValueError(f"PP outside [0,1]: {self.pp}")
        if self.cw < 0 or self.mpd < 0 or self.ntpm < 1:
            raise ValueError("bad heuristic parameter")
        if self.mode not in ("semu", "infection-only", "vanilla"):
            raise ValueError(f"bad mode {self.mode!r}")


@dataclass(frozen=True)
class SymbolicState:
    path: BoolTerm  # over input symbols
    store: Tuple[Tuple[str, IntTerm], ...]  # every program variable bound
    out: Tuple[IntTerm, ...]  # symbolic output trace so far
    loc: int
    mut_id: int  # 0 = original
    depth: int
    trail: Tuple[int, ...] = ()  # taken-transition indices, for prefix pairing
    fork_depth: Optional[int] = None
    fork_trail: Optional[Tuple[int, ...]] = None
    checkpoints_passed: int = 0
    branch_count: int = 0  # post-fork branching locations traversed
    seed_following: bool = False
    compatible_seeds: Tuple[int, ...] = ()
    forked: frozenset = frozenset()  # mutant IDs already forked on this path
    status: str = "live"  # live | terminal | error
    uid: int = -1
    parent_uid: int = -1

    def store_map(self) -> Dict[str, IntTerm]:
        return dict(self.store)


@dataclass(frozen=True)
class GeneratedTest:
    inputs: Tuple[Tuple[str, int], ...]
    mutant_id: int
    site: str  # checkpoint | terminal
    k: int  # prefix length at generation

    def valuation(self) -> Dict[str, int]:
        return dict(self.inputs)


@dataclass
class ExplorationStats:
    states_created: int = 0
    pruned_infeasible: int = 0
    pruned_noninfected: int = 0
    pruned_pp: int = 0
    pruned_seed: int = 0
    solver_calls: int = 0
    tests_per_mutant: Dict[int, int] = field(default_factory=dict)
    wall_clock: float = 0.0
    checkpoint_events: List[Tuple[int, int, int]] = field(default_factory=list)
    # (mutant id, location, depth) per checkpoint hit; test instrumentation

    def as_text(self) -> str:
        per = ";".join(f"{m}:{n}" for m, n in sorted(self.tests_per_mutant.items()))
        rows = [
            f"states_created={self.states_created}",
            f"pruned_infeasible={self.pruned_infeasible}",
            f"pruned_noninfected={self.pruned_noninfected}",
            f"pruned_pp={self.pruned_pp}",
            f"pruned_seed={self.pruned_seed}",
            f"solver_calls={self.solver_calls}",
            f"tests_per_mutant={per}",
            f"wall_clock={self.wall_clock:.3f}",
        ]
        return "\n".join(rows) + "\n"


# ---------------------------------------------------------------------------
# Constraint builders
# ---------------------------------------------------------------------------


def _store_diff(a: SymbolicState, b: SymbolicState) -> BoolTerm:
    am, bm = a.store_map(), b.store_map()
    clauses = [Cmp("!=", am[v], bm[v]) for v in sorted(set(am) & set(bm))
               if am[v] != bm[v]]
    return T.disj(clauses)


def _out_diff(a: SymbolicState, b: SymbolicState) -> BoolTerm:
    if a.status != b.status and "live" not in (a.status, b.status):
        return T.TRUE  # error versus normal exit is observably different
    return S.tuple_disequality(a.out, b.out)


def state_difference(a: SymbolicState, b: SymbolicState) -> BoolTerm:
    """sigma_a != sigma_b: store, emitted output, or control location."""
    if a.loc != b.loc:
        return T.TRUE
    return T.disj([_store_diff(a, b), _out_diff(a, b)])


def build_partial_kill(original: SymbolicState, mutant: SymbolicState,
                       cfg: Config) -> BoolTerm:
    """phiP and phiM and (state difference), at equal prefix length.
    With NSD the difference clause is dropped."""
    if original.depth != mutant.depth:
        raise DepthMismatch(f"{original.depth} != {mutant.depth}")
    parts = [original.path, mutant.path]
    if not cfg.nsd:
        parts.append(state_difference(original, mutant))
    return T.conj(parts)


def build_kill(original: SymbolicState, mutant: SymbolicState) -> BoolTerm:
    """Full kill at terminals: output disequality only."""
    return T.conj([original.path, mutant.path, _out_diff(original, mutant)])


# ---------------------------------------------------------------------------
# Heuristic primitives (exposed for direct testing)
# ---------------------------------------------------------------------------


def is_checkpoint(mutant_state: SymbolicState, cfg: Config) -> bool:
    """True when the state's count of post-fork branching locations lands on
    the checkpoint grid: CW non-checkpoint branching statements between two
    consecutive checkpoints."""
    if mutant_state.branch_count <= 0:
        return False
    return mutant_state.branch_count % (cfg.cw + 1) == 0


def select_branches(candidates: Sequence[SymbolicState], cfg: Config,
                    dist: Dict[int, Optional[int]], rng: random.Random):
    """Keep max(1, floor(PP*n)) of the candidate successor states.
    RND draws uniformly; MDO keeps minimal distance-to-output, ties broken
    by lower location ID.  Returns (kept, pruned) in candidate order."""
    n = len(candidates)
    if n == 0:
        return [], []
    k = max(1, math.floor(cfg.pp * n))
    if k >= n:
        return list(candidates), []
    if cfg.pss == "MDO":
        order = sorted(range(n), key=lambda i: (
            dist.get(candidates[i].loc) if dist.get(candidates[i].loc) is not None
            else math.inf,
            candidates[i].loc, i))
        keep_idx = set(order[:k])
    else:
        keep_idx = set(rng.sample(range(n), k))
    kept = [candidates[i] for i in range(n) if i in keep_idx]
    pruned = [candidates[i] for i in range(n) if i not in keep_idx]
    return kept, pruned


def apply_precondition(state: SymbolicState, seeds: Sequence[Dict[str, int]],
                       cfg: Config, release_depth: Optional[int],
                       mutation_points: Set[int]) -> str:
    """Seeded-mode decision for one state: release once the precondition
    length is reached, follow while some seed satisfies the prefix condition
    (the membership condition for retained prefixes), prune otherwise."""
    if cfg.pl == "GMD2MS":
        if release_depth is not None and state.depth >= release_depth:
            return RELEASE
    else:  # SMD2MS: this path reached a mutated statement
        if state.loc in mutation_points:
            return RELEASE
    if any(T.holds(state.path, s) for s in seeds):
        return FOLLOW
    return PRUNE


def infection_check(mutant_state: SymbolicState, paired_original: SymbolicState,
                    handle: S.SolverHandle) -> str:
    """keep iff SAT(phiM and phiP and state difference)."""
    if mutant_state.depth != paired_original.depth:
        raise DepthMismatch(f"{mutant_state.depth} != {paired_original.depth}")
    c = T.conj([mutant_state.path, paired_original.path,
                state_difference(mutant_state, paired_original)])
    return KEEP if S.is_satisfiable(c, handle).is_sat else PRUNE


def pair_states(mutant_state: SymbolicState,
                originals_at_depth: Sequence[SymbolicState],
                handle: S.SolverHandle) -> Optional[SymbolicState]:
    """First original (frontier order) sharing the mutant's pre-fork prefix
    with jointly satisfiable path conditions."""
    prefix = mutant_state.fork_trail or ()
    for o in originals_at_depth:
        if o.mut_id != 0 or o.trail[: len(prefix)] != prefix:
            continue
        if S.is_satisfiable(T.conj([o.path, mutant_state.path]), handle).is_sat:
            return o
    return None


# ---------------------------------------------------------------------------
# Expansion
# ---------------------------------------------------------------------------


def _resolve(term, mut_id: int, store: Dict[str, IntTerm]):
    return T.subst(T.subst(term, {MUT_ID: Lit(mut_id)}), store)


def enumerate_terminals(meta: MetaMutant, mut_id: int, max_depth: int,
                        through: Optional[int] = None) -> List[SymbolicState]:
    """All terminal states up to max_depth, with NO feasibility pruning
    beyond structural falsehood of single guards.  Used for exhaustive path
    analyses; `through` restricts to paths visiting that location."""
    lts = meta.lts
    succ = lts.successors()
    init = SymbolicState(
        path=T.TRUE,
        store=tuple((v, Var(v) if v in dict(lts.inputs) else Lit(0))
                    for v in lts.variables if v != MUT_ID),
        out=(), loc=lts.entry, mut_id=mut_id, depth=0,
    )
    frontier = [(init, lts.entry == (through if through is not None else lts.entry))]
    done: List[SymbolicState] = []
    while frontier:
        nxt = []
        for s, visited in frontier:
            if s.loc in lts.terminals:
                if through is None or visited:
                    done.append(replace(s, status="terminal"))
                continue
            if s.depth >= max_depth:
                continue
            store = s.store_map()
            for i, (_, gc, dst) in enumerate(succ[s.loc]):
                g = T.normalize_bool(_resolve(gc.guard, mut_id, store))
                if g == T.FALSE:
                    continue  # inapplicable mutant-selector branch
                new_store = dict(store)
                for name, term in gc.update:
                    new_store[name] = T.normalize_int(_resolve(term, mut_id, store))
                new_out = s.out
                if gc.emit is not None:
                    new_out = s.out + (T.normalize_int(_resolve(gc.emit, mut_id, store)),)
                pc = T.conj([s.path] + ([] if g == T.TRUE else [g]))
                nxt.append((replace(
                    s, path=pc, store=tuple(sorted(new_store.items())), out=new_out,
                    loc=dst, depth=s.depth + 1, trail=s.trail + (i,),
                ), visited or dst == through))
        frontier = nxt
    return done


# ---------------------------------------------------------------------------
# The engine
# ---------------------------------------------------------------------------


class _Engine:
    def __init__(self, meta: MetaMutant, targets: Set[int],
                 seeds: Sequence[Dict[str, int]], cfg: Config,
                 handle: S.SolverHandle):
        self.meta = meta
        self.lts = meta.lts
        self.succ = self.lts.successors()
        self.targets = set(targets)
        self.seeds = list(seeds)
        self.cfg = cfg
        self.handle = handle
        self.rng = random.Random(cfg.rng_seed)
        self.dist = distance_to_output(self.lts)
        self.stats = ExplorationStats()
        self.tests: List[GeneratedTest] = []
        self.seen_models: Dict[int, Set[Tuple[Tuple[str, int], ...]]] = {}
        self.finished_orig: List[SymbolicState] = []
        self.finished_mut: List[SymbolicState] = []
        self.uids = itertools.count()
        self.deadline = time.monotonic() + cfg.budget_seconds
        self.points = {
            loc for loc, mids in meta.mutation_points.items()
            if self.targets & set(mids)
        }
        # branchiness is a property of the program, not of the meta-mutant's
        # selector fanout
        self.branch_locs = {
            loc for loc in self.lts.locations
            if self.lts.info(loc).kind == "branch"
        }
        self.release_depth = self._gmd2ms_depth() if cfg.pl == "GMD2MS" else None

    # -- helpers -----------------------------------------------------------

    def sat(self, c: BoolTerm) -> S.SolverResult:
        self.stats.solver_calls += 1
        return S.is_satisfiable(c, self.handle)

    def budget_left(self) -> bool:
        if time.monotonic() > self.deadline:
            return False
        if self.cfg.max_states is not None and \
                self.stats.states_created >= self.cfg.max_states:
            return False
        return True

    def _gmd2ms_depth(self) -> Optional[int]:
        """Smallest seed-execution prefix length reaching a targeted
        mutation point."""
        if not self.seeds or not self.points:
            return None
        best = None
        for seed in self.seeds:
            tr = run_lts(self.lts, seed, extra={MUT_ID: 0})
            for i, (_, loc) in enumerate(tr.couples):
                if loc in self.points:
                    best = i if best is None else min(best, i)
                    break
        return best

    def record_test(self, mutant_id: int, model: Dict[str, int], site: str,
                    k: int) -> bool:
        key = tuple(sorted(model.items()))
        seen = self.seen_models.setdefault(mutant_id, set())
        if key in seen:
            return False
        count = self.stats.tests_per_mutant.get(mutant_id, 0)
        if mutant_id != 0 and count >= self.cfg.ntpm:
            return False
        seen.add(key)
        self.stats.tests_per_mutant[mutant_id] = count + 1
        self.tests.append(GeneratedTest(inputs=key, mutant_id=mutant_id,
                                        site=site, k=k))
        return True

    def quota_left(self, mutant_id: int) -> bool:
        return self.stats.tests_per_mutant.get(mutant_id, 0) < self.cfg.ntpm

    # -- state construction ------------------------------------------------

    def initial_state(self) -> SymbolicState:
        dom = dict(self.lts.inputs)
        store = tuple((v, Var(v) if v in dom else Lit(0))
                      for v in self.lts.variables if v != MUT_ID)
        seeded = self.cfg.use_precondition and bool(self.seeds)
        self.stats.states_created += 1
        return SymbolicState(
            path=T.TRUE, store=store, out=(), loc=self.lts.entry, mut_id=0,
            depth=0, seed_following=bool(seeded),
            compatible_seeds=tuple(range(len(self.seeds))) if seeded else (),
            uid=next(self.uids),
        )

    def expand(self, s: SymbolicState) -> List[SymbolicState]:
        """Successors of one live state; infeasible and seed-incompatible
        branches pruned, division-by-zero branches finished as errors."""
        store = s.store_map()
        outs = self.succ[s.loc]
        branching = s.loc in self.branch_locs
        results: List[SymbolicState] = []
        error_keys: Set[str] = set()
        for i, (_, gc, dst) in enumerate(outs):
            guard = _resolve(gc.guard, s.mut_id, store)
            g = T.normalize_bool(guard)
            if g == T.FALSE:
                continue  # selector branch for a different mutant
            upd = {name: _resolve(term, s.mut_id, store) for name, term in gc.update}
            emit = _resolve(gc.emit, s.mut_id, store) if gc.emit is not None else None
            # division safety: split off error paths, guard the main path
            guard_divs = [d for d in T.divisors(guard)]
            later_divs = [d for name in upd for d in T.divisors(upd[name])]
            if emit is not None:
                later_divs += T.divisors(emit)
            nonzero = [Cmp("!=", d, Lit(0)) for d in guard_divs + later_divs]
            for j, d in enumerate(guard_divs + later_divs):
                key = repr(T.normalize_int(d))
                in_guard = j < len(guard_divs)
                if in_guard and key in error_keys:
                    continue  # complementary guard shares the same divisors
                parts = [s.path] + nonzero[:j] + [Cmp("==", d, Lit(0))]
                if not in_guard:
                    parts.insert(1, g)
                err_pc = T.conj(parts)
                if T.normalize_bool(err_pc) == T.FALSE:
                    continue
                if in_guard:
                    error_keys.add(key)
                res = self.sat(err_pc)
                if res.is_sat:
                    err = replace(s, path=err_pc, loc=s.loc, depth=s.depth + 1,
                                  trail=s.trail + (i,), status="error",
                                  uid=next(self.uids), parent_uid=s.uid)
                    self.stats.states_created += 1
                    (self.finished_orig if s.mut_id == 0 else
                     self.finished_mut).append(err)
            pc = T.conj([s.path] + ([] if g == T.TRUE else [g]) + nonzero)
            if T.normalize_bool(pc) == T.FALSE:
                self.stats.pruned_infeasible += 1
                continue
            new_store = dict(store)
            for name, term in upd.items():
                new_store[name] = T.normalize_int(term)
            new_out = s.out + (T.normalize_int(emit),) if emit is not None else s.out
            nxt = replace(
                s, path=pc, store=tuple(sorted(new_store.items())), out=new_out,
                loc=dst, depth=s.depth + 1, trail=s.trail + (i,),
                branch_count=s.branch_count + (1 if branching and s.mut_id else 0),
                uid=next(self.uids), parent_uid=s.uid,
            )
            # seeded mode: release / follow / prune
            if nxt.seed_following:
                verdict = apply_precondition(nxt, self.seeds, self.cfg,
                                             self.release_depth, self.points)
                if verdict == RELEASE:
                    nxt = replace(nxt, seed_following=False, compatible_seeds=())
                elif verdict == PRUNE:
                    self.stats.pruned_seed += 1
                    continue
                else:
                    compat = tuple(
                        j for j in nxt.compatible_seeds
                        if T.holds(nxt.path, self.seeds[j])
                    )
                    nxt = replace(nxt, compatible_seeds=compat)
            feasible = nxt.seed_following and nxt.compatible_seeds
            if not feasible:
                res = self.sat(nxt.path)
                if not res.is_sat:
                    self.stats.pruned_infeasible += 1
                    continue
            self.stats.states_created += 1
            results.append(nxt)
        return results

    def fork(self, s: SymbolicState) -> List[SymbolicState]:
        """Mutant copies for targeted mutants at this mutation point, first
        arrival per path only."""
        mids = [m for m in self.meta.mutation_points.get(s.loc, ())
                if m in self.targets and m not in s.forked]
        forks = []
        for m in mids:
            self.stats.states_created += 1
            forks.append(replace(
                s, mut_id=m, fork_depth=s.depth, fork_trail=s.trail,
                checkpoints_passed=0, branch_count=0,
                seed_following=False, compatible_seeds=(),
                uid=next(self.uids), parent_uid=s.uid,
            ))
        return forks

    # -- test generation ---------------------------------------------------

    def try_early_test(self, pruned: SymbolicState,
                       originals: Sequence[SymbolicState]) -> None:
        if not self.quota_left(pruned.mut_id):
            return
        if pruned.checkpoints_passed < self.cfg.mpd:
            return
        paired = pair_states(pruned, originals, self.handle)
        if paired is None:
            return
        c = build_partial_kill(paired, pruned, self.cfg)
        res = self.sat(c)
        if res.is_sat and res.model is not None:
            model = self._complete_model(res.model)
            self.record_test(pruned.mut_id, model, SITE_CHECKPOINT, pruned.depth)

    def _complete_model(self, model: Dict[str, int]) -> Dict[str, int]:
        # constraints may not mention every input; default missing to lo
        full = dict(model)
        for name, (lo, _) in self.lts.inputs:
            full.setdefault(name, lo)
        return full

    def terminal_kill_phase(self) -> None:
        by_mutant: Dict[int, List[SymbolicState]] = {}
        for st in self.finished_mut:
            by_mutant.setdefault(st.mut_id, []).append(st)
        for m in sorted(by_mutant):
            for st in by_mutant[m]:
                if not self.quota_left(m):
                    break
                prefix = st.fork_trail or ()
                for o in self.finished_orig:
                    if o.trail[: len(prefix)] != prefix:
                        continue
                    res = self.sat(build_kill(o, st))
                    if res.is_sat and res.model is not None:
                        self.record_test(m, self._complete_model(res.model),
                                         SITE_TERMINAL, st.depth)
                        break

    def vanilla_tests(self) -> None:
        for o in self.finished_orig:
            res = self.sat(o.path)
            if res.is_sat and res.model is not None:
                self.record_test(0, self._complete_model(res.model),
                                 SITE_TERMINAL, o.depth)

    # -- main loop ---------------------------------------------------------

    def run(self) -> Tuple[List[GeneratedTest], ExplorationStats]:
        start = time.monotonic()
        if self.cfg.max_states == 0:
            self.stats.wall_clock = time.monotonic() - start
            return [], self.stats
        frontier: List[SymbolicState] = [self.initial_state()]
        while frontier and self.budget_left():
            if frontier[0].depth >= self.cfg.max_depth:
                break
            successors: List[SymbolicState] = []
            orig_succ: Dict[int, List[SymbolicState]] = {}
            new_fork_children: Dict[int, List[SymbolicState]] = {}
            parents_map: Dict[int, SymbolicState] = {}
            work = deque(frontier)
            while work:
                s = work.popleft()
                parents_map[s.uid] = s
                if s.loc in self.lts.terminals:
                    done = replace(s, status="terminal")
                    (self.finished_orig if s.mut_id == 0
                     else self.finished_mut).append(done)
                    continue
                if not self.budget_left():
                    continue
                if s.mut_id == 0 and self.cfg.mode != "vanilla" \
                        and s.loc in self.points:
                    forks = self.fork(s)
                    for f in reversed(forks):
                        work.appendleft(f)
                    if forks:
                        frontier_forked = replace(s, forked=s.forked |
                                                  {f.mut_id for f in forks})
                        s = frontier_forked
                kids = self.expand(s)
                successors.extend(kids)
                if s.mut_id == 0:
                    orig_succ[s.uid] = kids
                elif s.fork_depth == s.depth:  # fresh fork expanding now
                    new_fork_children[s.parent_uid] = \
                        new_fork_children.get(s.parent_uid, []) + kids
            # infection filtering for freshly forked mutants
            dropped: Set[int] = set()
            for parent_uid, kids in new_fork_children.items():
                paired = orig_succ.get(parent_uid, [])
                for k in kids:
                    infected = True
                    if paired:
                        infected = False
                        for o in paired:
                            self.stats.solver_calls += 1
                            if infection_check(k, o, self.handle) == KEEP:
                                infected = True
                                break
                    if not infected:
                        self.stats.pruned_noninfected += 1
                        dropped.add(k.uid)
                    elif self.cfg.mode == "infection-only":
                        self._infection_only_test(k, paired)
                        dropped.add(k.uid)
            successors = [x for x in successors if x.uid not in dropped]
            # checkpoint selection for mutant branches
            if self.cfg.mode == "semu":
                successors = self._apply_checkpoints(successors, parents_map)
            frontier = successors
        if self.cfg.mode == "vanilla":
            self.vanilla_tests()
        elif self.cfg.mode == "semu":
            self.terminal_kill_phase()
        self.stats.wall_clock = time.monotonic() - start
        return list(self.tests), self.stats

    def _infection_only_test(self, mutant_child: SymbolicState,
                             paired: Sequence[SymbolicState]) -> None:
        if not self.quota_left(mutant_child.mut_id):
            return
        for o in paired:
            c = T.conj([o.path, mutant_child.path,
                        state_difference(mutant_child, o)])
            res = self.sat(c)
            if res.is_sat and res.model is not None:
                self.record_test(mutant_child.mut_id,
                                 self._complete_model(res.model),
                                 SITE_CHECKPOINT, mutant_child.depth)
                return

    def _apply_checkpoints(self, successors: List[SymbolicState],
                           parents: Dict[int, SymbolicState]):
        groups: Dict[Tuple[int, int], List[SymbolicState]] = {}
        passthrough: List[SymbolicState] = []
        for x in successors:
            p = parents.get(x.parent_uid)
            if x.mut_id != 0 and p is not None and p.mut_id == x.mut_id \
                    and p.loc in self.branch_locs and is_checkpoint(x, self.cfg):
                groups.setdefault((x.mut_id, p.loc), []).append(x)
            else:
                passthrough.append(x)
        kept_uids: Set[int] = set()
        originals = [x for x in successors if x.mut_id == 0]
        for (m, loc), cands in sorted(groups.items()):
            self.stats.checkpoint_events.extend(
                (m, loc, c.depth) for c in cands[:1])
            kept, pruned = select_branches(cands, self.cfg, self.dist, self.rng)
            for c in kept:
                kept_uids.add(c.uid)
            for c in pruned:
                self.stats.pruned_pp += 1
                bumped = replace(c, checkpoints_passed=c.checkpoints_passed + 1)
                self.try_early_test(bumped, originals)
        bump = {u for (m, loc), cands in groups.items() for u in
                (c.uid for c in cands)}
        out = []
        for x in successors:
            if x.uid in bump and x.uid not in kept_uids:
                continue
            if x.uid in kept_uids:
                x = replace(x, checkpoints_passed=x.checkpoints_passed + 1)
            out.append(x)
        return out


def explore(meta: MetaMutant, targets: Iterable[int],
            seeds: Sequence[Dict[str, int]], cfg: Config,
            handle: S.SolverHandle) -> Tuple[List[GeneratedTest], ExplorationStats]:
    """Run the engine.  Budget exhaustion returns partial results; solver
    failures propagate as SolverFailure."""
    return _Engine(meta, set(targets), seeds, cfg, handle).run()
