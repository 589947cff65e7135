"""Pruned backtracking for m-ovoids and 1-systems.

The m-ovoid search decides one point per node (in, then out), always taking
the smallest undecided point of the first generator that still needs points.
After each decision it propagates two rules to a fixed point:

* capacity: every generator holds exactly m chosen points, and the total is
  m(q^(r+1)+1);
* tangent: a chosen point P sees (m-1)(q^r+1)+1 chosen points in P^perp, an
  unchosen one sees m(q^r+1).

The 1-system search adds lines one at a time, branching on the first plane
that is not yet met in q+1 covered points.

Both searches split the tree at a fixed depth and solve the resulting
subtrees independently, so results do not depend on the number of workers.
"""

from __future__ import annotations

import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .constructions import OneSystem, is_one_system
from .ovoid import PointSet, is_m_ovoid, ovoid_size
from .quadric import DEFAULT_MAX_GENERATORS, Quadric, bits

FOUND = "found"
EXHAUSTED = "exhausted-none"
BUDGET = "budget-exceeded"
MODES = ("m-ovoid", "one-system")
FRONTIER_DEPTH = 4


@dataclass
class SearchProblem:
    quadric: Quadric
    m: int = 0
    mode: str = "m-ovoid"
    node_limit: int = 10_000_000
    time_limit: float = 600.0
    tangent_pruning: bool = True
    capacity_pruning: bool = True
    seed: tuple[int, ...] = ()          # points (m-ovoid) or line bitsets (one-system) forced in
    max_generators: int = DEFAULT_MAX_GENERATORS

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.node_limit < 1 or self.time_limit <= 0:
            raise ValueError("budget must be positive")
        if self.mode == "m-ovoid":
            top = (self.quadric.q ** self.quadric.r - 1) // (self.quadric.q - 1)
            if not 0 <= self.m <= top:
                raise ValueError(f"m must lie in [0, {top}]")
        elif self.quadric.r != 3:
            raise ValueError("1-system search needs a rank-3 quadric")


@dataclass
class SearchOutcome:
    status: str
    nodes: int
    elapsed: float
    witness: PointSet | OneSystem | None = None
    problem: SearchProblem | None = field(default=None, repr=False)

    def as_dict(self, elapsed: bool = False) -> dict:
        p = self.problem
        d = {
            "q": p.quadric.q, "r": p.quadric.r, "mode": p.mode,
            "m": p.m if p.mode == "m-ovoid" else p.quadric.q + 1,
            "status": self.status, "nodes": self.nodes,
            "tangent_pruning": p.tangent_pruning, "capacity_pruning": p.capacity_pruning,
            "seed_size": len(p.seed),
        }
        if isinstance(self.witness, PointSet):
            d["witness"] = self.witness.ids()
        elif isinstance(self.witness, OneSystem):
            d["witness"] = [bits(l) for l in self.witness.lines]
        else:
            d["witness"] = None
        if elapsed:
            d["elapsed"] = round(self.elapsed, 3)
        return d


class _Stop(Exception):
    """Raised inside a subtree when its node or time budget runs out."""


# -- m-ovoid engine -------------------------------------------------------------------------

class _OvoidState:
    """Assignment with incremental counters and an undo trail."""

    def __init__(self, problem: SearchProblem):
        Q = problem.quadric
        self.Q = Q
        self.m = problem.m
        self.tangent = problem.tangent_pruning
        self.capacity = problem.capacity_pruning
        gens = Q.generator_masks(problem.max_generators)
        self.gens = [bits(g) for g in gens]
        self.gens_of = [[] for _ in range(Q.k)]
        for gi, pts in enumerate(self.gens):
            for p in pts:
                self.gens_of[p].append(gi)
        self.perp = [bits(Q.perp_masks[i]) for i in range(Q.k)]
        qr = Q.q ** Q.r
        self.t_in = (self.m - 1) * (qr + 1) + 1
        self.t_out = self.m * (qr + 1)
        self.target = ovoid_size(Q, self.m)
        self.size_gen = len(self.gens[0])

        self.val = [0] * Q.k            # 1 in, -1 out, 0 undecided
        self.g_in = [0] * len(self.gens)
        self.g_und = [self.size_gen] * len(self.gens)
        self.p_in = [0] * Q.k
        self.p_und = [len(self.perp[i]) for i in range(Q.k)]
        self.n_in = 0
        self.n_und = Q.k
        self.trail: list[int] = []

    def assign(self, p: int, v: int) -> None:
        self.val[p] = v
        self.trail.append(p)
        self.n_und -= 1
        for gi in self.gens_of[p]:
            self.g_und[gi] -= 1
        for x in self.perp[p]:
            self.p_und[x] -= 1
        if v == 1:
            self.n_in += 1
            for gi in self.gens_of[p]:
                self.g_in[gi] += 1
            for x in self.perp[p]:
                self.p_in[x] += 1

    def undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            p = self.trail.pop()
            v = self.val[p]
            self.val[p] = 0
            self.n_und += 1
            for gi in self.gens_of[p]:
                self.g_und[gi] += 1
            for x in self.perp[p]:
                self.p_und[x] += 1
            if v == 1:
                self.n_in -= 1
                for gi in self.gens_of[p]:
                    self.g_in[gi] -= 1
                for x in self.perp[p]:
                    self.p_in[x] -= 1

    def _force_all(self, pts, v, queue) -> bool:
        for x in pts:
            if self.val[x] == 0:
                self.assign(x, v)
                queue.append(x)
        return True

    def propagate(self, queue: list[int]) -> bool:
        """Apply the enabled rules until nothing changes; False on conflict."""
        m = self.m
        while queue:
            p = queue.pop()
            if self.capacity:
                if self.n_in > self.target or self.n_in + self.n_und < self.target:
                    return False
                for gi in self.gens_of[p]:
                    a, u = self.g_in[gi], self.g_und[gi]
                    if a > m or a + u < m:
                        return False
                    if u and a == m:
                        self._force_all(self.gens[gi], -1, queue)
                    elif u and a + u == m:
                        self._force_all(self.gens[gi], 1, queue)
            if self.tangent:
                for x in self.perp[p]:
                    if not self._tangent_point(x, queue):
                        return False
        return True

    def _tangent_point(self, x: int, queue: list[int]) -> bool:
        a, u, v = self.p_in[x], self.p_und[x], self.val[x]
        if v:
            t = self.t_in if v == 1 else self.t_out
            if a > t or a + u < t:
                return False
            if u and a == t:
                self._force_all(self.perp[x], -1, queue)
            elif u and a + u == t:
                self._force_all(self.perp[x], 1, queue)
            return True
        # x itself is undecided and counted in u
        ok_in = a + 1 <= self.t_in <= a + u
        ok_out = a <= self.t_out <= a + u - 1
        if not (ok_in or ok_out):
            return False
        if ok_in != ok_out:
            self.assign(x, 1 if ok_in else -1)
            queue.append(x)
        return True

    def branch_point(self) -> int | None:
        """Smallest undecided point of the first generator short of m; None at a leaf."""
        for gi, pts in enumerate(self.gens):
            if self.g_in[gi] < self.m:
                for p in pts:
                    if self.val[p] == 0:
                        return p
                return -1       # dead end: the generator cannot be filled
        return None

    def leaf_witness(self) -> int | None:
        if any(a != self.m for a in self.g_in):
            return None
        mask = 0
        for p, v in enumerate(self.val):
            if v == 1:
                mask |= 1 << p
        return mask

    def decide(self, p: int, v: int) -> bool:
        self.assign(p, v)
        return self.propagate([p])


class _Budget:
    def __init__(self, nodes: int, deadline: float):
        self.left = nodes
        self.deadline = deadline
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        self.left -= 1
        if self.left < 0 or (self.used & 255 == 0 and time.monotonic() > self.deadline):
            raise _Stop


def _ovoid_root(problem: SearchProblem) -> _OvoidState | None:
    st = _OvoidState(problem)
    queue = []
    for p in problem.seed:
        if st.val[p] == -1:
            return None
        if st.val[p] == 0:
            st.assign(p, 1)
            queue.append(p)
    if problem.m == 0:
        for p in range(problem.quadric.k):
            if st.val[p] == 0:
                st.assign(p, -1)
                queue.append(p)
    queue = queue or list(range(problem.quadric.k))
    return st if st.propagate(queue) else None


def _ovoid_dfs(st: _OvoidState, budget: _Budget, depth: int | None, paths: list | None,
               prefix: tuple = ()) -> int | None:
    """Plain DFS; with ``depth`` set, record decision paths at that depth instead of descending."""
    p = st.branch_point()
    if p is None:
        return st.leaf_witness()
    if p < 0:
        return None
    if depth is not None and len(prefix) == depth:
        paths.append(prefix)
        return None
    for v in (1, -1):
        budget.tick()
        mark = len(st.trail)
        if st.decide(p, v):
            found = _ovoid_dfs(st, budget, depth, paths, prefix + ((p, v),))
            if found is not None:
                return found
        st.undo(mark)
    return None


def _ovoid_subtree(problem: SearchProblem, path: tuple, nodes: int, deadline: float):
    st = _ovoid_root(problem)
    for p, v in path:
        st.decide(p, v)
    budget = _Budget(nodes, deadline)
    try:
        found = _ovoid_dfs(st, budget, None, None)
    except _Stop:
        return BUDGET, budget.used, None
    return (FOUND if found is not None else EXHAUSTED), budget.used, found


# -- one-system engine -----------------------------------------------------------------------

class _SystemState:
    def __init__(self, problem: SearchProblem):
        Q = problem.quadric
        self.Q = Q
        self.q = Q.q
        self.lines = Q.line_masks()
        self.index = {l: i for i, l in enumerate(self.lines)}
        self.gens = Q.generator_masks(problem.max_generators)
        k = Q.k
        L = np.zeros((len(self.lines), k), dtype=bool)
        for i, l in enumerate(self.lines):
            L[i, bits(l)] = True
        self.L = L
        self.orth = Q.orth
        self._compat: dict[int, int] = {}
        self._meets: dict[int, int] = {}
        self.target = Q.q ** 4 + 1

    def compat(self, i: int) -> int:
        """Lines j with no point orthogonal to all of line i (this excludes meeting lines)."""
        c = self._compat.get(i)
        if c is None:
            pts = np.nonzero(self.L[i])[0]
            perp = self.orth[pts].all(axis=0)
            ok = ~(self.L[:, perp].any(axis=1))
            c = 0
            for j in np.nonzero(ok)[0].tolist():
                c |= 1 << j
            self._compat[i] = c
        return c

    def meets(self, gi: int) -> int:
        c = self._meets.get(gi)
        if c is None:
            pts = bits(self.gens[gi])
            hit = self.L[:, pts].any(axis=1)
            c = 0
            for j in np.nonzero(hit)[0].tolist():
                c |= 1 << j
            self._meets[gi] = c
        return c

    def branch_plane(self, covered: int) -> int | None:
        need = self.q + 1
        for gi, g in enumerate(self.gens):
            got = (g & covered).bit_count()
            if got < need:
                return gi
            if got > need:
                return -1
        return None


def _system_root(problem: SearchProblem):
    st = _SystemState(problem)
    cand = (1 << len(st.lines)) - 1
    chosen, covered = [], 0
    for l in problem.seed:
        i = st.index.get(l)
        if i is None or not cand >> i & 1:
            return st, None
        chosen.append(i)
        covered |= l
        cand &= st.compat(i)
    return st, (tuple(chosen), covered, cand)


def _system_dfs(st: _SystemState, chosen: tuple, covered: int, cand: int, budget: _Budget,
                depth: int | None, paths: list | None, prefix: tuple = ()):
    if len(chosen) == st.target:
        ok = is_one_system(st.Q, [st.lines[i] for i in chosen])
        return chosen if ok else None
    gi = st.branch_plane(covered)
    if gi is None or gi < 0:
        return None
    if len(chosen) + cand.bit_count() < st.target:
        return None
    if depth is not None and len(prefix) == depth:
        paths.append(prefix)
        return None
    options = cand & st.meets(gi)
    for j in bits(options):
        budget.tick()
        found = _system_dfs(st, chosen + (j,), covered | st.lines[j], cand & st.compat(j),
                            budget, depth, paths, prefix + (j,))
        if found is not None:
            return found
    return None


def _system_subtree(problem: SearchProblem, path: tuple, nodes: int, deadline: float):
    st, root = _system_root(problem)
    chosen, covered, cand = root
    for j in path:
        chosen, covered, cand = chosen + (j,), covered | st.lines[j], cand & st.compat(j)
    budget = _Budget(nodes, deadline)
    try:
        found = _system_dfs(st, chosen, covered, cand, budget, None, None)
    except _Stop:
        return BUDGET, budget.used, None
    if found is None:
        return EXHAUSTED, budget.used, None
    return FOUND, budget.used, tuple(st.lines[i] for i in found)


# -- driver --------------------------------------------------------------------------------------

_WORK: dict = {}


def _run_task(i: int):
    w = _WORK
    fn = _ovoid_subtree if w["problem"].mode == "m-ovoid" else _system_subtree
    return fn(w["problem"], w["paths"][i], w["nodes"], w["deadline"])


def _frontier(problem: SearchProblem, depth: int, budget: _Budget):
    """Decision paths at ``depth``, or a result if the shallow tree already decides."""
    paths: list = []
    if problem.mode == "m-ovoid":
        st = _ovoid_root(problem)
        if st is None:
            return paths, EXHAUSTED, None
        found = _ovoid_dfs(st, budget, depth, paths)
    else:
        st, root = _system_root(problem)
        if root is None:
            return paths, EXHAUSTED, None
        found = _system_dfs(st, *root, budget, depth, paths)
        if found is not None:
            found = tuple(st.lines[i] for i in found)
    if found is not None:
        return paths, FOUND, found
    return paths, None, None


def default_threads() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def _solve(problem: SearchProblem, threads: int | None) -> SearchOutcome:
    start = time.monotonic()
    deadline = start + problem.time_limit
    budget = _Budget(problem.node_limit, deadline)

    def outcome(status, nodes, raw=None):
        wit = None
        if raw is not None:
            wit = (PointSet(problem.quadric, raw) if problem.mode == "m-ovoid"
                   else OneSystem(problem.quadric, tuple(raw)))
        return SearchOutcome(status, nodes, time.monotonic() - start, wit, problem)

    try:
        paths, status, raw = _frontier(problem, FRONTIER_DEPTH, budget)
    except _Stop:
        return outcome(BUDGET, problem.node_limit)
    if status is not None:
        return outcome(status, budget.used, raw)

    total = budget.used
    remaining = problem.node_limit - total
    _WORK.update(problem=problem, paths=paths, nodes=remaining, deadline=deadline)
    threads = threads or default_threads()
    pool = None
    try:
        if threads > 1 and len(paths) > 1:
            pool = mp.get_context("fork").Pool(min(threads, len(paths)))
            results = pool.imap(_run_task, range(len(paths)))
        else:
            results = map(_run_task, range(len(paths)))
        # subtree results are merged in path order, so the first witness and
        # the node count are the same for any number of workers
        for sub_status, used, raw in results:
            total += used
            if sub_status == BUDGET or total > problem.node_limit:
                return outcome(BUDGET, min(total, problem.node_limit))
            if sub_status == FOUND:
                return outcome(FOUND, total, raw)
        return outcome(EXHAUSTED, total)
    finally:
        if pool is not None:
            pool.terminate()
            pool.join()
        _WORK.clear()


def _verify(out: SearchOutcome) -> SearchOutcome:
    """Re-check every witness with the verifier of record."""
    p = out.problem
    if out.status == FOUND:
        if p.mode == "m-ovoid":
            got = is_m_ovoid(p.quadric, out.witness, p.max_generators)
            if got != p.m:
                raise AssertionError(f"search witness is a {got}-ovoid, expected {p.m}")
        elif not is_one_system(p.quadric, out.witness.lines):
            raise AssertionError("search witness is not a 1-system")
    return out


def search_m_ovoid(problem: SearchProblem, threads: int | None = 1) -> SearchOutcome:
    if problem.mode != "m-ovoid":
        raise ValueError("problem mode is not m-ovoid")
    return _verify(_solve(problem, threads))


def search_one_system(problem: SearchProblem, threads: int | None = 1) -> SearchOutcome:
    if problem.mode != "one-system":
        raise ValueError("problem mode is not one-system")
    return _verify(_solve(problem, threads))


def search(problem: SearchProblem, threads: int | None = 1) -> SearchOutcome:
    fn = search_m_ovoid if problem.mode == "m-ovoid" else search_one_system
    return fn(problem, threads)
