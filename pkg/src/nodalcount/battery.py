"""Acceptance battery: every numbered check, seeded and reported as JSON."""

from __future__ import annotations

import functools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import networkx as nx
import numpy as np

from .config import Tolerances
from .constructions import (
    construct_dense_extremizer,
    dense_block_matrix,
    kn_zero_diag,
    path_extremizer,
    zero_diag_inner_path,
    zero_diag_path_extremizer,
)
from .exceptions import NodalCountError
from .graph import Graph, betti, classify_determinantal, spanning_frame, validate_cover
from .magnetic import HessianStack, default_tol_hess, hessians_fd, hessians_perturbative, morse_verify
from .perturbation import c4_exact_fraction, diag_perturbation_sign_survey, sign_vanishing_entries
from .sampling import (
    derive_seed,
    planted_multiplicity_matrix,
    random_bipartite_matching_graph,
    random_connected_graph,
    random_supported_matrix,
    random_tree,
)
from .spectral import (
    GENERAL,
    ZERO_DIAGONAL,
    SupportedMatrix,
    bipartite_edge_check,
    check_ncc,
    eigensystem,
    nodal_counts,
    tridiagonal_inverse_pattern,
    verify_surplus_bounds,
)
from .transversality import (
    SupportSubspace,
    check_transversality,
    commutator_space_dim,
    multiplicity_profile,
    transversal_repair,
)

VERSION = "0.1.0"
PASS, FAIL, ERROR = "pass", "fail", "error"


@dataclass
class CheckRecord:
    """Outcome of one check.

    ``margin`` is the worst observed value divided by its allowance for
    tolerance checks (pass needs ``<= 1``) and the number of mismatches for
    exact-integer checks (pass needs ``0``).
    """

    name: str
    criterion: int
    status: str
    margin: Optional[float]
    details: dict = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {"name": self.name, "criterion": self.criterion, "status": self.status, "margin": self.margin,
               "details": self.details}
        if include_runtime:
            out["runtime"] = round(self.runtime, 3)
        return out


@dataclass
class BatteryReport:
    records: list
    seed: int
    tolerances: Tolerances

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def to_dict(self, include_runtime: bool = False) -> dict:
        return {
            "version": VERSION,
            "seed": self.seed,
            "tolerances": self.tolerances.to_dict(),
            "passed": self.passed,
            "checks": [r.to_dict(include_runtime) for r in self.records],
        }


@dataclass(frozen=True)
class Context:
    seed: int
    tol: Tolerances

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng(derive_seed(self.seed, name))


def _outcome(ok: bool, margin, **details):
    return (PASS if ok else FAIL), margin, details


# 1


def check_lower_bound(ctx: Context):
    """Dense extremizers reach ``C(n,2) + beta``; negation reaches ``n|E| - total``."""
    bad = []
    cases = 0
    for n in range(3, 13):
        for beta in range(1, math.comb(n - 1, 2) + 1):
            cases += 1
            try:
                r = construct_dense_extremizer(n, beta, seed=derive_seed(ctx.seed, f"dense-{n}-{beta}"),
                                               tol_gap=ctx.tol.tol_gap, tol_zero=ctx.tol.tol_zero)
            except NodalCountError as exc:
                bad.append({"n": n, "beta": beta, "error": type(exc).__name__})
                continue
            neg = nodal_counts(-r.matrix, r.basis[:, ::-1], ctx.tol.tol_zero).total
            n_edges = r.matrix.graph.n_edges
            if not (r.success and r.achieved_total == math.comb(n, 2) + beta and r.ncc.satisfied
                    and neg == n * n_edges - r.achieved_total):
                bad.append({"n": n, "beta": beta, "total": r.achieved_total, "negated": neg,
                            "ncc": r.ncc.satisfied})
    return _outcome(not bad, len(bad), cases=cases, failures=bad[:20])


# 2 and 3 share one battery of random NCC matrices


@functools.lru_cache(maxsize=4)
def _ncc_battery(ctx: Context, graphs: int = 20, per_graph: int = 100):
    rng = ctx.rng("ncc-battery")
    out = []
    skipped = 0
    for _ in range(graphs):
        n = int(rng.integers(3, 11))
        g = random_connected_graph(n, 0.5, rng)
        for _ in range(per_graph):
            a = random_supported_matrix(g, GENERAL, rng)
            es = eigensystem(a, ctx.tol.tol_zero)
            if check_ncc(a, es, ctx.tol.tol_gap, ctx.tol.tol_zero).satisfied:
                out.append((a, es))
            else:
                skipped += 1
    return out, skipped


def check_bounds(ctx: Context):
    """Per-k and average surplus bounds on random NCC matrices."""
    cases, skipped = _ncc_battery(ctx)
    violations = 0
    for a, es in cases:
        report = nodal_counts(a, es.vectors, ctx.tol.tol_zero)
        if not verify_surplus_bounds(report, betti(a.graph), a.n).passed:
            violations += 1
    ok = violations == 0 and len(cases) > 0
    return _outcome(ok, violations, matrices=len(cases), skipped_non_ncc=skipped)


def check_morse(ctx: Context):
    """Morse indices equal surpluses; FD and perturbative Hessians agree."""
    cases, skipped = _ncc_battery(ctx)
    mismatches = degenerate = 0
    worst_fd = worst_grad = worst_trace = 0.0
    for a, es in cases:
        frame = spanning_frame(a.graph)
        if frame.beta == 0:
            continue
        report = nodal_counts(a, es.vectors, ctx.tol.tol_zero)
        hp = hessians_perturbative(a, es, frame)
        fd = hessians_fd(a, frame, ctx.tol.fd_step, tol_gap=ctx.tol.tol_gap)
        for k in range(a.n):
            allow = max(1e-6, 1e-4 * np.linalg.norm(hp[k], 2))
            worst_fd = max(worst_fd, float(np.abs(hp[k] - fd.hessians[k]).max()) / allow)
        worst_grad = max(worst_grad, float(np.abs(fd.gradients).max()) / (1e-6 * a.norm))
        stack = HessianStack(tuple(hp), "pert", default_tol_hess(a, ctx.tol.tol_hess))
        worst_trace = max(worst_trace, stack.trace_residual() / (1e-8 * a.norm))
        v = morse_verify(a, es, frame, report, stack=stack)
        mismatches += len(v.mismatches)
        degenerate += sum(v.degenerate)
    margin = max(worst_fd, worst_grad, worst_trace)
    ok = mismatches == 0 and degenerate == 0 and margin <= 1.0 and len(cases) > 0
    return _outcome(ok, margin, matrices=len(cases), skipped_non_ncc=skipped, index_mismatches=mismatches,
                    degenerate_hessians=degenerate, fd_ratio=worst_fd, gradient_ratio=worst_grad,
                    trace_ratio=worst_trace)


# 4


def check_trees(ctx: Context, samples: int = 100):
    """Every surplus vanishes on trees."""
    rng = ctx.rng("trees")
    nonzero = skipped = used = 0
    for _ in range(samples):
        n = int(rng.integers(2, 13))
        a = random_supported_matrix(random_tree(n, rng), GENERAL, rng)
        es = eigensystem(a, ctx.tol.tol_zero)
        if not check_ncc(a, es, ctx.tol.tol_gap, ctx.tol.tol_zero).satisfied:
            skipped += 1
            continue
        used += 1
        nonzero += sum(1 for s in nodal_counts(a, es.vectors, ctx.tol.tol_zero).surpluses if s != 0)
    return _outcome(nonzero == 0 and used > 0, nonzero, matrices=used, skipped_non_ncc=skipped)


# 5


def check_path_families(ctx: Context):
    """Path extremizers hit their totals; extra edges contribute 1 (general) or 2 (zero diagonal)."""
    bad = []
    cases = 0
    kw = {"tol_gap": ctx.tol.tol_gap, "tol_zero": ctx.tol.tol_zero}
    for n in range(2, 13):
        for beta in range(0, n - 1):
            cases += 1
            try:
                r = path_extremizer(n, beta, **kw)
                extra_ok = all(r.nodal.per_edge[(i, i + 2)] == 1 for i in range(1, beta + 1))
                if not (r.success and r.achieved_total == math.comb(n, 2) + beta and extra_ok):
                    bad.append({"family": "path", "n": n, "beta": beta, "total": r.achieved_total})
            except NodalCountError as exc:
                bad.append({"family": "path", "n": n, "beta": beta, "error": type(exc).__name__})
    for n in range(1, 9):
        for beta in range(0, max(2 * (n - 2), 0) + 1):
            cases += 1
            try:
                r = zero_diag_path_extremizer(n, beta, **kw)
                extra_ok = all(r.nodal.per_edge[(i, i + 4)] == 2 for i in range(1, beta + 1))
                if not (r.success and r.achieved_total == math.comb(2 * n, 2) + 2 * beta and extra_ok):
                    bad.append({"family": "zero-path", "n": n, "beta": beta, "total": r.achieved_total})
            except NodalCountError as exc:
                bad.append({"family": "zero-path", "n": n, "beta": beta, "error": type(exc).__name__})
    return _outcome(not bad, len(bad), cases=cases, failures=bad[:20])


# 6


def check_kn(ctx: Context):
    """K_n zero-diagonal basis total and its repair to an NCC matrix."""
    bad = []
    rows = []
    for n in range(3, 11):
        try:
            r = kn_zero_diag(n, tol_gap=ctx.tol.tol_gap, tol_zero=ctx.tol.tol_zero)
            rep = transversal_repair(r.matrix, r.basis, SupportSubspace("s0g", r.matrix.graph),
                                     tol_gap=ctx.tol.tol_gap, tol_zero=ctx.tol.tol_zero,
                                     seed=derive_seed(ctx.seed, f"kn-{n}"))
        except NodalCountError as exc:
            bad.append({"n": n, "error": type(exc).__name__})
            continue
        ncc = check_ncc(rep.matrix, None, ctx.tol.tol_gap, ctx.tol.tol_zero).satisfied
        total = nodal_counts(rep.matrix, rep.basis, ctx.tol.tol_zero).total
        target = (n - 1) ** 2
        rows.append({"n": n, "basis_total": r.achieved_total, "repaired_total": total, "ncc": ncc,
                     "iterations": rep.iterations})
        if not (r.achieved_total == target and total == target and ncc and rep.matrix.mode == ZERO_DIAGONAL):
            bad.append(rows[-1])
    return _outcome(not bad, len(bad), results=rows, failures=bad)


# 7


def check_bipartite(ctx: Context, samples: int = 50, max_tries: int = 20):
    """Per-edge counts equal ``n/2`` on bipartite determinantal graphs."""
    rng = ctx.rng("bipartite")
    bad = used = 0
    failures = []
    for _ in range(samples):
        n = int(2 * rng.integers(1, 7))
        g = random_bipartite_matching_graph(n, 0.3, rng)
        for _ in range(max_tries):
            a = random_supported_matrix(g, ZERO_DIAGONAL, rng)
            es = eigensystem(a, ctx.tol.tol_zero)
            if check_ncc(a, es, ctx.tol.tol_gap, ctx.tol.tol_zero).satisfied:
                break
        else:
            bad += 1
            failures.append({"n": n, "error": "no NCC sample"})
            continue
        used += 1
        v = bipartite_edge_check(a, es, ctx.tol.tol_gap, ctx.tol.tol_zero)
        if not v.passed:
            bad += 1
            failures.append({"n": n, "per_edge": {f"{i}-{j}": c for (i, j), c in v.per_edge.items()}})
    return _outcome(bad == 0, bad, matrices=used, failures=failures[:10])


# 8


def connected_graphs_up_to(n_max: int) -> Iterable[Graph]:
    """All connected graphs on ``1..n_max`` vertices up to isomorphism (networkx atlas)."""
    for h in nx.graph_atlas_g():
        n = h.number_of_nodes()
        if n == 0 or n > n_max or not nx.is_connected(h):
            continue
        yield Graph(n, tuple(sorted((min(i, j) + 1, max(i, j) + 1) for i, j in h.edges())))


def check_classifier(ctx: Context, n_max: int = 7, samples: int = 200):
    """Matching classifier against brute force; sub-determinantal graphs always have a zero eigenvalue."""
    disagreements = bad_cover = no_zero = 0
    graphs = sub = 0
    for g in connected_graphs_up_to(n_max):
        graphs += 1
        fast = classify_determinantal(g)
        slow = classify_determinantal(g, "bruteforce")
        if fast.kind != slow.kind:
            disagreements += 1
            continue
        if fast.determinantal:
            try:
                validate_cover(g, fast.cover)
            except NodalCountError:
                bad_cover += 1
            continue
        sub += 1
        rng = ctx.rng(f"subdet-{g.n}-{g.edges}")
        for _ in range(samples):
            a = random_supported_matrix(g, ZERO_DIAGONAL, rng)
            if np.abs(np.linalg.eigvalsh(a.entries)).min() > 1e-8:
                no_zero += 1
    bad = disagreements + bad_cover + no_zero
    return _outcome(bad == 0, bad, graphs=graphs, sub_determinantal=sub, disagreements=disagreements,
                    invalid_covers=bad_cover, samples_without_zero=no_zero)


# 9


VANISH_GRAPH = Graph(4, ((1, 2), (2, 3), (2, 4), (3, 4)))
VANISH_MATRIX = np.array([[0.0, -1, 0, 0], [-1, 0, -1, -1], [0, -1, 1, -1], [0, -1, -1, 1]])
S3 = math.sqrt(3.0)
VANISH_VECTORS = np.array([[1, S3, 1, 1], [2, 0, -1, -1], [1, -S3, 1, 1], [0, 0, -1, 1]]).T


def check_vanish(ctx: Context, seeds: int = 20):
    """Strong and weak totals of the printed basis, then signings over a seed sweep."""
    a = SupportedMatrix(VANISH_GRAPH, VANISH_MATRIX)
    report = nodal_counts(a, VANISH_VECTORS, ctx.tol.tol_zero)
    totals = []
    errors = 0
    for s in range(seeds):
        try:
            sb = sign_vanishing_entries(a, seed=derive_seed(ctx.seed, f"vanish-{s}"), tol_gap=ctx.tol.tol_gap,
                                        tol_zero=ctx.tol.tol_zero)
            totals.append(sb.total)
        except NodalCountError:
            errors += 1
    out_of_range = sum(1 for t in totals if t not in (7, 8, 9)) + errors
    ok = report.total == 4 and report.weak_total == 10 and out_of_range == 0
    return _outcome(ok, out_of_range, strong_total=report.total, weak_total=report.weak_total, totals=totals,
                    errors=errors)


# 10


def check_survey(ctx: Context, samples: int = 10**6):
    """Sign-preserving fraction of diagonal perturbations of C_4 against 5/18."""
    res = diag_perturbation_sign_survey(samples, seed=derive_seed(ctx.seed, "survey"))
    exact = c4_exact_fraction()
    err = abs(res.fraction - 5 / 18)
    return _outcome(err <= 0.01, err / 0.01, fraction=res.fraction, target=5 / 18, polytope_volume=exact,
                    samples=res.samples)


# 11


def check_tridiagonal(ctx: Context):
    """Inverse zero pattern of the inner zero-diagonal path matrices."""
    bad = []
    for n in range(2, 9):
        try:
            a = zero_diag_inner_path(n, ctx.tol.tol_gap, ctx.tol.tol_zero)
            v = tridiagonal_inverse_pattern(a, ctx.tol.tol_zero, ctx.tol.tol_det)
            if not v.passed:
                bad.append({"n": n, "mismatches": [list(m) for m in v.mismatches]})
        except NodalCountError as exc:
            bad.append({"n": n, "error": type(exc).__name__})
    return _outcome(not bad, len(bad), failures=bad)


# 12


def check_transversality_formula(ctx: Context, samples: int = 100):
    """Commutator rank formula on planted spectra; dense blocks and K_n are transversal."""
    rng = ctx.rng("commutator")
    rank_bad = 0
    for _ in range(samples):
        n = int(rng.integers(1, 9))
        parts = []
        left = n
        while left:
            m = int(rng.integers(1, left + 1))
            parts.append(m)
            left -= m
        a = planted_multiplicity_matrix(parts, rng)
        expected = math.comb(n, 2) - sum(math.comb(m, 2) for m in parts)
        try:
            got = commutator_space_dim(a, ctx.tol.tol_gap)
            prof = multiplicity_profile(a, ctx.tol.tol_gap)
        except NodalCountError:
            rank_bad += 1
            continue
        if got != expected or sorted(prof.multiplicities) != sorted(parts):
            rank_bad += 1
    not_transversal = []
    for n in range(3, 9):
        for beta in range(math.comb(n - 2, 2) + 1, math.comb(n - 1, 2) + 1):
            a, _ = dense_block_matrix(n, beta)
            if not check_transversality(a, SupportSubspace("sg", a.graph), ctx.tol.tol_gap).transversal:
                not_transversal.append(["dense", n, beta])
    for n in range(3, 11):
        try:
            a = kn_zero_diag(n, tol_gap=ctx.tol.tol_gap, tol_zero=ctx.tol.tol_zero).matrix
        except NodalCountError:
            not_transversal.append(["kn", n])
            continue
        if not check_transversality(a, SupportSubspace("s0g", a.graph), ctx.tol.tol_gap).transversal:
            not_transversal.append(["kn", n])
    bad = rank_bad + len(not_transversal)
    return _outcome(bad == 0, bad, planted=samples, rank_mismatches=rank_bad, not_transversal=not_transversal)


@dataclass(frozen=True)
class CheckSpec:
    criterion: int
    name: str
    run: Callable
    tags: tuple = ()


CHECKS = (
    CheckSpec(1, "lower-bound", check_lower_bound, ("dense", "construct")),
    CheckSpec(2, "bounds", check_bounds, ("surplus",)),
    CheckSpec(3, "morse", check_morse, ("magnetic",)),
    CheckSpec(4, "trees", check_trees, ("tree",)),
    CheckSpec(5, "path-families", check_path_families, ("path", "construct")),
    CheckSpec(6, "kn", check_kn, ("construct", "repair")),
    CheckSpec(7, "bipartite", check_bipartite, ()),
    CheckSpec(8, "classifier", check_classifier, ("classify",)),
    CheckSpec(9, "vanish", check_vanish, ("signing",)),
    CheckSpec(10, "survey", check_survey, ("c4",)),
    CheckSpec(11, "tridiagonal", check_tridiagonal, ("inverse",)),
    CheckSpec(12, "transversality", check_transversality_formula, ("commutator",)),
)


def select_checks(only: Optional[Iterable[str]] = None) -> list:
    """Checks whose name, tag or criterion number is listed in ``only`` (all when empty)."""
    if not only:
        return list(CHECKS)
    keys = {str(k).strip().lower() for item in only for k in str(item).split(",") if k.strip()}
    chosen = [c for c in CHECKS if keys & ({c.name, str(c.criterion)} | set(c.tags))]
    if not chosen:
        raise ValueError(f"no check matches {sorted(keys)}")
    return chosen


def run_check(spec: CheckSpec, ctx: Context) -> CheckRecord:
    start = time.perf_counter()
    try:
        status, margin, details = spec.run(ctx)
    except NodalCountError as exc:
        status, margin, details = ERROR, None, {"error": type(exc).__name__, "message": str(exc)}
    return CheckRecord(spec.name, spec.criterion, status, margin, details, time.perf_counter() - start)


def verify_suite(seed: int = 0, only=None, tolerances: Optional[Tolerances] = None, workers: int = 1) -> BatteryReport:
    """Run the selected checks and merge their records in criterion order.

    Each check draws from its own generator seeded by ``(seed, name)``, so the
    report does not depend on ``workers``.
    """
    ctx = Context(int(seed), tolerances or Tolerances())
    specs = select_checks(only)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(lambda s: run_check(s, ctx), specs))
    else:
        records = [run_check(s, ctx) for s in specs]
    return BatteryReport(records, ctx.seed, ctx.tol)
