"""Recursive plans: pick a reduction per level, precompute it, run it with counting.

At each level the planner uses, in order: the naive transform for small
groups, a single-subgroup step through the largest proper subgroup if it
is large enough, and otherwise whatever :func:`find_triple` proposes
(prime-index or triple-subgroup).  A reduction whose estimated cost is not
below the naive estimate is replaced by the naive transform.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .dft import BlockDiagonal, OpCounter, coeffs_of, naive_dft
from .groups import (SEARCH_CAP, CapExceeded, FiniteGroup, GroupError, PrimeIndexCase, Subgroup, TripleCase,
                     _is_prime, all_subgroups, find_triple, is_normal, subgroup_from_elements, subgroup_generated)
from .reductions import PrimeIndexReduction, SingleSubgroupReduction, TripleReduction
from .reps import IrrepSet, compute_irreps, restriction_plan

STRATEGIES = ("auto", "naive", "single", "prime", "triple")


class PlanError(GroupError):
    pass


@dataclass(frozen=True)
class PlanConfig:
    base_order: int = 24
    epsilon: float = 0.3
    strategy: str = "auto"
    seed: int = 0
    cost_guard: bool = True

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; choose from {STRATEGIES}")
        if self.base_order < 1:
            raise ValueError("base_order must be positive")
        if not 0 < self.epsilon < 2:
            raise ValueError("epsilon must lie in (0, 2)")

    def for_children(self) -> "PlanConfig":
        return PlanConfig(self.base_order, self.epsilon, "auto", self.seed, self.cost_guard)


@dataclass
class CostEstimate:
    """Predicted counter values for a dense input (complex mults and adds).

    ``candidates`` maps each strategy considered at this node to its
    estimated total ``mul + add``.
    """

    strategy: str
    mul: int
    add: int
    children: list["CostEstimate"] = field(default_factory=list)
    candidates: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.mul + self.add

    @property
    def real_flops(self) -> int:
        """Six real flops per complex multiplication, two per addition."""
        return 6 * self.mul + 2 * self.add

    def to_dict(self) -> dict:
        return {"strategy": self.strategy, "mul": self.mul, "add": self.add,
                "candidates": self.candidates, "children": [c.to_dict() for c in self.children]}


def _blockmul_cost(dims, skip=None) -> tuple[int, int]:
    mul = add = 0
    for k, d in enumerate(dims):
        if skip is not None and skip[k]:
            continue
        mul += d ** 3
        add += d * d * (d - 1)
    return mul, add


def naive_estimate(irreps: IrrepSet) -> CostEstimate:
    n, E = irreps.group.order, irreps.total_entries
    return CostEstimate("naive", n * E, (n - 1) * E)


# ---------------------------------------------------------------------------
# plan nodes


class PlanNode:
    kind = "node"

    def __init__(self, group: FiniteGroup, irreps: IrrepSet):
        self.group = group
        self.irreps = irreps
        self.children: list[PlanNode] = []
        self.estimate: CostEstimate | None = None

    def run(self, c: np.ndarray, counter: OpCounter | None) -> BlockDiagonal:
        raise NotImplementedError

    def describe(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        out = {"strategy": self.kind, "group": self.group.label, "order": self.group.order}
        out.update(self.describe())
        if self.estimate is not None:
            out["estimate"] = {"mul": self.estimate.mul, "add": self.estimate.add,
                               "candidates": self.estimate.candidates}
        out["children"] = [ch.to_dict() for ch in self.children]
        return out

    def walk(self):
        yield self
        for ch in self.children:
            yield from ch.walk()

    def depth(self) -> int:
        return 1 + max((ch.depth() for ch in self.children), default=0)


class TrivialNode(PlanNode):
    """The trivial group: its DFT is the single coefficient, at no cost."""

    kind = "trivial"

    def run(self, c, counter):
        return BlockDiagonal([np.asarray(c, dtype=np.complex128).reshape(1, 1)])


class NaiveNode(PlanNode):
    kind = "naive"

    def run(self, c, counter):
        return naive_dft(c, self.irreps, counter)


class SingleNode(PlanNode):
    kind = "single"

    def __init__(self, group, irreps, H: Subgroup, child: PlanNode):
        super().__init__(group, irreps)
        self.H = H
        self.children = [child]
        self.red = SingleSubgroupReduction(group, H, restriction_plan(irreps, H, child.irreps))

    def run(self, c, counter):
        return self.red(c, _recurser(self.children[0], "H"), counter)

    def describe(self):
        return {"H": list(self.H.elements)}


class PrimeNode(PlanNode):
    kind = "prime"

    def __init__(self, group, irreps, N: Subgroup, child: PlanNode):
        super().__init__(group, irreps)
        self.N = N
        self.children = [child]
        self.red = PrimeIndexReduction(group, N, restriction_plan(irreps, N, child.irreps))

    def run(self, c, counter):
        return self.red(c, _recurser(self.children[0], "N"), counter)

    def describe(self):
        return {"N": list(self.N.elements), "p": self.red.p}


class TripleNode(PlanNode):
    kind = "triple"

    def __init__(self, group, irreps, case: TripleCase, childH: PlanNode, childK: PlanNode, seed: int = 0):
        super().__init__(group, irreps)
        self.case = case
        self.children = [childH, childK]
        irrN = compute_irreps(case.N.as_group(), seed=seed)
        self.red = TripleReduction(irreps, case, childH.irreps, childK.irreps, irrN)

    def run(self, c, counter):
        return self.red(c, _recurser(self.children[0], "H"), _recurser(self.children[1], "K"), counter)

    def describe(self):
        lp = self.red.lift
        return {"N": list(self.case.N.elements), "H": list(self.case.H.elements),
                "K": list(self.case.K.elements), "r": self.red.fmt.r, "labels_used": int(len(self.red.lab.used)),
                "repetitions": len(self.red.cover), "sum_a2": lp.sum_a2, "sum_aw": lp.sum_aw}


def _recurser(child: PlanNode, tag: str):
    def call(local, counter):
        return _execute(child, local, counter, tag)
    return call


def _execute(node: PlanNode, c: np.ndarray, counter: OpCounter | None, tag: str) -> BlockDiagonal:
    t0 = time.perf_counter()
    m0, a0 = (counter.mul, counter.add) if counter is not None else (0, 0)
    stack = counter._stack if counter is not None else []
    path = "/".join(stack + [tag])
    try:
        if counter is not None:
            with counter.scope(tag):
                out = node.run(c, counter)
        else:
            out = node.run(c, counter)
    except PlanError:
        raise
    except Exception as exc:  # attach the node path, keep the error class
        try:
            err = type(exc)(f"[{path} {node.kind} on {node.group.label}] {exc}")
        except Exception:
            raise PlanError(f"[{path} {node.kind} on {node.group.label}] {exc}") from exc
        raise err from exc
    if counter is not None:
        ev: dict[str, Any] = {"path": path, "strategy": node.kind, "group": node.group.label,
                              "order": node.group.order, "mul": counter.mul - m0, "add": counter.add - a0,
                              "ms": 1e3 * (time.perf_counter() - t0)}
        if isinstance(node, TripleNode):
            ev["repetition_calls"] = [dict(cl) for cl in node.red.last_calls]
        counter.events.append(ev)
    return out


# ---------------------------------------------------------------------------
# planning


def _largest_proper_subgroup(G: FiniteGroup) -> Subgroup | None:
    if G.order == 1:
        return None
    g = G.cyclic_generator
    if g is not None:
        p = next(q for q in range(2, G.order + 1) if G.order % q == 0)
        return subgroup_generated(G, [_power(G, g, p)])
    subs = [s for s in all_subgroups(G) if s.order < G.order]
    top = max(s.order for s in subs)
    return min((s for s in subs if s.order == top), key=lambda s: s.elements)


def _power(G: FiniteGroup, g: int, k: int) -> int:
    x = 0
    for _ in range(k):
        x = int(G.mult[x, g])
    return x


def _cyclic_case(G: FiniteGroup, mode: str):
    """find_triple for cyclic groups of any order without a subgroup search."""
    g = G.cyclic_generator
    n = G.order
    primes = [p for p in range(2, n + 1) if n % p == 0 and _is_prime(p)]
    if mode in ("auto", "prime"):
        p = primes[0]
        return PrimeIndexCase(subgroup_generated(G, [_power(G, g, p)]), p)
    if G.order > SEARCH_CAP:
        raise CapExceeded(f"triple search on cyclic group of order {n} exceeds cap {SEARCH_CAP}")
    return find_triple(G, mode)


def _case_for(G: FiniteGroup, mode: str):
    if G.cyclic_generator is not None:
        return _cyclic_case(G, mode)
    return find_triple(G, mode)


def make_plan(G: FiniteGroup, config: PlanConfig | None = None, irreps: IrrepSet | None = None,
              forced: dict | None = None) -> PlanNode:
    """Build and precompute a plan tree for ``G``.

    ``forced`` is a plan dump (see :meth:`PlanNode.to_dict`); its strategy
    and subgroups are used verbatim at every level it describes.
    """
    config = config or PlanConfig()
    irreps = irreps or compute_irreps(G, seed=config.seed)
    if forced is not None:
        return _from_dump(G, irreps, forced, config)
    if G.order == 1:
        node: PlanNode = TrivialNode(G, irreps)
        node.estimate = CostEstimate("trivial", 0, 0)
        return node
    strategy = config.strategy
    naive = NaiveNode(G, irreps)
    naive.estimate = naive_estimate(irreps)
    if strategy == "naive" or (strategy == "auto" and G.order <= config.base_order):
        return naive
    child_cfg = config.for_children()
    node = None
    if strategy in ("auto", "single"):
        H = _largest_proper_subgroup(G)
        if strategy == "single" or H.order >= G.order ** (1 - config.epsilon / 2):
            node = SingleNode(G, irreps, H, make_plan(H.as_group(), child_cfg))
    if node is None:
        try:
            case = _case_for(G, "auto" if strategy == "auto" else strategy)
        except CapExceeded:
            raise
        except GroupError:
            if strategy != "auto":
                raise
            return naive
        if isinstance(case, PrimeIndexCase):
            node = PrimeNode(G, irreps, case.N, make_plan(case.N.as_group(), child_cfg))
        else:
            node = TripleNode(G, irreps, case, make_plan(case.H.as_group(), child_cfg),
                              make_plan(case.K.as_group(), child_cfg), seed=config.seed)
    node.estimate = _estimate_node(node)
    node.estimate.candidates["naive"] = naive.estimate.total
    if strategy == "auto" and config.cost_guard and node.estimate.total >= naive.estimate.total:
        naive.estimate.candidates = dict(node.estimate.candidates)
        return naive
    return node


def _from_dump(G: FiniteGroup, irreps: IrrepSet, d: dict, config: PlanConfig) -> PlanNode:
    kind = d["strategy"]
    if d.get("order", G.order) != G.order:
        raise PlanError(f"plan dump is for order {d['order']}, group has order {G.order}")
    kids = d.get("children", [])

    def sub(key):
        return subgroup_from_elements(G, d[key])

    def child(i, S):
        return _from_dump(S.as_group(), compute_irreps(S.as_group(), seed=config.seed), kids[i], config)

    if kind == "trivial":
        node: PlanNode = TrivialNode(G, irreps)
    elif kind == "naive":
        node = NaiveNode(G, irreps)
    elif kind == "single":
        H = sub("H")
        node = SingleNode(G, irreps, H, child(0, H))
    elif kind == "prime":
        N = sub("N")
        if not is_normal(G, N):
            raise PlanError("forced prime-index subgroup is not normal")
        node = PrimeNode(G, irreps, N, child(0, N))
    elif kind == "triple":
        N, H, K = sub("N"), sub("H"), sub("K")
        node = TripleNode(G, irreps, TripleCase(N, H, K), child(0, H), child(1, K), seed=config.seed)
    else:
        raise PlanError(f"unknown strategy {kind!r} in plan dump")
    node.estimate = _estimate_node(node)
    return node


def _estimate_node(node: PlanNode) -> CostEstimate:
    """Closed-form counter prediction for a dense input, mirroring the reductions."""
    G, irr = node.group, node.irreps
    dims, E = irr.dims, irr.total_entries
    if isinstance(node, TrivialNode):
        return CostEstimate("trivial", 0, 0)
    if isinstance(node, NaiveNode):
        return naive_estimate(irr)
    kids = [ch.estimate or _estimate_node(ch) for ch in node.children]
    if isinstance(node, (SingleNode, PrimeNode)):
        red = node.red
        m = len(red.reps) if isinstance(node, SingleNode) else red.p
        bm, ba = _blockmul_cost(dims)
        cm, ca = _blockmul_cost(dims, red.plan.is_identity)
        mul = m * kids[0].mul + (m - 1) * bm + 2 * cm
        add = m * kids[0].add + (m - 1) * (ba + E) + 2 * ca
        est = CostEstimate(node.kind, mul, add, kids)
    else:
        red = node.red
        nY, nU = len(red.Y), len(red.lab.used)
        am, aa = _blockmul_cost(red.irrH_adapted.dims, red.planHN.is_identity)
        im, ia = red.label_inverse_costs()
        lm = sum(b.a * b.a * b.w for b in red.lift.blocks)
        la = sum(b.a * (b.a - 1) * b.w + b.src.size for b in red.lift.blocks)
        sm, sa = _blockmul_cost(dims, red.lift.S_identity)
        tm, ta = _blockmul_cost(dims, red.lift.T_identity)
        rep_mul = nY * (kids[0].mul + 2 * am + im) + nU * kids[1].mul + lm + sm + tm
        rep_add = nY * (kids[0].add + 2 * aa + ia) + nU * kids[1].add + la + sa + ta
        R = len(red.cover)
        bm, ba = _blockmul_cost(dims)
        est = CostEstimate(node.kind, R * rep_mul + (R - 1) * bm, R * rep_add + (R - 1) * (ba + E), kids)
    est.candidates[node.kind] = est.total
    return est


def estimate_cost(G: FiniteGroup, strategy: str = "auto", config: PlanConfig | None = None) -> CostEstimate:
    """Cost estimate of the plan ``make_plan`` builds for ``strategy``, with the naive one as a candidate."""
    base = config or PlanConfig()
    cfg = PlanConfig(base.base_order, base.epsilon, strategy, base.seed, base.cost_guard)
    plan = make_plan(G, cfg)
    est = plan.estimate
    est.candidates.setdefault("naive", naive_estimate(plan.irreps).total)
    return est


def execute_plan(plan: PlanNode, alpha, counter: OpCounter | None = None) -> BlockDiagonal:
    c = coeffs_of(alpha)
    if c.shape != (plan.group.order,):
        raise ValueError(f"input has {c.shape[0]} coefficients, group order is {plan.group.order}")
    return _execute(plan, c, counter, "root")


def tolerance_for_depth(depth: int, base: float = 1e-9) -> float:
    """Residual budget relative to ``||alpha||_1``: one decade per level, never tighter than 1e-6."""
    return max(base * 10 ** depth, 1e-6)


def dump_plan(plan: PlanNode) -> str:
    return json.dumps(plan.to_dict(), indent=2)


def load_plan(G: FiniteGroup, text: str, config: PlanConfig | None = None) -> PlanNode:
    return make_plan(G, config, forced=json.loads(text))
