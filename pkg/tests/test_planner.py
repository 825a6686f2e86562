import json

import numpy as np
import pytest

from gdft.dft import BlockDiagonal, GroupAlgebraElement, OpCounter, naive_dft
from gdft.groups import GroupError
from gdft.planner import (PlanConfig, PlanError, dump_plan, estimate_cost, execute_plan, load_plan, make_plan,
                          tolerance_for_depth)

from conftest import group, irreps, random_alpha, rel_residual

PLAN_SPECS = ["cyclic:1", "cyclic:16", "cyclic:67", "dihedral:32", "alternating:5", "sl2:5",
              "cyclic:2*alternating:5", "symmetric:5", "cyclic:3*symmetric:3"]


def strip(d):
    return {k: [strip(c) for c in v] if k == "children" else v for k, v in d.items() if k != "estimate"}


def kinds(plan):
    return [n.kind for n in plan.walk()]


@pytest.mark.parametrize("spec,shape", [
    ("cyclic:1", ["trivial"]),
    ("cyclic:7", ["naive"]),
    ("cyclic:67", ["prime", "trivial"]),
    ("dihedral:32", ["prime", "prime", "naive"]),
    ("alternating:5", ["triple", "naive", "naive"]),
    ("sl2:5", ["triple", "naive", "naive"]),
    ("cyclic:2*alternating:5", ["single", "triple", "naive", "naive"]),
    ("symmetric:5", ["single", "triple", "naive", "naive"]),
])
def test_auto_plan_shapes(spec, shape):
    assert kinds(make_plan(group(spec))) == shape


@pytest.mark.parametrize("spec,mul,add", [("alternating:5", 2631, 2138), ("sl2:5", 8323, 6990),
                                          ("cyclic:2*alternating:5", 5750, 4764), ("cyclic:67", 4422, 4422)])
def test_frozen_estimates_equal_counters(spec, mul, add):
    plan = make_plan(group(spec))
    assert (plan.estimate.mul, plan.estimate.add) == (mul, add)
    c = OpCounter()
    execute_plan(plan, random_alpha(plan.group.order, 3), c)
    assert (c.mul, c.add) == (mul, add)


@pytest.mark.parametrize("spec", PLAN_SPECS)
@pytest.mark.parametrize("strategy", ["auto", "naive", "single"])
def test_plans_match_naive(spec, strategy):
    G = group(spec)
    if strategy == "single" and G.order == 1:
        pytest.skip("no proper subgroup")
    plan = make_plan(G, PlanConfig(strategy=strategy))
    a = random_alpha(G.order, 5)
    c = OpCounter()
    F = execute_plan(plan, a, c)
    assert rel_residual(F, naive_dft(a, irreps(spec)), a) < tolerance_for_depth(plan.depth())
    assert plan.estimate.mul == c.mul and plan.estimate.add == c.add


@pytest.mark.parametrize("spec,strategy", [("alternating:5", "triple"), ("cyclic:2*alternating:5", "triple"),
                                           ("cyclic:16", "prime"), ("symmetric:4", "prime"),
                                           ("dihedral:12", "triple")])
def test_forced_strategies(spec, strategy):
    G = group(spec)
    plan = make_plan(G, PlanConfig(strategy=strategy))
    assert plan.kind == strategy
    a = random_alpha(G.order, 6)
    assert rel_residual(execute_plan(plan, a), naive_dft(a, irreps(spec)), a) < 1e-9


def test_forced_strategy_not_applicable():
    with pytest.raises(GroupError):
        make_plan(group("alternating:5"), PlanConfig(strategy="prime"))
    with pytest.raises(GroupError):
        make_plan(group("cyclic:7"), PlanConfig(strategy="triple"))


def test_estimate_within_twice_counter_a5():
    est = estimate_cost(group("alternating:5"))
    c = OpCounter()
    execute_plan(make_plan(group("alternating:5")), random_alpha(60, 0), c)
    assert c.total / 2 <= est.total <= 2 * c.total
    assert est.candidates["naive"] == 60 * 60 + 59 * 60
    assert est.real_flops == 6 * est.mul + 2 * est.add


def test_deterministic():
    G = group("sl2:5")
    assert dump_plan(make_plan(G)) == dump_plan(make_plan(G))


@pytest.mark.parametrize("spec", ["alternating:5", "cyclic:2*alternating:5", "dihedral:32", "cyclic:67"])
def test_dump_load_round_trip(spec):
    G = group(spec)
    plan = make_plan(G)
    text = dump_plan(plan)
    back = load_plan(G, text)
    assert kinds(back) == kinds(plan)
    a = random_alpha(G.order, 9)
    assert max(execute_plan(back, a).residuals(execute_plan(plan, a))) < 1e-10
    assert strip(json.loads(dump_plan(back))) == strip(json.loads(text))


def test_load_rejects_bad_dumps():
    G = group("alternating:5")
    with pytest.raises(PlanError):
        load_plan(G, json.dumps({"strategy": "naive", "order": 12}))
    with pytest.raises(PlanError):
        load_plan(G, json.dumps({"strategy": "magic", "order": 60}))
    S4 = group("symmetric:4")
    C2 = [0, 1]
    d = {"strategy": "prime", "order": 24, "N": None, "children": []}
    with pytest.raises((PlanError, GroupError, TypeError)):
        load_plan(S4, json.dumps(d))


@pytest.mark.parametrize("spec", PLAN_SPECS)
def test_delta_gives_identity(spec):
    G = group(spec)
    F = execute_plan(make_plan(G), GroupAlgebraElement.delta(G, 0))
    assert max(F.residuals(BlockDiagonal.identity(irreps(spec).dims))) < 1e-10


def test_trace_events():
    G = group("cyclic:2*alternating:5")
    c = OpCounter()
    execute_plan(make_plan(G), random_alpha(120, 1), c)
    root = c.events[-1]
    assert root["path"] == "root" and root["strategy"] == "single"
    assert (root["mul"], root["add"]) == (c.mul, c.add)
    triple = [e for e in c.events if e["strategy"] == "triple"]
    assert len(triple) == 2
    assert all(e["repetition_calls"] for e in triple)
    assert c.tags["root"] == [c.mul, c.add]


def test_errors_carry_node_path():
    G = group("alternating:5")
    with pytest.raises(ValueError):
        execute_plan(make_plan(G), np.zeros(7))


def test_config_validation():
    with pytest.raises(ValueError):
        PlanConfig(strategy="fast")
    with pytest.raises(ValueError):
        PlanConfig(base_order=0)
    with pytest.raises(ValueError):
        PlanConfig(epsilon=0)


def test_base_order_and_cost_guard():
    G = group("alternating:5")
    assert make_plan(G, PlanConfig(base_order=60)).kind == "naive"
    # C_16 is cheaper naive once the prime-index chain cannot reach a free leaf
    plan = make_plan(group("cyclic:32"), PlanConfig(base_order=8))
    c = OpCounter()
    execute_plan(plan, random_alpha(32, 0), c)
    assert c.total <= 32 * 32 + 31 * 32


def test_tolerance_for_depth():
    assert tolerance_for_depth(0) == 1e-6
    assert tolerance_for_depth(5) == pytest.approx(1e-4)
