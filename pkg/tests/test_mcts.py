import random

import pytest
from hypothesis import given, settings, strategies as st

from mctscube.bcp import Propagator, failed_literal_fixpoint
from mctscube.cnf import CnfFormula
from mctscube.cuber import greedy_pick
from mctscube.mcts import (
    OPEN, REFUTED, TERMINAL, MctsNode, SearchConfig, backup, best_action, expand, leaf_reward,
    make_root, puct_value, root_from_probes, run_search, select,
)

from conftest import brute_force_sat, random_formula


def _node(prior, **kw):
    return MctsNode((), (), OPEN, prior=prior, refuted_value=kw.pop("refuted_value", 10), **kw)


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(c_puct=0)
    with pytest.raises(ValueError):
        SearchConfig(budget=0)
    assert SearchConfig() == SearchConfig(5.0, 30)


def test_puct_fresh_node():
    node = _node({1: 0.6, 2: 0.4})
    assert puct_value(node, 1, 5) == pytest.approx(3.0)
    assert puct_value(node, 2, 5) == pytest.approx(2.0)
    with pytest.raises(KeyError):
        puct_value(node, 3, 5)


def test_puct_visited():
    node = _node({1: 0.5, 2: 0.5})
    node.N[1], node.W[1] = 3, 21.0
    node.N[2] = 1
    node.visits = 4
    assert puct_value(node, 1, 5) == pytest.approx(8.25)


def test_select_fresh_root_follows_prior():
    root = _node({1: 8 / 9, 2: 1 / 9})
    path = select(root, SearchConfig())
    assert [(n is root, a, s) for n, a, s in path] == [(True, 1, 1)]


def test_select_equal_priors_tie_goes_low_index_then_visit_penalty():
    f = CnfFormula.from_clauses([[1, 3], [2, 4], [-3, -4, 5]])
    eng = Propagator(f)
    root = _node({1: 0.5, 2: 0.5})
    path = select(root, SearchConfig())
    assert path[-1][1] == 1
    backup(path, expand(root, 1, eng))
    assert select(root, SearchConfig())[-1][1] == 2


def test_select_stops_when_only_action_refuted():
    f = CnfFormula.from_clauses([[1, 2], [1, -2], [-1, 3], [-1, -3]])
    eng = Propagator(f)
    root = _node({1: 1.0})
    path = select(root, SearchConfig())
    backup(path, expand(root, 1, eng))
    assert 1 in root.refuted_actions
    assert root.closed
    assert select(root, SearchConfig()) == []


def test_expand_f_a(f_a):
    eng = Propagator(f_a)
    root = make_root(eng, [], cutoff=2)
    assert root.candidates == [1]
    pos, neg = expand(root, 1, eng, cutoff=2)
    assert set(pos.literals) == {1, 2, 3}
    assert set(neg.literals) == {-1, 2, 3}
    assert pos.status == neg.status == TERMINAL
    assert pos.value == 2.0


def test_expand_pos_implies_neg_refuted():
    f = CnfFormula.from_clauses([[1], [-1, 2]])
    eng = Propagator(f)
    root = MctsNode((), (), OPEN, prior={1: 1.0}, refuted_value=f.num_vars)
    pos, neg = expand(root, 1, eng)
    assert 2 in pos.literals and pos.status != REFUTED
    assert neg.status == REFUTED and neg.value == 2
    assert 1 not in root.refuted_actions


def test_expand_both_refuted():
    f = CnfFormula.from_clauses([[1, 2], [1, -2], [-1, 3], [-1, -3]])
    eng = Propagator(f)
    root = _node({1: 1.0}, refuted_value=3)
    pos, neg = expand(root, 1, eng)
    assert pos.status == neg.status == REFUTED
    assert root.refuted_actions == {1}
    with pytest.raises(ValueError):
        expand(root, 1, eng)


def test_leaf_reward():
    assert leaf_reward(MctsNode((1,), (1, 2, 3), TERMINAL, gain=2)) == 2.0
    assert leaf_reward(MctsNode((1, -2), (1, -2), OPEN, gain=0)) == 0.0
    assert leaf_reward(MctsNode((1,), (), REFUTED, refuted_value=7)) == 7.0
    with pytest.raises(ValueError):
        leaf_reward(MctsNode((), ()))


def _leaf(path, value):
    n = MctsNode(path, path, TERMINAL)
    n.value = value
    return n


def test_backup_single_level():
    root = _node({1: 1.0, 2: 0.0})
    root.children[1] = (_leaf((1,), 2), _leaf((-1,), 2))
    backup([(root, 1, 1)], root.children[1])
    assert (root.N[1], root.W[1], root.best[1]) == (1, 8, 8)
    assert root.visits == 1


def test_backup_zero_values():
    root = _node({1: 1.0, 2: 0.0})
    root.children[1] = (_leaf((1,), 0), _leaf((-1,), 0))
    backup([(root, 1, 1)], root.children[1])
    assert (root.N[1], root.W[1]) == (1, 0)


def test_backup_two_levels():
    root = _node({1: 1.0, 3: 0.0})
    mid = MctsNode((1,), (1,), OPEN, prior={2: 1.0, 4: 0.0})
    sibling = _leaf((-1,), 1)
    root.children[1] = (mid, sibling)
    mid.children[2] = (_leaf((1, 2), 2), _leaf((1, -2), 2))
    backup([(root, 1, 1), (mid, 2, 1)], mid.children[2])
    assert mid.W[2] == 8 and mid.value == 8
    assert root.W[1] == 17 and root.best[1] == 17


def test_run_search_f_a(f_a):
    eng = Propagator(f_a)
    assert run_search(make_root(eng, []), eng, SearchConfig(budget=30)) == 1


def test_run_search_single_candidate():
    f = CnfFormula.from_clauses([[1, 2]], 2)
    eng = Propagator(f)
    root = root_from_probes((), {1: (0, 0)}, None, 2)
    assert run_search(root, eng, SearchConfig(budget=5)) == 1


def test_run_search_requires_candidates():
    with pytest.raises(ValueError):
        run_search(MctsNode((), ()), None)


def _stats(root):
    return {a: (root.N[a], root.W[a], root.best[a]) for a in root.candidates}


def test_run_search_deterministic():
    rng = random.Random(3)
    f = random_formula(rng, max_vars=20, max_clauses=60, widths=(3, 3))
    fx = failed_literal_fixpoint(f, [])
    if fx.refuted or not fx.probes:
        pytest.skip("degenerate instance")
    runs = []
    for _ in range(2):
        eng = Propagator(f)
        root = root_from_probes(fx.trail.literals, fx.probes, None, f.num_vars)
        runs.append((run_search(root, eng, SearchConfig(budget=20), rng=random.Random(0)), _stats(root)))
    assert runs[0] == runs[1]


def _closed_root(f, cutoff=None):
    fx = failed_literal_fixpoint(f, [])
    if fx.refuted or not fx.probes:
        return None
    return root_from_probes(fx.trail.literals, fx.probes, cutoff, f.num_vars), fx


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 25))
def test_visit_conservation_and_q_bound(seed, budget):
    rng = random.Random(seed)
    f = random_formula(rng, max_vars=12, max_clauses=45, widths=(2, 3))
    got = _closed_root(f)
    if got is None:
        return
    root, _ = got
    eng = Propagator(f)
    cfg = SearchConfig(budget=budget)
    sims = 0
    for _ in range(budget):
        path = select(root, cfg)
        if not path:
            break
        node, a, _ = path[-1]
        backup(path, expand(node, a, eng))
        sims += 1
        assert sum(root.N.values()) == sims
    stack = [root]
    while stack:
        node = stack.pop()
        for a in node.candidates:
            assert node.N[a] >= 0 and node.W[a] >= 0
            if node.N[a]:
                assert node.Q(a) <= node.best[a] + 1e-9
        for a, (p, q) in node.children.items():
            # every simulation through a child passed through its parent edge
            assert sum(p.N.values()) + sum(q.N.values()) <= node.N[a]
            stack += [p, q]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_budget_one_matches_greedy(seed):
    rng = random.Random(seed)
    f = random_formula(rng, max_vars=12, max_clauses=50, widths=(2, 3))
    got = _closed_root(f)
    if got is None:
        return
    root, fx = got
    assert run_search(root, Propagator(f), SearchConfig(budget=1)) == greedy_pick(fx.probes)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_returned_refuted_action_means_unsat(seed):
    rng = random.Random(seed)
    f = random_formula(rng, max_vars=10, max_clauses=50, widths=(2, 3))
    got = _closed_root(f)
    if got is None:
        return
    root, _ = got
    a = run_search(root, Propagator(f), SearchConfig(budget=10))
    if a in root.refuted_actions:
        assert not brute_force_sat(f)


@given(st.dictionaries(st.integers(1, 30), st.tuples(st.integers(0, 20), st.integers(0, 20)),
                       min_size=1, max_size=8), st.integers(1, 9))
def test_fresh_root_choice_follows_raw_scores_at_any_scale(probes, k):
    # pair_score is not homogeneous, so scaling counts can move the argmax:
    # (0, 3) and (1, 1) tie at 3, while (0, 6) and (2, 2) score 6 and 8
    scaled = {v: (a * k, b * k) for v, (a, b) in probes.items()}
    root = root_from_probes((), scaled, None, 30)
    assert select(root, SearchConfig())[-1][1] == greedy_pick(scaled)


def test_best_action_tie_breaks():
    root = _node({1: 0.5, 2: 0.5, 3: 0.0})
    root.best.update({1: 4.0, 2: 4.0, 3: 1.0})
    root.N.update({1: 1, 2: 2})
    assert best_action(root) == 2
    root.N[1] = 2
    assert best_action(root) == 1
