"""Independent scoring oracle and random EAE instances."""

import numpy as np
from scipy.optimize import linear_sum_assignment

from hdloa.core import EAEInstance, RolePredictions
from hdloa.score import DEFAULT_POLICY, normalize_span


def max_matching(preds, golds, same_role_only):
    """Independent oracle: maximum bipartite matching over (role, normalized span) pairs."""
    if not preds or not golds:
        return 0
    weight = np.zeros((len(preds), len(golds)))
    for i, (pr, ps) in enumerate(preds):
        for j, (gr, gs) in enumerate(golds):
            if ps == gs and (gr == pr or not same_role_only):
                weight[i, j] = 1
    rows, cols = linear_sum_assignment(weight, maximize=True)
    return int(weight[rows, cols].sum())


def oracle_counts(instance, pred, policy=DEFAULT_POLICY):
    n = lambda s: normalize_span(s, policy)  # noqa: E731
    preds = [(r, n(s)) for r in instance.roles for s in pred.spans(r)]
    golds = [(r, n(s)) for r in instance.roles for s in instance.gold.get(r, ())]
    tp_i = max_matching(preds, golds, False)
    tp_c = max_matching(preds, golds, True)
    return (tp_i, len(preds) - tp_i, len(golds) - tp_i, tp_c, len(preds) - tp_c, len(golds) - tp_c)


TOKENS = [f"w{i}" for i in range(20)]


def random_instance(rng, idx):
    roles = [f"r{j}" for j in range(rng.randint(1, 5))]

    def spans():
        return [" ".join(rng.choices(TOKENS, k=rng.randint(1, 2))) for _ in range(rng.randint(0, 3))]

    gold = {r: s for r in roles if (s := spans())}
    preds = {r: spans() for r in roles}
    return EAEInstance(f"x{idx}", "doc", "ev", tuple(roles), gold), RolePredictions(preds)
