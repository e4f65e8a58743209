"""Span normalization, Arg-I/Arg-C micro scores and classification accuracy."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .core import EMPTY_SCORES, EAEInstance, EAEScores, RolePredictions

ARTICLES = frozenset({"a", "an", "the"})
PREPOSITIONS = frozenset({"of", "to", "in", "on", "at", "by", "for", "from", "with"})


@dataclass(frozen=True)
class MatchPolicy:
    strip_articles: bool = True
    strip_leading_prepositions: bool = True
    case_fold: bool = True
    whitespace_collapse: bool = True

    def __post_init__(self):
        if not self.whitespace_collapse:
            raise ValueError("whitespace collapsing cannot be disabled")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def named(cls, name: str) -> "MatchPolicy":
        try:
            return _POLICIES[name]
        except KeyError:
            raise ValueError(f"unknown match policy {name!r}; choose from {sorted(_POLICIES)}") from None


DEFAULT_POLICY = MatchPolicy()

_POLICIES = {
    "default": DEFAULT_POLICY,
    "exact": MatchPolicy(strip_articles=False, strip_leading_prepositions=False, case_fold=False),
    "articles": MatchPolicy(strip_leading_prepositions=False),
}


def normalize_span(text: str, policy: MatchPolicy = DEFAULT_POLICY) -> str:
    """Collapse whitespace, optionally casefold, drop leading articles/prepositions.

    Leading words are stripped repeatedly ("of the car" -> "car"), which is
    what makes the function idempotent.
    """
    if policy.case_fold:
        text = text.casefold()
    tokens = text.split()
    drop = set()
    if policy.strip_articles:
        drop |= ARTICLES
    if policy.strip_leading_prepositions:
        drop |= PREPOSITIONS
    i = 0
    # keep at least one token so a lone "the" still matches itself
    while i < len(tokens) - 1 and tokens[i].casefold() in drop:
        i += 1
    return " ".join(tokens[i:])


Pair = tuple[EAEInstance, RolePredictions]


@dataclass(frozen=True)
class InstanceCounts:
    """Counts for one instance, kept so per-role tables can be derived."""

    instance_id: str
    scores: EAEScores
    per_role: Mapping[str, EAEScores]


def _greedy_match(preds: Sequence[str], golds: Sequence[str]) -> int:
    """One-to-one equality matching: each prediction takes the first free gold."""
    free = Counter(golds)
    tp = 0
    for p in preds:
        if free[p] > 0:
            free[p] -= 1
            tp += 1
    return tp


def score_instance(inst: EAEInstance, pred: RolePredictions, policy: MatchPolicy = DEFAULT_POLICY,
                   roles: Optional[Iterable[str]] = None) -> InstanceCounts:
    """Score one instance, optionally restricted to a subset of its roles."""
    unknown = set(pred.per_role) - set(inst.roles)
    if unknown:
        raise ValueError(f"instance {inst.id!r}: predictions for unknown roles {sorted(unknown)}")
    roles = list(inst.roles) if roles is None else [r for r in inst.roles if r in set(roles)]
    norm = lambda s: normalize_span(s, policy)  # noqa: E731
    gold = {r: [norm(s) for s in inst.gold.get(r, ())] for r in roles}
    predicted = {r: [norm(s) for s in pred.spans(r)] for r in roles}

    per_role = {}
    for r in roles:
        tp = _greedy_match(predicted[r], gold[r])
        per_role[r] = (tp, len(predicted[r]), len(gold[r]))
    all_pred = [s for r in roles for s in predicted[r]]
    all_gold = [s for r in roles for s in gold[r]]
    tp_i = _greedy_match(all_pred, all_gold)
    tp_c = sum(v[0] for v in per_role.values())
    n_pred, n_gold = len(all_pred), len(all_gold)
    scores = EAEScores(tp_i, n_pred - tp_i, n_gold - tp_i, tp_c, n_pred - tp_c, n_gold - tp_c)
    # per-role Arg-I is taken as Arg-C within the role; cross-role credit
    # has no single role to attribute to
    role_scores = {r: EAEScores(tp, p - tp, g - tp, tp, p - tp, g - tp) for r, (tp, p, g) in per_role.items()}
    return InstanceCounts(inst.id, scores, role_scores)


def pair_predictions(instances: Sequence[EAEInstance], predictions: Mapping[str, RolePredictions]) -> list[Pair]:
    """Join predictions to instances by id; unknown prediction ids are an error.

    Instances without a prediction get an empty one (every gold span is a miss).
    """
    by_id = {inst.id: inst for inst in instances}
    unknown = sorted(set(predictions) - set(by_id))
    if unknown:
        raise KeyError(f"predictions for unknown instance ids: {unknown}")
    return [(inst, predictions.get(inst.id, RolePredictions({}))) for inst in instances]


def score_eae(predictions: Sequence[Pair], policy: MatchPolicy = DEFAULT_POLICY) -> EAEScores:
    total = EMPTY_SCORES
    for inst, pred in predictions:
        total = total + score_instance(inst, pred, policy).scores
    return total


def per_role_scores(predictions: Sequence[Pair], policy: MatchPolicy = DEFAULT_POLICY) -> dict[str, EAEScores]:
    out: dict[str, EAEScores] = {}
    for inst, pred in predictions:
        for role, s in score_instance(inst, pred, policy).per_role.items():
            out[role] = out.get(role, EMPTY_SCORES) + s
    return dict(sorted(out.items()))


def shared_gold_instances(instances: Iterable[EAEInstance], policy: MatchPolicy = DEFAULT_POLICY) -> list[str]:
    """Ids of instances where two roles share a normalized gold string."""
    flagged = []
    for inst in instances:
        seen = {}
        for role, spans in inst.gold.items():
            for s in {normalize_span(x, policy) for x in spans}:
                if s in seen and seen[s] != role:
                    flagged.append(inst.id)
                    break
                seen[s] = role
            else:
                continue
            break
    return flagged


@dataclass(frozen=True)
class SeenUnseen:
    seen: EAEScores
    unseen: EAEScores
    seen_pairs: int
    unseen_pairs: int


def seen_unseen_breakdown(predictions: Sequence[Pair], exemplar_roles: Iterable[str],
                          policy: MatchPolicy = DEFAULT_POLICY) -> SeenUnseen:
    """Score (instance, role) pairs separately by whether the role was demonstrated."""
    demo = set(exemplar_roles)
    seen = unseen = EMPTY_SCORES
    n_seen = n_unseen = 0
    for inst, pred in predictions:
        in_demo = [r for r in inst.roles if r in demo]
        out_demo = [r for r in inst.roles if r not in demo]
        n_seen += len(in_demo)
        n_unseen += len(out_demo)
        if in_demo:
            seen = seen + score_instance(inst, pred, policy, in_demo).scores
        if out_demo:
            unseen = unseen + score_instance(inst, pred, policy, out_demo).scores
    return SeenUnseen(seen, unseen, n_seen, n_unseen)


def score_classification(pairs: Sequence[tuple[str, Optional[str]]]) -> float:
    """Accuracy; a predicted label of ``None`` marks a parse error (incorrect)."""
    if not pairs:
        raise ValueError("no classification pairs to score")
    correct = sum(1 for gold, pred in pairs if pred is not None and pred == gold)
    return correct / len(pairs)


def format_report(scores: EAEScores, policy: MatchPolicy, per_role: Optional[Mapping[str, EAEScores]] = None,
                  shared_gold: Sequence[str] = ()) -> str:
    """Plain-text score report with four-decimal fractions."""
    c = scores.counts
    lines = [f"policy: {', '.join(f'{k}={v}' for k, v in policy.to_dict().items())}", ""]
    lines.append(f"{'metric':<8}{'P':>8}{'R':>8}{'F1':>8}{'TP':>6}{'FP':>6}{'FN':>6}")
    for name, prf, suffix in (("Arg-I", scores.arg_i, "i"), ("Arg-C", scores.arg_c, "c")):
        lines.append(f"{name:<8}{prf.precision:>8.4f}{prf.recall:>8.4f}{prf.f1:>8.4f}"
                     f"{c['tp_' + suffix]:>6}{c['fp_' + suffix]:>6}{c['fn_' + suffix]:>6}")
    if per_role:
        width = max(len("role"), *(len(r) for r in per_role)) + 2
        lines += ["", f"{'role':<{width}}{'P':>8}{'R':>8}{'F1':>8}{'TP':>6}{'FP':>6}{'FN':>6}"]
        for role, s in per_role.items():
            prf = s.arg_c
            lines.append(f"{role:<{width}}{prf.precision:>8.4f}{prf.recall:>8.4f}{prf.f1:>8.4f}"
                         f"{s.tp_c:>6}{s.fp_c:>6}{s.fn_c:>6}")
    if shared_gold:
        lines += ["", f"instances with a gold string shared across roles: {', '.join(shared_gold)}"]
    return "\n".join(lines) + "\n"
