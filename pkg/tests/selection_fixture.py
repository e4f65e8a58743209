"""Scripted selection scenario with pooled Arg-C targets 0.3369, 0.2652 and 0.40.

Ten instances with 20 roles each, nine of them gold (90 gold spans). Each
heuristic gets (predictions, correct) counts chosen so 2*tp / (pred + gold)
rounds to its target. Every (heuristic, instance) prompt is scripted by
digest, so the real single-heuristic pipeline runs end to end.
"""

from conftest import mock_client
from hdloa.core import EAEInstance, Heuristic, Provenance, RolePredictions, Trigger
from hdloa.heuristics import SingleHeuristicPipeline
from hdloa.llm import MockRule, prompt_digest
from hdloa.promptkit.defaults import RAMS_EXEMPLAR
from hdloa.promptkit.exemplars import render_answer_block

N_INSTANCES, N_ROLES, N_GOLD = 10, 20, 9
ROLES = tuple(f"r{j:02d}" for j in range(N_ROLES))

# label -> (predictions, correct); targets in the comments
PLAN = {
    "Semantic": (189, 47),   # 94 / 279 = 0.33692
    "Syntactic": (91, 24),   # 48 / 181 = 0.26519
    "Lexical": (110, 40),    # 80 / 200 = 0.40
}
TARGETS = {"Semantic": 0.3369, "Syntactic": 0.2652, "Lexical": 0.40}


def motif_subset() -> list[EAEInstance]:
    out = []
    for i in range(N_INSTANCES):
        gold = {ROLES[j]: [f"gold {i} {j}"] for j in range(N_GOLD)}
        doc = " ".join(f"gold {i} {j} ." for j in range(N_GOLD)) + " It was granted ."
        start = doc.index("granted")
        out.append(EAEInstance(f"syn-{i}", doc, "transaction.transaction.giftgrantprovideaid", ROLES, gold,
                               Trigger("granted", start, start + 7)))
    return out


def motif_candidates() -> list[Heuristic]:
    return [Heuristic(label, f"the [giver] found by {label.lower()} cues", Provenance.GENERATED, i)
            for i, label in enumerate(PLAN)]


def _slots():
    # gold slots first so correct answers land there, spread across instances
    gold = [(i, j) for j in range(N_GOLD) for i in range(N_INSTANCES)]
    other = [(i, j) for j in range(N_GOLD, N_ROLES) for i in range(N_INSTANCES)]
    return gold, other


def planned_predictions(label: str) -> dict[str, RolePredictions]:
    n_pred, n_correct = PLAN[label]
    gold, other = _slots()
    per = {i: {} for i in range(N_INSTANCES)}
    for i, j in gold[:n_correct]:
        per[i][ROLES[j]] = [f"gold {i} {j}"]
    for i, j in (other + gold[n_correct:])[: n_pred - n_correct]:
        per[i][ROLES[j]] = [f"wrong {i} {j}"]
    return {f"syn-{i}": RolePredictions(p) for i, p in per.items()}


def motif_pipeline(cache_dir=None, **client_kw) -> SingleHeuristicPipeline:
    pipeline = SingleHeuristicPipeline(None, RAMS_EXEMPLAR)
    rules = []
    for h in motif_candidates():
        preds = planned_predictions(h.label)
        for inst in motif_subset():
            text = "Step 1: ...\n" + render_answer_block(preds[inst.id].per_role, list(ROLES))
            rules.append(MockRule(text, digest=prompt_digest(pipeline.prompt(h, inst))))
    pipeline.client = mock_client(rules, default=None, cache_dir=cache_dir, **client_kw)
    return pipeline
