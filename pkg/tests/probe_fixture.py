"""Probe scenarios shared by the unit and acceptance tests."""

from conftest import fixture_text, mock_client, substring_rule
from hdloa.probe import HeuristicCategory as HC
from hdloa.probe import ProbeExample, ProbeSample
from hdloa.promptkit.exemplars import Exemplar

IDENTIFIER_OUTPUT = fixture_text("identifier_output.txt")

# One example per category in the five-heuristic demonstration, plus spares.
POOL_SPEC = [
    (HC.ER, "Would a grieving parent skip a celebration?"),
    (HC.COMP, "Is a cat heavier than an elephant?"),
    (HC.KB, "Is Paris the capital of France?"),
    (HC.DEF, "Does botany involve the study of plants?"),
    (HC.CHRON, "Was the telephone invented before the internet?"),
    (HC.COMP, "Is the Nile longer than the Thames?"),
    (HC.KB, "Is water made of hydrogen and oxygen?"),
    (HC.ER, "Would a lonely person enjoy a visit?"),
    (HC.CHRON, "Did the Romans live before the Vikings?"),
    (HC.DEF, "Is a square a rectangle?"),
]


def strategyqa_exemplars() -> list[Exemplar]:
    out = []
    for block in fixture_text("strategyqa_examples.txt").strip().split("\n\n"):
        q, a = block.split("\nA: ")
        reasoning, answer = a.rsplit(" So the answer", 1)
        out.append(Exemplar(q.removeprefix("Q: "), "So the answer" + answer, reasoning))
    return out


def probe_pool() -> list[ProbeExample]:
    return [ProbeExample(Exemplar(q, "So the answer is yes.", f"Reasoning for: {q}"), c) for c, q in POOL_SPEC]


def five_category_demo() -> list[ProbeExample]:
    return probe_pool()[:5]


# sample counts per labelled category, with part of Other coming from
# answers that name no category at all
LABEL_COUNTS = {HC.ER: 14, HC.COMP: 55, HC.KB: 125, HC.DEF: 47, HC.CHRON: 91, HC.OTHER: 168}
N_GARBAGE = 68


def labeling_scenario():
    """500 samples and a mock client whose answers follow LABEL_COUNTS."""
    samples, rules = [], []
    idx = 0
    for category, count in LABEL_COUNTS.items():
        for k in range(count):
            sample = ProbeSample(f"s{idx:03d}", f"[s{idx:03d}] Is claim number {idx} true?")
            if category is HC.OTHER and k < N_GARBAGE:
                answer = "Hard to say, maybe a mix of things."
            else:
                answer = category.value
            rules.append(substring_rule(f"[s{idx:03d}]", answer))
            samples.append(sample)
            idx += 1
    return samples, mock_client(rules, default=None)


# correct / total per category
GROUPED_RESULTS = {HC.ER: (157, 200), HC.COMP: (727, 1000), HC.KB: (109, 125),
                   HC.DEF: (851, 1000), HC.CHRON: (747, 1000), HC.OTHER: (131, 200)}
GROUPED_EXPECTED = {HC.ER: 78.5, HC.COMP: 72.7, HC.KB: 87.2, HC.DEF: 85.1, HC.CHRON: 74.7, HC.OTHER: 65.5}


def grouped_scenario():
    groups, results = {}, []
    for category, (correct, total) in GROUPED_RESULTS.items():
        ids = [f"{category.value}-{i}" for i in range(total)]
        groups[category] = ids
        results.extend((sid, i < correct) for i, sid in enumerate(ids))
    return results, groups
