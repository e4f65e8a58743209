"""Which reasoning heuristics does a few-shot prompt use, and what happens when one is removed?

Run with ``python3 demos/probe_walkthrough.py``. The identifier model is scripted.
"""

from collections import Counter

from hdloa.llm import LLMClient, MockBackend, MockScript
from hdloa.probe import (
    HeuristicCategory,
    ProbeExample,
    categorize,
    count_distinct_heuristics,
    deduct_heuristic,
    identify_prompt_heuristics,
)
from hdloa.promptkit.exemplars import Exemplar

PROMPT = [
    Exemplar("Is a hippo heavier than a horse?", "So the answer is yes.",
             "A hippo weighs about 1,500 kg and a horse about 500 kg."),
    Exemplar("Did the printing press come before the steam engine?", "So the answer is yes.",
             "The press dates from around 1440 and the steam engine from around 1700."),
    Exemplar("Is a whale bigger than a shark?", "So the answer is yes.",
             "Blue whales reach 30 m while the largest sharks reach about 12 m."),
    Exemplar("Is Canberra the capital of Australia?", "So the answer is yes.",
             "Canberra has been the capital since 1913."),
]

IDENTIFIER_REPLY = """Example 1: A "comparison" heuristic weighs the two animals against each other.

Example 2: The "chronological heuristic" orders the two inventions in time.

Example 3: Same comparison as Example 1, this time on length.

Example 4: This is "knowledge-based" recall of a geography fact."""

POOL = [
    (HeuristicCategory.COMP, "Is the Nile longer than the Thames?"),
    (HeuristicCategory.CHRON, "Did the Romans live before the Vikings?"),
    (HeuristicCategory.KB, "Is water made of hydrogen and oxygen?"),
    (HeuristicCategory.DEF, "Is a square a rectangle?"),
    (HeuristicCategory.KB, "Is Lima the capital of Peru?"),
]


def main() -> None:
    client = LLMClient(MockBackend(MockScript((), IDENTIFIER_REPLY)))
    records = identify_prompt_heuristics(PROMPT, client)
    for r in records:
        shared = f" (shared with {sorted(r.shared_with)})" if r.shared_with else ""
        label = f"{r.category_label} -> {categorize(r.category_label).value}" if r.category_label else "no own label"
        print(f"example {r.example_index}: {label}{shared}")
    print("distinct heuristics:", count_distinct_heuristics(records))
    print()

    pool = [ProbeExample(Exemplar(q, "So the answer is yes.", f"Reasoning for: {q}"), c) for c, q in POOL]
    demo = pool[:4]
    print("demonstration categories:", dict(Counter(ex.category.value for ex in demo)))
    reduced = deduct_heuristic(demo, HeuristicCategory.CHRON, pool)
    print("after removing Chron:    ", dict(Counter(ex.category.value for ex in reduced)))


if __name__ == "__main__":
    main()
