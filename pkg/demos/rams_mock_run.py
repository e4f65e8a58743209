"""Standard prompting vs HD-LoA on three RAMS-style documents, with a scripted backend.

Run with ``python3 demos/rams_mock_run.py``. No network or credentials needed:
the mock backend answers each prompt by looking for text from its target document.
"""

import json
import tempfile
from pathlib import Path

from hdloa.core import TaskKind
from hdloa.data import DatasetManifest, write_jsonl
from hdloa.promptkit import Style
from hdloa.runner import RunConfig, compare_runs, run_experiment, summary_table

DOCS = [
    {"id": "d1", "document": "Rebels shelled the market in Aleppo , killing 12 civilians .",
     "event_type": "life.die.na", "roles": ["victim", "place"],
     "gold": {"victim": ["12 civilians"], "place": ["Aleppo"]},
     "trigger": {"text": "killing", "char_start": 38, "char_end": 45}},
    {"id": "d2", "document": "The charity gave blankets to refugees near the border .",
     "event_type": "transaction.transaction.giftgrantprovideaid", "roles": ["giver", "recipient", "place"],
     "gold": {"giver": ["The charity"], "recipient": ["refugees"], "place": ["the border"]},
     "trigger": {"text": "gave", "char_start": 12, "char_end": 16}},
    {"id": "d3", "document": "Customs officers detained two smugglers at the port on Friday .",
     "event_type": "justice.arrestjaildetain.arrestjaildetain", "roles": ["jailer", "detainee", "place"],
     "gold": {"jailer": ["Customs officers"], "detainee": ["two smugglers"], "place": ["the port"]},
     "trigger": {"text": "detained", "char_start": 17, "char_end": 25}},
]

# final answer lines per document; the standard baseline misses more roles
STANDARD = {
    "12 civilians": '[victim]: "civilians"\n[place]: "market"',
    "blankets to refugees": '[giver]: "charity"\n[recipient]: "blankets"\n[place]: "not specified"',
    "two smugglers": '[jailer]: "not specified"\n[detainee]: "two smugglers"\n[place]: "port"',
}
HDLOA = {
    "12 civilians": 'Step 3 ...\n[victim]: "12 civilians"\n[place]: "Aleppo"',
    "blankets to refugees": 'Step 3 ...\n[giver]: "The charity"\n[recipient]: "refugees"\n[place]: "not specified"',
    "two smugglers": 'Step 3 ...\n[jailer]: "Customs officers"\n[detainee]: "two smugglers"\n[place]: "port"',
}


def mock(responses: dict) -> dict:
    return {"kind": "mock", "script": {"rules": [{"substring": k, "response": v} for k, v in responses.items()],
                                       "default": "fail"}}


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        write_jsonl(tmp / "rams_demo.jsonl", DOCS)
        manifest = DatasetManifest(TaskKind.EAE_RAMS, tmp / "rams_demo.jsonl", "test")
        runs = []
        for style, responses, heuristics in ((Style.STANDARD, STANDARD, None), (Style.HDLOA, HDLOA, "default")):
            cfg = RunConfig(TaskKind.EAE_RAMS, manifest, style, heuristics_path=heuristics,
                            backend=mock(responses), cache_dir=str(tmp / "cache"))
            bundle = run_experiment(cfg, out_dir=tmp / style.value)
            print(summary_table(bundle))
            print()
            runs.append(bundle)
        print(compare_runs(runs, baseline=0).render())
        print()
        record = json.loads((tmp / "hdloa" / "records" / "d3.json").read_text())
        print("d3 predictions:", json.dumps(record["predictions"]))


if __name__ == "__main__":
    main()
