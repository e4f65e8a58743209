import json

import pytest

from conftest import FIXTURES, mock_client, substring_rule
from hdloa.core import TaskKind
from hdloa.data import DatasetManifest, load, write_jsonl
from hdloa.heuristics import generation_prompt
from hdloa.llm import cache_key, prompt_digest
from hdloa.promptkit import Ablation, Style
from hdloa.runner import (
    ConfigError,
    ReportBundle,
    RunConfig,
    _load_exemplars,
    aggregate_records,
    build_prompt,
    compare_runs,
    resolve_heuristics,
    run_experiment,
    summary_table,
)
from hdloa.score import DEFAULT_POLICY
from runner_fixture import (
    EXPECTED_ARG_C_F1,
    EXPECTED_ARG_I_F1,
    EXPECTED_COUNTS,
    HDLOA_RESPONSES,
    RAMS_MANIFEST,
    headline_bundles,
    rams_config,
    script,
    table_bundle,
    write_config,
)


def test_rams_run_matches_hand_scores(tmp_path):
    bundle = run_experiment(rams_config(), out_dir=tmp_path)
    scores = bundle.aggregate["scores"]
    assert scores["counts"] == EXPECTED_COUNTS
    assert abs(scores["arg_i"]["f1"] - EXPECTED_ARG_I_F1) < 1e-12
    assert abs(scores["arg_c"]["f1"] - EXPECTED_ARG_C_F1) < 1e-12
    assert bundle.aggregate["method"] == "HD-LoA" and bundle.aggregate["failed"] == 0
    assert [r["instance_id"] for r in bundle.records] == ["rams-1", "rams-2", "rams-3"]
    assert (tmp_path / "report.json").is_file() and len(list((tmp_path / "records").iterdir())) == 3


def test_seen_unseen_split_in_report():
    split = run_experiment(rams_config()).aggregate["seen_unseen"]
    assert split["exemplar_roles"] == ["beneficiary", "giver", "recipient"]
    assert (split["seen_pairs"], split["unseen_pairs"]) == (3, 5)
    assert (split["seen"]["counts"]["tp_c"], split["seen"]["counts"]["fp_c"]) == (2, 1)
    assert (split["unseen"]["counts"]["tp_c"], split["unseen"]["counts"]["fn_c"]) == (3, 2)


def test_aggregate_recomputes_from_records():
    bundle = run_experiment(rams_config())
    again = aggregate_records(bundle.records, TaskKind.EAE_RAMS, DEFAULT_POLICY,
                              bundle.aggregate["seen_unseen"]["exemplar_roles"])
    assert again["scores"] == bundle.aggregate["scores"]


def test_record_digest_matches_cache_key():
    cfg = rams_config()
    bundle = run_experiment(cfg)
    client = mock_client([], default="x", model_id=cfg.model_id)
    exemplars = _load_exemplars(cfg)
    heuristics = resolve_heuristics(cfg, client, exemplars)
    for inst, rec in zip(load(cfg.dataset), bundle.records):
        request = client.request(build_prompt(cfg, heuristics, exemplars, inst).rendered, cfg.temperature)
        assert rec["prompt_digest"] == cache_key(request)


def test_report_roundtrip(tmp_path):
    bundle = run_experiment(rams_config(), out_dir=tmp_path)
    loaded = ReportBundle.load(tmp_path / "report.json")
    assert loaded.aggregate_json() == bundle.aggregate_json()
    assert loaded.config == bundle.config and loaded.records == bundle.records
    assert loaded.sampling["seed"] == 0 and loaded.template_digests


def test_no_heuristics_ablation_prompts():
    seen = []
    client = mock_client([], default='[x]: "not specified"')
    original = client.complete

    def spy(request):
        seen.append(request.prompt)
        return original(request)

    client.complete = spy
    bundle = run_experiment(rams_config(ablation=Ablation.NO_HEURISTICS, heuristics_path=None), client)
    assert len(seen) == 3 and all("heuristic list" not in p for p in seen)
    assert bundle.aggregate["method"] == "HD-LoA w/o heuristics" and bundle.aggregate["heuristics"] == []


def test_failed_instance_zero_credit(tmp_path):
    responses = {k: v for k, v in HDLOA_RESPONSES.items() if "Lyon" not in k}
    bundle = run_experiment(rams_config(backend={"kind": "mock", "script": script(responses)}), out_dir=tmp_path)
    (failed,) = bundle.failed
    assert failed["instance_id"] == "rams-3" and "rams-3" in failed["error"]
    scores = bundle.aggregate["scores"]
    assert scores["counts"]["fn_c"] == 3 and scores["counts"]["tp_c"] == 4 and bundle.aggregate["failed"] == 1
    assert json.loads((tmp_path / "records" / "rams-3.json").read_text())["failed"] is True


def test_resume_skips_finished_records(tmp_path):
    first = run_experiment(rams_config(), out_dir=tmp_path)
    (tmp_path / "records" / "rams-2.json").unlink()
    client = mock_client([substring_rule(k, v) for k, v in HDLOA_RESPONSES.items()])
    second = run_experiment(rams_config(), client, out_dir=tmp_path)
    assert client.backend.calls == 1
    assert second.aggregate_json() == first.aggregate_json()


def test_resume_ignores_stale_digest(tmp_path):
    run_experiment(rams_config(), out_dir=tmp_path)
    client = mock_client([substring_rule(k, v) for k, v in HDLOA_RESPONSES.items()])
    run_experiment(rams_config(k=2), client, out_dir=tmp_path)
    assert client.backend.calls == 3


def test_warm_cache_second_run_is_free(tmp_path):
    cfg = rams_config(cache_dir=str(tmp_path / "cache"))
    first_client = mock_client([substring_rule(k, v) for k, v in HDLOA_RESPONSES.items()], cache_dir=cfg.cache_dir)
    first = run_experiment(cfg, first_client)
    second_client = mock_client([], default=None, cache_dir=cfg.cache_dir)
    second = run_experiment(cfg, second_client)
    assert second_client.backend.calls == 0 and second.cache["hits"] == 3
    assert first.aggregate_json() == second.aggregate_json()


def docee_records(n):
    return [{"id": f"d{i}", "document": f"Quake number {i} struck .", "event_type": "Earthquakes",
             "roles": ["Date", "Magnitude"], "gold": {"Magnitude": ["5.0"]} if i % 2 else {}} for i in range(n)]


def test_eval_limit_200_of_800(tmp_path):
    path = tmp_path / "docee.jsonl"
    write_jsonl(path, docee_records(800))
    cfg = RunConfig(TaskKind.EAE_DOCEE, DatasetManifest(TaskKind.EAE_DOCEE, path), heuristics_path="default",
                    eval_limit=200, seed=11, max_parallel=8,
                    backend={"kind": "mock", "script": {"default": '[Magnitude]: "5.0"\n[Date]: "not specified"'}})
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.aggregate["instances"] == 200 and a.sampling["dataset_size"] == 800
    ids = [r["instance_id"] for r in a.records]
    assert ids == [r["instance_id"] for r in b.records]
    assert ids == sorted(ids, key=lambda s: int(s[1:]))


def test_generate_and_select_heuristics():
    text = (FIXTURES / "generated_heuristics.txt").read_text()
    rules = [{"digest": prompt_digest(generation_prompt("giver", 10)), "response": text}]
    rules += [{"substring": k, "response": v} for k, v in HDLOA_RESPONSES.items()]
    cfg = rams_config(heuristics_path=None, generate=True, selection_dataset=RAMS_MANIFEST,
                      backend={"kind": "mock", "script": {"rules": rules, "default": "fail"}})
    bundle = run_experiment(cfg)
    labels = [h["label"] for h in bundle.aggregate["heuristics"]]
    assert len(labels) == 3 and all(h["provenance"] == "generated" for h in bundle.aggregate["heuristics"])
    assert bundle.sampling["selection_fraction"] == 0.01


def test_classification_run():
    ds = DatasetManifest(TaskKind.SENTIMENT, FIXTURES / "sst2_small.jsonl")
    responses = {"gorgeous": "Step 3: Re-evaluate sentiment:\nsentiment: positive", "boilerplate": "meh"}
    cfg = RunConfig(TaskKind.SENTIMENT, ds, heuristics_path="default",
                    backend={"kind": "mock", "script": script(responses)})
    agg = run_experiment(cfg).aggregate
    assert agg["accuracy"] == 0.5 and agg["parse_errors"] == 1 and len(agg["heuristics"]) == 5


def test_cot_baseline_run():
    bundle = run_experiment(rams_config(style=Style.COT, heuristics_path=None))
    assert bundle.aggregate["method"] == "CoT" and bundle.aggregate["heuristics"] == []


def test_compare_headline_deltas():
    table = compare_runs(headline_bundles(), baseline=0)
    assert table.methods == ("Standard", "CoT", "HD-LoA")
    col = table.metrics.index("Arg-C")
    assert [table.delta(i, col) for i in (1, 2)] == [3.34, 7.99]
    vs_cot = compare_runs(headline_bundles(), baseline=1)
    assert vs_cot.delta(2, col) == 4.65
    text = vs_cot.render()
    assert "CoT (baseline)" in text and "+4.65" in text
    assert vs_cot.render("markdown").startswith("| method |")


def test_compare_errors():
    with pytest.raises(ValueError, match="at least two"):
        compare_runs(headline_bundles()[:1])
    with pytest.raises(ValueError, match="different datasets"):
        compare_runs([table_bundle("cot", 0.4, 0.3), table_bundle("hdloa", 0.4, 0.3, path="docee.jsonl")])
    with pytest.raises(ValueError, match="out of range"):
        compare_runs(headline_bundles(), baseline=5)


def test_summary_table():
    text = summary_table(headline_bundles()[2])
    assert "HD-LoA" in text and "39.59" in text


def test_config_from_file_resolves_paths(tmp_path):
    cfg = RunConfig.from_file(write_config(tmp_path))
    assert cfg.cache_dir == str(tmp_path / "cache")
    assert cfg.backend["script"] == str(tmp_path / "script.json")
    assert run_experiment(cfg).aggregate["scores"]["counts"]["tp_c"] == 5


@pytest.mark.parametrize("overrides,match", [
    ({"colour": "blue"}, "unknown config keys"),
    ({"heuristics_path": None}, "heuristics_path"),
    ({"style": "cot", "ablation": "no_loa"}, "hdloa style only"),
    ({"k": 0}, "k and n_generate"),
    ({"policy": "fuzzy"}, "fuzzy"),
    ({"style": "sideways"}, "sideways"),
])
def test_config_errors(tmp_path, overrides, match):
    with pytest.raises(ConfigError, match=match):
        RunConfig.from_file(write_config(tmp_path, **overrides))


def test_config_missing_key_and_bad_json(tmp_path):
    with pytest.raises(ConfigError, match="missing config key"):
        RunConfig.from_dict({"dataset": {"path": "x"}})
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.from_file(bad)


def test_generation_for_classification_rejected():
    ds = DatasetManifest(TaskKind.SENTIMENT, FIXTURES / "sst2_small.jsonl")
    with pytest.raises(ConfigError, match="EAE tasks only"):
        RunConfig(TaskKind.SENTIMENT, ds, generate=True, selection_dataset=ds)
