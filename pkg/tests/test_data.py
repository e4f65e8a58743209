import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURES
from hdloa.core import TaskKind
from hdloa.data import (
    DataError,
    DatasetManifest,
    eae_to_record,
    load_classification,
    load_eae,
    sample_subset,
    write_jsonl,
)


def write_records(tmp_path, records, name="d.jsonl"):
    path = tmp_path / name
    write_jsonl(path, records)
    return path


def eae_record(i):
    return {"id": f"e{i}", "document": "Police arrested him .", "event_type": "arrest",
            "trigger": {"text": "arrested", "char_start": 7, "char_end": 15},
            "roles": ["jailer"], "gold": {"jailer": ["Police"]}}


def test_load_eae_keeps_file_order(tmp_path):
    path = write_records(tmp_path, [eae_record(i) for i in range(3)])
    insts = load_eae(DatasetManifest(TaskKind.EAE_RAMS, path))
    assert [i.id for i in insts] == ["e0", "e1", "e2"]
    assert insts[0].trigger.text == "arrested"


def test_expected_count_matches(tmp_path):
    path = write_records(tmp_path, [eae_record(i) for i in range(871)])
    assert len(load_eae(DatasetManifest(TaskKind.EAE_RAMS, path, expected_count=871))) == 871


def test_expected_count_mismatch(tmp_path):
    path = write_records(tmp_path, [eae_record(i) for i in range(3)])
    with pytest.raises(DataError, match="expected"):
        load_eae(DatasetManifest(TaskKind.EAE_RAMS, path, expected_count=4))


def test_missing_field_names_line(tmp_path):
    bad = eae_record(1)
    del bad["event_type"]
    path = write_records(tmp_path, [eae_record(0), bad])
    with pytest.raises(DataError) as err:
        load_eae(DatasetManifest(TaskKind.EAE_RAMS, path))
    assert err.value.line == 2 and err.value.field == "event_type"


def test_invalid_instance_rejected(tmp_path):
    bad = eae_record(0)
    bad["trigger"]["char_start"] = 0
    path = write_records(tmp_path, [bad])
    with pytest.raises(DataError, match="trigger"):
        load_eae(DatasetManifest(TaskKind.EAE_RAMS, path))


def test_eae_record_roundtrip():
    insts = load_eae(DatasetManifest(TaskKind.EAE_RAMS, FIXTURES / "rams_small.jsonl"))
    original = [json.loads(line) for line in (FIXTURES / "rams_small.jsonl").read_text().splitlines()]
    assert [eae_to_record(i) for i in insts] == original


def test_snli_label_with_spaces(tmp_path):
    path = write_records(tmp_path, [{"id": "1", "premise": "p", "hypothesis": "h",
                                     "gold_label": "it is not possible to tell"}])
    (inst,) = load_classification(DatasetManifest(TaskKind.NLI, path))
    assert inst.gold_label == "it is not possible to tell" and inst.hypothesis == "h"


def test_unknown_label_rejected(tmp_path):
    path = write_records(tmp_path, [{"id": "1", "text": "t", "gold_label": "maybe"}])
    with pytest.raises(DataError, match="maybe"):
        load_classification(DatasetManifest(TaskKind.SENTIMENT, path))


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert load_classification(DatasetManifest(TaskKind.SENTIMENT, path)) == []


def test_bad_json_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": 1}\n{oops\n')
    with pytest.raises(DataError) as err:
        load_classification(DatasetManifest(TaskKind.SENTIMENT, path))
    assert err.value.line in (1, 2)


def test_subset_full_fraction_is_identity():
    items = list(range(800))
    assert sample_subset(items, 1.0, 3) == items


def test_subset_one_percent_is_deterministic():
    items = [f"id{i}" for i in range(800)]
    a = sample_subset(items, 0.01, 7)
    assert len(a) == 8 and a == sample_subset(items, 0.01, 7)


def test_subset_ceil_rule():
    assert len(sample_subset(list(range(5)), 0.01, 0)) == 1


def test_subset_errors():
    with pytest.raises(ValueError):
        sample_subset([], 0.5, 0)
    with pytest.raises(ValueError):
        sample_subset([1], 0, 0)
    with pytest.raises(ValueError):
        sample_subset([1], 1.5, 0)


@given(st.integers(1, 300), st.integers(1, 100), st.integers(0, 10_000))
def test_subset_properties(n, pct, seed):
    items = list(range(n))
    out = sample_subset(items, pct / 100, seed)
    assert len(out) == -(-pct * n // 100)
    assert out == sorted(set(out))
    assert set(out) <= set(items)
