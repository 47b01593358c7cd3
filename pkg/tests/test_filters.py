import json

import pytest

from vtok.datagen import QARecord, filter_responses, parse_response
from vtok.datagen.filters import refusal_phrases


def candidate(question="What is shown?", answer="A red van.", category="perception"):
    raw = json.dumps({"question": question, "answer": answer})
    record = parse_response("v1", category, (0.5, 1.5), raw, "mock:0")
    return record, raw


def test_well_formed_pair_kept_and_normalized():
    record, raw = candidate(answer="It opens at <Frame 3>.", category="temporal")
    report = filter_responses([(record, raw)])
    assert report.drop_counts == {"parse": 0, "refusal": 0, "empty": 0}
    assert report.kept[0].answer == "It opens at frame of 3s."


def test_refusal_answer_dropped():
    report = filter_responses([candidate(answer="I'm sorry, I can't assist")])
    assert report.drop_counts["refusal"] == 1
    assert report.kept == []


def test_empty_answer_dropped():
    report = filter_responses([candidate(answer="   ")])
    assert report.drop_counts["empty"] == 1


def test_non_json_dropped_as_parse():
    record, _ = candidate()
    report = filter_responses([(record, "plain prose, not json")])
    assert report.drop_counts["parse"] == 1


@pytest.mark.parametrize("raw", ["[1, 2]", '{"question": 3, "answer": "x"}', '{"question": "q"}'])
def test_wrong_shapes_dropped_as_parse(raw):
    record, _ = candidate()
    assert filter_responses([(record, raw)]).drop_counts["parse"] == 1


def test_idempotent_on_kept_records():
    record, raw = candidate(answer="Look at <Frame 9> closely.")
    first = filter_responses([(record, raw)])
    again_pairs = [
        (r, json.dumps({"question": r.question, "answer": r.answer})) for r in first.kept
    ]
    second = filter_responses(again_pairs)
    assert second.kept == first.kept
    assert second.dropped_total == 0


def test_parse_response_survives_garbage():
    record = parse_response("v1", "general", (), "{{{", "mock:0")
    assert record.question == "" and record.answer == ""
    assert record.video_id == "v1"


def test_qarecord_rejects_unknown_category():
    with pytest.raises(ValueError, match="category"):
        QARecord(
            video_id="v", question="q", answer="a", category="misc",
            frame_timestamps_s=(), provenance="p",
        )


def test_refusal_list_is_loaded_from_config():
    phrases = refusal_phrases()
    assert "i can't assist" in phrases
    assert all(p == p.lower() for p in phrases)


def test_mixed_batch_counts_every_reason():
    pairs = [
        candidate(),
        candidate(answer="As an AI, no."),
        (candidate()[0], "not json"),
        candidate(question=""),
    ]
    report = filter_responses(pairs)
    assert report.drop_counts == {"parse": 1, "refusal": 1, "empty": 1}
    assert len(report.kept) == 1
