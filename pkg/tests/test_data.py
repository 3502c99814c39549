import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hatefuse.data import (
    DatasetSplit,
    Sample,
    label_distribution,
    load_split,
    preprocess,
    preprocess_split,
    save_split,
    split_fingerprint,
)
from hatefuse.errors import ValidationError
from hatefuse.schema import DEFAULT_SCHEMAS, schemas_for


def write(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content, encoding="utf-8")
    return path


class TestPreprocess:
    def test_strips_bangla_digits(self):
        assert preprocess("২০২৪ সালে") == " সালে"

    def test_empty(self):
        assert preprocess("") == ""

    def test_ascii_digits_untouched(self):
        assert preprocess("abc 123") == "abc 123"

    def test_full_digit_range_removed(self):
        digits = "".join(chr(cp) for cp in range(0x09E6, 0x09F0))
        assert preprocess(digits) == ""

    def test_adjacent_codepoints_kept(self):
        # U+09E5 and U+09F0 border the digit block and must survive
        assert preprocess("৥ৰ") == "৥ৰ"

    @given(st.text(max_size=200))
    def test_idempotent(self, text):
        once = preprocess(text)
        assert preprocess(once) == once

    def test_whitespace_not_collapsed(self):
        assert preprocess("a ০ b") == "a  b"


class TestLoadTsv:
    def test_three_line_valid(self, tmp_path, schemas):
        path = write(
            tmp_path,
            "train.tsv",
            "id\ttext\ttype\n1\thello\tNone\n2\tworld\tAbusive\n3\tfoo\tSexism\n",
        )
        split = load_split(path, schemas, format="tsv")
        assert len(split) == 3
        assert [s.id for s in split.samples] == ["1", "2", "3"]
        assert split.samples[2].gold == {"type": "Sexism"}

    def test_typo_label_names_row_and_label(self, tmp_path, schemas):
        path = write(
            tmp_path, "bad.tsv", "id\ttext\ttype\n1\thello\tNone\n2\tx\tSexsim\n"
        )
        with pytest.raises(ValidationError, match="Sexsim") as exc:
            load_split(path, schemas, format="tsv")
        assert ":3" in str(exc.value)
        assert "type" in str(exc.value)

    def test_malformed_record_line_number(self, tmp_path, schemas):
        path = write(tmp_path, "bad.tsv", "id\ttext\ttype\n1\tonly-two-fields\n")
        with pytest.raises(ValidationError, match=":2"):
            load_split(path, schemas, format="tsv")

    def test_missing_header(self, tmp_path, schemas):
        path = write(tmp_path, "bad.tsv", "ident\tbody\n1\thello\n")
        with pytest.raises(ValidationError, match="header"):
            load_split(path, schemas, format="tsv")

    def test_shared_task_column_aliases(self, tmp_path, schemas):
        path = write(
            tmp_path,
            "t.tsv",
            "id\ttext\thate_type\thate_severity\tto_whom\n"
            "1\tx\tAbusive\tMild\tIndividual\n",
        )
        split = load_split(path, schemas, format="tsv")
        assert split.samples[0].gold == {
            "type": "Abusive",
            "severity": "Mild",
            "target": "Individual",
        }

    def test_unknown_columns_ignored(self, tmp_path, schemas):
        path = write(
            tmp_path, "t.tsv", "id\ttext\tsource\ttype\n1\tx\ttwitter\tNone\n"
        )
        split = load_split(path, schemas, format="tsv")
        assert split.samples[0].gold == {"type": "None"}

    def test_empty_label_cell_means_unlabeled(self, tmp_path, schemas):
        path = write(tmp_path, "t.tsv", "id\ttext\ttype\n1\tx\t\n2\ty\tNone\n")
        split = load_split(path, schemas, format="tsv")
        assert split.samples[0].gold == {}
        assert split.samples[1].gold == {"type": "None"}

    def test_duplicate_id_rejected(self, tmp_path, schemas):
        path = write(tmp_path, "t.tsv", "id\ttext\n1\tx\n1\ty\n")
        with pytest.raises(ValidationError, match="duplicate"):
            load_split(path, schemas, format="tsv")

    def test_missing_file(self, schemas, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            load_split(tmp_path / "nope.tsv", schemas)

    def test_split_name_from_stem(self, tmp_path, schemas):
        path = write(tmp_path, "blp_dev_split.tsv", "id\ttext\n1\tx\n")
        assert load_split(path, schemas).name == "dev"


class TestLoadJsonl:
    def test_valid(self, tmp_path, schemas):
        rows = [
            {"id": "a", "text": "hello", "labels": {"type": "None"}},
            {"id": "b", "text": "world", "labels": {"to_whom": "Society"}},
            {"id": "c", "text": "no labels"},
        ]
        path = write(tmp_path, "d.jsonl", "\n".join(json.dumps(r) for r in rows) + "\n")
        split = load_split(path, schemas, format="jsonl")
        assert len(split) == 3
        assert split.samples[1].gold == {"target": "Society"}
        assert split.samples[2].gold == {}

    def test_bad_json_line_number(self, tmp_path, schemas):
        path = write(tmp_path, "d.jsonl", '{"id": "a", "text": "x"}\n{oops\n')
        with pytest.raises(ValidationError, match=":2"):
            load_split(path, schemas, format="jsonl")

    def test_unknown_label_named(self, tmp_path, schemas):
        path = write(
            tmp_path, "d.jsonl", '{"id": "a", "text": "x", "labels": {"severity": "Extreme"}}\n'
        )
        with pytest.raises(ValidationError, match="Extreme"):
            load_split(path, schemas, format="jsonl")

    def test_unknown_format(self, tmp_path, schemas):
        path = write(tmp_path, "d.csv", "id,text\n")
        with pytest.raises(ValidationError, match="format"):
            load_split(path, schemas, format="csv")


class TestRoundTrip:
    @pytest.mark.parametrize("fmt", ["tsv", "jsonl"])
    def test_save_load_identity(self, tmp_path, schemas, fmt):
        samples = (
            Sample("a", "hello ভালো", {"type": "None", "severity": "Mild"}),
            Sample("b", "plain", {"type": "Abusive"}),
            Sample("c", "unlabeled", {}),
        )
        split = DatasetSplit(name="dev", samples=samples)
        path = tmp_path / f"out.{fmt}"
        save_split(split, path, format=fmt)
        loaded = load_split(path, schemas, format=fmt, name="dev")
        assert loaded.samples == split.samples

    def test_tsv_rejects_tab_in_text(self, tmp_path):
        split = DatasetSplit("dev", (Sample("a", "has\ttab", {}),))
        with pytest.raises(ValidationError, match="tab"):
            save_split(split, tmp_path / "x.tsv", format="tsv")

    def test_jsonl_allows_tab_in_text(self, tmp_path, schemas):
        split = DatasetSplit("dev", (Sample("a", "has\ttab", {}),))
        path = tmp_path / "x.jsonl"
        save_split(split, path, format="jsonl")
        assert load_split(path, schemas, format="jsonl", name="dev").samples == split.samples


class TestLabelDistribution:
    def test_two_none_samples(self, schemas):
        split = DatasetSplit(
            "train",
            (Sample("1", "x", {"type": "None"}), Sample("2", "y", {"type": "None"})),
        )
        assert label_distribution(split, "type") == {"None": 2}

    def test_counts_sum_to_labeled_samples(self, fixture_train_tsv, schemas):
        split = load_split(fixture_train_tsv, schemas, format="tsv")
        for task in schemas:
            counts = label_distribution(split, task)
            labeled = sum(1 for s in split.samples if task in s.gold)
            assert sum(counts.values()) == labeled

    def test_absent_task_errors(self, schemas):
        split = DatasetSplit("train", (Sample("1", "x", {"type": "None"}),))
        with pytest.raises(ValidationError, match="severity"):
            label_distribution(split, "severity")


class TestSplitInvariants:
    def test_bad_split_name(self):
        with pytest.raises(ValidationError, match="split name"):
            DatasetSplit("validation", ())

    def test_preprocess_split_keeps_ids_and_gold(self):
        split = DatasetSplit(
            "train", (Sample("1", "১২ abc", {"type": "None"}),)
        )
        processed = preprocess_split(split)
        assert processed.samples[0].text == " abc"
        assert processed.samples[0].id == "1"
        assert processed.samples[0].gold == {"type": "None"}

    def test_fingerprint_changes_with_content(self, schemas):
        a = DatasetSplit("train", (Sample("1", "x", {"type": "None"}),))
        b = DatasetSplit("train", (Sample("1", "y", {"type": "None"}),))
        assert split_fingerprint(a, schemas) != split_fingerprint(b, schemas)
        assert split_fingerprint(a, schemas) == split_fingerprint(a, schemas)

    def test_fingerprint_sensitive_to_schema_set(self, schemas):
        split = DatasetSplit("train", (Sample("1", "x", {"type": "None"}),))
        only_type = schemas_for(["type"])
        assert split_fingerprint(split, schemas) != split_fingerprint(split, only_type)
