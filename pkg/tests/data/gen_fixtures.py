"""Regenerate the bundled synthetic fixture splits.

Run from the repository root: python tests/data/gen_fixtures.py
The label marginals here are frozen in tests/test_acceptance.py.
"""

from __future__ import annotations

import random
from pathlib import Path

TRAIN_COUNTS = {
    "type": {
        "None": 14,
        "Abusive": 10,
        "Political Hate": 8,
        "Profane": 6,
        "Religious Hate": 4,
        "Sexism": 2,
    },
    "severity": {"Little to None": 24, "Mild": 12, "Severe": 8},
    "target": {
        "None": 16,
        "Individual": 12,
        "Organization": 8,
        "Community": 5,
        "Society": 3,
    },
}

DEV_COUNTS = {
    "type": {
        "None": 6,
        "Abusive": 4,
        "Political Hate": 2,
        "Profane": 2,
        "Religious Hate": 1,
        "Sexism": 1,
    },
    "severity": {"Little to None": 9, "Mild": 4, "Severe": 3},
    "target": {
        "None": 7,
        "Individual": 4,
        "Organization": 2,
        "Community": 2,
        "Society": 1,
    },
}

WORDS = [
    "ভালো", "খারাপ", "মানুষ", "দেশ", "কথা", "আজ", "কাল", "post", "comment",
    "খেলা", "রাজনীতি", "সমাজ", "নিউজ", "video", "লিংক",
]
BANGLA_DIGITS = "০১২৩৪৫৬৭৮৯"


def rows_for(counts: dict, prefix: str, rng: random.Random) -> list[str]:
    per_task_labels = {
        task: [label for label, n in dist.items() for _ in range(n)]
        for task, dist in counts.items()
    }
    totals = {task: len(labels) for task, labels in per_task_labels.items()}
    assert len(set(totals.values())) == 1, totals
    n = totals["type"]
    rows = []
    for i in range(n):
        tokens = rng.choices(WORDS, k=rng.randint(3, 7))
        if i % 5 == 0:
            tokens.append("".join(rng.choices(BANGLA_DIGITS, k=4)))
        text = " ".join(tokens)
        rows.append(
            "\t".join(
                [
                    f"{prefix}{i:04d}",
                    text,
                    per_task_labels["type"][i],
                    per_task_labels["severity"][i],
                    per_task_labels["target"][i],
                ]
            )
        )
    return rows


def main() -> None:
    out = Path(__file__).parent
    rng = random.Random(20250810)
    header = "id\ttext\ttype\tseverity\ttarget"
    for name, counts in (("train", TRAIN_COUNTS), ("dev", DEV_COUNTS)):
        rows = rows_for(counts, f"{name[:2]}-", rng)
        (out / f"synthetic_{name}.tsv").write_text(
            "\n".join([header, *rows]) + "\n", encoding="utf-8"
        )
        print(f"wrote synthetic_{name}.tsv ({len(rows)} rows)")


if __name__ == "__main__":
    main()
