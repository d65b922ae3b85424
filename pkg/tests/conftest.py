from __future__ import annotations

import pytest

from medspan import Dataset, Span, Tweet


@pytest.fixture
def tiny_corpus() -> Dataset:
    return Dataset(
        "tiny",
        (
            Tweet("t1", "u01", "took tylenol for the headache", (Span(5, 12, "tylenol"),)),
            Tweet("t2", "u02", "no meds today, just naps"),
            Tweet("t3", "u01", "tums help and so does zofran", (Span(0, 4, "tums"), Span(22, 28, "zofran"))),
            Tweet("t4", "u03", "week 12 already!"),
        ),
    )
