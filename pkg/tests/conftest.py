import numpy as np
import pytest

from embedview.data import ColumnTable, build_column


def random_table(rng: np.random.Generator, n_rows: int) -> ColumnTable:
    """Random typed table with a sprinkling of null/nan/inf cells."""
    def numeric_cells():
        cells = []
        for _ in range(n_rows):
            r = rng.random()
            if r < 0.05:
                cells.append(None)
            elif r < 0.08:
                cells.append(float("nan"))
            elif r < 0.10:
                cells.append(float("inf") if rng.random() < 0.5 else float("-inf"))
            else:
                cells.append(float(np.round(rng.normal(0, 10), 6)))
        return cells

    cats = [f"cat_{i}" for i in range(rng.integers(2, 9))]
    tags = [f"tag{i}" for i in range(5)]
    cols = [
        build_column("num_a", numeric_cells(), "numerical"),
        build_column("num_b", numeric_cells(), "numerical"),
        build_column(
            "cat",
            [None if rng.random() < 0.05 else str(rng.choice(cats))
             for _ in range(n_rows)],
            "categorical",
        ),
        build_column(
            "tags",
            [
                None if rng.random() < 0.05
                else [str(t) for t in rng.choice(tags, size=rng.integers(0, 4),
                                                 replace=False)]
                for _ in range(n_rows)
            ],
            "multi_categorical",
        ),
    ]
    return ColumnTable(cols)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
