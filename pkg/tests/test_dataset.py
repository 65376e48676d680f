import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from discordlab import dataset
from discordlab.dataset import CLASS_THETA0, CLASS_THETAQ, FeatureRow
from discordlab.dynamics import ModelParams, XState, uniform_grid

SMALL_PARAMS = ModelParams(n1=4, n2=4)


def make_row(i=0, theta=0.0, **overrides):
    base = dict(
        eig1=0.6, eig2=0.3, eig3=0.1 - i * 1e-3, eig4=i * 1e-3,
        theta_star=theta, phi_star=0.5, red2=0.4, dbr=0.3,
        t=1.0, q_used=30.0, class_tag="",
    )
    base.update(overrides)
    return FeatureRow(**base)


class TestGenerate:
    def test_row_count_one_state(self):
        state = XState(a=0.0, b=0.4, c=0.5, d=0.1, beta_c=0.4)
        rows = dataset.generate(
            SMALL_PARAMS, [state], uniform_grid(6.0, 60), [30.0], seed=1, threads=1
        )
        assert len(rows) == 60
        for r in rows:
            r.validate()

    def test_trivial_state_all_zero(self):
        state = XState(a=1.0, b=0.0, c=0.0, d=0.0)
        rows = dataset.generate(
            SMALL_PARAMS, [state], uniform_grid(3.0, 5), [30.0], seed=1, threads=1
        )
        for r in rows:
            assert r.red2 <= 1e-8
            assert r.dbr <= 1e-8

    def test_deterministic_in_seed(self):
        state = XState(a=0.0, b=0.4, c=0.5, d=0.1, beta_c=0.4)
        grid = uniform_grid(2.0, 3)
        a = dataset.generate(SMALL_PARAMS, [state], grid, [30.0], seed=5, threads=1)
        b = dataset.generate(SMALL_PARAMS, [state], grid, [30.0], seed=5, threads=1)
        assert a == b

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError):
            dataset.generate(SMALL_PARAMS, [], [1.0], [30.0], seed=1)


class TestDedup:
    def test_no_duplicates_unchanged(self):
        rows = [make_row(i) for i in range(5)]
        kept, rate = dataset.dedup(rows)
        assert kept == rows
        assert rate == 0.0

    def test_exact_duplicate_collapsed(self):
        rows = [make_row(1), make_row(1), make_row(2)]
        kept, rate = dataset.dedup(rows)
        assert len(kept) == 2
        assert rate == pytest.approx(1 / 3)

    def test_rounding_quantum(self):
        a = make_row(0)
        b = replace(a, red2=a.red2 + 4e-7)   # rounds to the same quantum
        c = replace(a, red2=a.red2 + 5e-6)
        kept, _ = dataset.dedup([a, b, c])
        assert len(kept) == 2

    def test_keeps_first_occurrence(self):
        a = make_row(0, t=1.0)
        b = replace(a, t=9.0)  # same features, different provenance
        kept, _ = dataset.dedup([a, b])
        assert kept[0].t == 1.0


class TestClassify:
    def test_near_zero(self):
        rows, quarantine = dataset.classify_theta([make_row(theta=0.001)])
        assert rows[0].class_tag == CLASS_THETA0
        assert not quarantine

    def test_near_quarter_pi(self):
        rows, quarantine = dataset.classify_theta([make_row(theta=math.pi / 4 - 0.005)])
        assert rows[0].class_tag == CLASS_THETAQ
        assert not quarantine

    def test_quarantine(self):
        rows, quarantine = dataset.classify_theta([make_row(theta=0.7)])
        assert not rows
        assert len(quarantine) == 1

    def test_input_rows_untouched(self):
        row = make_row(theta=0.0)
        dataset.classify_theta([row])
        assert row.class_tag == ""


class TestSplit:
    def test_ten_rows(self):
        rows = [make_row(i) for i in range(10)]
        train, val, test = dataset.split(rows, seed=1)
        assert (len(train), len(val), len(test)) == (6, 2, 2)

    def test_same_seed_same_split(self):
        rows = [make_row(i) for i in range(23)]
        s1 = dataset.split(rows, seed=7)
        s2 = dataset.split(rows, seed=7)
        assert s1 == s2

    @given(st.integers(0, 10_000), st.integers(5, 200))
    def test_union_and_disjointness(self, seed, n):
        rows = [make_row(i) for i in range(n)]
        train, val, test = dataset.split(rows, seed=seed)
        ids = lambda rs: {id(r) for r in rs}
        assert len(train) + len(val) + len(test) == n
        assert ids(train) | ids(val) | ids(test) == ids(rows)
        assert not (ids(train) & ids(val)) and not (ids(val) & ids(test))
        for part, frac in ((train, 0.6), (val, 0.2), (test, 0.2)):
            assert abs(len(part) - frac * n) <= 1.0

    def test_bad_fractions(self):
        with pytest.raises(ValueError):
            dataset.split([make_row()], fractions=(0.5, 0.2, 0.2))


class TestCsv:
    def test_round_trip_exact(self, tmp_path):
        rows = [make_row(i, theta=0.1 * i, class_tag=CLASS_THETA0) for i in range(7)]
        path = tmp_path / "rows.csv"
        dataset.write_csv(rows, path)
        back = dataset.read_csv(path)
        assert back == rows

    def test_row_count(self, tmp_path):
        rows = [make_row(i) for i in range(5)]
        path = tmp_path / "rows.csv"
        dataset.write_csv(rows, path)
        assert len(path.read_text().splitlines()) == len(rows) + 1

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("eig1,eig2\n0.5,0.5\n")
        with pytest.raises(dataset.SchemaMismatchError):
            dataset.read_csv(path)

    def test_short_row_rejected(self, tmp_path):
        rows = [make_row()]
        path = tmp_path / "rows.csv"
        dataset.write_csv(rows, path)
        content = path.read_text().splitlines()
        content[1] = ",".join(content[1].split(",")[:-2])
        path.write_text("\n".join(content) + "\n")
        with pytest.raises(dataset.SchemaMismatchError):
            dataset.read_csv(path)

    def test_invalid_row_rejected_on_read(self, tmp_path):
        bad = make_row()
        bad.eig1 = 0.9  # breaks the sum-to-one invariant
        path = tmp_path / "rows.csv"
        dataset.write_csv([bad], path)
        with pytest.raises(ValueError):
            dataset.read_csv(path)


class TestRecipes:
    def test_reference_recipe_shape(self):
        rec = dataset.reference_recipe()
        states = dataset.recipe_states(rec)
        assert len(states) * len(rec["q_values"]) * rec["steps"] >= 5000
        for s in states:
            assert abs(s.a + s.b + s.c + s.d - 1.0) <= 1e-12
            assert abs(s.beta_c) ** 2 <= s.b * s.c + 1e-12
            assert abs(s.delta) ** 2 <= s.a * s.d + 1e-12

    def test_tiny_recipe(self):
        rec = dataset.tiny_recipe()
        states = dataset.recipe_states(rec)
        grid = dataset.recipe_grid(rec)
        assert len(states) * len(rec["q_values"]) * len(grid) == 20

    def test_to_arrays(self):
        rows = [make_row(i) for i in range(4)]
        x, y = dataset.to_arrays(rows)
        assert x.shape == (4, 7)
        assert y.shape == (4,)
        assert np.allclose(x[0], rows[0].features())
