import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from screenaudit.errors import ParameterError, SchemaError
from screenaudit.model import (Dataset, DiscreteWorld, Feature, FeatureSchema, FeatureVector, Representation,
                               ScoreFunction, cell_index, empirical_world, enumerate_cells, enumerate_world,
                               normalize_exact, validate_dataset, validate_world)


def small_schema():
    return FeatureSchema((Feature("a", "categorical", 3), Feature("b", "categorical", 2),
                          Feature("c", "real", low=0.0, high=10.0)))


class TestSchema:
    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaError):
            FeatureSchema((Feature("a", "categorical", 2), Feature("a", "categorical", 2)))

    def test_reserved_names_rejected(self):
        with pytest.raises(SchemaError):
            FeatureSchema((Feature("id", "categorical", 2),))

    def test_row_violations_name_the_feature(self):
        s = small_schema()
        problems = s.row_violations(np.array([[3.0, 0.0, 1.0], [0.0, 1.0, 11.0]]))
        assert any("a" in p for p in problems)
        assert any("c" in p for p in problems)

    def test_feature_vector_validates(self):
        s = small_schema()
        FeatureVector(np.array([2.0, 1.0, 5.0]), s)
        with pytest.raises(SchemaError):
            FeatureVector(np.array([2.5, 1.0, 5.0]), s)

    def test_roundtrip_and_digest(self):
        s = small_schema()
        back = FeatureSchema.from_dict(s.to_dict())
        assert back == s
        assert back.digest() == s.digest()


class TestCells:
    def test_cell_index_is_row_major(self):
        cards = (3, 2)
        cells = enumerate_cells(cards)
        assert cells.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1], [2, 0], [2, 1]]
        np.testing.assert_array_equal(cell_index(cells, cards), np.arange(6))

    @given(st.lists(st.integers(1, 4), min_size=1, max_size=4))
    def test_enumerate_then_index_is_identity(self, cards):
        cells = enumerate_cells(cards)
        np.testing.assert_array_equal(cell_index(cells, cards), np.arange(len(cells)))


class TestRepresentation:
    def test_identity_keeps_group(self):
        r = Representation.identity(small_schema())
        assert r.retained == (0, 1, 2) and r.keep_group

    def test_coarsening_on_dropped_feature_rejected(self):
        with pytest.raises(ParameterError):
            Representation((0,), {1: (0, 0)})

    def test_bucket_table_must_be_dense(self):
        s = small_schema()
        with pytest.raises(ParameterError):
            Representation.of(s, ["a"], coarsen={"a": (0, 2, 2)}).validate(s)

    @given(st.lists(st.booleans(), min_size=3, max_size=3), st.integers(0, 2 ** 31 - 1))
    def test_apply_is_idempotent(self, keep, seed):
        s = small_schema()
        retained = tuple(j for j, k in enumerate(keep) if k)
        co = {}
        if 0 in retained:
            co[0] = (0, 0, 1)
        if 2 in retained:
            co[2] = (2.5, 5.0)
        r = Representation(retained, co)
        rng = np.random.default_rng(seed)
        X = np.column_stack([rng.integers(0, 3, 20), rng.integers(0, 2, 20), rng.uniform(0, 10, 20)])
        once = r.apply(X, s)
        np.testing.assert_array_equal(r.apply(once, s), once)
        # the image carries the same reduced value
        np.testing.assert_array_equal(r.buckets(once, s), r.buckets(X, s))

    def test_reduced_index_appends_group_axis(self):
        s = FeatureSchema((Feature("a", "categorical", 3),))
        r = Representation((0,), (), True)
        assert r.reduced_shape(s) == (3, 2)
        idx = r.reduced_index(np.array([[2.0], [2.0]]), np.array([0, 1]), s)
        assert idx.tolist() == [4, 5]

    def test_roundtrip(self):
        s = small_schema()
        r = Representation.of(s, ["a", "c"], keep_group=True, coarsen={"c": (1.0, 2.0)})
        assert Representation.from_dict(r.to_dict()) == r


class TestWorld:
    def test_one_violation_per_array(self, trivial_world):
        w = trivial_world.with_tables(p=np.array([0.5, -0.1, 0.3, 0.4]), q=np.array([0.2, 0.2, 0.2, 0.2]))
        names = sorted((v.name, v.array) for v in validate_world(w))
        assert ("negative mass", "p") in names
        assert ("q not normalized", "q") in names
        assert len(names) == len(set(names))

    def test_deficit_reported(self, trivial_world):
        w = trivial_world.with_tables(q=np.array([0.2, 0.2, 0.2, 0.2]))
        (v,) = validate_world(w)
        assert v.value == pytest.approx(0.2)

    def test_non_finite_score(self, trivial_world):
        w = trivial_world.with_tables(g=np.array([0.0, np.nan, 1.0, 1.0]))
        assert [v.name for v in validate_world(w)] == ["non-finite score"]

    def test_valid_world_has_no_violations(self, trivial_world):
        assert validate_world(trivial_world) == []

    def test_arrays_are_frozen(self, trivial_world):
        with pytest.raises(ValueError):
            trivial_world.p[0] = 1.0

    def test_cell_cap(self):
        s = FeatureSchema(tuple(Feature(f"x{i}", "categorical", 10) for i in range(3)))
        with pytest.raises(ParameterError):
            DiscreteWorld(s, np.ones(1000) / 1000, np.ones(1000) / 1000, np.zeros(1000), np.zeros(1000),
                          max_cells=999)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50).filter(lambda x: sum(x) > 0))
    def test_normalize_exact_sums_to_one(self, xs):
        out = normalize_exact(np.array(xs) / sum(xs))
        assert math.fsum(out) == 1.0


class TestDataset:
    def test_defaults(self):
        s = small_schema()
        d = Dataset(s, np.array([[0, 1, 2.0], [1, 0, 3.0]]), [0, 1], {"y": [1.0, np.nan]})
        assert d.ids == ("r0", "r1")
        np.testing.assert_array_equal(d.weights, [1.0, 1.0])
        assert d.observed("y").tolist() == [True, False]
        assert validate_dataset(d) == []

    def test_validation_messages(self):
        s = small_schema()
        d = Dataset(s, np.array([[5, 1, 2.0]]), [2], weights=[-1.0], ids=["x"])
        msgs = validate_dataset(d)
        assert any(m.startswith("a:") for m in msgs)
        assert any("group" in m for m in msgs)
        assert any("negative weight" in m for m in msgs)

    def test_length_mismatch(self):
        with pytest.raises(SchemaError):
            Dataset(small_schema(), np.zeros((2, 3)), [0])


class TestEmpiricalWorld:
    def test_enumerated_world_is_recovered_exactly(self, trivial_world):
        d = enumerate_world(trivial_world)
        w = empirical_world(d, "f", "g")
        np.testing.assert_allclose(w.p, trivial_world.p, rtol=0, atol=1e-15)
        np.testing.assert_allclose(w.q, trivial_world.q, rtol=0, atol=1e-15)
        np.testing.assert_array_equal(w.f, trivial_world.f)
        assert w.unsupported == ()

    def test_unsupported_cells_listed(self):
        s = FeatureSchema((Feature("a", "categorical", 3),))
        d = Dataset(s, np.array([[0.0], [1.0], [0.0]]), [0, 1, 1], {"f": [1.0, 2.0, 3.0]})
        w = empirical_world(d, "f", "f")
        assert w.unsupported == (2,)
        assert w.p.tolist() == [1.0, 0.0, 0.0]
        assert w.q.tolist() == [0.5, 0.5, 0.0]
        assert w.f.tolist() == [2.0, 2.0, 0.0]

    def test_score_function_from_table(self, trivial_world):
        v = ScoreFunction.from_table(trivial_world.f, trivial_world.schema)
        np.testing.assert_array_equal(v(trivial_world.cells()), trivial_world.f)
