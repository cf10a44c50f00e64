import json

import pytest

from sipgame.service.levels import Level, LevelError, load_levels


class TestCatalog:
    def test_bundled_catalog_loads(self, levels):
        assert len(levels) >= 5
        assert sum(1 for lv in levels.values() if lv.tutorial) == 1

    def test_starter_inputs_validate(self, levels):
        for level in levels.values():
            typed = level.typed_starter_inputs()
            assert set(typed) == set(level.program.param_names)

    def test_levels_dir_override(self, tmp_path):
        (tmp_path / "only.json").write_text(json.dumps({
            "id": "only",
            "title": "Only",
            "source": "fn f(n: Natural): Integer { post(true); var x: Integer;"
                      " x := 0; while (x < n) { x := x + 1; } }",
            "starterInputs": {"n": "1"},
        }))
        catalog = load_levels(tmp_path)
        assert list(catalog) == ["only"]

    def test_unroll_bound_override(self, tmp_path):
        (tmp_path / "deep.json").write_text(json.dumps({
            "id": "deep",
            "source": "fn f(n: Natural): Integer { post(true); var x: Integer;"
                      " x := 0; while (x < n) { x := x + 1; } }",
            "starterInputs": {"n": "1"},
            "unrollBound": 9,
        }))
        assert load_levels(tmp_path)["deep"].unroll_bound == 9


class TestValidation:
    GOOD = ("fn f(n: Natural): Integer { post(true); var x: Integer;"
            " x := 0; while (x < n) { x := x + 1; } }")

    def test_broken_source_rejected(self):
        with pytest.raises(LevelError, match="does not load"):
            Level.from_dict({"id": "bad", "source": "fn ???", "starterInputs": {}})

    def test_type_errors_rejected_at_load(self):
        source = ("fn f(n: Natural): Integer { post(true); var x: Integer;"
                  " x := true; while (x < n) { x := x + 1; } }")
        with pytest.raises(LevelError):
            Level.from_dict({"id": "bad", "source": source, "starterInputs": {}})

    def test_starter_inputs_must_satisfy_pre(self):
        source = ("fn f(n: Natural): Integer { pre(n >= 5); post(true);"
                  " var x: Integer; x := 0; while (x < n) { x := x + 1; } }")
        with pytest.raises(LevelError, match="precondition"):
            Level.from_dict({"id": "bad", "source": source,
                             "starterInputs": {"n": "1"}})

    def test_duplicate_ids_rejected(self, tmp_path):
        for name in ("a.json", "b.json"):
            (tmp_path / name).write_text(json.dumps({
                "id": "dup", "source": self.GOOD, "starterInputs": {"n": "1"},
            }))
        with pytest.raises(LevelError, match="duplicate"):
            load_levels(tmp_path)
