import pytest

from docweaver.catalog import (
    coverage_report,
    module_name_for,
    parse_repository,
)
from docweaver.errors import ConfigurationError


def test_component_inventory_matches_manifest(shop_catalog, shop_manifest):
    expected = shop_manifest["components"]
    assert len(shop_catalog.components) == shop_manifest["component_count"]
    assert {c.qualified_name for c in shop_catalog.components} == set(expected)


def test_component_fields_match_manifest(shop_catalog, shop_manifest):
    for qname, facts in shop_manifest["components"].items():
        comp = shop_catalog.by_name[qname]
        assert comp.kind == facts["kind"], qname
        assert comp.visibility == facts["visibility"], qname
        assert comp.parameters == facts["parameters"], qname
        assert comp.has_value_return == facts["has_value_return"], qname
        assert comp.raises == facts["raises"], qname
        assert list(comp.id.line_span) == facts["line_span"], qname
        parent = comp.parent.qualified_name if comp.parent else None
        assert parent == facts["parent"], qname
        assert comp.class_attributes == facts["class_attributes"], qname
        assert comp.existing_docstring == facts["existing_docstring"], qname


def test_catalog_order_is_deterministic(shop_catalog):
    keys = [(c.file_path, c.id.line_span[0]) for c in shop_catalog.components]
    assert keys == sorted(keys)


def test_source_text_round_trips(shop_catalog):
    for comp in shop_catalog.components:
        path = shop_catalog.root / comp.file_path
        lines = path.read_text(encoding="utf-8").splitlines(keepends=True)
        start, end = comp.id.line_span
        assert comp.source_text == "".join(lines[start - 1 : end]), comp.qualified_name


def test_unparsable_file_is_skipped_with_warning(tmp_path):
    (tmp_path / "good.py").write_text("def ok():\n    pass\n")
    (tmp_path / "bad.py").write_text("def broken(:\n")
    catalog = parse_repository(tmp_path)
    assert [c.qualified_name for c in catalog.components] == ["good.ok"]
    assert len(catalog.warnings) == 1
    assert catalog.warnings[0].file_path == "bad.py"
    assert "syntax error" in catalog.warnings[0].message


def test_undecodable_file_is_skipped_with_warning(tmp_path):
    (tmp_path / "binary.py").write_bytes(b"\xff\xfe\x00junk")
    (tmp_path / "fine.py").write_text("def f():\n    pass\n")
    catalog = parse_repository(tmp_path)
    assert [c.qualified_name for c in catalog.components] == ["fine.f"]
    assert catalog.warnings and catalog.warnings[0].file_path == "binary.py"


def test_missing_root_rejected(tmp_path):
    with pytest.raises(ConfigurationError):
        parse_repository(tmp_path / "nope")


def test_nested_functions_are_functions(tmp_path):
    (tmp_path / "outer.py").write_text(
        "def f():\n"
        "    def g():\n"
        "        return 1\n"
        "    return g\n"
    )
    catalog = parse_repository(tmp_path)
    names = {c.qualified_name: c for c in catalog.components}
    assert set(names) == {"outer.f", "outer.f.g"}
    assert names["outer.f.g"].kind == "function"
    assert names["outer.f.g"].parent is None
    # the nested return belongs to g, not f
    assert names["outer.f.g"].has_value_return is True
    assert names["outer.f"].has_value_return is True


def test_dunder_and_underscore_are_private(shop_catalog):
    assert shop_catalog.by_name["shop.cart.Cart.__init__"].visibility == "private"
    assert shop_catalog.by_name["shop.inventory._normalize"].visibility == "private"


def test_duplicate_definition_keeps_last(tmp_path):
    (tmp_path / "dup.py").write_text(
        "def f():\n"
        "    return 1\n"
        "\n"
        "\n"
        "def f(x):\n"
        "    return x\n"
    )
    catalog = parse_repository(tmp_path)
    assert len(catalog.components) == 1
    comp = catalog.components[0]
    assert comp.parameters == ["x"]
    assert any("duplicate" in w.message for w in catalog.warnings)


def test_module_name_mapping():
    assert module_name_for("shop/inventory.py") == "shop.inventory"
    assert module_name_for("shop/__init__.py") == "shop"
    assert module_name_for("__init__.py") == ""
    assert module_name_for("top.py") == "top"


def test_coverage_on_shop(shop_catalog, shop_manifest):
    report = coverage_report(shop_catalog)
    expected = shop_manifest["coverage"]
    assert report.documentable == expected["documentable"]
    assert report.documented == expected["documented"]
    assert report.coverage == expected["documented"] / expected["documentable"]
    assert report.mean_words == expected["mean_words"]


def test_coverage_mixed_fixture(fixtures_dir):
    report = coverage_report(parse_repository(fixtures_dir / "coverage_mix"))
    assert report.documentable == 10
    assert report.documented == 3
    assert report.coverage == 0.3
    assert report.mean_words == 3.0


def test_coverage_empty_repo(tmp_path):
    report = coverage_report(parse_repository(tmp_path))
    assert report.documentable == 0
    assert report.coverage == 0.0
    assert report.mean_words == 0.0


def test_blank_docstring_counts_as_undocumented(tmp_path):
    (tmp_path / "w.py").write_text('def f():\n    """   """\n')
    report = coverage_report(parse_repository(tmp_path))
    assert report.documentable == 1
    assert report.documented == 0
