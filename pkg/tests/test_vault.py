"""Vault scanning, wikilinks, concept population and context bundles."""

from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ontoforge.errors import VaultError
from ontoforge.vault import (
    ClauseTag,
    NoteKind,
    collect_context,
    extract_links,
    populate_concept_notes,
    scan_vault,
)


def write_vault(root: Path, files: dict[str, str]) -> Path:
    for name, body in files.items():
        path = root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(body, encoding="utf-8")
    return root


# --------------------------------------------------------------------------
# extract_links


def test_single_link():
    assert extract_links("user of [[device]]") == [("device", None)]


def test_alias_and_duplicate_preserved():
    body = "see [[data breach|breach]] and [[data breach]]"
    assert extract_links(body) == [("data breach", "breach"), ("data breach", None)]


def test_links_inside_code_fence_ignored():
    body = "intro\n\n```\n[[x]]\n```\n\noutro [[y]]"
    assert extract_links(body) == [("y", None)]


def test_unterminated_link_warns_and_is_ignored():
    diagnostics = []
    assert extract_links("broken [[link and [[good]]", diagnostics) == [("good", None)]
    assert len(diagnostics) == 1
    assert diagnostics[0].severity == "warning"


def test_unclosed_fence_swallows_rest():
    body = "before [[a]]\n\n```\n[[hidden]]\n"
    assert extract_links(body) == [("a", None)]


@given(
    st.text(alphabet=" abc[]|\n", max_size=30),
    st.text(alphabet=" abc[]|\n", max_size=30),
)
def test_extract_links_concatenation(a, b):
    # Joining on a paragraph break outside any link or fence keeps the
    # per-part links unchanged.
    joined = extract_links(a + "\n\n" + b)
    assert joined == extract_links(a + "\n") + extract_links("\n" + b)


# --------------------------------------------------------------------------
# scan_vault


def test_minimal_link_graph(tmp_path):
    write_vault(tmp_path, {"A.md": "[[B]]", "B.md": ""})
    graph = scan_vault(tmp_path)
    assert len(graph.notes) == 2
    assert graph.edges == {("a", "b")}


def test_self_loop_dropped_with_warning(tmp_path):
    write_vault(tmp_path, {"A.md": "[[A]]"})
    graph = scan_vault(tmp_path)
    assert len(graph.notes) == 1
    assert graph.edges == set()
    assert any("self-link" in d.message for d in graph.diagnostics)
    assert not graph.violations


def test_ten_files_fourteen_links_two_missing(tmp_path):
    # 14 link occurrences, 12 resolvable (all distinct pairs), 2 pointing at
    # notes that do not exist.
    files = {f"n{i}.md": "" for i in range(10)}
    files["n0.md"] = "[[n1]] [[n2]] [[n3]] [[missing one]]"
    files["n1.md"] = "[[n2]] [[n4]] [[n5]]"
    files["n2.md"] = "[[n6]] [[n7]]"
    files["n3.md"] = "[[n8]] [[n9]] [[missing two]]"
    files["n4.md"] = "[[n0]] [[n9]]"
    write_vault(tmp_path, files)
    graph = scan_vault(tmp_path)
    assert len(graph.notes) == 10
    assert len(graph.link_refs) == 14
    assert len(graph.edges) == 12
    assert len(graph.violations) == 2
    assert all("unresolved link" in v.message for v in graph.violations)


def test_duplicate_note_id_is_hard_error(tmp_path):
    write_vault(tmp_path, {"sub/Device.md": "", "other/device.md": ""})
    with pytest.raises(VaultError, match="duplicate note id"):
        scan_vault(tmp_path)


def test_unreadable_file_diagnostic_scan_continues(tmp_path):
    write_vault(tmp_path, {"good.md": "", "bad.md": ""})
    (tmp_path / "bad.md").write_bytes(b"\xff\xfe\x00 invalid \xff")
    graph = scan_vault(tmp_path)
    assert "good" in graph.notes
    assert "bad" not in graph.notes
    assert any("unreadable" in d.message for d in graph.diagnostics)


def test_missing_root_rejected(tmp_path):
    with pytest.raises(VaultError, match="does not exist"):
        scan_vault(tmp_path / "nope")


def test_clause_kind_and_tag_parse(tmp_path):
    write_vault(
        tmp_path,
        {
            "clause.md": "#spec/ISO14971/4.2\n\ntext [[concept]]",
            "concept.md": "",
        },
    )
    graph = scan_vault(tmp_path)
    clause = graph.notes["clause"]
    assert clause.kind is NoteKind.CLAUSE
    assert clause.clause_tag == ClauseTag("ISO14971", "4.2")
    assert graph.notes["concept"].kind is NoteKind.CONCEPT


def test_edge_endpoints_always_exist(tmp_path):
    write_vault(tmp_path, {"a.md": "[[b]] [[ghost]]", "b.md": "[[a]]"})
    graph = scan_vault(tmp_path)
    for source, target in graph.edges:
        assert source in graph.notes and target in graph.notes


# --------------------------------------------------------------------------
# populate_concept_notes


def populate_fixture(tmp_path):
    return write_vault(
        tmp_path,
        {
            "clauses/s1-4-2.md": (
                "#spec/S1/4.2\n\n"
                "the [[manufacturer]] shall keep the [[device]] safe\n\n"
                "unlinked paragraph\n"
            ),
            "manufacturer.md": "",
            "device.md": "",
        },
    )


def test_populate_heading_and_paragraph(tmp_path):
    root = populate_fixture(tmp_path)
    graph = scan_vault(root)
    report = populate_concept_notes(graph, root)
    body = (root / "manufacturer.md").read_text(encoding="utf-8")
    assert "## S1 4.2" in body
    assert "the [[manufacturer]] shall keep the [[device]] safe" in body
    assert report.sections_appended == 2
    assert report.notes_touched == 2


def test_populate_shared_paragraph_lands_in_both_notes(tmp_path):
    root = populate_fixture(tmp_path)
    populate_concept_notes(scan_vault(root), root)
    manufacturer = (root / "manufacturer.md").read_text(encoding="utf-8")
    device = (root / "device.md").read_text(encoding="utf-8")
    paragraph = "the [[manufacturer]] shall keep the [[device]] safe"
    assert paragraph in manufacturer and paragraph in device
    assert manufacturer.count("## S1 4.2") == 1


def test_populate_is_idempotent(tmp_path):
    root = populate_fixture(tmp_path)
    populate_concept_notes(scan_vault(root), root)
    snapshot = {p: p.read_bytes() for p in sorted(root.rglob("*.md"))}
    second = populate_concept_notes(scan_vault(root), root)
    assert second.sections_appended == 0
    assert second.notes_touched == 0
    assert snapshot == {p: p.read_bytes() for p in sorted(root.rglob("*.md"))}


def test_populate_creates_missing_concept_file(tmp_path):
    root = populate_fixture(tmp_path)
    graph = scan_vault(root)
    (root / "device.md").unlink()
    populate_concept_notes(graph, root)
    assert (root / "device.md").exists()
    assert "## S1 4.2" in (root / "device.md").read_text(encoding="utf-8")


def test_populate_corpus_vault_counts(vault_copy):
    # 26 sections across the 10 concept notes; counted by hand from the
    # fixture clause notes.
    graph = scan_vault(vault_copy)
    report = populate_concept_notes(graph, vault_copy)
    assert report.notes_touched == 10
    assert report.sections_appended == 26
    again = populate_concept_notes(scan_vault(vault_copy), vault_copy)
    assert again.sections_appended == 0


def test_populate_skips_clause_targets(tmp_path):
    # Clause notes linking to other clause notes do not get sections copied
    # into them; only concept notes are populated.
    root = write_vault(
        tmp_path,
        {
            "c1.md": "#spec/S1/1\n\nsee [[c2]] and [[thing]]\n",
            "c2.md": "#spec/S1/2\n\nbody [[thing]]\n",
            "thing.md": "",
        },
    )
    populate_concept_notes(scan_vault(root), root)
    assert "## S1 1" not in (root / "c2.md").read_text(encoding="utf-8")
    assert "## S1 1" in (root / "thing.md").read_text(encoding="utf-8")


# --------------------------------------------------------------------------
# collect_context


def context_vault(tmp_path):
    return write_vault(
        tmp_path,
        {
            "clause-a.md": "#spec/S1/4.2\n\nboth [[left]] and [[right]] matter\n",
            "left.md": "",
            "right.md": "",
        },
    )


def test_context_depth_zero_is_empty(tmp_path):
    root = context_vault(tmp_path)
    graph = scan_vault(root)
    assert collect_context(graph, "left", 0).sections == []


def test_context_single_populated_section(tmp_path):
    root = context_vault(tmp_path)
    populate_concept_notes(scan_vault(root), root)
    graph = scan_vault(root)
    bundle = collect_context(graph, "left", 1)
    assert len(bundle.sections) == 1
    section = bundle.sections[0]
    assert (section.spec_id, section.clause_path) == ("S1", "4.2")
    assert "both [[left]] and [[right]] matter" in section.text


def test_context_shared_paragraph_deduplicated(tmp_path):
    root = context_vault(tmp_path)
    populate_concept_notes(scan_vault(root), root)
    graph = scan_vault(root)
    bundle = collect_context(graph, "left", 3)
    texts = [s.text for s in bundle.sections]
    assert len(texts) == len(set(texts)) == 1


def test_context_unknown_concept(tmp_path):
    root = context_vault(tmp_path)
    with pytest.raises(VaultError, match="unknown concept"):
        collect_context(scan_vault(root), "ghost", 2)


def test_context_deterministic_order(vault_copy):
    populate_concept_notes(scan_vault(vault_copy), vault_copy)
    graph = scan_vault(vault_copy)
    first = collect_context(graph, "risk assessment", 2)
    second = collect_context(graph, "risk assessment", 2)
    assert first.sections == second.sections
    assert len(first.sections) == 6
