"""Markdown note vault: scanning, link graph, concept population, context.

A vault is a directory tree of ``.md`` files. Notes carrying a ``#spec/...``
tag are clause notes (text copied from a source specification); everything
else is a concept note. Wikilinks ``[[target]]`` / ``[[target|alias]]``
connect them. Fenced code blocks (``` lines) are opaque: links and tags
inside them do not count.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

from ontoforge.errors import VaultError

FENCE_RE = re.compile(r"^[ \t]{0,3}```", re.MULTILINE)
TAG_RE = re.compile(r"(?<![\w#])#([\w/.\-:]+)")
HEADING_RE = re.compile(r"^## (.+)$")


class NoteKind(Enum):
    CLAUSE = "clause"
    CONCEPT = "concept"


@dataclass(frozen=True)
class ClauseTag:
    """Parsed ``spec/<spec_id>/<clause_path>`` tag."""

    spec_id: str
    clause_path: str


@dataclass(frozen=True)
class LinkRef:
    source: str
    target: str
    alias: Optional[str] = None


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warning" | "error"
    location: str
    message: str

    def describe(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


@dataclass
class Note:
    id: str
    path: str
    body: str
    tags: set[str] = field(default_factory=set)

    @property
    def kind(self) -> NoteKind:
        if any(t.startswith("spec/") for t in self.tags):
            return NoteKind.CLAUSE
        return NoteKind.CONCEPT

    @property
    def clause_tag(self) -> Optional[ClauseTag]:
        """First well-formed spec tag in document order, if any."""
        for tag in self.ordered_tags:
            if not tag.startswith("spec/"):
                continue
            parts = tag.split("/", 2)
            if len(parts) == 3 and parts[1] and parts[2]:
                return ClauseTag(spec_id=parts[1], clause_path=parts[2])
        return None

    @property
    def ordered_tags(self) -> list[str]:
        return sorted(self.tags)


@dataclass
class NoteGraph:
    notes: dict[str, Note] = field(default_factory=dict)
    edges: set[tuple[str, str]] = field(default_factory=set)
    link_refs: list[LinkRef] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def violations(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]


@dataclass
class PopulationReport:
    notes_touched: int = 0
    sections_appended: int = 0
    diagnostics: list[Diagnostic] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "notes_touched": self.notes_touched,
            "sections_appended": self.sections_appended,
            "diagnostics": [
                {"severity": d.severity, "location": d.location, "message": d.message}
                for d in self.diagnostics
            ],
        }


@dataclass(frozen=True)
class ContextSection:
    spec_id: str
    clause_path: str
    text: str


@dataclass
class ContextBundle:
    concept: str
    max_depth: int
    sections: list[ContextSection]

    def to_dict(self) -> dict:
        return {
            "concept": self.concept,
            "max_depth": self.max_depth,
            "sections": [
                {"spec_id": s.spec_id, "clause_path": s.clause_path, "text": s.text}
                for s in self.sections
            ],
        }


def normalize_note_id(name: str) -> str:
    return name.strip().casefold()


def _fence_spans(body: str) -> list[tuple[int, int]]:
    """Character spans covered by fenced code blocks, fences included.

    An unterminated fence runs to the end of the document.
    """
    spans = []
    opens = [m.start() for m in FENCE_RE.finditer(body)]
    i = 0
    while i < len(opens):
        start = opens[i]
        if i + 1 < len(opens):
            end_line = body.find("\n", opens[i + 1])
            end = len(body) if end_line == -1 else end_line + 1
        else:
            end = len(body)
        spans.append((start, end))
        i += 2
    return spans


def _outside_fences(pos: int, spans: list[tuple[int, int]]) -> bool:
    return not any(start <= pos < end for start, end in spans)


WIKILINK_RE = re.compile(r"\[\[([^\[\]\n|]+)(?:\|([^\[\]\n]*))?\]\]")


def iter_link_occurrences(
    body: str, diagnostics: Optional[list[Diagnostic]] = None, location: str = "<body>"
) -> Iterator[tuple[str, Optional[str], int]]:
    """Yield ``(target, alias, offset)`` for each wikilink outside fences."""
    spans = _fence_spans(body)
    matched: list[tuple[int, int]] = []
    for m in WIKILINK_RE.finditer(body):
        matched.append(m.span())
        if not _outside_fences(m.start(), spans):
            continue
        target = m.group(1).strip()
        alias = m.group(2)
        yield target, (alias.strip() if alias is not None else None), m.start()
    if diagnostics is not None:
        pos = 0
        while True:
            start = body.find("[[", pos)
            if start == -1:
                break
            pos = start + 2
            if not _outside_fences(start, spans):
                continue
            if any(s <= start < e for s, e in matched):
                continue
            diagnostics.append(
                Diagnostic("warning", location, f"unterminated wikilink at offset {start}")
            )


def extract_links(
    body: str, diagnostics: Optional[list[Diagnostic]] = None
) -> list[tuple[str, Optional[str]]]:
    """Every wikilink in document order; duplicates preserved."""
    return [(t, a) for t, a, _ in iter_link_occurrences(body, diagnostics)]


def _extract_tags(body: str) -> set[str]:
    spans = _fence_spans(body)
    return {
        m.group(1)
        for m in TAG_RE.finditer(body)
        if _outside_fences(m.start(), spans)
    }


def scan_vault(root: Path) -> NoteGraph:
    """Build the note graph from every ``.md`` file under ``root``.

    Unreadable files produce a per-file diagnostic and are skipped; two files
    normalizing to the same note id abort the scan.
    """
    root = Path(root)
    if not root.is_dir():
        raise VaultError(f"vault root does not exist: {root}")

    graph = NoteGraph()
    seen_paths: dict[str, str] = {}
    for path in sorted(root.rglob("*.md")):
        rel = path.relative_to(root).as_posix()
        note_id = normalize_note_id(path.stem)
        if note_id in seen_paths:
            raise VaultError(
                f"duplicate note id {note_id!r}: {seen_paths[note_id]} and {rel}"
            )
        try:
            body = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            graph.diagnostics.append(Diagnostic("error", rel, f"unreadable file: {exc}"))
            continue
        seen_paths[note_id] = rel
        graph.notes[note_id] = Note(
            id=note_id, path=rel, body=body, tags=_extract_tags(body)
        )

    for note in graph.notes.values():
        for target, alias, _ in iter_link_occurrences(
            note.body, graph.diagnostics, note.path
        ):
            target_id = normalize_note_id(target)
            graph.link_refs.append(LinkRef(note.id, target_id, alias))
            if target_id == note.id:
                graph.diagnostics.append(
                    Diagnostic("warning", note.path, f"self-link [[{target}]] dropped")
                )
                continue
            if target_id not in graph.notes:
                graph.diagnostics.append(
                    Diagnostic(
                        "error", note.path, f"unresolved link target [[{target}]]"
                    )
                )
                continue
            graph.edges.add((note.id, target_id))
    return graph


def _paragraph_spans(body: str) -> list[tuple[int, int]]:
    """Spans of maximal runs of non-blank lines."""
    spans = []
    offset = 0
    start = None
    for line in body.splitlines(keepends=True):
        if line.strip():
            if start is None:
                start = offset
        else:
            if start is not None:
                spans.append((start, offset))
                start = None
        offset += len(line)
    if start is not None:
        spans.append((start, offset))
    return spans


def _is_tag_only(paragraph: str) -> bool:
    stripped = TAG_RE.sub("", paragraph).strip()
    return not stripped


def _section_block(spec_id: str, clause_path: str, paragraph: str) -> str:
    return f"## {spec_id} {clause_path}\n\n{paragraph}\n"


def _existing_sections(body: str) -> set[tuple[str, str, str]]:
    """(spec_id, clause_path, text) for every ``## <spec> <clause>`` section."""
    sections = set()
    for spec_id, clause_path, text in _iter_note_sections(body):
        sections.add((spec_id, clause_path, text))
    return sections


def _iter_note_sections(body: str) -> Iterator[tuple[str, str, str]]:
    lines = body.splitlines()
    i = 0
    while i < len(lines):
        m = HEADING_RE.match(lines[i])
        if m:
            parts = m.group(1).split()
            if len(parts) == 2:
                j = i + 1
                block: list[str] = []
                while j < len(lines) and not HEADING_RE.match(lines[j]):
                    block.append(lines[j])
                    j += 1
                text = "\n".join(block).strip("\n")
                yield parts[0], parts[1], text.strip()
                i = j
                continue
        i += 1


def populate_concept_notes(graph: NoteGraph, root: Path) -> PopulationReport:
    """Copy each clause paragraph into the concept notes it links to.

    Appended sections have the shape ``## <spec_id> <clause_path>`` followed
    by the paragraph text. A section already present verbatim in the target
    note is not appended again, so repeated runs are no-ops.
    """
    root = Path(root)
    report = PopulationReport()
    pending: dict[str, list[str]] = {}

    for clause_id in sorted(graph.notes):
        clause = graph.notes[clause_id]
        if clause.kind is not NoteKind.CLAUSE:
            continue
        tag = clause.clause_tag
        if tag is None:
            report.diagnostics.append(
                Diagnostic(
                    "warning",
                    clause.path,
                    "clause note has a spec/ tag that does not parse; skipped",
                )
            )
            continue
        links = list(iter_link_occurrences(clause.body))
        for start, end in _paragraph_spans(clause.body):
            paragraph = clause.body[start:end].strip("\n")
            if _is_tag_only(paragraph):
                continue
            targets: list[str] = []
            for target, _, offset in links:
                if start <= offset < end:
                    target_id = normalize_note_id(target)
                    if target_id not in targets:
                        targets.append(target_id)
            for target_id in targets:
                target_note = graph.notes.get(target_id)
                if target_note is None or target_note.kind is not NoteKind.CONCEPT:
                    continue
                pending.setdefault(target_id, []).append(
                    _section_block(tag.spec_id, tag.clause_path, paragraph)
                )

    for target_id in sorted(pending):
        note = graph.notes[target_id]
        path = root / note.path
        try:
            current = path.read_text(encoding="utf-8") if path.exists() else ""
        except OSError as exc:
            report.diagnostics.append(Diagnostic("error", note.path, f"read failed: {exc}"))
            continue
        existing = _existing_sections(current)
        appended = []
        for block in pending[target_id]:
            spec_id, clause_path, text = next(_iter_note_sections(block))
            key = (spec_id, clause_path, text)
            if key in existing:
                continue
            existing.add(key)
            appended.append(block)
        if not appended:
            continue
        new_body = current
        for block in appended:
            if new_body and not new_body.endswith("\n\n"):
                new_body = new_body.rstrip("\n") + "\n\n" if new_body.strip() else ""
            new_body += block + "\n"
        new_body = new_body.rstrip("\n") + "\n"
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(new_body, encoding="utf-8")
        except OSError as exc:
            report.diagnostics.append(Diagnostic("error", note.path, f"write failed: {exc}"))
            continue
        note.body = new_body
        report.notes_touched += 1
        report.sections_appended += len(appended)
    return report


def collect_context(graph: NoteGraph, concept: str, max_depth: int) -> ContextBundle:
    """Sections reachable from ``concept`` within ``max_depth`` BFS layers.

    Layer 1 is the concept itself, so ``max_depth=0`` yields an empty bundle.
    Traversal treats links as undirected. Sections come from populated
    ``## <spec> <clause>`` blocks in concept notes and, for clause notes,
    from the note's own paragraphs under its clause tag. Exact duplicate
    sections are reported once.
    """
    concept_id = normalize_note_id(concept)
    if concept_id not in graph.notes:
        raise VaultError(f"unknown concept note: {concept!r}")

    adjacency: dict[str, set[str]] = {nid: set() for nid in graph.notes}
    for source, target in graph.edges:
        adjacency[source].add(target)
        adjacency[target].add(source)

    sections: list[ContextSection] = []
    seen: set[tuple[str, str, str]] = set()
    visited = {concept_id}
    layer = [concept_id]
    depth = 0
    while layer and depth < max_depth:
        depth += 1
        for note_id in sorted(layer):
            note = graph.notes[note_id]
            for spec_id, clause_path, text in _note_sections(note):
                key = (spec_id, clause_path, text)
                if key not in seen:
                    seen.add(key)
                    sections.append(ContextSection(spec_id, clause_path, text))
        next_layer = set()
        for note_id in layer:
            for neighbor in adjacency[note_id]:
                if neighbor not in visited:
                    visited.add(neighbor)
                    next_layer.add(neighbor)
        layer = sorted(next_layer)
    return ContextBundle(concept=concept_id, max_depth=max_depth, sections=sections)


def _note_sections(note: Note) -> Iterator[tuple[str, str, str]]:
    if note.kind is NoteKind.CLAUSE:
        tag = note.clause_tag
        if tag is None:
            return
        for start, end in _paragraph_spans(note.body):
            paragraph = note.body[start:end].strip("\n")
            if _is_tag_only(paragraph):
                continue
            yield tag.spec_id, tag.clause_path, paragraph.strip()
    else:
        yield from _iter_note_sections(note.body)
