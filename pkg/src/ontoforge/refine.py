"""Oracle-judged instance merging with clique analysis and a reversible journal.

Candidate pairs are blocked (same class, optional token overlap), judged
true/false by an oracle, and collected into the mergeability graph. Maximal
cliques of that graph are merge groups: every assertion pointing from or to
a non-representative member is rewritten to the representative. Merges are
journaled with exact before/after deltas, so any entry can be reverted and
the pre-merge ontology restored bit for bit.
"""

from __future__ import annotations

import datetime
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from ontoforge import _kernels
from ontoforge.errors import RefineError
from ontoforge.ontology import OntologyGraph, local_name
from ontoforge.oracle import MergeOracle, parse_verdict

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class CandidatePair:
    a: str
    b: str
    block_key: str = ""

    def __post_init__(self):
        if self.a == self.b:
            raise RefineError(f"degenerate candidate pair ({self.a}, {self.a})")
        if self.a > self.b:
            raise RefineError(f"candidate pair not canonical: {self.a!r} > {self.b!r}")

    @staticmethod
    def of(x: str, y: str, block_key: str = "") -> "CandidatePair":
        a, b = sorted((x, y))
        return CandidatePair(a, b, block_key)


@dataclass
class Judgment:
    pair: CandidatePair
    mergeable: Optional[bool]  # None = unparseable response, excluded from the graph
    raw_response: str
    latency: float
    cost_estimate: Optional[float] = None

    @property
    def valid(self) -> bool:
        return self.mergeable is not None

    def to_dict(self) -> dict:
        return {
            "a": self.pair.a,
            "b": self.pair.b,
            "block_key": self.pair.block_key,
            "mergeable": self.mergeable,
            "raw_response": self.raw_response,
            "latency": self.latency,
            "cost_estimate": self.cost_estimate,
        }

    @staticmethod
    def from_dict(data: dict) -> "Judgment":
        return Judgment(
            pair=CandidatePair(data["a"], data["b"], data.get("block_key", "")),
            mergeable=data["mergeable"],
            raw_response=data.get("raw_response", ""),
            latency=float(data.get("latency", 0.0)),
            cost_estimate=data.get("cost_estimate"),
        )


@dataclass
class MergeGraph:
    vertices: set[str] = field(default_factory=set)
    edges: set[tuple[str, str]] = field(default_factory=set)


@dataclass
class Clique:
    members: tuple[str, ...]
    representative: str

    def to_dict(self) -> dict:
        return {"members": list(self.members), "representative": self.representative}


@dataclass
class MergeLogEntry:
    members: tuple[str, ...]
    representative: str
    removed_object: list[tuple[str, str, str]]
    added_object: list[tuple[str, str, str]]
    removed_data: list[tuple[str, str, str, str]]
    added_data: list[tuple[str, str, str, str]]
    retired_types: dict[str, str]
    timestamp: str
    reverted: bool = False

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "representative": self.representative,
            "removed_object_assertions": [list(t) for t in self.removed_object],
            "added_object_assertions": [list(t) for t in self.added_object],
            "removed_data_assertions": [list(t) for t in self.removed_data],
            "added_data_assertions": [list(t) for t in self.added_data],
            "retired_types": self.retired_types,
            "timestamp": self.timestamp,
            "reverted": self.reverted,
        }

    @staticmethod
    def from_dict(data: dict) -> "MergeLogEntry":
        return MergeLogEntry(
            members=tuple(data["members"]),
            representative=data["representative"],
            removed_object=[tuple(t) for t in data["removed_object_assertions"]],
            added_object=[tuple(t) for t in data["added_object_assertions"]],
            removed_data=[tuple(t) for t in data["removed_data_assertions"]],
            added_data=[tuple(t) for t in data["added_data_assertions"]],
            retired_types=dict(data["retired_types"]),
            timestamp=data["timestamp"],
            reverted=bool(data.get("reverted", False)),
        )


@dataclass
class MergeLog:
    entries: list[MergeLogEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    @staticmethod
    def from_dict(data: dict) -> "MergeLog":
        return MergeLog(entries=[MergeLogEntry.from_dict(e) for e in data["entries"]])


@dataclass
class BlockingConfig:
    """Same-class blocking is always on; token overlap is an optional extra."""

    token_overlap: Optional[int] = None


def name_tokens(name: str) -> set[str]:
    return set(_TOKEN_RE.findall(name.lower()))


def enumerate_candidates(
    ontology: OntologyGraph, blocking: BlockingConfig = BlockingConfig()
) -> list[CandidatePair]:
    """Candidate pairs in deterministic order (class, then pair)."""
    by_class: dict[str, list[str]] = {}
    for iri, cls in ontology.instances.items():
        by_class.setdefault(cls, []).append(iri)

    pairs: list[CandidatePair] = []
    for cls in sorted(by_class):
        instances = sorted(by_class[cls])
        block_key = f"class:{local_name(cls)}"
        if blocking.token_overlap is not None:
            block_key += f";tokens>={blocking.token_overlap}"
            tokens = {iri: name_tokens(ontology.display_name(iri)) for iri in instances}
        for i, a in enumerate(instances):
            for b in instances[i + 1 :]:
                if blocking.token_overlap is not None:
                    if len(tokens[a] & tokens[b]) < blocking.token_overlap:
                        continue
                pairs.append(CandidatePair(a, b, block_key))
    return pairs


def judge_pair(
    oracle: MergeOracle,
    pair: CandidatePair,
    names: Optional[Mapping[str, str]] = None,
) -> Judgment:
    """One oracle call; the raw response is kept next to its parse."""
    a_name = names[pair.a] if names else local_name(pair.a)
    b_name = names[pair.b] if names else local_name(pair.b)
    raw, latency = oracle.ask(a_name, b_name)
    return Judgment(
        pair=pair,
        mergeable=parse_verdict(raw),
        raw_response=raw,
        latency=latency,
        cost_estimate=oracle.per_call_cost,
    )


def judge_pairs(
    oracle: MergeOracle,
    pairs: Sequence[CandidatePair],
    names: Optional[Mapping[str, str]] = None,
    max_parallel: int = 1,
) -> list[Judgment]:
    """Judge pairs with bounded fan-out; output order follows input order."""
    if max_parallel <= 1 or len(pairs) <= 1:
        return [judge_pair(oracle, pair, names) for pair in pairs]
    with ThreadPoolExecutor(max_workers=max_parallel) as pool:
        return list(pool.map(lambda p: judge_pair(oracle, p, names), pairs))


def display_names(ontology: OntologyGraph, pairs: Sequence[CandidatePair]) -> dict[str, str]:
    iris = {iri for pair in pairs for iri in (pair.a, pair.b)}
    return {iri: ontology.display_name(iri) for iri in iris}


def build_merge_graph(judgments: Sequence[Judgment]) -> MergeGraph:
    """Vertices from valid judgments; an edge needs a true and no false verdict."""
    graph = MergeGraph()
    verdicts: dict[tuple[str, str], set[bool]] = {}
    for judgment in judgments:
        if not judgment.valid:
            continue
        pair = (judgment.pair.a, judgment.pair.b)
        graph.vertices.update(pair)
        verdicts.setdefault(pair, set()).add(judgment.mergeable)
    for pair, seen in verdicts.items():
        if seen == {True}:
            graph.edges.add(pair)
    return graph


def maximal_cliques(graph: MergeGraph) -> list[tuple[str, ...]]:
    """Maximal cliques of size >= 2, largest first, then lexicographic."""
    vertices = sorted(graph.vertices)
    index = {v: i for i, v in enumerate(vertices)}
    neighbors: list[list[int]] = [[] for _ in vertices]
    for a, b in graph.edges:
        neighbors[index[a]].append(index[b])
        neighbors[index[b]].append(index[a])
    cliques = []
    for members in _kernels.maximal_cliques(neighbors):
        if len(members) < 2:
            continue
        cliques.append(tuple(vertices[i] for i in members))
    cliques.sort(key=lambda members: (-len(members), members))
    return cliques


def select_representative(members: Sequence[str], ontology: OntologyGraph) -> str:
    """Highest assertion degree wins; ties go to the shortest, then first name."""
    if len(members) < 2:
        raise RefineError(f"representative selection needs >= 2 members, got {len(members)}")
    for member in members:
        if member not in ontology.instances:
            raise RefineError(f"clique member {member} is not an active instance")
    return min(
        members,
        key=lambda m: (
            -ontology.assertion_degree(m),
            len(ontology.display_name(m)),
            ontology.display_name(m),
            m,
        ),
    )


def resolve_overlaps(
    cliques: Sequence[tuple[str, ...]]
) -> tuple[list[tuple[str, ...]], list[str]]:
    """Make cliques disjoint: larger cliques keep shared vertices.

    Returns the disjoint cliques plus human-readable notes about drops, for
    the review file.
    """
    ordered = sorted(cliques, key=lambda members: (-len(members), members))
    claimed: set[str] = set()
    resolved: list[tuple[str, ...]] = []
    notes: list[str] = []
    for members in ordered:
        kept = tuple(m for m in members if m not in claimed)
        dropped = [m for m in members if m in claimed]
        if dropped:
            notes.append(
                f"clique {', '.join(members)}: dropped {', '.join(dropped)} "
                "(kept by a larger clique)"
            )
        if len(kept) < 2:
            if not dropped:
                notes.append(f"clique {', '.join(members)}: discarded, fewer than 2 members")
            else:
                notes.append(f"clique {', '.join(members)}: discarded after overlap removal")
            continue
        claimed.update(kept)
        resolved.append(kept)
    return resolved, notes


def _now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def apply_merges(
    ontology: OntologyGraph,
    cliques: Sequence[Clique],
    timestamp: Optional[str] = None,
) -> tuple[OntologyGraph, MergeLog]:
    """Apply pairwise-disjoint cliques; returns the merged graph and journal."""
    seen: dict[str, tuple[str, ...]] = {}
    for clique in cliques:
        if len(clique.members) < 2:
            raise RefineError(f"clique {clique.members} has fewer than 2 members")
        if clique.representative not in clique.members:
            raise RefineError(
                f"representative {clique.representative} is not a member of {clique.members}"
            )
        for member in clique.members:
            if member in seen:
                raise RefineError(
                    f"cliques overlap on {member}: {seen[member]} and {clique.members}"
                )
            seen[member] = clique.members

    graph = ontology.clone()
    log = MergeLog()
    stamp = timestamp or _now()
    for clique in cliques:
        retired = [m for m in clique.members if m != clique.representative]
        for member in clique.members:
            if member not in graph.instances:
                raise RefineError(f"clique member {member} is not an active instance")
        entry = _apply_one(graph, clique, retired, stamp)
        log.entries.append(entry)
    return graph, log


def _apply_one(
    graph: OntologyGraph, clique: Clique, retired: list[str], stamp: str
) -> MergeLogEntry:
    rep = clique.representative
    retired_set = set(retired)

    def rewrite(iri: str) -> str:
        return rep if iri in retired_set else iri

    touched_obj = {
        t for t in graph.object_assertions if t[0] in retired_set or t[2] in retired_set
    }
    kept_obj = graph.object_assertions - touched_obj
    rewritten_obj = {(rewrite(s), p, rewrite(o)) for s, p, o in touched_obj}
    added_obj = rewritten_obj - kept_obj

    touched_data = {t for t in graph.data_assertions if t[0] in retired_set}
    kept_data = graph.data_assertions - touched_data
    rewritten_data = {(rep, p, lex, kind) for _, p, lex, kind in touched_data}
    added_data = rewritten_data - kept_data

    graph.object_assertions = kept_obj | added_obj
    graph.data_assertions = kept_data | added_data

    retired_types = {}
    for member in retired:
        retired_types[member] = graph.instances.pop(member)
        graph.merged_into[member] = rep

    return MergeLogEntry(
        members=tuple(sorted(clique.members)),
        representative=rep,
        removed_object=sorted(touched_obj),
        added_object=sorted(added_obj),
        removed_data=sorted(touched_data),
        added_data=sorted(added_data),
        retired_types=retired_types,
        timestamp=stamp,
    )


def revert(ontology: OntologyGraph, log: MergeLog, entry_index: int) -> OntologyGraph:
    """Undo one journal entry; later dependent entries must be reverted first."""
    if not 0 <= entry_index < len(log.entries):
        raise RefineError(
            f"journal entry {entry_index} does not exist (0..{len(log.entries) - 1})"
        )
    entry = log.entries[entry_index]
    if entry.reverted:
        raise RefineError(f"journal entry {entry_index} is already reverted")

    graph = ontology.clone()
    restored = set(entry.retired_types)

    def blocking_entry(iri: str) -> str:
        for later_index in range(entry_index + 1, len(log.entries)):
            later = log.entries[later_index]
            if not later.reverted and iri in later.retired_types:
                return f"; retired by journal entry {later_index}"
        return ""

    for assertion in entry.added_object:
        if assertion not in graph.object_assertions:
            raise RefineError(
                f"cannot revert entry {entry_index}: rewritten assertion "
                f"{assertion} is gone (a dependent later entry is not yet reverted)"
            )
    for assertion in entry.added_data:
        if assertion not in graph.data_assertions:
            raise RefineError(
                f"cannot revert entry {entry_index}: rewritten assertion "
                f"{assertion} is gone (a dependent later entry is not yet reverted)"
            )
    for s, _, o in entry.removed_object:
        for endpoint in (s, o):
            if endpoint not in graph.instances and endpoint not in restored:
                raise RefineError(
                    f"cannot revert entry {entry_index}: endpoint {endpoint} is not "
                    f"active{blocking_entry(endpoint)}"
                )
    for s, *_ in entry.removed_data:
        if s not in graph.instances and s not in restored:
            raise RefineError(
                f"cannot revert entry {entry_index}: subject {s} is not "
                f"active{blocking_entry(s)}"
            )
    if entry.representative not in graph.instances:
        raise RefineError(
            f"cannot revert entry {entry_index}: representative "
            f"{entry.representative} is not active{blocking_entry(entry.representative)}"
        )

    graph.object_assertions -= set(entry.added_object)
    graph.object_assertions |= set(entry.removed_object)
    graph.data_assertions -= set(entry.added_data)
    graph.data_assertions |= set(entry.removed_data)
    for member, cls in entry.retired_types.items():
        graph.instances[member] = cls
        graph.merged_into.pop(member, None)
    entry.reverted = True
    return graph


# --------------------------------------------------------------------------
# Review file


@dataclass
class ReviewEntry:
    members: tuple[str, ...]
    representative: str
    approved: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "members": list(self.members),
            "representative": self.representative,
            "approved": self.approved,
            "note": self.note,
        }


def export_review(
    cliques: Sequence[tuple[str, ...]], ontology: OntologyGraph
) -> list[ReviewEntry]:
    """Disjoint cliques with proposed representatives, all awaiting approval."""
    resolved, notes = resolve_overlaps(cliques)
    entries = [
        ReviewEntry(
            members=members,
            representative=select_representative(members, ontology),
        )
        for members in resolved
    ]
    if notes and entries:
        entries[0].note = "overlap resolution: " + " | ".join(notes)
    return entries


def review_to_json(entries: Sequence[ReviewEntry]) -> str:
    return json.dumps([e.to_dict() for e in entries], indent=2) + "\n"


def review_from_json(text: str) -> list[ReviewEntry]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise RefineError("review file must hold a JSON list")
    entries = []
    for item in data:
        entries.append(
            ReviewEntry(
                members=tuple(item["members"]),
                representative=item["representative"],
                approved=bool(item.get("approved", False)),
                note=item.get("note", ""),
            )
        )
    return entries


def approved_cliques(entries: Sequence[ReviewEntry]) -> list[Clique]:
    return [
        Clique(members=e.members, representative=e.representative)
        for e in entries
        if e.approved
    ]
