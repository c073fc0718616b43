"""Scoring merge oracles against a hand-labelled ground truth.

Pairwise oracles are scored over the pairs they judged; grouping oracles
predict every within-group pair and are scored over the whole universe.
Precision, recall and F-score follow the usual confusion-count definitions;
a metric whose denominator is zero is reported as undefined (null in JSON)
rather than zero.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ontoforge.errors import EvaluationError
from ontoforge.refine import Judgment, MergeGraph
from ontoforge.refine import maximal_cliques as _merge_cliques

Pair = tuple[str, str]


def canonical_pair(a: str, b: str) -> Pair:
    if a == b:
        raise EvaluationError(f"degenerate pair ({a!r}, {a!r})")
    return (a, b) if a < b else (b, a)


@dataclass
class GroundTruth:
    positive_pairs: set[Pair]
    universe: set[Pair]

    def __post_init__(self):
        stray = self.positive_pairs - self.universe
        if stray:
            raise EvaluationError(
                f"{len(stray)} positive pairs are outside the universe, "
                f"e.g. {sorted(stray)[0]}"
            )

    @staticmethod
    def from_json(text: str) -> "GroundTruth":
        data = json.loads(text)
        universe = {canonical_pair(a, b) for a, b in data["universe"]}
        positives = {canonical_pair(a, b) for a, b in data["positives"]}
        return GroundTruth(positive_pairs=positives, universe=universe)

    def to_json(self) -> str:
        return json.dumps(
            {
                "universe": [list(p) for p in sorted(self.universe)],
                "positives": [list(p) for p in sorted(self.positive_pairs)],
            },
            indent=2,
        ) + "\n"


def f_score(precision: Optional[float], recall: Optional[float]) -> Optional[float]:
    """Harmonic mean; undefined when either input is undefined or both are 0."""
    if precision is None or recall is None or precision + recall == 0:
        return None
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class LatencyHistogram:
    bin_width: float
    bins: dict[int, int] = field(default_factory=dict)
    mean: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "bin_width": self.bin_width,
            "bins": {str(k): self.bins[k] for k in sorted(self.bins)},
            "mean": self.mean,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["bin_start_seconds", "count"])
        for k in sorted(self.bins):
            writer.writerow([repr(k * self.bin_width), self.bins[k]])
        return buf.getvalue()


def latency_histogram(latencies: Sequence[float], bin_width: float) -> LatencyHistogram:
    """Counts per [k*w, (k+1)*w) bin plus the mean latency."""
    if bin_width <= 0:
        raise EvaluationError(f"bin width must be positive, got {bin_width}")
    histogram = LatencyHistogram(bin_width=bin_width)
    for latency in latencies:
        k = int(math.floor(latency / bin_width))
        histogram.bins[k] = histogram.bins.get(k, 0) + 1
    if latencies:
        histogram.mean = sum(latencies) / len(latencies)
    return histogram


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: Optional[float]
    recall: Optional[float]
    f_score: Optional[float]
    mean_latency: Optional[float] = None
    latency_bins: Optional[LatencyHistogram] = None
    total_cost: Optional[float] = None
    calls: int = 0
    invalid_judgments: int = 0

    @staticmethod
    def from_counts(tp: int, fp: int, fn: int, tn: int) -> "EvalReport":
        precision = tp / (tp + fp) if tp + fp > 0 else None
        recall = tp / (tp + fn) if tp + fn > 0 else None
        return EvalReport(
            tp=tp,
            fp=fp,
            fn=fn,
            tn=tn,
            precision=precision,
            recall=recall,
            f_score=f_score(precision, recall),
        )

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
            "mean_latency": self.mean_latency,
            "latency_bins": self.latency_bins.to_dict() if self.latency_bins else None,
            "total_cost": self.total_cost,
            "calls": self.calls,
            "invalid_judgments": self.invalid_judgments,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _resolve_predictions(judgments: Sequence[Judgment]) -> dict[Pair, bool]:
    """One prediction per judged pair; conflicting repeats resolve to False."""
    verdicts: dict[Pair, set[bool]] = {}
    for judgment in judgments:
        if not judgment.valid:
            continue
        pair = (judgment.pair.a, judgment.pair.b)
        verdicts.setdefault(pair, set()).add(judgment.mergeable)
    return {pair: seen == {True} for pair, seen in verdicts.items()}


def score_pairwise(
    judgments: Sequence[Judgment],
    truth: GroundTruth,
    bin_width: float = 2.5,
    per_call_cost: Optional[float] = None,
) -> EvalReport:
    """Confusion counts over the judged pairs; TN fills up the universe.

    Every judged pair must be labelled in the ground truth: a coverage gap is
    an error, not a silent negative.
    """
    for judgment in judgments:
        pair = (judgment.pair.a, judgment.pair.b)
        if pair not in truth.universe:
            raise EvaluationError(f"judged pair {pair} is not in the ground-truth universe")

    predictions = _resolve_predictions(judgments)
    tp = fp = fn = 0
    for pair, predicted in predictions.items():
        positive = pair in truth.positive_pairs
        if predicted and positive:
            tp += 1
        elif predicted:
            fp += 1
        elif positive:
            fn += 1
    tn = len(truth.universe) - tp - fp - fn

    report = EvalReport.from_counts(tp, fp, fn, tn)
    report.calls = len(judgments)
    report.invalid_judgments = sum(1 for j in judgments if not j.valid)
    latencies = [j.latency for j in judgments]
    if latencies:
        histogram = latency_histogram(latencies, bin_width)
        report.mean_latency = histogram.mean
        report.latency_bins = histogram
    report.total_cost = _total_cost(judgments, per_call_cost)
    return report


def _total_cost(judgments: Sequence[Judgment], per_call_cost: Optional[float]) -> Optional[float]:
    if per_call_cost is not None:
        return len(judgments) * per_call_cost
    costs = [j.cost_estimate for j in judgments if j.cost_estimate is not None]
    if not costs:
        return None
    return sum(costs)


def adapt_ground_truth_to_groups(truth: GroundTruth) -> GroundTruth:
    """Close the positives over the maximal cliques of the positive graph.

    Grouping oracles answer with whole mergeable sets, so the ground truth is
    restated as every within-clique pair. Idempotent.
    """
    graph = MergeGraph(
        vertices={v for pair in truth.positive_pairs for v in pair},
        edges=set(truth.positive_pairs),
    )
    closed: set[Pair] = set()
    for members in _merge_cliques(graph):
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                closed.add(canonical_pair(a, b))
    return GroundTruth(positive_pairs=closed, universe=truth.universe | closed)


def score_grouping(groups: Sequence[set[str]], truth: GroundTruth) -> EvalReport:
    """Score mergeable-set predictions: every within-group pair counts positive.

    Groups are a total prediction over the universe, so unpredicted positives
    count as false negatives.
    """
    seen: set[str] = set()
    for group in groups:
        overlap = seen & set(group)
        if overlap:
            raise EvaluationError(f"groups overlap on {sorted(overlap)}")
        seen.update(group)

    predicted: set[Pair] = set()
    for group in groups:
        members = sorted(group)
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                pair = canonical_pair(a, b)
                if pair not in truth.universe:
                    raise EvaluationError(
                        f"group pair {pair} is not in the ground-truth universe"
                    )
                predicted.add(pair)

    tp = len(predicted & truth.positive_pairs)
    fp = len(predicted - truth.positive_pairs)
    fn = len(truth.positive_pairs - predicted)
    tn = len(truth.universe) - tp - fp - fn
    return EvalReport.from_counts(tp, fp, fn, tn)
