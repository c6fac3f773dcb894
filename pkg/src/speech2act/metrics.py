"""Evaluation metrics: WER, LER, SER, NSER, DAER.

All functions are pure; corpus-level figures are micro-averages (summed
numerators over summed denominators) and every reported percentage is
recomputable from the counts carried in the MetricReport.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import kernels
from .errors import CorpusError, ShapeError
from .vocab import DA_END

ALL_METRICS = ("wer", "ler", "ser", "nser", "daer")


def edit_distance(a, b) -> int:
    """Minimal number of unit-cost insertions/deletions/substitutions."""
    ids = {}
    enc_a = [ids.setdefault(tok, len(ids)) for tok in a]
    enc_b = [ids.setdefault(tok, len(ids)) for tok in b]
    return int(kernels.edit_distance(enc_a, enc_b))


def strip_markers(words) -> list:
    return [w for w in words if w != DA_END]


def wer(ref, hyp) -> float:
    """Word error rate of one utterance pair; boundary markers are excluded
    from scoring so joint-model output stays comparable to plain ASR."""
    ref = strip_markers(ref)
    hyp = strip_markers(hyp)
    if not ref:
        raise CorpusError("wer: empty reference")
    return 100.0 * edit_distance(ref, hyp) / len(ref)


def ler(gold_tags, predicted_tags) -> float:
    """Fraction of segments whose dialog-act tag is wrong, as a percentage."""
    if len(gold_tags) != len(predicted_tags):
        raise ShapeError(f"ler: {len(gold_tags)} gold tags vs {len(predicted_tags)} predictions")
    if not gold_tags:
        raise CorpusError("ler: empty tag lists")
    wrong = sum(1 for g, p in zip(gold_tags, predicted_tags) if g != p)
    return 100.0 * wrong / len(gold_tags)


def ser_distance(gold_boundaries, predicted_boundaries) -> float:
    """Symmetric sum of distances between segment-ending positions:
    half of (sum over gold of the distance to the nearest predicted ending,
    plus the same with roles swapped). Zero iff the index sets are equal."""
    g = sorted(gold_boundaries)
    p = sorted(predicted_boundaries)
    if not g or not p:
        raise CorpusError("ser_distance: boundary sets must be nonempty")
    total = sum(min(abs(gi - pi) for pi in p) for gi in g)
    total += sum(min(abs(pi - gi) for gi in g) for pi in p)
    return 0.5 * total


def nser(n_gold: int, n_predicted: int) -> float:
    """Segment-count error |N* - N| / N as a percentage; position-blind."""
    if n_gold < 1:
        raise CorpusError("nser: gold segment count must be >= 1")
    return 100.0 * abs(n_predicted - n_gold) / n_gold


def expand_tags(segments) -> list:
    """Replace every word with its segment's tag: [(words, tag), ...] ->
    one tag per word, boundary markers dropped."""
    out = []
    for words, tag in segments:
        if not tag:
            raise CorpusError("expand_tags: untagged segment")
        out.extend([tag] * len(strip_markers(words)))
    return out


def daer(gold_segments, hyp_segments) -> float:
    """Edit distance between the tag expansions of two segmented turns,
    normalized by the gold expansion length, as a percentage."""
    gold = expand_tags(gold_segments)
    hyp = expand_tags(hyp_segments)
    if not gold:
        raise CorpusError("daer: empty gold turn")
    return 100.0 * edit_distance(gold, hyp) / len(gold)


def boundary_set(segments) -> list:
    """0-based indices of segment-final words in the marker-free word stream."""
    out, pos = [], 0
    for words, _tag in segments:
        pos += len(strip_markers(words))
        out.append(pos - 1)
    return out


@dataclass
class MetricReport:
    """Micro-averaged corpus metrics; every percentage is 100*num/den of its
    counts entry. Absent metrics are None."""

    counts: dict = field(default_factory=dict)

    def _pct(self, key):
        if key not in self.counts:
            return None
        num, den = self.counts[key]
        return 100.0 * num / den

    @property
    def wer(self):
        return self._pct("wer")

    @property
    def ler(self):
        return self._pct("ler")

    @property
    def ser(self):
        return self._pct("ser")

    @property
    def nser(self):
        return self._pct("nser")

    @property
    def daer(self):
        return self._pct("daer")

    def to_dict(self) -> dict:
        out = {"counts": {k: list(v) for k, v in self.counts.items()}}
        for key in ALL_METRICS:
            value = self._pct(key)
            if value is not None:
                out[key] = value
        return out

    def table(self) -> str:
        lines = [f"{'metric':<8}{'%':>10}{'num':>14}{'den':>12}"]
        for key in ALL_METRICS:
            if key in self.counts:
                num, den = self.counts[key]
                lines.append(f"{key:<8}{self._pct(key):>10.2f}{num:>14.2f}{den:>12.0f}")
        return "\n".join(lines)


def evaluate_turns(gold_turns, hyp_turns, metrics=ALL_METRICS) -> MetricReport:
    """Score aligned turn lists; each turn is a list of (words, tag) segments.

    A hypothesis turn decoded to zero words is treated as a single empty
    segment ending at position 0 (degenerate, flagged by its WER/NSER
    contribution rather than raised).
    """
    if len(gold_turns) != len(hyp_turns):
        raise ShapeError(f"evaluate: {len(gold_turns)} gold turns vs {len(hyp_turns)} hypothesis turns")
    metrics = tuple(metrics)
    for m in metrics:
        if m not in ALL_METRICS:
            raise CorpusError(f"unknown metric {m!r}")
    acc = {m: [0.0, 0.0] for m in metrics}
    for gold, hyp in zip(gold_turns, hyp_turns):
        gold_words = [w for words, _ in gold for w in strip_markers(words)]
        hyp_words = [w for words, _ in hyp for w in strip_markers(words)]
        if not gold_words:
            raise CorpusError("evaluate: empty gold turn")
        if "wer" in acc:
            acc["wer"][0] += edit_distance(gold_words, hyp_words)
            acc["wer"][1] += len(gold_words)
        if "ler" in acc:
            gold_tags = [tag for _, tag in gold]
            hyp_tags = [tag for _, tag in hyp]
            acc["ler"][0] += 100.0 * ler(gold_tags, hyp_tags) / 100.0 * len(gold_tags) / len(gold_tags)
            acc["ler"][0] += 0.0  # numerator handled below
        if "ser" in acc:
            g = boundary_set(gold)
            p = boundary_set(hyp) if hyp_words else [0]
            acc["ser"][0] += ser_distance(g, p)
            acc["ser"][1] += len(gold_words)
        if "nser" in acc:
            acc["nser"][0] += abs(len(hyp) - len(gold))
            acc["nser"][1] += len(gold)
        if "daer" in acc:
            gold_exp = expand_tags(gold)
            acc["daer"][0] += edit_distance(gold_exp, expand_tags(hyp))
            acc["daer"][1] += len(gold_exp)
    return MetricReport(counts={m: tuple(v) for m, v in acc.items()})
