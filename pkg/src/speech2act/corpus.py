"""Corpus model, manifest/feature file formats, and batch iteration.

Manifest: JSON-lines, one record per turn:

    {"conversation_id": ..., "turn_id": ..., "speaker": ...,
     "split": "train"|"validation"|"test", "feature_ref": "feats/x.bin",
     "segments": [{"words": [...], "da_tag": ...}, ...]}

speaker and feature_ref may be empty/omitted; the rest is required.

Feature file (all integers little-endian):

    magic    8 bytes  b"S2AFEATS"
    version  uint32   currently 1
    frames   uint32
    dim      uint32
    crc32    uint32   of the payload bytes
    payload  frames*dim float32 values, little-endian, row-major
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CorpusError
from .vocab import DATagSet, Vocabulary

FEATURE_MAGIC = b"S2AFEATS"
FEATURE_VERSION = 1
SPLITS = ("train", "validation", "test")


def write_features(path, frames: np.ndarray) -> None:
    frames = np.ascontiguousarray(frames, dtype="<f4")
    if frames.ndim != 2:
        raise CorpusError(f"feature array must be 2-D, got shape {frames.shape}")
    payload = frames.tobytes()
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<IIII", FEATURE_VERSION, frames.shape[0], frames.shape[1], zlib.crc32(payload)))
        fh.write(payload)


def read_features(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != FEATURE_MAGIC:
        raise CorpusError(f"{path}: not a feature file (bad magic)")
    version, n_frames, dim, crc = struct.unpack_from("<IIII", blob, 8)
    if version != FEATURE_VERSION:
        raise CorpusError(f"{path}: unsupported feature-file version {version}")
    payload = blob[24:]
    if len(payload) != 4 * n_frames * dim:
        raise CorpusError(
            f"{path}: payload holds {len(payload)} bytes, header promises {n_frames}x{dim} float32"
        )
    if zlib.crc32(payload) != crc:
        raise CorpusError(f"{path}: payload checksum mismatch")
    return np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(n_frames, dim)


@dataclass
class DASegment:
    words: list
    da_tag: str


@dataclass
class Turn:
    conversation_id: str
    turn_id: str
    speaker: str
    segments: list
    split: str = "train"
    features: np.ndarray | None = None
    feature_ref: str = ""
    alignment: dict | None = field(default=None, repr=False)  # synthesis metadata, not persisted

    def words(self) -> list:
        return [w for seg in self.segments for w in seg.words]

    def tags(self) -> list:
        return [seg.da_tag for seg in self.segments]

    def boundaries(self) -> list:
        """0-based index of each segment-final word in the flat word sequence."""
        out, pos = [], 0
        for seg in self.segments:
            pos += len(seg.words)
            out.append(pos - 1)
        return out

    def token_ids(self, vocab: Vocabulary, include_boundaries: bool) -> list:
        ids = []
        for seg in self.segments:
            ids.extend(vocab.encode(seg.words))
            if include_boundaries:
                ids.append(vocab.boundary_id)
        return ids


class Corpus:
    """Turns grouped by split and conversation; vocabulary and tag set are
    built from the train split only."""

    def __init__(self, turns):
        self.turns = list(turns)
        self._by_split = {s: [] for s in SPLITS}
        conv_split = {}
        for t in self.turns:
            if t.split not in SPLITS:
                raise CorpusError(f"turn {t.turn_id}: unknown split {t.split!r}")
            prior = conv_split.setdefault(t.conversation_id, t.split)
            if prior != t.split:
                raise CorpusError(
                    f"conversation {t.conversation_id} appears in splits {prior!r} and {t.split!r}"
                )
            self._by_split[t.split].append(t)
        for t in self.turns:
            for i, seg in enumerate(t.segments):
                if not seg.words:
                    raise CorpusError(f"turn {t.turn_id}: segment {i} has no words")
        train_words = [w for t in self._by_split["train"] for w in t.words()]
        train_tags = [tag for t in self._by_split["train"] for tag in t.tags()]
        self.vocabulary = Vocabulary(train_words)
        self.tags = DATagSet(train_tags)

    def split_turns(self, split: str) -> list:
        if split not in SPLITS:
            raise CorpusError(f"unknown split {split!r}")
        return self._by_split[split]

    def conversations(self, split: str) -> list:
        """Turns grouped by conversation, preserving manifest order."""
        groups, order = {}, []
        for t in self.split_turns(split):
            if t.conversation_id not in groups:
                groups[t.conversation_id] = []
                order.append(t.conversation_id)
            groups[t.conversation_id].append(t)
        return [groups[c] for c in order]

    @property
    def feature_dim(self) -> int:
        for t in self.turns:
            if t.features is not None:
                return t.features.shape[1]
        raise CorpusError("corpus has no feature sequences")


def _require(record, key, line_no):
    if key not in record:
        raise CorpusError(f"manifest line {line_no}: missing required field '{key}'")
    return record[key]


def load_corpus(manifest_path, load_features=True) -> Corpus:
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    turns = []
    with open(manifest_path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"manifest line {line_no}: malformed JSON ({exc.msg})") from exc
            segments = []
            for i, seg in enumerate(_require(record, "segments", line_no)):
                if "words" not in seg:
                    raise CorpusError(f"manifest line {line_no}: segment {i} missing field 'words'")
                if "da_tag" not in seg:
                    raise CorpusError(f"manifest line {line_no}: segment {i} missing field 'da_tag'")
                segments.append(DASegment(words=list(seg["words"]), da_tag=seg["da_tag"]))
            ref = record.get("feature_ref") or ""
            features = None
            if ref and load_features:
                features = read_features(base / ref)
            turns.append(
                Turn(
                    conversation_id=_require(record, "conversation_id", line_no),
                    turn_id=_require(record, "turn_id", line_no),
                    speaker=record.get("speaker") or "",
                    segments=segments,
                    split=record.get("split") or "train",
                    features=features,
                    feature_ref=ref,
                )
            )
    return Corpus(turns)


def save_corpus(corpus: Corpus, out_dir) -> Path:
    """Write manifest.jsonl plus one feature file per turn; returns the
    manifest path."""
    out_dir = Path(out_dir)
    (out_dir / "feats").mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.jsonl"
    with open(manifest, "w", encoding="utf-8") as fh:
        for t in corpus.turns:
            ref = ""
            if t.features is not None:
                ref = f"feats/{t.turn_id}.bin"
                write_features(out_dir / ref, t.features)
            record = {
                "conversation_id": t.conversation_id,
                "turn_id": t.turn_id,
                "speaker": t.speaker,
                "split": t.split,
                "feature_ref": ref,
                "segments": [{"words": seg.words, "da_tag": seg.da_tag} for seg in t.segments],
            }
            fh.write(json.dumps(record) + "\n")
    return manifest


@dataclass
class Batch:
    """Padded batch with masks; padding carries zero weight in every loss."""

    turns: list
    features: np.ndarray  # [B, Tmax, D]
    frame_lengths: np.ndarray  # [B]
    tokens: np.ndarray  # [B, Lmax] target ids, <eos>-terminated rows, zero-padded
    token_lengths: np.ndarray  # [B]
    token_mask: np.ndarray  # [B, Lmax] float, 1 on real tokens

    def __len__(self):
        return len(self.turns)


def make_batch(turns, vocab: Vocabulary, include_boundaries: bool) -> Batch:
    token_rows = [t.token_ids(vocab, include_boundaries) + [vocab.eos_id] for t in turns]
    t_max = max(t.features.shape[0] for t in turns)
    l_max = max(len(r) for r in token_rows)
    dim = turns[0].features.shape[1]
    features = np.zeros((len(turns), t_max, dim))
    tokens = np.zeros((len(turns), l_max), dtype=np.int64)
    mask = np.zeros((len(turns), l_max))
    frame_lengths = np.zeros(len(turns), dtype=np.int64)
    token_lengths = np.zeros(len(turns), dtype=np.int64)
    for i, (turn, row) in enumerate(zip(turns, token_rows)):
        n = turn.features.shape[0]
        features[i, :n] = turn.features
        frame_lengths[i] = n
        tokens[i, : len(row)] = row
        mask[i, : len(row)] = 1.0
        token_lengths[i] = len(row)
    return Batch(list(turns), features, frame_lengths, tokens, token_lengths, mask)


def batch_iterator(turns, vocab, batch_size, seed, epoch=0, include_boundaries=False, bucket=True):
    """Deterministic shuffled batches for one epoch.

    With bucketing, turns are sorted by frame count and chunked, then the
    chunk order is shuffled; batch contents are identical across runs for the
    same (seed, epoch).
    """
    if batch_size < 1:
        raise ValueError(f"batch size must be >= 1, got {batch_size}")
    turns = list(turns)
    for t in turns:
        if t.features is None:
            raise CorpusError(f"turn {t.turn_id} has no features; cannot batch")
    rng = np.random.default_rng([int(seed) & 0x7FFFFFFF, int(epoch)])
    order = rng.permutation(len(turns))
    if bucket:
        # stable sort: ties keep the shuffled order, so buckets vary per epoch
        order = sorted(order, key=lambda i: turns[i].features.shape[0])
    chunks = [order[i : i + batch_size] for i in range(0, len(order), batch_size)]
    for ci in rng.permutation(len(chunks)):
        yield make_batch([turns[i] for i in chunks[ci]], vocab, include_boundaries)
