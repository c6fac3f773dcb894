"""Word vocabulary (with reserved symbols) and dialog-act tag set."""

from __future__ import annotations

from .errors import VocabularyError

SOS = "<sos>"
EOS = "<eos>"
UNK = "<unk>"
DA_END = "<da_end>"
RESERVED = (SOS, EOS, UNK, DA_END)


class Vocabulary:
    """Bijective word <-> id map. Reserved symbols occupy ids 0..3; regular
    words follow in sorted order for determinism."""

    def __init__(self, words):
        self._id_to_word = list(RESERVED)
        seen = set(RESERVED)
        for w in sorted(set(words)):
            if w in seen:
                raise VocabularyError(f"word {w!r} collides with a reserved symbol")
            self._id_to_word.append(w)
            seen.add(w)
        self._word_to_id = {w: i for i, w in enumerate(self._id_to_word)}

    @property
    def sos_id(self):
        return self._word_to_id[SOS]

    @property
    def eos_id(self):
        return self._word_to_id[EOS]

    @property
    def unk_id(self):
        return self._word_to_id[UNK]

    @property
    def boundary_id(self):
        return self._word_to_id[DA_END]

    def __len__(self):
        return len(self._id_to_word)

    def __contains__(self, word):
        return word in self._word_to_id

    def id_of(self, word: str) -> int:
        """Out-of-vocabulary words map to <unk>."""
        return self._word_to_id.get(word, self._word_to_id[UNK])

    def word_of(self, idx: int) -> str:
        if not 0 <= idx < len(self._id_to_word):
            raise VocabularyError(f"word id {idx} out of range (vocabulary size {len(self)})")
        return self._id_to_word[idx]

    def encode(self, words) -> list[int]:
        return [self.id_of(w) for w in words]

    def decode(self, ids) -> list[str]:
        return [self.word_of(i) for i in ids]

    def regular_words(self) -> list[str]:
        return self._id_to_word[len(RESERVED) :]


class DATagSet:
    """Bijective dialog-act tag <-> id map (sorted for determinism)."""

    def __init__(self, tags):
        unique = sorted(set(tags))
        if not unique:
            raise VocabularyError("empty dialog-act tag set")
        self._id_to_tag = unique
        self._tag_to_id = {t: i for i, t in enumerate(unique)}

    def __len__(self):
        return len(self._id_to_tag)

    def __contains__(self, tag):
        return tag in self._tag_to_id

    def id_of(self, tag: str) -> int:
        if tag not in self._tag_to_id:
            raise VocabularyError(f"unknown dialog-act tag {tag!r}")
        return self._tag_to_id[tag]

    def tag_of(self, idx: int) -> str:
        if not 0 <= idx < len(self._id_to_tag):
            raise VocabularyError(f"tag id {idx} out of range ({len(self)} tags)")
        return self._id_to_tag[idx]

    def tags(self) -> list[str]:
        return list(self._id_to_tag)
