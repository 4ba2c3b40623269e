"""Lowercasing WordPiece tokenizer and fixed-length sequence encoder.

A vocabulary is either trained here (frequency-based pair merging over
whitespace/punctuation-split words, emitting ``##``-prefixed continuation
pieces) or loaded from a plain token-per-line file. Text is lowercased,
split into words with each punctuation character standing alone, and each
word is decomposed by greedy longest-match against the vocabulary; words
with no decomposition become ``[UNK]``.

Vocab objects are immutable after construction; ``tokenize`` and
``encode`` are pure functions, safe to call concurrently.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import InputError

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
CLS_TOKEN = "[CLS]"
SEP_TOKEN = "[SEP]"
RESERVED_TOKENS = (PAD_TOKEN, UNK_TOKEN, CLS_TOKEN, SEP_TOKEN)


class Vocab:
    """Ordered token list with reserved specials; id = list position."""

    def __init__(self, tokens: list[str]):
        self.tokens = list(tokens)
        self.token_to_id = {}
        for i, tok in enumerate(self.tokens):
            if tok in self.token_to_id:
                raise InputError(f"duplicate token {tok!r} in vocab")
            self.token_to_id[tok] = i
        for special in RESERVED_TOKENS:
            if special not in self.token_to_id:
                raise InputError(f"vocab is missing reserved token {special}")
        self.pad_id = self.token_to_id[PAD_TOKEN]
        self.unk_id = self.token_to_id[UNK_TOKEN]
        self.cls_id = self.token_to_id[CLS_TOKEN]
        self.sep_id = self.token_to_id[SEP_TOKEN]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def id(self, token: str) -> int:
        return self.token_to_id.get(token, self.unk_id)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for tok in self.tokens:
                f.write(tok + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocab":
        with open(path, encoding="utf-8") as f:
            tokens = [line.rstrip("\n") for line in f if line.rstrip("\n")]
        if not tokens:
            raise InputError(f"{path}: empty vocab file")
        return cls(tokens)


@dataclass(frozen=True)
class TokenSequence:
    ids: tuple[int, ...]
    attention_mask: tuple[int, ...]
    true_length: int


def _is_punctuation(ch: str) -> bool:
    # uncased-tokenizer convention: ASCII symbol ranges count as punctuation
    cp = ord(ch)
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(ch).startswith("P")


def split_words(text: str) -> list[str]:
    """Lowercase and split into words; punctuation chars stand alone."""
    words = []
    for chunk in text.lower().split():
        current = []
        for ch in chunk:
            if _is_punctuation(ch):
                if current:
                    words.append("".join(current))
                    current = []
                words.append(ch)
            else:
                current.append(ch)
        if current:
            words.append("".join(current))
    return words


def _word_pieces(word: str) -> list[str]:
    return [word[0]] + ["##" + c for c in word[1:]]


def train_vocab(texts, target_size: int) -> Vocab:
    """Induce a WordPiece vocabulary by iterative frequent-pair merging.

    The vocabulary starts from the reserved tokens plus every observed
    character (in both word-initial and ``##`` continuation form), then
    repeatedly merges the most frequent adjacent pair (ties broken by the
    lexicographically smallest pair) until ``target_size`` entries exist
    or no pair occurs at least twice. Deterministic for fixed inputs.
    """
    word_freq: dict[str, int] = {}
    for text in texts:
        for word in split_words(text):
            word_freq[word] = word_freq.get(word, 0) + 1
    if not word_freq:
        raise InputError("cannot train a vocab on an empty corpus")

    alphabet = sorted({ch for word in word_freq for ch in word})
    base = list(RESERVED_TOKENS) + alphabet + ["##" + ch for ch in alphabet]
    if target_size < len(base):
        raise InputError(
            f"target_size {target_size} is smaller than reserved tokens plus "
            f"observed alphabet ({len(base)})"
        )

    tokens = list(base)
    token_set = set(tokens)
    # piece sequences per distinct word, weighted by word frequency
    words = {w: _word_pieces(w) for w in word_freq}

    while len(tokens) < target_size:
        pair_counts: dict[tuple[str, str], int] = {}
        for w, pieces in words.items():
            freq = word_freq[w]
            for a, b in zip(pieces, pieces[1:]):
                pair_counts[(a, b)] = pair_counts.get((a, b), 0) + freq
        if not pair_counts:
            break
        best_pair, best_count = min(
            pair_counts.items(), key=lambda kv: (-kv[1], kv[0])
        )
        if best_count < 2:
            break
        left, right = best_pair
        merged = left + right[2:]  # right is always a ## continuation piece
        if merged not in token_set:  # distinct merges can collide on one string
            tokens.append(merged)
            token_set.add(merged)
        for w, pieces in words.items():
            if len(pieces) < 2:
                continue
            out = []
            i = 0
            while i < len(pieces):
                if i + 1 < len(pieces) and pieces[i] == left and pieces[i + 1] == right:
                    out.append(merged)
                    i += 2
                else:
                    out.append(pieces[i])
                    i += 1
            words[w] = out

    return Vocab(tokens)


def tokenize(vocab: Vocab, text: str) -> list[str]:
    """Lowercase, split, and greedily decompose each word into pieces."""
    out = []
    for word in split_words(text):
        pieces = []
        start = 0
        failed = False
        while start < len(word):
            end = len(word)
            match = None
            while start < end:
                sub = word[start:end]
                if start > 0:
                    sub = "##" + sub
                if sub in vocab:
                    match = sub
                    break
                end -= 1
            if match is None:
                failed = True
                break
            pieces.append(match)
            start = end
        out.extend([UNK_TOKEN] if failed else pieces)
    return out


def encode(vocab: Vocab, tokens: list[str], max_seq_len: int) -> TokenSequence:
    """Pack tokens as [CLS] body [SEP] with padding to max_seq_len."""
    if max_seq_len < 3:
        raise InputError(f"max_seq_len must be >= 3, got {max_seq_len}")
    body = [vocab.id(t) for t in tokens[: max_seq_len - 2]]
    ids = [vocab.cls_id] + body + [vocab.sep_id]
    true_length = len(ids)
    ids.extend([vocab.pad_id] * (max_seq_len - true_length))
    mask = [1] * true_length + [0] * (max_seq_len - true_length)
    return TokenSequence(ids=tuple(ids), attention_mask=tuple(mask), true_length=true_length)
