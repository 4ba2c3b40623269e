"""Word splitting, vocab induction, and subword encoding."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misinfograph.errors import InputError
from misinfograph.tokenizer import (
    CLS_TOKEN,
    PAD_TOKEN,
    RESERVED_TOKENS,
    SEP_TOKEN,
    UNK_TOKEN,
    Vocab,
    encode,
    split_words,
    tokenize,
    train_vocab,
)


def char_vocab(*words):
    """Vocab of single chars plus ## continuations; every word tokenizes."""
    chars = sorted({c for w in words for c in w})
    return Vocab(list(RESERVED_TOKENS) + chars + ["##" + c for c in chars])


class TestSplitWords:
    def test_lowercases(self):
        assert split_words("Hello World") == ["hello", "world"]

    def test_punctuation_stands_alone(self):
        assert split_words("no, really!") == ["no", ",", "really", "!"]

    def test_interior_punctuation_splits(self):
        assert split_words("don't") == ["don", "'", "t"]
        assert split_words("u.s.a") == ["u", ".", "s", ".", "a"]

    def test_whitespace_varieties(self):
        assert split_words("a\tb\nc   d") == ["a", "b", "c", "d"]

    def test_unicode_punctuation(self):
        assert split_words("wait…what") == ["wait", "…", "what"]

    def test_empty(self):
        assert split_words("") == []
        assert split_words("   \n\t ") == []

    @given(st.text(max_size=60))
    @settings(max_examples=120, deadline=None)
    def test_split_never_produces_empty_or_spaced_words(self, text):
        for w in split_words(text):
            assert w
            assert w == w.lower()
            assert not any(ch.isspace() for ch in w)


class TestVocab:
    def test_reserved_tokens_required(self):
        with pytest.raises(InputError, match=r"\[PAD\]"):
            Vocab(["a", "b"])

    def test_duplicate_token_rejected(self):
        with pytest.raises(InputError, match="duplicate"):
            Vocab(list(RESERVED_TOKENS) + ["x", "x"])

    def test_unknown_lookup_falls_back_to_unk(self):
        v = char_vocab("ab")
        assert v.id("zzz") == v.unk_id

    def test_save_load_round_trip(self, tmp_path):
        v = char_vocab("hello", "world")
        path = tmp_path / "vocab.txt"
        v.save(path)
        loaded = Vocab.load(path)
        assert loaded.tokens == v.tokens

    def test_load_empty_file_rejected(self, tmp_path):
        path = tmp_path / "vocab.txt"
        path.write_text("", encoding="utf-8")
        with pytest.raises(InputError):
            Vocab.load(path)


class TestTokenize:
    def test_greedy_longest_match(self):
        v = Vocab(list(RESERVED_TOKENS) + ["un", "##believ", "##able", "##b", "u"])
        assert tokenize(v, "unbelievable") == ["un", "##believ", "##able"]

    def test_continuations_marked(self):
        v = char_vocab("cat")
        assert tokenize(v, "cat") == ["c", "##a", "##t"]

    def test_word_without_cover_becomes_unk(self):
        v = char_vocab("ab")
        assert tokenize(v, "abq") == [UNK_TOKEN]

    def test_unk_is_per_word_not_per_piece(self):
        v = char_vocab("ab")
        assert tokenize(v, "qq ab") == [UNK_TOKEN, "a", "##b"]

    def test_case_insensitive(self):
        v = char_vocab("hi")
        assert tokenize(v, "HI") == tokenize(v, "hi")

    @given(st.text(alphabet="abcdef ,.", max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_char_vocab_covers_everything(self, text):
        v = char_vocab("abcdef,.")
        toks = tokenize(v, text)
        assert UNK_TOKEN not in toks
        # stripping ## markers reconstructs the split words
        rebuilt, current = [], []
        for t in toks:
            if t.startswith("##"):
                current.append(t[2:])
            else:
                if current:
                    rebuilt.append("".join(current))
                current = [t]
        if current:
            rebuilt.append("".join(current))
        assert rebuilt == split_words(text)


class TestTrainVocab:
    def test_contains_reserved_prefix(self):
        v = train_vocab(["aa bb aa"], 30)
        assert tuple(v.tokens[:4]) == RESERVED_TOKENS

    def test_respects_target_size(self):
        texts = ["the quick brown fox jumps over the lazy dog"] * 5
        v = train_vocab(texts, 60)
        assert len(v) <= 60

    def test_frequent_pairs_merge(self):
        # "ing" suffix dominates, so a merged ##ing-style piece should exist
        texts = ["running jumping walking talking singing"] * 20
        v = train_vocab(texts, 200)
        merged = [t for t in v.tokens if len(t.lstrip("#")) > 1]
        assert merged, "expected at least one merged multi-char piece"

    def test_trained_vocab_tokenizes_training_text(self):
        texts = ["alpha beta gamma delta", "beta gamma epsilon"]
        v = train_vocab(texts, 300)
        for text in texts:
            assert UNK_TOKEN not in tokenize(v, text)

    def test_deterministic(self):
        texts = ["some repeated words appear here", "words appear again here"]
        a = train_vocab(texts, 60)
        b = train_vocab(texts, 60)
        assert a.tokens == b.tokens

    def test_empty_corpus_rejected(self):
        with pytest.raises(InputError):
            train_vocab([], 50)
        with pytest.raises(InputError):
            train_vocab(["", "   "], 50)

    def test_tiny_target_rejected(self):
        with pytest.raises(InputError):
            train_vocab(["hello"], 4)


class TestEncode:
    def test_cls_sep_framing(self):
        v = char_vocab("ab")
        seq = encode(v, tokenize(v, "ab"), max_seq_len=8)
        assert seq.ids[0] == v.cls_id
        assert seq.ids[seq.true_length - 1] == v.sep_id
        assert seq.true_length == 4  # [CLS] a ##b [SEP]

    def test_padding_and_mask(self):
        v = char_vocab("ab")
        seq = encode(v, ["a"], max_seq_len=6)
        assert seq.ids == (v.cls_id, v.id("a"), v.sep_id, v.pad_id, v.pad_id, v.pad_id)
        assert seq.attention_mask == (1, 1, 1, 0, 0, 0)

    def test_truncation_keeps_sep(self):
        v = char_vocab("abcdefgh")
        toks = tokenize(v, "abcdefgh")
        seq = encode(v, toks, max_seq_len=5)
        assert len(seq.ids) == 5
        assert seq.true_length == 5
        assert seq.ids[-1] == v.sep_id
        assert seq.attention_mask == (1, 1, 1, 1, 1)

    def test_min_length_enforced(self):
        v = char_vocab("a")
        with pytest.raises(InputError):
            encode(v, ["a"], max_seq_len=2)

    @given(st.integers(min_value=3, max_value=32), st.text(alphabet="abc ", max_size=50))
    @settings(max_examples=100, deadline=None)
    def test_encode_invariants(self, max_len, text):
        v = char_vocab("abc")
        seq = encode(v, tokenize(v, text), max_seq_len=max_len)
        assert len(seq.ids) == len(seq.attention_mask) == max_len
        assert sum(seq.attention_mask) == seq.true_length
        assert 2 <= seq.true_length <= max_len
        # mask is a prefix of ones
        assert all(m == 1 for m in seq.attention_mask[: seq.true_length])
        assert all(m == 0 for m in seq.attention_mask[seq.true_length :])
        assert all(i == v.pad_id for i in seq.ids[seq.true_length :])
