"""Binary checkpoint round-trip and corruption handling."""

import json
import struct

import numpy as np
import pytest

from misinfograph.classifier.checkpoint import (
    MAGIC,
    load_model,
    save_model,
    vocab_fingerprint,
)
from misinfograph.classifier.model import ModelConfig, init_params, tensor_specs
from misinfograph.errors import ModelError
from misinfograph.tokenizer import RESERVED_TOKENS, Vocab


@pytest.fixture
def setup(tmp_path):
    vocab = Vocab(list(RESERVED_TOKENS) + list("abcdefgh"))
    cfg = ModelConfig(num_layers=1, hidden_dim=8, num_heads=2, ffn_dim=16,
                      max_seq_len=6, vocab_size=len(vocab), dropout_rate=0.0)
    params = init_params(cfg, seed=3)
    path = tmp_path / "model.bin"
    save_model(path, params, vocab, meta={"note": "fixture"})
    return vocab, params, path


def read_header(path):
    blob = path.read_bytes()
    (hlen,) = struct.unpack("<I", blob[8:12])
    return blob, hlen, json.loads(blob[12 : 12 + hlen].decode("utf-8"))


class TestRoundTrip:
    def test_tensors_bit_identical(self, setup):
        vocab, params, path = setup
        loaded, header = load_model(path, vocab=vocab)
        for name, _ in tensor_specs(params.config):
            np.testing.assert_array_equal(loaded[name], params[name])
        assert header["meta"]["note"] == "fixture"

    def test_config_restored(self, setup):
        vocab, params, path = setup
        loaded, _ = load_model(path, vocab=vocab)
        assert loaded.config == params.config

    def test_load_without_vocab_skips_hash_check(self, setup):
        _, params, path = setup
        loaded, _ = load_model(path)
        np.testing.assert_array_equal(loaded["tok_emb"], params["tok_emb"])

    def test_save_deterministic_bytes(self, setup, tmp_path):
        vocab, params, path = setup
        other = tmp_path / "again.bin"
        save_model(other, params, vocab, meta={"note": "fixture"})
        assert path.read_bytes() == other.read_bytes()

    def test_fingerprint_sensitive_to_any_token(self):
        a = Vocab(list(RESERVED_TOKENS) + ["x", "y"])
        b = Vocab(list(RESERVED_TOKENS) + ["x", "z"])
        assert vocab_fingerprint(a) != vocab_fingerprint(b)


class TestRejection:
    def test_wrong_vocab_refused(self, setup):
        _, _, path = setup
        other = Vocab(list(RESERVED_TOKENS) + list("zyxwvuts"))
        with pytest.raises(ModelError, match="vocab"):
            load_model(path, vocab=other)

    def test_bad_magic(self, setup, tmp_path):
        _, _, path = setup
        blob = path.read_bytes()
        bad = tmp_path / "bad.bin"
        bad.write_bytes(b"NOTMAGIC" + blob[8:])
        with pytest.raises(ModelError, match="magic"):
            load_model(bad)

    def test_truncated_header(self, tmp_path):
        bad = tmp_path / "bad.bin"
        bad.write_bytes(MAGIC + struct.pack("<I", 9999) + b"{}")
        with pytest.raises(ModelError, match="truncated"):
            load_model(bad)

    def test_corrupt_header_json(self, setup, tmp_path):
        _, _, path = setup
        blob, hlen, _ = read_header(path)
        bad = tmp_path / "bad.bin"
        bad.write_bytes(blob[:12] + b"x" * hlen + blob[12 + hlen :])
        with pytest.raises(ModelError, match="corrupt"):
            load_model(bad)

    def test_future_format_version(self, setup, tmp_path):
        _, _, path = setup
        blob, hlen, header = read_header(path)
        header["format_version"] = 99
        raw = json.dumps(header).encode("utf-8")
        bad = tmp_path / "bad.bin"
        bad.write_bytes(MAGIC + struct.pack("<I", len(raw)) + raw + blob[12 + hlen :])
        with pytest.raises(ModelError, match="version"):
            load_model(bad)

    def test_truncated_tensor_payload(self, setup, tmp_path):
        _, _, path = setup
        blob = path.read_bytes()
        bad = tmp_path / "bad.bin"
        bad.write_bytes(blob[:-16])
        with pytest.raises(ModelError, match="truncated|incomplete"):
            load_model(bad)

    def test_trailing_garbage(self, setup, tmp_path):
        _, _, path = setup
        bad = tmp_path / "bad.bin"
        bad.write_bytes(path.read_bytes() + b"\x00" * 8)
        with pytest.raises(ModelError, match="trailing"):
            load_model(bad)

    def test_empty_file(self, tmp_path):
        bad = tmp_path / "empty.bin"
        bad.write_bytes(b"")
        with pytest.raises(ModelError):
            load_model(bad)
