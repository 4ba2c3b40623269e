"""Generated corpora with planted label signals, for controlled experiments.

Documents are filler text with a few marker words drawn from the pool
matching the label. Any model that keys on the markers can separate the
classes; everything else is noise. Generation is deterministic per seed.
"""

from __future__ import annotations

import numpy as np

from .corpus import Corpus, LabeledDocument, doc_id_for

FAKE_MARKERS = (
    "hoax", "shocking", "exposed", "miracle", "coverup", "secretly",
    "banned", "astonishing", "unbelievable", "suppressed",
)

REAL_MARKERS = (
    "report", "official", "confirmed", "spokesperson", "published",
    "study", "survey", "statement", "announced", "according",
)

_FILLER = (
    "the a an and or but about after before during against between into "
    "through over under again further then once here there all any both "
    "each few more most other some such only own same so than too very "
    "people city council country state nation group member leader plan "
    "policy market street school water energy weather morning evening "
    "week month year time day number part house road project team game "
    "music film board committee question answer idea story event change "
    "result level order point system program public local national "
    "early late new old long short high low right left open closed "
    "meeting budget vote debate travel health sport business science "
    "garden river mountain bridge station airport library museum park"
).split()


def generate_synthetic_corpus(n_docs: int = 2000, seed: int = 0,
                              markers_per_doc: tuple[int, int] = (2, 5),
                              doc_words: tuple[int, int] = (18, 36)) -> Corpus:
    """Corpus of n_docs documents, half labeled 1 (fake markers planted).

    markers_per_doc and doc_words are [low, high) ranges for the number
    of planted markers and of filler words.
    """
    rng = np.random.default_rng(seed)
    labels = np.array([1] * (n_docs // 2) + [0] * (n_docs - n_docs // 2))
    rng.shuffle(labels)

    records = []
    seen_ids = set()
    for i in range(n_docs):
        label = int(labels[i])
        pool = FAKE_MARKERS if label == 1 else REAL_MARKERS
        while True:
            length = int(rng.integers(doc_words[0], doc_words[1]))
            words = [str(w) for w in rng.choice(_FILLER, size=length)]
            k = int(rng.integers(markers_per_doc[0], markers_per_doc[1]))
            for _ in range(k):
                pos = int(rng.integers(0, len(words) + 1))
                words.insert(pos, str(rng.choice(pool)))
            text = " ".join(words)
            doc_id = doc_id_for(text)
            if doc_id not in seen_ids:
                break
        seen_ids.add(doc_id)
        records.append(LabeledDocument(doc_id=doc_id, text=text, label=label,
                                       source_id="synthetic"))
    return Corpus(records)
