"""Misinformation analysis toolkit.

Two halves that meet in the pipeline module:

* text side -- corpus loading/merging, a WordPiece tokenizer, and a small
  transformer encoder trained as a binary fake/real classifier;
* graph side -- tweet/retweet propagation graphs, hashtag co-occurrence
  networks, and community detection (Louvain, two-level InfoMap).

``misinfograph.pipeline`` ties them together and exports explorer-ready
JSON documents.
"""

__version__ = "0.1.0"
