"""Shared tokenization helpers.

One tokenizer for everything that compares text to text (index terms, query
rewriting, hotword matching, shingles), so scores stay consistent across
modules.
"""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)

# Sentence ends at . ! or ? followed by whitespace (or end of string).
_SENTENCE_RE = re.compile(r"[^.!?]*[.!?](?:\s+|$)|[^.!?]+$")

# Small closed-class list; deliberately excludes content-bearing words such as
# "best" that rewritten shopping queries rely on.
STOP_WORDS = frozenset(
    "a an the and or but if then of to in on at by for with from as is are was "
    "were be been it its this that these those".split()
)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens (unicode \\w+ runs)."""
    return _TOKEN_RE.findall(text.lower())


def token_count(text: str) -> int:
    """Number of whitespace-separated tokens."""
    return len(text.split())


def dedupe(items):
    """Remove duplicates, keeping first-seen order."""
    seen = set()
    out = []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def split_sentences(text: str) -> list[str]:
    """Split on ./!/? followed by whitespace; trailing fragment kept."""
    parts = [m.group(0).strip() for m in _SENTENCE_RE.finditer(text)]
    return [p for p in parts if p]


def shingles(tokens: list[str], width: int = 8) -> set[tuple[str, ...]]:
    """Set of contiguous token windows of the given width.

    Shorter inputs yield a single shingle of whatever is there, so two short
    identical texts still compare equal.
    """
    if not tokens:
        return set()
    if len(tokens) <= width:
        return {tuple(tokens)}
    return {tuple(tokens[i : i + width]) for i in range(len(tokens) - width + 1)}


def jaccard(a: set, b: set) -> float:
    """Set Jaccard similarity; 1.0 when both sets are empty."""
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def multiset_jaccard(a: dict, b: dict) -> float:
    """Multiset Jaccard over count mappings; 1.0 when both are empty."""
    if not a and not b:
        return 1.0
    keys = set(a) | set(b)
    inter = sum(min(a.get(k, 0), b.get(k, 0)) for k in keys)
    union = sum(max(a.get(k, 0), b.get(k, 0)) for k in keys)
    return inter / union if union else 1.0
