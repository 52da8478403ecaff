"""
Hashing tokenizer

Lowercase, whitespace-split, and hash every word into vocab_size - 3
buckets offset past the special ids. No vocabulary file is involved.
"""

import hashlib

from ..models.inputs import TokenSequence, CLS_ID, SEP_ID, PAD_ID, SPECIAL_IDS

DEFAULT_VOCAB_SIZE = 2048
DEFAULT_MAX_LENGTH = 64


def word_id(word: str, vocab_size: int = DEFAULT_VOCAB_SIZE) -> int:
    """Stable bucket for one lowercase word"""
    digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
    return SPECIAL_IDS + int.from_bytes(digest, "little") % (vocab_size - SPECIAL_IDS)


def word_ids(text: str, vocab_size: int = DEFAULT_VOCAB_SIZE) -> list[int]:
    return [word_id(word, vocab_size) for word in text.lower().split()]


def tokenize(
    text: str,
    vocab_size: int = DEFAULT_VOCAB_SIZE,
    max_length: int = DEFAULT_MAX_LENGTH,
) -> TokenSequence:
    """
    [CLS] w1 w2 ... padded with PAD to max_length

    Words beyond max_length - 1 are dropped.
    """
    body = word_ids(text, vocab_size)[: max_length - 1]
    return _padded([CLS_ID] + body, max_length)


def content(seq: TokenSequence) -> list[int]:
    """Token ids with CLS, SEP and PAD removed"""
    return [t for t in seq["tokens"] if t >= SPECIAL_IDS]


def pack_pair(premise: TokenSequence, hypothesis: TokenSequence) -> TokenSequence:
    """
    [CLS] premise [SEP] hypothesis, padded

    When the pair exceeds max_length the premise is truncated first; the
    hypothesis is only cut if it alone cannot fit beside CLS and SEP.
    """
    max_length = hypothesis["max_length"]
    p, h = content(premise), content(hypothesis)

    room = max_length - 2
    h = h[:room]
    p = p[: room - len(h)]
    return _padded([CLS_ID] + p + [SEP_ID] + h, max_length)


def segment_ids(seq: TokenSequence) -> list[int]:
    """0 up to and including the first SEP, 1 afterwards"""
    segments, current = [], 0
    for token in seq["tokens"]:
        segments.append(current)
        if token == SEP_ID:
            current = 1
    return segments


def real_length(tokens: list[int]) -> int:
    """Position just past the last non-PAD token"""
    for index in range(len(tokens) - 1, -1, -1):
        if tokens[index] != PAD_ID:
            return index + 1
    return 0


def validate_sequence(seq: TokenSequence, vocab_size: int) -> None:
    tokens = seq["tokens"]
    if not tokens or tokens[0] != CLS_ID:
        raise ValueError("Token sequence must begin with CLS")
    if tokens.count(SEP_ID) > 1:
        raise ValueError("Token sequence holds more than one SEP")
    if any(t < 0 or t >= vocab_size for t in tokens):
        raise ValueError(f"Token id outside [0, {vocab_size})")


def _padded(tokens: list[int], max_length: int) -> TokenSequence:
    return TokenSequence(tokens=tokens + [PAD_ID] * (max_length - len(tokens)), max_length=max_length)
