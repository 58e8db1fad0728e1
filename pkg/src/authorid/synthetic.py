"""Synthetic corpora for tests and demos.

Each author is a multinomial distribution over word groups; texts are sampled
group-by-group and rendered as letter-only tokens the tokenizer keeps intact.
"""
from __future__ import annotations

import string

import numpy as np

_LETTERS = string.ascii_lowercase


def _letters(n: int) -> str:
    # small base-26 encoding with letter digits, no leading-zero ambiguity at this scale
    if n < 26:
        return _LETTERS[n]
    return _letters(n // 26) + _LETTERS[n % 26]


def group_name(g: int) -> str:
    return f"group{_letters(g)}"


def word_for(g: int, i: int) -> str:
    return f"w{_letters(g)}q{_letters(i)}"


def make_group_db_text(n_groups: int, words_per_group: int = 6) -> str:
    lines = ["# synthetic group database"]
    for g in range(n_groups):
        for i in range(words_per_group):
            lines.append(f"{group_name(g)}\t{word_for(g, i)}")
    return "\n".join(lines) + "\n"


def author_profiles(n_authors: int, n_groups: int, rng: np.random.Generator, concentration: float = 0.3) -> np.ndarray:
    """Distinct multinomial group distributions, one row per author. A small
    Dirichlet concentration keeps the profiles spiky and well separated."""
    return rng.dirichlet(np.full(n_groups, concentration), size=n_authors)


def make_text(profile, n_tokens: int, rng: np.random.Generator, words_per_group: int = 6) -> str:
    groups = rng.choice(len(profile), size=n_tokens, p=profile)
    words = [word_for(g, rng.integers(words_per_group)) for g in groups]
    return " ".join(words)


def make_corpus(
    n_authors: int = 5,
    n_groups: int = 20,
    texts_per_author: int = 60,
    tokens_per_text: int = 300,
    words_per_group: int = 6,
    seed: int = 0,
):
    """Returns (group_db_text, samples) where samples is a list of
    (author_id, text) pairs, interleaved across authors."""
    rng = np.random.default_rng(seed)
    profiles = author_profiles(n_authors, n_groups, rng)
    samples = []
    for t in range(texts_per_author):
        for a in range(n_authors):
            samples.append((a, make_text(profiles[a], tokens_per_text, rng, words_per_group)))
    return make_group_db_text(n_groups, words_per_group), samples


def train_validation_split(samples, train_fraction: float = 0.75):
    """Deterministic per-author split preserving the interleaved order."""
    by_author: dict[int, list[str]] = {}
    for a, text in samples:
        by_author.setdefault(a, []).append(text)
    train, validation = [], []
    for a, texts in by_author.items():
        cut = int(round(len(texts) * train_fraction))
        train += [(a, t) for t in texts[:cut]]
        validation += [(a, t) for t in texts[cut:]]
    return train, validation
