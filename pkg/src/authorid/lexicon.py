"""Text preprocessing: tokenization and word-group counting against a group dictionary.

A group database maps words to named lexical groups; scanning a text yields a
per-group count vector which, normalized to frequencies, is the classifier input.
Fallback lexica let unknown words extend the dictionary (and the group registry)
during ingestion.
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np


class LexiconError(ValueError):
    """Base error for lexicon parsing and lookup problems."""


class LexiconFormatError(LexiconError):
    """Malformed group database file."""


class LexiconConflictError(LexiconError):
    """Same word mapped to two different groups."""


# Runs of letters or apostrophes; digits and underscores act as separators.
_TOKEN_RE = re.compile(r"(?:[^\W\d_]|')+")


def normalize_word(word: str) -> str:
    return word.casefold().strip("'")


@dataclass
class TokenizedText:
    sample_id: str
    tokens: list[str]
    raw_length: int


def tokenize(raw_text: str | bytes, sample_id: str = "") -> TokenizedText:
    """Lowercase, split on anything that is not a letter or apostrophe, strip
    leading/trailing apostrophes, drop empty tokens."""
    if isinstance(raw_text, bytes):
        raw_text = raw_text.decode("utf-8")
    matches = _TOKEN_RE.findall(raw_text.casefold())
    tokens = [t for t in (m.strip("'") for m in matches) if t]
    return TokenizedText(sample_id=sample_id, tokens=tokens, raw_length=len(matches))


@dataclass
class GroupLexicon:
    """Word -> group dictionary plus the ordered group registry.

    Group ids are dense indices 0..n_groups-1 in first-appearance order, so a
    count vector aligns positionally with `groups`. Any mutation bumps `version`.
    """

    groups: list[tuple[int, str]] = field(default_factory=list)
    dictionary: dict[str, int] = field(default_factory=dict)
    version: int = 0

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def group_names(self) -> list[str]:
        return [name for _, name in self.groups]

    def group_id(self, name: str) -> int | None:
        for gid, gname in self.groups:
            if gname == name:
                return gid
        return None

    def lookup(self, word: str) -> int | None:
        return self.dictionary.get(word)

    def copy(self) -> "GroupLexicon":
        return GroupLexicon(
            groups=list(self.groups),
            dictionary=dict(self.dictionary),
            version=self.version,
        )

    def add_group(self, name: str) -> int:
        gid = self.group_id(name)
        if gid is not None:
            return gid
        gid = len(self.groups)
        self.groups.append((gid, name))
        self.version += 1
        return gid

    def add_word(self, word: str, group_name: str) -> int:
        word = normalize_word(word)
        if not word:
            raise LexiconError("empty word after normalization")
        gid = self.add_group(group_name)
        existing = self.dictionary.get(word)
        if existing is not None:
            if existing != gid:
                raise LexiconConflictError(
                    f"word {word!r} already mapped to group {existing}, not {gid}"
                )
            return gid
        self.dictionary[word] = gid
        self.version += 1
        return gid


@dataclass
class FallbackLexicon:
    """Secondary word -> group-name mapping consulted when the dictionary misses.

    Its group names need not pre-exist in the GroupLexicon; a hit on a new name
    creates the group."""

    name: str
    entries: dict[str, str]


@dataclass
class FeatureVector:
    """Per-group occurrence counts and normalized frequencies for one text."""

    counts: np.ndarray
    frequencies: np.ndarray
    matched_total: int
    unmatched_total: int = 0


def featurize(fv: FeatureVector) -> FeatureVector:
    """Fill the frequency field: counts / matched_total, all zeros for an
    unmatched text. Counts are left untouched."""
    counts = np.asarray(fv.counts)
    total = int(counts.sum())
    if total > 0:
        freqs = counts.astype(float) / total
    else:
        freqs = np.zeros(len(counts))
    return FeatureVector(
        counts=counts,
        frequencies=freqs,
        matched_total=total,
        unmatched_total=fv.unmatched_total,
    )


def count_groups(
    text: TokenizedText,
    lexicon: GroupLexicon,
    fallbacks: tuple[FallbackLexicon, ...] | list[FallbackLexicon] = (),
) -> tuple[FeatureVector, GroupLexicon]:
    """Scan tokens in order and tally occurrences per group.

    Each distinct word is resolved once: dictionary first, then the fallbacks in
    order. A fallback hit adds the word (and its group, if new) to a copy of the
    lexicon. All occurrences of a resolved word are counted at once and consumed,
    so no token is ever double counted. Words found nowhere are skipped and
    tallied in unmatched_total. Returns the count vector and the possibly grown
    lexicon (the input lexicon itself when nothing was added)."""
    totals = Counter(text.tokens)
    grouped: dict[int, int] = {}
    lex = lexicon
    consumed: set[str] = set()
    unmatched = 0
    for tok in text.tokens:
        if tok in consumed:
            continue
        consumed.add(tok)
        gid = lex.lookup(tok)
        if gid is None:
            for fb in fallbacks:
                gname = fb.entries.get(tok)
                if gname is not None:
                    if lex is lexicon:
                        lex = lexicon.copy()
                    gid = lex.add_word(tok, gname)
                    break
        if gid is None:
            unmatched += totals[tok]
            continue
        grouped[gid] = grouped.get(gid, 0) + totals[tok]

    counts = np.zeros(lex.n_groups, dtype=int)
    for gid, c in grouped.items():
        counts[gid] = c
    fv = featurize(
        FeatureVector(
            counts=counts,
            frequencies=np.zeros(len(counts)),
            matched_total=int(counts.sum()),
            unmatched_total=unmatched,
        )
    )
    return fv, lex


def _parse_pair_lines(lines, origin: str) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise LexiconFormatError(
                f"{origin}:{lineno}: expected '<group_name>\\t<word>'"
            )
        pairs.append((parts[0].strip(), normalize_word(parts[1].strip())))
    return pairs


def _parse_pairs(path) -> list[tuple[str, str]]:
    with open(path, encoding="utf-8") as fh:
        return _parse_pair_lines(fh, str(path))


def _build_lexicon(pairs: list[tuple[str, str]], origin: str) -> GroupLexicon:
    if not pairs:
        raise LexiconFormatError(f"{origin}: no groups")
    lex = GroupLexicon()
    for gname, word in pairs:
        existing = lex.lookup(word)
        if existing is not None:
            gid = lex.group_id(gname)
            if gid is None or gid != existing:
                raise LexiconConflictError(
                    f"{origin}: word {word!r} assigned to both group "
                    f"{lex.groups[existing][1]!r} and {gname!r}"
                )
            continue
        lex.add_word(word, gname)
    return lex


def load_group_db(path) -> GroupLexicon:
    """Parse a group database file (one `group<TAB>word` line per entry, `#`
    comments). Group ids follow first appearance order. Duplicate identical
    entries are deduplicated; a word claimed by two groups is a conflict."""
    return _build_lexicon(_parse_pairs(path), str(path))


def loads_group_db(text: str, origin: str = "<string>") -> GroupLexicon:
    """Parse a group database from a string (see load_group_db)."""
    return _build_lexicon(_parse_pair_lines(text.splitlines(), origin), origin)


def load_fallback(path, name: str | None = None) -> FallbackLexicon:
    """Parse a fallback lexicon; same file format as the group database."""
    pairs = _parse_pairs(path)
    entries: dict[str, str] = {}
    for gname, word in pairs:
        prior = entries.get(word)
        if prior is not None and prior != gname:
            raise LexiconConflictError(
                f"{path}: word {word!r} assigned to both {prior!r} and {gname!r}"
            )
        entries[word] = gname
    return FallbackLexicon(name=name or str(path), entries=entries)


def dump_group_db(lex: GroupLexicon) -> str:
    """Serialize a lexicon back to the group database format. Words are listed
    group by group in id order so a reload assigns identical ids."""
    lines = [f"# version: {lex.version}"]
    by_group: dict[int, list[str]] = {gid: [] for gid, _ in lex.groups}
    for word, gid in lex.dictionary.items():
        by_group[gid].append(word)
    for gid, gname in lex.groups:
        for word in sorted(by_group[gid]):
            lines.append(f"{gname}\t{word}")
    return "\n".join(lines) + "\n"
