import numpy as np
import pytest

from authorid.lexicon import count_groups, loads_group_db, tokenize
from authorid.rbpnn import build_model
from authorid.synthetic import make_corpus, train_validation_split


@pytest.fixture
def small_lexicon():
    return loads_group_db(
        "conflict\twar\n"
        "conflict\tbattle\n"
        "harmony\tpeace\n"
        "harmony\tcalm\n"
    )


@pytest.fixture(scope="session")
def synth():
    """Small synthetic corpus with a trained model, shared across tests."""
    db, samples = make_corpus(
        n_authors=3, n_groups=10, texts_per_author=12, tokens_per_text=120, seed=11
    )
    lex = loads_group_db(db)
    train, validation = train_validation_split(samples)
    train_feats = [(count_groups(tokenize(t), lex)[0], a) for a, t in train]
    val_feats = [(count_groups(tokenize(t), lex)[0], a) for a, t in validation]
    model = build_model(train_feats, lexicon_version=lex.version)
    return {
        "db": db,
        "samples": samples,
        "lexicon": lex,
        "train": train,
        "validation": validation,
        "train_feats": train_feats,
        "val_feats": val_feats,
        "model": model,
    }
