"""Start a seeded backend for the UI end-to-end scenario.

Builds a small synthetic corpus, trains a model, warms the adaptive critic with
70 accepted verdicts (enough for the autonomy schedule to be mid-decay), and
serves the HTTP API. Prints READY <port> once listening.

Usage: python3 seed_backend.py <port> <data_dir>
"""
import sys
import threading

import uvicorn

from authorid.engine import Engine
from authorid.lexicon import loads_group_db
from authorid.service import create_app
from authorid.synthetic import make_corpus, train_validation_split


def main() -> None:
    port = int(sys.argv[1])
    data_dir = sys.argv[2]

    db, samples = make_corpus(
        n_authors=3, n_groups=8, texts_per_author=8, tokens_per_text=100, seed=5
    )
    engine = Engine(data_dir, seed=5)
    engine.set_lexicon(loads_group_db(db))
    train, validation = train_validation_split(samples)
    for author, text in train:
        engine.ingest_text(text, author_id=author, split="train")
    for author, text in validation:
        engine.ingest_text(text, author_id=author, split="validation")
    engine.train_initial()

    texts = [text for _, text in train]
    for i in range(70):
        _, item_id = engine.classify_text(texts[i % len(texts)])
        engine.submit_verdict(item_id, accepted=True)

    app = create_app(engine)
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)

    def announce_when_listening() -> None:
        while not server.started:
            pass
        print(f"READY {port}", flush=True)

    threading.Thread(target=announce_when_listening, daemon=True).start()
    server.run()


if __name__ == "__main__":
    main()
