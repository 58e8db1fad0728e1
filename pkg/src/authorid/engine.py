"""Orchestration layer shared by the CLI and the HTTP service.

Owns the serving snapshot, the lexicon, the review FIFO, and the adaptive
critic; serializes verdict application and training while classification reads
the immutable serving snapshot lock-free.
"""
from __future__ import annotations

import threading
from collections import OrderedDict

import numpy as np

from . import critic as cr
from . import lexicon as lx
from . import rbpnn
from .store import NotFoundError, Store, StoreError, TextSample


class EngineError(Exception):
    pass


class ConflictError(EngineError):
    pass


class Engine:
    def __init__(self, data_dir, seed: int = 0, fallbacks=(), batch_threshold: int = cr.BATCH_THRESHOLD):
        self.store = Store(data_dir)
        meta = self.store.read_meta()
        self.seed = meta.get("seed", seed)
        if "seed" not in meta:
            meta["seed"] = self.seed
            self.store.write_meta(meta)
        self.rng = np.random.default_rng(self.seed)
        self.fallbacks = tuple(fallbacks)
        self.batch_threshold = batch_threshold
        self.lexicon = self.store.load_lexicon()
        self.model = self.store.load_serving()
        self.critic = None
        if self.model is not None:
            self.critic = self.store.replay_verdicts(
                cr.make_critic(self.model.n_authors, seed=self.seed)
            )
        self.queue: OrderedDict[str, cr.ReviewItem] = OrderedDict()
        self.pending_verdicts: list[cr.Verdict] = []
        self.new_training: list[tuple[lx.FeatureVector, int]] = []
        self._item_counter = 0
        self._sample_counter = len(self.store.list_samples())
        self._lock = threading.RLock()
        self._train_lock = threading.Lock()

    # -- lexicon / ingestion ------------------------------------------------

    def set_lexicon(self, lex: lx.GroupLexicon) -> None:
        with self._lock:
            self.lexicon = lex
            self.store.save_lexicon(lex)

    def load_group_db(self, path) -> lx.GroupLexicon:
        lex = lx.load_group_db(path)
        self.set_lexicon(lex)
        return lex

    def _next_sample_id(self) -> str:
        self._sample_counter += 1
        return f"s{self._sample_counter:06d}"

    def ingest_text(
        self,
        raw_text: str,
        author_id: int | None = None,
        split: str = "unlabeled",
        sample_id: str | None = None,
    ) -> str:
        if not raw_text or not raw_text.strip():
            raise EngineError("empty text")
        with self._lock:
            sid = sample_id or self._next_sample_id()
            self.store.put_sample(
                TextSample(sample_id=sid, raw_text=raw_text, author_id=author_id, split=split)
            )
            # ingest may grow the lexicon through the fallbacks
            if self.lexicon is not None and self.fallbacks:
                _, grown = lx.count_groups(lx.tokenize(raw_text, sid), self.lexicon, self.fallbacks)
                if grown is not self.lexicon:
                    self.set_lexicon(grown)
            return sid

    def featurize_text(self, raw_text: str, sample_id: str = "") -> lx.FeatureVector:
        if self.lexicon is None:
            raise EngineError("no group database loaded")
        fv, _ = lx.count_groups(lx.tokenize(raw_text, sample_id), self.lexicon)
        return fv

    def _featurized_split(self, split: str):
        samples = self.store.list_samples(split)
        return [
            (self.featurize_text(s.raw_text, s.sample_id), s.author_id)
            for s in samples
        ]

    # -- training -----------------------------------------------------------

    def train_initial(self, beta: float | None = None) -> rbpnn.RBPNNModel:
        """Build and fit from the train split, evaluate on validation if present,
        and publish the snapshot."""
        with self._train_lock:
            training = self._featurized_split("train")
            if not training:
                raise EngineError("no training samples ingested")
            model = rbpnn.build_model(
                training, beta=beta, lexicon_version=self.lexicon.version
            )
            validation = self._featurized_split("validation")
            summary = {}
            if validation:
                record = rbpnn.evaluate(model, validation)
                summary = {
                    "accuracy": record.accuracy,
                    "missed_rate": record.missed_rate,
                    "false_positive_rate": record.false_positive_rate,
                }
            self.store.publish_snapshot(model, summary)
            with self._lock:
                self.model = model
                if self.critic is None:
                    self.critic = self.store.replay_verdicts(
                        cr.make_critic(model.n_authors, seed=self.seed)
                    )
            return model

    # -- classification / review --------------------------------------------

    def classify_text(self, raw_text: str, sample_id: str = ""):
        """Classify and enqueue a pending review item (the emitted output is
        judged a step later, never in the same step)."""
        if self.model is None:
            raise EngineError("no serving model; train first")
        if self.lexicon is None:
            raise EngineError("no group database loaded")
        model = self.model  # snapshot read, safe without the lock
        attribution = rbpnn.classify(model, self.lexicon, raw_text, sample_id)
        fv = self.featurize_text(raw_text, sample_id)
        with self._lock:
            self._item_counter += 1
            item_id = f"i{self._item_counter:06d}"
            item = cr.ReviewItem(item_id=item_id, attribution=attribution, feature_vector=fv)
            self.queue[item_id] = item
        return attribution, item_id

    def review_queue(self, state: str = "pending") -> list[cr.ReviewItem]:
        with self._lock:
            return [item for item in self.queue.values() if item.state == state]

    def route_item(self, item_id: str) -> str:
        with self._lock:
            if self.critic is None:
                return "ask_human"
            return cr.route(self.critic, self.rng)

    def adaptive_judge(self, item_id: str) -> cr.Verdict:
        """Let the adaptive critic judge an item without human input; steers the
        gate but does not train the critic."""
        with self._lock:
            item = self._pending_item(item_id)
            xi_hat, would_accept = cr.critic_predict(self.critic, item.attribution)
            verdict = cr.Verdict(
                item_id=item_id,
                source="adaptive",
                accepted=would_accept,
                true_author=None,
                xi=np.zeros(len(item.attribution.scores)) if would_accept else xi_hat,
            )
            item.advance("critic_judged")
            item.advance("applied")
            self.pending_verdicts.append(verdict)
            return verdict

    def _pending_item(self, item_id: str) -> cr.ReviewItem:
        item = self.queue.get(item_id)
        if item is None:
            raise NotFoundError(f"review item {item_id!r} not found")
        if item.state != "pending":
            raise ConflictError(f"review item {item_id!r} already judged ({item.state})")
        return item

    def submit_verdict(self, item_id: str, accepted: bool, true_author: int | None = None):
        """Apply a human verdict: compute xi, train the adaptive critic, log the
        verdict, and stage rejected items as corrected training samples."""
        with self._lock:
            item = self._pending_item(item_id)
            xi = cr.compute_xi(item.attribution, accepted, true_author)
            self.critic = cr.critic_learn(self.critic, item.attribution, xi)
            self.store.append_verdict(
                item_id=item_id,
                source="human",
                accepted=accepted,
                true_author=true_author,
                scores=item.attribution.scores,
                margin=item.attribution.margin,
                xi=xi,
            )
            verdict = cr.Verdict(
                item_id=item_id, source="human", accepted=accepted, true_author=true_author, xi=xi
            )
            item.advance("human_judged")
            item.advance("applied")
            self.pending_verdicts.append(verdict)
            if not accepted:
                self.new_training.append((item.feature_vector, true_author))
            return verdict, self.critic.p_human

    # -- reinforcement cycle -------------------------------------------------

    def train_cycle(self, epochs: int = 5, step: float = 0.01) -> dict:
        """Refine on verdict-corrected samples, evaluate candidate vs serving on
        the validation split, and let the gate persist or discard."""
        with self._train_lock:
            with self._lock:
                verdicts = list(self.pending_verdicts)
                new_samples = list(self.new_training)
                model = self.model
            if model is None:
                raise EngineError("no serving model; train first")
            rejected = any(not v.accepted for v in verdicts)
            if not rejected and len(new_samples) < self.batch_threshold:
                decision = cr.gate(verdicts, None, None, len(new_samples), self.batch_threshold)
                with self._lock:
                    self.pending_verdicts.clear()
                return {"decision": decision, "snapshot_id": model.snapshot_id, "candidate_id": None}
            validation = self._featurized_split("validation")
            if not validation:
                raise EngineError("no validation samples for the gate")
            candidate = rbpnn.refine(model, new_samples, epochs=epochs, step=step)
            cand_eval = rbpnn.evaluate(candidate, validation)
            serv_eval = rbpnn.evaluate(model, validation)
            decision = cr.gate(verdicts, cand_eval, serv_eval, len(new_samples), self.batch_threshold)
            if decision.persist_candidate:
                self.store.publish_snapshot(
                    candidate,
                    {
                        "accuracy": cand_eval.accuracy,
                        "missed_rate": cand_eval.missed_rate,
                        "false_positive_rate": cand_eval.false_positive_rate,
                    },
                )
                with self._lock:
                    self.model = candidate
                    self.new_training.clear()
            with self._lock:
                self.pending_verdicts.clear()
            return {
                "decision": decision,
                "snapshot_id": self.model.snapshot_id,
                "candidate_id": candidate.snapshot_id,
                "candidate_accuracy": cand_eval.accuracy,
                "serving_accuracy": serv_eval.accuracy,
            }

    # -- status ---------------------------------------------------------------

    def status(self) -> dict:
        with self._lock:
            reg = self.store.registry()
            last = reg["history"][-1] if reg["history"] else None
            return {
                "serving_snapshot_id": reg["serving_snapshot_id"],
                "n_features": self.model.n_features if self.model else None,
                "n_samples": self.model.n_samples if self.model else None,
                "n_authors": self.model.n_authors if self.model else None,
                "last_eval": last["eval"] if last else None,
                "p_human": self.critic.p_human if self.critic else None,
                "pending_items": sum(1 for i in self.queue.values() if i.state == "pending"),
                "lexicon_version": self.lexicon.version if self.lexicon else None,
            }
