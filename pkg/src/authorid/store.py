"""File-backed persistence: samples, lexicon, model snapshots, verdict log.

Single-directory layout (desk-scale corpora need no database):

    root/
      meta.json            seeds and counters
      groups.tsv           current group database
      samples/<id>.txt     raw text
      samples/<id>.json    sidecar metadata
      samples.idx          insertion-ordered sample ids
      snapshots/<id>.npz   model snapshots
      registry.json        serving snapshot id + history
      verdicts.log         append-only JSONL verdict records

Writers use write-to-temp plus atomic rename, so readers never observe a
partially written snapshot or registry.
"""
from __future__ import annotations

import io
import json
import os
import datetime
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lexicon as lx
from .critic import AdaptiveCritic, critic_learn
from .neural import BandwidthSchedule, KernelSpec
from .rbpnn import Attribution, RBPNNModel, _with_id

SPLITS = ("train", "validation", "unlabeled")


class StoreError(Exception):
    pass


class NotFoundError(StoreError):
    pass


class DuplicateError(StoreError):
    pass


class ReplayError(StoreError):
    pass


@dataclass
class TextSample:
    sample_id: str
    raw_text: str
    author_id: int | None = None
    split: str = "unlabeled"

    def __post_init__(self):
        if self.split not in SPLITS:
            raise StoreError(f"unknown split {self.split!r}")
        if self.split in ("train", "validation") and self.author_id is None:
            raise StoreError(f"split {self.split!r} requires an author_id")


def _utcnow() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def model_to_bytes(model: RBPNNModel) -> bytes:
    buf = io.BytesIO()
    meta = {
        "beta": model.beta,
        "kernel_kind": model.kernel.kind,
        "kernel_spread": model.kernel.spread,
        "kernel_dimension": model.kernel.dimension,
        "schedule_c": model.kernel.schedule.c,
        "schedule_alpha": model.kernel.schedule.alpha,
        "lexicon_version": model.lexicon_version,
        "snapshot_id": model.snapshot_id,
    }
    np.savez(
        buf,
        centroids=model.centroids,
        summation_weights=model.summation_weights,
        selector_weights=model.selector_weights,
        train_features=model.train_features,
        train_labels=model.train_labels,
        meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8),
    )
    return buf.getvalue()


def model_from_bytes(data: bytes) -> RBPNNModel:
    with np.load(io.BytesIO(data)) as z:
        meta = json.loads(bytes(z["meta"]).decode())
        kernel = KernelSpec(
            kind=meta["kernel_kind"],
            spread=meta["kernel_spread"],
            dimension=meta["kernel_dimension"],
            schedule=BandwidthSchedule(meta["schedule_c"], meta["schedule_alpha"]),
        )
        centroids = z["centroids"]
        model = RBPNNModel(
            n_features=centroids.shape[1],
            n_samples=centroids.shape[0],
            n_authors=z["summation_weights"].shape[1],
            centroids=centroids,
            beta=meta["beta"],
            summation_weights=z["summation_weights"],
            selector_weights=z["selector_weights"],
            kernel=kernel,
            train_features=z["train_features"],
            train_labels=z["train_labels"],
            lexicon_version=meta["lexicon_version"],
            snapshot_id=meta["snapshot_id"],
        )
    recomputed = _with_id(model)
    if recomputed.snapshot_id != model.snapshot_id:
        raise StoreError(
            f"snapshot content hash mismatch: {model.snapshot_id} vs {recomputed.snapshot_id}"
        )
    return model


def save_model_file(model: RBPNNModel, path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(model_to_bytes(model))
    os.replace(tmp, path)


def load_model_file(path) -> RBPNNModel:
    return model_from_bytes(Path(path).read_bytes())


class Store:
    def __init__(self, root):
        self.root = Path(root)
        self.samples_dir = self.root / "samples"
        self.snapshots_dir = self.root / "snapshots"
        self.samples_dir.mkdir(parents=True, exist_ok=True)
        self.snapshots_dir.mkdir(parents=True, exist_ok=True)
        self.registry_path = self.root / "registry.json"
        self.verdicts_path = self.root / "verdicts.log"
        self.index_path = self.root / "samples.idx"
        self.groups_path = self.root / "groups.tsv"
        self.meta_path = self.root / "meta.json"
        self._log_seq = None
        self._logged_items: set[str] = set()

    # -- low-level ---------------------------------------------------------

    def _atomic_write(self, path: Path, data: str | bytes) -> None:
        tmp = path.with_suffix(path.suffix + ".tmp")
        if isinstance(data, str):
            tmp.write_text(data, encoding="utf-8")
        else:
            tmp.write_bytes(data)
        os.replace(tmp, path)

    def read_meta(self) -> dict:
        if self.meta_path.exists():
            return json.loads(self.meta_path.read_text())
        return {}

    def write_meta(self, meta: dict) -> None:
        self._atomic_write(self.meta_path, json.dumps(meta, sort_keys=True, indent=2))

    # -- samples -----------------------------------------------------------

    def put_sample(self, sample: TextSample) -> None:
        txt = self.samples_dir / f"{sample.sample_id}.txt"
        if txt.exists():
            raise DuplicateError(f"sample {sample.sample_id!r} already stored")
        sidecar = {
            "sample_id": sample.sample_id,
            "author_id": sample.author_id,
            "split": sample.split,
            "created_at": _utcnow(),
        }
        self._atomic_write(txt, sample.raw_text)
        self._atomic_write(
            self.samples_dir / f"{sample.sample_id}.json",
            json.dumps(sidecar, sort_keys=True),
        )
        with open(self.index_path, "a", encoding="utf-8") as fh:
            fh.write(sample.sample_id + "\n")

    def get_sample(self, sample_id: str) -> TextSample:
        txt = self.samples_dir / f"{sample_id}.txt"
        if not txt.exists():
            raise NotFoundError(f"sample {sample_id!r} not found")
        meta = json.loads((self.samples_dir / f"{sample_id}.json").read_text())
        return TextSample(
            sample_id=sample_id,
            raw_text=txt.read_text(encoding="utf-8"),
            author_id=meta["author_id"],
            split=meta["split"],
        )

    def list_samples(self, split: str | None = None) -> list[TextSample]:
        if not self.index_path.exists():
            return []
        ids = self.index_path.read_text().split()
        samples = [self.get_sample(sid) for sid in ids]
        if split is not None:
            samples = [s for s in samples if s.split == split]
        return samples

    # -- lexicon -----------------------------------------------------------

    def save_lexicon(self, lex: lx.GroupLexicon) -> None:
        self._atomic_write(self.groups_path, lx.dump_group_db(lex))
        meta = self.read_meta()
        meta["lexicon_version"] = lex.version
        self.write_meta(meta)

    def load_lexicon(self) -> lx.GroupLexicon | None:
        if not self.groups_path.exists():
            return None
        lex = lx.load_group_db(self.groups_path)
        version = self.read_meta().get("lexicon_version")
        if version is not None:
            lex.version = version
        return lex

    # -- snapshots ---------------------------------------------------------

    def registry(self) -> dict:
        if self.registry_path.exists():
            return json.loads(self.registry_path.read_text())
        return {"serving_snapshot_id": None, "history": []}

    def serving_snapshot_id(self) -> str | None:
        return self.registry()["serving_snapshot_id"]

    def publish_snapshot(self, model: RBPNNModel, eval_summary: dict | None = None) -> str:
        """Write the snapshot file, then atomically repoint the registry. A
        failure before the final rename leaves the previous serving snapshot
        intact."""
        path = self.snapshots_dir / f"{model.snapshot_id}.npz"
        self._atomic_write(path, model_to_bytes(model))
        reg = self.registry()
        reg["history"].append(
            {
                "snapshot_id": model.snapshot_id,
                "created_at": _utcnow(),
                "eval": eval_summary or {},
                "lexicon_version": model.lexicon_version,
            }
        )
        reg["serving_snapshot_id"] = model.snapshot_id
        self._atomic_write(self.registry_path, json.dumps(reg, sort_keys=True, indent=2))
        return model.snapshot_id

    def load_snapshot(self, snapshot_id: str) -> RBPNNModel:
        path = self.snapshots_dir / f"{snapshot_id}.npz"
        if not path.exists():
            raise NotFoundError(f"snapshot {snapshot_id!r} not found")
        return model_from_bytes(path.read_bytes())

    def load_serving(self) -> RBPNNModel | None:
        sid = self.serving_snapshot_id()
        return self.load_snapshot(sid) if sid else None

    # -- verdict log -------------------------------------------------------

    def _load_log_state(self) -> None:
        if getattr(self, "_log_seq", None) is not None:
            return
        self._log_seq = 0
        self._logged_items = set()
        for rec in self.iter_verdicts():
            self._log_seq = rec["seq"]
            self._logged_items.add(rec["item_id"])

    def append_verdict(
        self,
        item_id: str,
        source: str,
        accepted: bool,
        true_author: int | None,
        scores,
        margin: float,
        xi,
    ) -> int:
        self._load_log_state()
        if item_id in self._logged_items:
            raise DuplicateError(f"verdict for item {item_id!r} already logged")
        seq = self._log_seq + 1
        record = {
            "seq": seq,
            "item_id": item_id,
            "source": source,
            "accepted": bool(accepted),
            "true_author": None if true_author is None else int(true_author),
            "scores": [float(v) for v in scores],
            "margin": float(margin),
            "xi": [float(v) for v in xi],
        }
        with open(self.verdicts_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._log_seq = seq
        self._logged_items.add(item_id)
        return seq

    def iter_verdicts(self):
        if not self.verdicts_path.exists():
            return
        with open(self.verdicts_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def replay_verdicts(self, critic: AdaptiveCritic) -> AdaptiveCritic:
        """Rebuild the adaptive critic by re-applying every logged human verdict
        in order. Deterministic: identical log + identical fresh critic give
        bit-identical weights."""
        expected = 1
        for rec in self.iter_verdicts():
            if rec["seq"] != expected:
                raise ReplayError(f"verdict log out of order: expected seq {expected}, got {rec['seq']}")
            expected += 1
            if rec["source"] != "human":
                continue
            scores = np.asarray(rec["scores"], dtype=float)
            attribution = Attribution(
                sample_id=rec["item_id"],
                scores=scores,
                selected_author=int(np.argmax(scores)),
                margin=rec["margin"],
            )
            critic = critic_learn(critic, attribution, np.asarray(rec["xi"], dtype=float))
        return critic
