"""Content-addressed artifact store: corpora and finished analysis runs as
plain files under a root directory. Ids are content hashes, so identical
inputs land at identical paths and reruns are cache hits."""

from __future__ import annotations

import hashlib
import json
import shutil
import tempfile
from pathlib import Path

from .corpus import Corpus, dumps_corpus, parse_corpus


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


class ArtifactStore:
    def __init__(self, root):
        self.root = Path(root)
        (self.root / "corpora").mkdir(parents=True, exist_ok=True)
        (self.root / "runs").mkdir(parents=True, exist_ok=True)

    # -- corpora ------------------------------------------------------------

    def put_corpus(self, text: str) -> tuple[str, Corpus, list]:
        """Parse interchange text, store its canonical serialization, and
        return (corpus_id, corpus, rejects). May raise CorpusIntegrityError."""
        corpus, rejects = parse_corpus(text)
        canonical = dumps_corpus(corpus)
        corpus_id = "c" + _digest(canonical)
        path = self.root / "corpora" / f"{corpus_id}.jsonl"
        if not path.exists():
            path.write_text(canonical, "utf-8")
            if rejects:
                rej_path = self.root / "corpora" / f"{corpus_id}.rejects"
                rej_path.write_text(
                    "".join(json.dumps({"line": r.line_no, "reason": r.reason,
                                        "raw": r.raw}, ensure_ascii=False) + "\n"
                            for r in rejects), "utf-8")
        return corpus_id, corpus, rejects

    def has_corpus(self, corpus_id: str) -> bool:
        return (self.root / "corpora" / f"{corpus_id}.jsonl").exists()

    def get_corpus(self, corpus_id: str) -> Corpus:
        text = (self.root / "corpora" / f"{corpus_id}.jsonl").read_text("utf-8")
        corpus, _ = parse_corpus(text)
        return corpus

    # -- runs ---------------------------------------------------------------

    def run_id_for(self, corpus_id: str, config_obj: dict) -> str:
        canonical = json.dumps({"corpus": corpus_id, "config": config_obj},
                               sort_keys=True)
        return "r" + _digest(canonical)

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def has_run(self, run_id: str) -> bool:
        return (self.run_dir(run_id) / "run.json").exists()

    def load_run(self, run_id: str) -> dict:
        return json.loads((self.run_dir(run_id) / "run.json").read_text("utf-8"))

    def save_run(self, run_id: str, meta: dict,
                 artifact_writer=None) -> None:
        """Write run.json (and optionally artifact files) atomically: stage
        into a temp directory, then rename into place so a run is never
        observable half-written."""
        final = self.run_dir(run_id)
        if final.exists():
            return
        tmp = Path(tempfile.mkdtemp(prefix=f".{run_id}-", dir=self.root / "runs"))
        try:
            (tmp / "run.json").write_text(
                json.dumps(meta, sort_keys=True, ensure_ascii=False, indent=1),
                "utf-8")
            if artifact_writer is not None:
                artifact_writer(tmp)
            tmp.rename(final)
        except OSError:
            if final.exists():  # concurrent writer won the rename
                shutil.rmtree(tmp, ignore_errors=True)
            else:
                shutil.rmtree(tmp, ignore_errors=True)
                raise
        except Exception:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
