"""Chat corpus data model, interchange-file ingestion, and tokenization.

The interchange format is one JSON record per line (UTF-8) with the fields
post_id, group_id, player_id, role, timestamp, text — in that order.
Timestamps are ISO-8601 UTC with millisecond precision ("...T...sss Z").
Malformed lines are collected into a rejects report next to the input file
(path + ".rejects"), never silently dropped.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import CorpusIntegrityError, WindowError

ROLE_PLAYER = "player"
ROLE_DM = "dm"
ROLES = (ROLE_PLAYER, ROLE_DM)

FIELD_ORDER = ("post_id", "group_id", "player_id", "role", "timestamp", "text")

# More than this fraction of malformed lines (and at least two of them)
# makes a file untrustworthy as a corpus.
MALFORMED_FRACTION_LIMIT = 0.10

_TOKEN_SPLIT = re.compile(r"[^a-z0-9']+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on every character outside [a-z0-9'], drop tokens
    shorter than two characters. No stemming."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if len(t) >= 2]


@dataclass(frozen=True)
class TokenStream:
    post_id: str
    tokens: tuple[str, ...]


def tokenize_post(post: "Post") -> TokenStream:
    return TokenStream(post_id=post.post_id, tokens=tuple(tokenize(post.text)))


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 UTC instant, accepting a trailing 'Z'."""
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    """Format a UTC instant at millisecond precision with a 'Z' suffix."""
    dt = dt.astimezone(timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.") + f"{dt.microsecond // 1000:03d}Z"


@dataclass(frozen=True)
class Post:
    post_id: str
    group_id: str
    player_id: str
    role: str
    timestamp: datetime
    text: str

    def to_record(self) -> str:
        rec = {
            "post_id": self.post_id,
            "group_id": self.group_id,
            "player_id": self.player_id,
            "role": self.role,
            "timestamp": format_timestamp(self.timestamp),
            "text": self.text,
        }
        return json.dumps(rec, ensure_ascii=False)


@dataclass(frozen=True)
class Reject:
    line_no: int
    reason: str
    raw: str


@dataclass
class Corpus:
    posts: list[Post] = field(default_factory=list)

    @property
    def groups(self) -> list[str]:
        return sorted({p.group_id for p in self.posts})

    def by_group(self) -> dict[str, list[Post]]:
        out: dict[str, list[Post]] = {g: [] for g in self.groups}
        for p in self.posts:
            out[p.group_id].append(p)
        return out

    def restricted_to(self, group_ids) -> "Corpus":
        keep = set(group_ids)
        return Corpus([p for p in self.posts if p.group_id in keep])

    def __len__(self) -> int:
        return len(self.posts)

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self.posts == other.posts


def _parse_record(line: str) -> Post:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    missing = [k for k in FIELD_ORDER if k not in obj]
    if missing:
        raise ValueError(f"missing field(s): {', '.join(missing)}")
    unknown = [k for k in obj if k not in FIELD_ORDER]
    if unknown:
        raise ValueError(f"unknown field(s): {', '.join(sorted(unknown))}")
    role = obj["role"]
    if role not in ROLES:
        raise ValueError(f"bad role {role!r}")
    text = str(obj["text"])
    if not text.strip():
        raise ValueError("empty text")
    ts = parse_timestamp(str(obj["timestamp"]))
    return Post(
        post_id=str(obj["post_id"]),
        group_id=str(obj["group_id"]),
        player_id=str(obj["player_id"]),
        role=role,
        timestamp=ts,
        text=text,
    )


def parse_corpus(text: str) -> tuple[Corpus, list[Reject]]:
    """Parse interchange text into a Corpus plus the rejects report.

    Raises CorpusIntegrityError when more than 10% of the non-blank lines
    (and at least two of them) are malformed.
    """
    posts: list[tuple[str, datetime, int, Post]] = []
    rejects: list[Reject] = []
    seen_ids: set[str] = set()
    considered = 0
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        considered += 1
        try:
            post = _parse_record(line)
            if post.post_id in seen_ids:
                raise ValueError(f"duplicate post_id {post.post_id!r}")
            seen_ids.add(post.post_id)
        except (ValueError, json.JSONDecodeError) as exc:
            rejects.append(Reject(line_no, str(exc), line[:200]))
            continue
        posts.append((post.group_id, post.timestamp, line_no, post))
    if considered and len(rejects) >= 2 and len(rejects) / considered > MALFORMED_FRACTION_LIMIT:
        bad = [r.line_no for r in rejects]
        raise CorpusIntegrityError(
            f"{len(rejects)} of {considered} lines malformed "
            f"(> {MALFORMED_FRACTION_LIMIT:.0%}); lines: {bad}",
            bad_lines=bad,
        )
    posts.sort(key=lambda item: (item[0], item[1], item[2]))
    return Corpus([p for _, _, _, p in posts]), rejects


def dumps_corpus(corpus: Corpus) -> str:
    return "".join(p.to_record() + "\n" for p in corpus.posts)


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_corpus(corpus))


def load_corpus(path) -> Corpus:
    """Load an interchange file; write the rejects report to path + ".rejects"."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    corpus, rejects = parse_corpus(text)
    if rejects:
        with open(str(path) + ".rejects", "w", encoding="utf-8") as fh:
            for r in rejects:
                fh.write(json.dumps(
                    {"line": r.line_no, "reason": r.reason, "raw": r.raw},
                    ensure_ascii=False) + "\n")
    return corpus


def gameplay_window(corpus: Corpus, markers: dict[str, tuple[str, str]]) -> Corpus:
    """Trim each group to the inclusive [start, end] timestamps of its marker posts.

    `markers` maps group_id -> (start_post_id, end_post_id). Groups without an
    entry pass through untouched. A marker id that does not exist within its
    group raises WindowError naming the group.
    """
    by_id: dict[str, Post] = {p.post_id: p for p in corpus.posts}
    bounds: dict[str, tuple[datetime, datetime]] = {}
    for group_id, (start_id, end_id) in markers.items():
        pair = []
        for which, pid in (("start", start_id), ("end", end_id)):
            post = by_id.get(pid)
            if post is None or post.group_id != group_id:
                raise WindowError(
                    f"{which} marker {pid!r} not found in group {group_id!r}")
            pair.append(post.timestamp)
        bounds[group_id] = (pair[0], pair[1])
    kept = []
    for p in corpus.posts:
        if p.group_id in bounds:
            lo, hi = bounds[p.group_id]
            if not (lo <= p.timestamp <= hi):
                continue
        kept.append(p)
    return Corpus(kept)
