"""Stop-word lists: shipped base English words, domain terms (configured
extras plus generated-nonsense tokens), and per-player self-identification
terms induced from the corpus."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

from .corpus import Corpus, ROLE_PLAYER, tokenize
from .errors import PipelineError

# A token this long and digit-heavy is machine-generated noise (ids, GUID
# fragments), not vocabulary.
_GENERATED_RE = re.compile(r"^[a-z0-9]{16,}$")
_DIGITS_RE = re.compile(r"[0-9]")


def looks_generated(token: str) -> bool:
    return bool(_GENERATED_RE.match(token)) and len(_DIGITS_RE.findall(token)) >= 4


def load_base_list(path=None) -> frozenset[str]:
    """Load the base English stop words; the shipped list when path is None."""
    if path is None:
        text = resources.files("beliefmap.data").joinpath("stopwords_en.txt").read_text("utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


@dataclass
class StopWordList:
    base: frozenset[str] = frozenset()
    domain: frozenset[str] = frozenset()
    self_id: dict[str, frozenset[str]] = field(default_factory=dict)

    @property
    def combined(self) -> frozenset[str]:
        out = set(self.base) | set(self.domain)
        for terms in self.self_id.values():
            out |= terms
        return frozenset(out)

    def __eq__(self, other) -> bool:
        return (isinstance(other, StopWordList)
                and self.base == other.base
                and self.domain == other.domain
                and self.self_id == other.self_id)

    def dumps(self) -> str:
        lines = ["# base"]
        lines.extend(sorted(self.base))
        lines.append("# domain")
        lines.extend(sorted(self.domain))
        for player in sorted(self.self_id):
            lines.append(f"# self_id:{player}")
            lines.extend(sorted(self.self_id[player]))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "StopWordList":
        base: set[str] = set()
        domain: set[str] = set()
        self_id: dict[str, set[str]] = {}
        current: set[str] | None = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                section = line[1:].strip()
                if section == "base":
                    current = base
                elif section == "domain":
                    current = domain
                elif section.startswith("self_id:"):
                    player = section.split(":", 1)[1]
                    current = self_id.setdefault(player, set())
                else:
                    raise PipelineError(f"unknown stop-word section {section!r}")
            else:
                if current is None:
                    raise PipelineError("stop-word file must start with a section header")
                current.add(line)
        return cls(base=frozenset(base), domain=frozenset(domain),
                   self_id={p: frozenset(t) for p, t in self_id.items()})

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "StopWordList":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())


def induce_stopwords(corpus: Corpus, base: frozenset[str],
                     ratio_threshold: float = 5.0, min_count: int = 10,
                     extra: tuple[str, ...] = (), include_dm: bool = False,
                     ) -> StopWordList:
    """Flag each player's disproportionately frequent terms.

    A term t is flagged for player p iff the player used it at least
    min_count times and relfreq_p(t) / relfreq_corpus(t) >= ratio_threshold,
    where relfreq divides the count by the player's (resp. corpus's) total
    token count. Generated-nonsense tokens land in the domain set alongside
    the configured extras.
    """
    if not corpus.posts:
        raise PipelineError("cannot induce stop words from an empty corpus")
    per_player: dict[str, Counter] = {}
    corpus_counts: Counter = Counter()
    domain: set[str] = set(extra)
    for post in corpus.posts:
        tokens = tokenize(post.text)
        for tok in tokens:
            if looks_generated(tok):
                domain.add(tok)
        if post.role != ROLE_PLAYER and not include_dm:
            continue
        per_player.setdefault(post.player_id, Counter()).update(tokens)
        corpus_counts.update(tokens)

    corpus_total = sum(corpus_counts.values())
    self_id: dict[str, frozenset[str]] = {}
    for player, counts in sorted(per_player.items()):
        player_total = sum(counts.values())
        if player_total == 0 or corpus_total == 0:
            continue
        flagged = set()
        for term, n in counts.items():
            if n < min_count:
                continue
            rel_p = n / player_total
            rel_c = corpus_counts[term] / corpus_total
            if rel_c > 0 and rel_p / rel_c >= ratio_threshold:
                flagged.add(term)
        if flagged:
            self_id[player] = frozenset(flagged)
    return StopWordList(base=base, domain=frozenset(domain), self_id=self_id)
