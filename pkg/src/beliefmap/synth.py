"""Synthetic multi-group chat corpus generator with planted vocabulary.

Every group walks the same sequence of rooms: the room's marker text is
posted verbatim by the dm, followed by player posts whose tokens are drawn
by deterministic quota from four planted pools (room place terms shared by
all groups, group-specific space terms, common chatter, cross-seeded foreign
space terms) plus cycled filler noise. Quota construction guarantees the
planted place terms dominate pooled per-sequence counts and the planted
space terms dominate per-group counts after place exclusion, so generated
corpora double as ground truth for the analysis pipeline.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

import numpy as np

from .corpus import Corpus, Post, ROLE_DM, ROLE_PLAYER, tokenize
from .errors import SynthSpecError

_BASE_TIME = datetime(2025, 2, 1, 17, 0, 0, tzinfo=timezone.utc)
_POST_SPACING = timedelta(seconds=11)

# Chatter used by every group in every room; fills the pooled ranks right
# below the place terms so group-specific space terms stay out of the
# cross-group exclusion list.
DEFAULT_COMMON_TERMS = (
    "check", "roll", "move", "look", "wait", "plan", "ready", "torch",
    "door", "path", "turn", "next", "careful", "quick", "try", "help",
    "watch", "back", "front", "left", "right", "stay", "team", "quiet",
)


@dataclass(frozen=True)
class RoomSpec:
    marker_text: str
    place_terms: tuple[str, ...]
    place_weights: tuple[float, ...] | None = None


@dataclass
class SyntheticSpec:
    rooms: list[RoomSpec]
    space_terms: dict[str, tuple[str, ...]]
    players_per_group: int = 4
    posts_per_room: int = 125
    tokens_min: int = 16
    tokens_max: int = 24
    place_share: float = 0.24
    space_share: float = 0.18
    cross_share: float = 0.04
    noise_share: float = 0.10
    place_jitter: float = 0.0
    common_terms: tuple[str, ...] = DEFAULT_COMMON_TERMS
    filler_vocab_size: int = 400
    flavor_posts_per_room: int = 0
    min_marker_tokens: int = 50

    @property
    def group_ids(self) -> list[str]:
        return sorted(self.space_terms)

    def planted_place_triple(self, room_index: int) -> tuple[str, ...]:
        return tuple(self.rooms[room_index].place_terms[:3])

    def planted_space_triple(self, group_id: str) -> tuple[str, ...]:
        return tuple(self.space_terms[group_id][:3])

    def validate(self) -> None:
        if not self.rooms:
            raise SynthSpecError("spec needs at least one room")
        if not self.space_terms:
            raise SynthSpecError("spec needs at least one group")
        if self.players_per_group < 1:
            raise SynthSpecError("players_per_group must be >= 1")
        if self.posts_per_room < 0:
            raise SynthSpecError("posts_per_room must be >= 0")
        if not (2 <= self.tokens_min <= self.tokens_max):
            raise SynthSpecError("token count range must satisfy 2 <= min <= max")
        shares = (self.place_share, self.space_share, self.cross_share,
                  self.noise_share)
        if any(s < 0 for s in shares):
            raise SynthSpecError("token shares must be non-negative")
        if sum(shares) > 1.0 + 1e-9:
            raise SynthSpecError(
                f"token shares sum to {sum(shares):.3f}; must be at most 1")
        if not (0.0 <= self.place_jitter < 1.0):
            raise SynthSpecError("place_jitter must be in [0, 1)")
        planted: set[str] = set()
        for room in self.rooms:
            if not room.place_terms:
                raise SynthSpecError("every room needs place terms")
            if room.place_weights is not None and (
                    len(room.place_weights) != len(room.place_terms)
                    or any(w <= 0 for w in room.place_weights)):
                raise SynthSpecError("place_weights must be positive, one per term")
            if self.posts_per_room > 0 and len(tokenize(room.marker_text)) < self.min_marker_tokens:
                raise SynthSpecError(
                    f"marker text has fewer than {self.min_marker_tokens} tokens")
            planted.update(room.place_terms)
        for gid, terms in self.space_terms.items():
            if len(terms) < 1:
                raise SynthSpecError(f"group {gid!r} needs space terms")
            overlap = planted.intersection(terms)
            if overlap:
                raise SynthSpecError(
                    f"space terms of {gid!r} collide with place terms: {sorted(overlap)}")
        planted.update(t for terms in self.space_terms.values() for t in terms)
        overlap = planted.intersection(self.common_terms)
        if overlap:
            raise SynthSpecError(f"common terms collide with planted terms: {sorted(overlap)}")

    def to_json(self) -> str:
        data = {
            "rooms": [
                {
                    "marker_text": r.marker_text,
                    "place_terms": list(r.place_terms),
                    **({"place_weights": list(r.place_weights)}
                       if r.place_weights is not None else {}),
                }
                for r in self.rooms
            ],
            "space_terms": {g: list(t) for g, t in sorted(self.space_terms.items())},
            "players_per_group": self.players_per_group,
            "posts_per_room": self.posts_per_room,
            "tokens_min": self.tokens_min,
            "tokens_max": self.tokens_max,
            "place_share": self.place_share,
            "space_share": self.space_share,
            "cross_share": self.cross_share,
            "noise_share": self.noise_share,
            "place_jitter": self.place_jitter,
            "common_terms": list(self.common_terms),
            "filler_vocab_size": self.filler_vocab_size,
            "flavor_posts_per_room": self.flavor_posts_per_room,
            "min_marker_tokens": self.min_marker_tokens,
        }
        return json.dumps(data, indent=2, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "SyntheticSpec":
        data = json.loads(text)
        rooms = [
            RoomSpec(
                marker_text=r["marker_text"],
                place_terms=tuple(r["place_terms"]),
                place_weights=tuple(r["place_weights"]) if "place_weights" in r else None,
            )
            for r in data["rooms"]
        ]
        kwargs = {k: v for k, v in data.items() if k not in ("rooms", "space_terms", "common_terms")}
        spec = cls(
            rooms=rooms,
            space_terms={g: tuple(t) for g, t in data["space_terms"].items()},
            common_terms=tuple(data.get("common_terms", DEFAULT_COMMON_TERMS)),
            **kwargs,
        )
        return spec


class _WeightedDispenser:
    """Deal items proportionally to weights with bounded (+-1) error: a
    fractional credit accumulates per slot and whole items are taken from
    the largest credits first."""

    def __init__(self, weights: list[float]):
        total = sum(weights)
        self.shares = [w / total for w in weights]
        self.credit = [0.0] * len(weights)

    def take(self, n: int) -> list[int]:
        if n <= 0:
            return [0] * len(self.shares)
        for i, share in enumerate(self.shares):
            self.credit[i] += n * share
        counts = [int(c) for c in self.credit]
        short = n - sum(counts)
        order = sorted(range(len(self.credit)),
                       key=lambda i: (-(self.credit[i] - counts[i]), i))
        for i in order[:short]:
            counts[i] += 1
        for i, c in enumerate(counts):
            self.credit[i] -= c
        return counts


def generate_synthetic_corpus(spec: SyntheticSpec, seed: int = 0) -> Corpus:
    """Deterministically generate the corpus for `spec` (same seed, same bytes)."""
    spec.validate()
    rng = np.random.default_rng(seed)
    groups = spec.group_ids
    filler_vocab = [f"nz{i:03d}" for i in range(spec.filler_vocab_size)]

    posts: list[Post] = []
    for g_idx, gid in enumerate(groups):
        t = _BASE_TIME + timedelta(days=g_idx)
        counter = itertools.count()
        players = [f"{gid}p{i + 1}" for i in range(spec.players_per_group)]
        player_cycle = itertools.cycle(players)

        shuffled_filler = list(filler_vocab)
        rng.shuffle(shuffled_filler)
        filler_cycle = itertools.cycle(shuffled_filler)
        common_cycle = itertools.cycle(spec.common_terms)
        space_cycle = itertools.cycle(spec.space_terms[gid])
        foreign_terms = [t2 for g2 in groups if g2 != gid
                         for t2 in spec.space_terms[g2]]
        cross_cycle = itertools.cycle(foreign_terms) if foreign_terms else None

        def emit(player_id, role, text, when):
            posts.append(Post(
                post_id=f"{gid}-{next(counter):05d}",
                group_id=gid, player_id=player_id, role=role,
                timestamp=when, text=text,
            ))

        for r_idx, room in enumerate(spec.rooms):
            emit(f"{gid}dm", ROLE_DM, room.marker_text, t)
            t += _POST_SPACING

            weights = list(room.place_weights or [1.0] * len(room.place_terms))
            if spec.place_jitter > 0:
                jitter = rng.uniform(1.0 - spec.place_jitter,
                                     1.0 + spec.place_jitter, size=len(weights))
                weights = [w * j for w, j in zip(weights, jitter)]
            place_dispenser = _WeightedDispenser(weights)

            flavor_slots = set()
            if spec.flavor_posts_per_room > 0 and spec.posts_per_room > 0:
                step = max(1, spec.posts_per_room // (spec.flavor_posts_per_room + 1))
                flavor_slots = {step * (k + 1) for k in range(spec.flavor_posts_per_room)}

            for p_idx in range(spec.posts_per_room):
                if p_idx in flavor_slots:
                    junk = " ".join(
                        f"fl{g_idx}x{r_idx}x{p_idx}x{j:02d}"
                        for j in range(spec.min_marker_tokens + 5))
                    emit(f"{gid}dm", ROLE_DM, junk, t)
                    t += _POST_SPACING
                length = int(rng.integers(spec.tokens_min, spec.tokens_max + 1))
                n_place = round(length * spec.place_share)
                n_space = round(length * spec.space_share)
                n_cross = round(length * spec.cross_share) if cross_cycle else 0
                n_noise = round(length * spec.noise_share)
                n_common = max(0, length - n_place - n_space - n_cross - n_noise)

                tokens: list[str] = []
                for term, count in zip(room.place_terms,
                                       place_dispenser.take(n_place)):
                    tokens.extend([term] * count)
                tokens.extend(next(space_cycle) for _ in range(n_space))
                if cross_cycle:
                    tokens.extend(next(cross_cycle) for _ in range(n_cross))
                tokens.extend(next(filler_cycle) for _ in range(n_noise))
                tokens.extend(next(common_cycle) for _ in range(n_common))
                rng.shuffle(tokens)
                emit(next(player_cycle), ROLE_PLAYER, " ".join(tokens), t)
                t += _POST_SPACING

    posts.sort(key=lambda p: (p.group_id, p.timestamp, p.post_id))
    return Corpus(posts)


_ROOM_INTROS = (
    "You push past the toppled statue into a broad antechamber where pale "
    "light drips through a cracked dome far overhead. Carved archways ring "
    "the chamber, each choked with brittle vines that rasp against the "
    "stone when the air stirs. Dust lies thick over a mosaic floor, broken "
    "only by a trail of small footprints weaving between the pillars toward "
    "a half-open bronze door on the far wall, and something skitters away "
    "from your lantern beam as you enter.",
    "The corridor ends abruptly at a yawning pit that swallows the lamplight "
    "whole. A single warped plank spans the gap, groaning under its own "
    "weight, and a rusted lever juts from a slot in the near wall beside a "
    "tangle of frayed rope. Across the pit you can make out a raised "
    "portcullis and a winch drum wrapped in chain, while a faint draft "
    "carries up the smell of stagnant water and old rot from somewhere far "
    "below your feet.",
    "Beyond the portcullis sprawls a cavern bisected by a rushing black "
    "stream, crossed by a squat bridge of mortared river stones. A crude "
    "signpost leans at its foot, its letters scraped deep: pay the toll. "
    "Bones and bent coins litter the near bank in tidy sorted heaps, and a "
    "heavy chain as thick as your arm runs from an iron ring on the bridge "
    "down into the dark water, twitching now and then as if something on "
    "the other end were breathing.",
    "The final vault blazes with reflected candlelight, every surface "
    "mounded with tarnished coins, cracked gems, and gilded armor stacked "
    "like firewood. Atop the hoard coils an enormous dragon, scales the "
    "color of verdigris, one golden eye already open and tracking your "
    "torches. Behind it a barred gate of white metal glimmers in the far "
    "wall, and the dragon's voice rolls across the treasure like distant "
    "thunder as it offers you a single game.",
)

_PAPER_SHAPED_PLACES = (
    ("statue", "archway", "vines"),
    ("pit", "lever", "plank"),
    ("bridge", "toll", "chain"),
    ("dragon", "hoard", "gate"),
)

_PAPER_SHAPED_SPACES = {
    "group1": ("arrow", "bow", "aim"),
    "group2": ("spell", "mana", "focus"),
    "group3": ("sneak", "shadow", "lockpick"),
    "group4": ("axe", "shield", "charge"),
    "group5": ("prayer", "heal", "ward"),
}


def paper_shaped_spec(groups: int = 5, posts_per_room: int = 125,
                      noise_share: float = 0.10, place_jitter: float = 0.0,
                      flavor_posts_per_room: int = 0) -> SyntheticSpec:
    """Five groups by four rooms by default, a dungeon-crawl-shaped corpus:
    each group sees the same four room intros in order with planted per-room
    and per-group vocabulary."""
    if not (1 <= groups <= len(_PAPER_SHAPED_SPACES)):
        raise SynthSpecError(f"groups must be in [1, {len(_PAPER_SHAPED_SPACES)}]")
    gids = sorted(_PAPER_SHAPED_SPACES)[:groups]
    # Graded weights keep the planted triple ordered in the recovered lists
    # while the lightest term still clears every group's space-term counts.
    rooms = [RoomSpec(marker_text=intro, place_terms=terms,
                      place_weights=(1.15, 1.0, 0.85))
             for intro, terms in zip(_ROOM_INTROS, _PAPER_SHAPED_PLACES)]
    return SyntheticSpec(
        rooms=rooms,
        space_terms={g: _PAPER_SHAPED_SPACES[g] for g in gids},
        posts_per_room=posts_per_room,
        noise_share=noise_share,
        place_jitter=place_jitter,
        flavor_posts_per_room=flavor_posts_per_room,
    )
