import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from beliefmap.corpus import Corpus, Post, ROLE_DM, ROLE_PLAYER
from beliefmap.synth import generate_synthetic_corpus, paper_shaped_spec

T0 = datetime(2025, 3, 1, 12, 0, 0, tzinfo=timezone.utc)


def make_post(post_id, group="g1", player="p1", role=ROLE_PLAYER,
              minute=0, text="hello there"):
    return Post(post_id=post_id, group_id=group, player_id=player, role=role,
                timestamp=T0 + timedelta(minutes=minute), text=text)


@pytest.fixture
def tiny_corpus():
    """Two groups, one dm marker each, a handful of player posts."""
    marker = " ".join(f"landmark{i:02d}" for i in range(60))
    posts = [
        make_post("a1", group="g1", player="g1dm", role=ROLE_DM, minute=0, text=marker),
        make_post("a2", group="g1", player="p1", minute=1, text="goblin attacks the camp"),
        make_post("a3", group="g1", player="p2", minute=2, text="rope and torch ready"),
        make_post("b1", group="g2", player="g2dm", role=ROLE_DM, minute=0, text=marker),
        make_post("b2", group="g2", player="p3", minute=1, text="goblin runs away fast"),
        make_post("b3", group="g2", player="p4", minute=2, text="chest under the stairs"),
    ]
    return Corpus(sorted(posts, key=lambda p: (p.group_id, p.timestamp, p.post_id)))


@pytest.fixture(scope="session")
def paper_spec():
    return paper_shaped_spec(posts_per_room=125)


@pytest.fixture(scope="session")
def paper_corpus(paper_spec):
    return generate_synthetic_corpus(paper_spec, seed=11)
