#!/usr/bin/env python3
"""Regenerate data/corpus.jsonl, the 50-record demo publication base.

The base covers 1998-2006, four journals, two conferences, a thesis series
and a report series, with a mix of in-team (t-dmg) and outside authors. The
journals with team publications from 2003 on are exactly "Data Mining
Review" and "Information Filtering Letters"; the demo session's summary
panel is expected to surface those two.
"""
from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from adasearch.corpus import Document, dump_corpus, ingest_corpus

TEAM = "t-dmg"

AUTHOR_TEAMS = {
    "alice": (TEAM,),
    "bob": (TEAM,),
    "chen": (TEAM,),
    "dana": (TEAM,),
    "erik": ("t-vis",),
    "fatima": ("t-vis",),
    "goro": (),
    "hana": (),
    "ivan": (),
}

JOURNALS = (
    "Data Mining Review",
    "Journal of Decision Systems",
    "Information Filtering Letters",
    "Applied Probabilistic Methods",
)
CONFERENCES = ("KDX Conference", "Adaptive Systems Workshop")

TITLE_WORDS = (
    "adaptive", "filtering", "profiles", "retrieval", "session", "ranking",
    "probabilistic", "models", "queries", "exploration", "clustering",
    "indexing", "relevance", "observation", "preferences", "networks",
)
KEYWORD_POOL = (
    "user modelling", "retrieval", "ranking", "bayesian networks",
    "relevance", "indexing", "personalization", "session analysis",
    "query expansion", "clustering", "team publications",
    "journal special issue",
)


def _title(rng: random.Random) -> str:
    words = rng.sample(TITLE_WORDS, 4)
    return f"{words[0].capitalize()} {words[1]} for {words[2]} {words[3]}"


def _doc(rng: random.Random, n: int, authors: tuple[str, ...], venue: str,
         venue_type: str, year: int) -> Document:
    teams = sorted({team for a in authors for team in AUTHOR_TEAMS[a]})
    return Document(
        doc_id=f"d{n:03d}",
        title=_title(rng),
        authors=authors,
        venue_name=venue,
        venue_type=venue_type,
        year=year,
        keywords=tuple(rng.sample(KEYWORD_POOL, 2)),
        team_ids=tuple(teams),
    )


def build() -> list[Document]:
    rng = random.Random(20060810)
    docs: list[Document] = []
    n = 0

    def add(authors, venue, venue_type, year):
        nonlocal n
        n += 1
        docs.append(_doc(rng, n, tuple(authors), venue, venue_type, year))

    # Team journal output since 2003: Data Mining Review and Information
    # Filtering Letters only.
    add(["alice", "bob"], "Data Mining Review", "journal", 2003)
    add(["chen"], "Data Mining Review", "journal", 2004)
    add(["alice", "dana"], "Data Mining Review", "journal", 2005)
    add(["bob", "chen"], "Data Mining Review", "journal", 2006)
    add(["dana"], "Information Filtering Letters", "journal", 2004)
    add(["alice"], "Information Filtering Letters", "journal", 2006)

    # Older team journal work (outside the three-year window).
    add(["alice"], "Journal of Decision Systems", "journal", 1999)
    add(["bob"], "Journal of Decision Systems", "journal", 2001)
    add(["chen", "dana"], "Data Mining Review", "journal", 1998)
    add(["dana"], "Information Filtering Letters", "journal", 2002)

    # Journal papers without any team author, both recent and old.
    add(["erik"], "Journal of Decision Systems", "journal", 2004)
    add(["fatima", "goro"], "Applied Probabilistic Methods", "journal", 2005)
    add(["goro"], "Applied Probabilistic Methods", "journal", 2003)
    add(["hana"], "Applied Probabilistic Methods", "journal", 2000)
    add(["ivan"], "Data Mining Review", "journal", 2004)
    add(["erik", "hana"], "Information Filtering Letters", "journal", 2005)

    # Team conference output, recent and old.
    add(["alice", "chen"], "KDX Conference", "conference", 2004)
    add(["bob"], "KDX Conference", "conference", 2005)
    add(["dana", "alice"], "Adaptive Systems Workshop", "conference", 2006)
    add(["chen"], "Adaptive Systems Workshop", "conference", 2001)

    # Theses and reports.
    add(["alice"], "Nancy Thesis Series", "thesis", 2002)
    add(["erik"], "Nancy Thesis Series", "thesis", 2003)
    add(["bob"], "DMG Technical Reports", "report", 2004)
    add(["goro"], "Metz Technical Reports", "report", 1999)

    # Background fill: seeded mix across venues, authors and years.
    fill_venues = (
        [(v, "journal") for v in JOURNALS]
        + [(v, "conference") for v in CONFERENCES]
        + [("DMG Technical Reports", "report"), ("Nancy Thesis Series", "thesis")]
    )
    authors = sorted(AUTHOR_TEAMS)
    while n < 50:
        venue, venue_type = rng.choice(fill_venues)
        year = rng.randint(1998, 2006)
        group = tuple(rng.sample(authors, rng.randint(1, 3)))
        # Keep the designed journal/team/recency profile intact: fill docs in
        # journals from 2003 on never carry a team author.
        if venue_type == "journal" and year >= 2003:
            group = tuple(a for a in group if TEAM not in AUTHOR_TEAMS[a]) or ("goro",)
        add(group, venue, venue_type, year)

    return docs


def main() -> None:
    docs = build()
    ingest_corpus(docs)  # fail fast if the fixture breaks an invariant
    out = Path(__file__).resolve().parents[1] / "data" / "corpus.jsonl"
    dump_corpus(docs, out)
    in_window = sorted({
        d.venue_name for d in docs
        if d.venue_type == "journal" and d.year >= 2003 and TEAM in d.team_ids})
    print(f"wrote {len(docs)} documents to {out}")
    print(f"journals with team publications since 2003: {in_window}")


if __name__ == "__main__":
    main()
