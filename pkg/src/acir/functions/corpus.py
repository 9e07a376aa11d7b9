"""Module for ranking a corpus of sources against a query.

Every source is scored independently, in worker processes when more
than one job is requested, and the sources are sorted by increasing
score, unmatched sources last and ties by identifier. A failure while
scoring a source never aborts the ranking: the source is reported with
an infinite score and the error.

This file can also be imported as a module and contains the following
functions:

    * load_corpus - parse all '.acir' files of a folder, collecting the
    files that fail.

    * evaluate_source - score a single source, catching its errors.

    * rank - score and sort a corpus.

"""

from __future__ import annotations

import json
import logging
import math
import multiprocessing
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import pandas as pd
from tqdm import tqdm

from acir.functions.core_types import AcirError, Query, Source
from acir.functions.dsl_parser import read_source
from acir.functions.matcher import find_match

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RankConfig:
    """Settings of a ranking run.

    'max_budget' caps the search of every source (None searches the
    whole space); 'jobs' is the number of worker processes.
    """

    max_budget: Optional[int] = None
    jobs: int = 1

    def __post_init__(self):
        if self.max_budget is not None and (
            not isinstance(self.max_budget, int) or self.max_budget < 0
        ):
            raise TypeError("'max_budget' should be a non-negative integer.")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise TypeError("'jobs' should be a positive integer.")


@dataclass(frozen=True)
class LoadFailure:
    path: str
    error: str
    message: str


@dataclass(frozen=True)
class RankedEntry:
    id: str
    score: Union[int, float]
    matched: bool
    witness: Optional[dict] = None
    elapsed_ms: float = 0.0
    error: Optional[str] = None
    capped: bool = False

    def sort_key(self):
        return (math.isinf(self.score), 0 if math.isinf(self.score) else self.score, self.id)

    def outcome(self) -> tuple:
        """The entry without its timing."""
        return (self.id, self.score, self.matched, self.witness, self.error)


def _dump_score(score):
    return "inf" if math.isinf(score) else score


def _load_score(value):
    return math.inf if value == "inf" else value


@dataclass(frozen=True)
class RankedList:
    """Sorted scores of a corpus for a query."""

    query: Query
    entries: Tuple[RankedEntry, ...]
    config: RankConfig = field(default_factory=RankConfig)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> List[str]:
        return [entry.id for entry in self.entries]

    def outcomes(self) -> List[tuple]:
        return [entry.outcome() for entry in self.entries]

    def to_json(self) -> str:
        results = []
        for entry in self.entries:
            item = asdict(entry)
            item["score"] = _dump_score(entry.score)
            results.append(item)
        document = {
            "query": self.query.fluent,
            "config": asdict(self.config),
            "results": results,
        }
        return json.dumps(document, indent=2, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "RankedList":
        document = json.loads(text)
        entries = []
        for item in document["results"]:
            item = dict(item)
            item["score"] = _load_score(item["score"])
            entries.append(RankedEntry(**item))
        return cls(
            Query(document["query"]),
            tuple(entries),
            RankConfig(**document["config"]),
        )

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for position, entry in enumerate(self.entries, start=1):
            rows.append(
                {
                    "rank": position,
                    "id": entry.id,
                    "score": float(entry.score),
                    "matched": entry.matched,
                    "elapsed_ms": entry.elapsed_ms,
                    "error": entry.error or "",
                }
            )
        columns = ["rank", "id", "score", "matched", "elapsed_ms", "error"]
        return pd.DataFrame(rows, columns=columns)

    def format_table(self) -> str:
        frame = self.to_frame()
        if frame.empty:
            return f"query: {self.query.fluent}\n(no sources)\n"
        frame["score"] = [
            "∞" if math.isinf(s) else str(int(s)) for s in frame["score"]
        ]
        frame["elapsed_ms"] = frame["elapsed_ms"].round(1)
        table = frame.to_string(index=False)
        return f"query: {self.query.fluent}\n{table}\n"


def load_corpus(
    path: Union[str, os.PathLike]
) -> Tuple[List[Source], List[LoadFailure]]:
    """Parse all '.acir' files of a folder.

    Parameters
    ----------
    path : str or os.PathLike
        Folder with the sources.

    Returns
    -------
    Tuple[List[Source], List[LoadFailure]]
        The parsed sources sorted by identifier, and one failure per file
        that could not be read or parsed.

    Raises
    ------
    NotADirectoryError
        The path is not a folder.
    """
    folder = Path(path)
    if not folder.is_dir():
        raise NotADirectoryError(f"'{folder}' is not a folder.")

    files = sorted(folder.glob("*.acir"))
    if not files:
        logger.warning("No '.acir' files found in %s", folder)

    sources, failures = [], []
    for file in files:
        try:
            sources.append(read_source(file).source)
        except (AcirError, OSError) as exc:
            logger.warning("Skipping %s: %s", file.name, exc)
            failures.append(LoadFailure(str(file), type(exc).__name__, str(exc)))
    return sorted(sources, key=lambda s: s.id), failures


def evaluate_source(task: Tuple[Source, Query, Optional[int]]) -> RankedEntry:
    """Score one source; errors give an unmatched entry with the error.

    Takes a single tuple (source, query, max_budget) so that it can be
    mapped over a process pool.
    """
    source, query, max_budget = task
    start = time.perf_counter()
    try:
        result = find_match(source, query, max_budget)
    except AcirError as exc:
        elapsed = (time.perf_counter() - start) * 1e3
        logger.warning("Source '%s' scored inf: %s", source.id, exc)
        return RankedEntry(
            source.id,
            math.inf,
            False,
            elapsed_ms=elapsed,
            error=f"{type(exc).__name__}: {exc}",
        )
    elapsed = (time.perf_counter() - start) * 1e3
    return RankedEntry(
        source.id,
        result.score,
        result.matched,
        result.witness_summary(),
        elapsed,
        capped=result.diagnostics.capped,
    )


def rank(
    query: Query,
    corpus: List[Source],
    config: RankConfig = RankConfig(),
    progress: bool = True,
) -> RankedList:
    """Score and sort a corpus.

    Parameters
    ----------
    query : Query
        The query.
    corpus : List[Source]
        Sources to rank; identifiers are expected to be unique.
    config : RankConfig, optional
        Budget cap and number of worker processes.
    progress : bool, optional
        Switch for the progress bar. The default is True.

    Returns
    -------
    RankedList
        Entries sorted by score (unmatched last), then identifier. The
        outcome does not depend on the number of jobs.
    """
    if not isinstance(query, Query):
        raise TypeError("'query' should be a Query.")
    corpus = list(corpus)
    tasks = [(source, query, config.max_budget) for source in corpus]
    jobs = min(config.jobs, len(tasks)) or 1

    bar = tqdm(total=len(tasks), desc="Ranking", unit="source", disable=not progress)
    entries = []
    if jobs == 1:
        for task in tasks:
            entries.append(evaluate_source(task))
            bar.update()
    else:
        with multiprocessing.Pool(processes=jobs) as pool:
            for entry in pool.imap(evaluate_source, tasks):
                entries.append(entry)
                bar.update()
    bar.close()

    entries.sort(key=RankedEntry.sort_key)
    return RankedList(query, tuple(entries), config)
