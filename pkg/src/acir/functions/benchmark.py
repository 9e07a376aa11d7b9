"""Module for generating random benchmark instances and timing the
match search on them.

Instances are drawn from a seeded numpy generator: random dynamic laws
with at most one condition, occasional executability conditions and
state constraints, a random initial set and a sequence of steps with up
to a given number of concurrent actions. Selected actions can be
redefined to have an unknown direct effect. Sources with emergent
non-determinism or without a conservative expansion are redrawn. The
query of every instance is chosen by trying fluents until the instance
matches (even instances) or does not match (odd instances), so that
roughly half of the set matches.

This file can also be imported as a module and contains the following
functions:

    * generate_source - draw one random source.

    * generate_benchmark - draw a set of instances with calibrated
    queries.

    * write_benchmark - save the instances as '.acir' and '.acq' files.

    * run_bench - time the match search on every instance.

    * run_steps_experiment - run benchmarks over a range of sequence
    lengths.

    * summarize - mean and standard deviation of the execution times of
    matching and non-matching instances.

    * plot_benchmark - plot the execution time per instance.

"""

from __future__ import annotations

import logging
import os
import pickle
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from matplotlib import pyplot as plt
from pyarrow import feather as ft
from tqdm import tqdm

from acir import style_path
from acir.functions import utils
from acir.functions.core_types import (
    AcirError,
    ActionDescription,
    DynamicLaw,
    ExecutabilityCondition,
    Literal,
    Query,
    Signature,
    Source,
    StateConstraint,
    Truth,
    unknown,
)
from acir.functions.dsl_parser import serialize_query, serialize_source
from acir.functions.initial_state import source_expansion
from acir.functions.matcher import find_match
from acir.functions.transition import (
    CapExceeded,
    EmergentNonDeterminism,
    check_emergent_nondeterminism,
)

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 200


@dataclass(frozen=True)
class BenchmarkConfig:
    """Parameters of a generated benchmark.

    Attributes
    ----------
    fluents : int
        Number of fluents of every source.
    steps : int
        Length of the action sequence, between 3 and 10.
    concurrency : int
        Largest number of elementary actions in one step.
    unknown_actions : int
        Number of actions redefined to have an unknown direct effect.
    instances : int
        Number of sources.
    seed : int
        Seed of the random generator.
    actions : int
        Number of elementary actions of every source.
    max_budget : int, optional
        Budget cap of the search; None searches the whole space.
    """

    fluents: int = 6
    steps: int = 5
    concurrency: int = 3
    unknown_actions: int = 0
    instances: int = 20
    seed: int = 0
    actions: int = 6
    max_budget: Optional[int] = None

    def __post_init__(self):
        for name in ("fluents", "steps", "concurrency", "instances", "actions"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"'{name}' should be a positive integer.")
        if self.fluents < 2:
            raise ValueError("'fluents' should be at least 2.")
        if not 3 <= self.steps <= 10:
            raise ValueError("'steps' should be between 3 and 10.")
        if not 0 <= self.unknown_actions <= self.actions:
            raise ValueError(
                "'unknown_actions' should be between 0 and the number of actions."
            )
        if self.concurrency > self.actions:
            raise ValueError("'concurrency' should not exceed the number of actions.")


@dataclass(frozen=True)
class Benchmark:
    config: BenchmarkConfig
    sources: Tuple[Source, ...]
    queries: Tuple[Query, ...]
    match_ratio: float


def _literal(rng: np.random.Generator, fluent: str) -> Literal:
    return Literal(fluent, Truth.TRUE if rng.random() < 0.5 else Truth.FALSE)


def _pick(rng: np.random.Generator, names: List[str], count: int) -> List[str]:
    return [names[int(i)] for i in rng.choice(len(names), size=count, replace=False)]


def generate_source(
    rng: np.random.Generator, config: BenchmarkConfig, source_id: str
) -> Source:
    """Draw one random source (not checked for well-behavedness)."""
    fluents = [f"f{i}" for i in range(config.fluents)]
    actions = [f"a{i}" for i in range(config.actions)]
    redefined = set(_pick(rng, actions, config.unknown_actions))

    laws = []
    for action in actions:
        if action in redefined:
            laws.append(DynamicLaw(action, unknown(str(rng.choice(fluents)))))
            continue
        for _ in range(int(rng.integers(1, 3))):
            target, condition = _pick(rng, fluents, 2)
            conditions = (_literal(rng, condition),) if rng.random() < 0.5 else ()
            laws.append(DynamicLaw(action, _literal(rng, target), conditions))
        if rng.random() < 0.3:
            laws.append(
                ExecutabilityCondition(
                    action, (_literal(rng, str(rng.choice(fluents))),)
                )
            )
    if config.fluents > 1 and rng.random() < 0.5:
        head, condition = _pick(rng, fluents, 2)
        laws.append(StateConstraint(_literal(rng, head), (_literal(rng, condition),)))

    defaults = {f for f in fluents if rng.random() < 0.25}
    initial = {
        _literal(rng, f)
        for f in _pick(rng, fluents, int(rng.integers(0, min(2, config.fluents) + 1)))
    }
    sequence = []
    for _ in range(config.steps):
        size = int(rng.integers(1, config.concurrency + 1))
        sequence.append(frozenset(_pick(rng, actions, size)))

    return Source(
        id=source_id,
        signature=Signature(fluents, actions),
        defaults=defaults,
        description=ActionDescription(laws),
        initial=initial,
        sequence=sequence,
    )


def _acceptable(source: Source) -> bool:
    try:
        if check_emergent_nondeterminism(source.description, source.signature):
            return False
        return source_expansion(source) is not None
    except (EmergentNonDeterminism, CapExceeded):
        return False


def _calibrate(
    rng: np.random.Generator,
    source: Source,
    want_match: bool,
    max_budget: Optional[int],
) -> Tuple[Query, bool]:
    candidates = [source.fluents[int(i)] for i in rng.permutation(len(source.fluents))]
    fallback = None
    for fluent in candidates:
        query = Query(fluent)
        matched = find_match(source, query, max_budget).matched
        if matched == want_match:
            return query, matched
        if fallback is None:
            fallback = (query, matched)
    logger.debug(
        "Source '%s': no query with matched=%s, keeping '%s'",
        source.id,
        want_match,
        fallback[0].fluent,
    )
    return fallback


def generate_benchmark(config: BenchmarkConfig, progress: bool = True) -> Benchmark:
    """Draw a set of instances with calibrated queries.

    Parameters
    ----------
    config : BenchmarkConfig
        Generation parameters; the same seed gives the same set.
    progress : bool, optional
        Switch for the progress bar. The default is True.

    Returns
    -------
    Benchmark
        Sources named 'bench_000', 'bench_001', ..., their queries and the
        achieved ratio of matching instances.

    Raises
    ------
    AcirError
        No acceptable source was drawn within the attempt limit.
    """
    if not isinstance(config, BenchmarkConfig):
        raise TypeError("'config' should be a BenchmarkConfig.")
    rng = np.random.default_rng(config.seed)
    sources, queries, matches = [], [], 0

    for index in tqdm(
        range(config.instances), desc="Generating", unit="instance", disable=not progress
    ):
        source_id = f"bench_{index:03d}"
        for _ in range(MAX_ATTEMPTS):
            source = generate_source(rng, config, source_id)
            if _acceptable(source):
                break
        else:
            raise AcirError(
                f"no acceptable source drawn in {MAX_ATTEMPTS} attempts"
            )
        query, matched = _calibrate(rng, source, index % 2 == 0, config.max_budget)
        sources.append(source)
        queries.append(query)
        matches += matched

    ratio = matches / config.instances
    logger.info("Generated %d instances, %.0f%% match", config.instances, 100 * ratio)
    return Benchmark(config, tuple(sources), tuple(queries), ratio)


def write_benchmark(
    bench: Benchmark, directory: Union[str, os.PathLike], rewrite: bool = True
) -> List[Path]:
    """Save every instance as '<id>.acir' with its query as '<id>.acq'.

    Returns
    -------
    List[Path]
        Paths of the written source files.
    """
    folder = Path(directory)
    written = []
    for source, query in zip(bench.sources, bench.queries):
        source_file = folder / f"{source.id}.acir"
        query_file = folder / f"{source.id}.acq"
        for file in (source_file, query_file):
            utils.prepare_output(file, rewrite)
        source_file.write_text(serialize_source(source), encoding="utf-8")
        query_file.write_text(serialize_query(query), encoding="utf-8")
        written.append(source_file)
    return written


def run_bench(
    config: Union[BenchmarkConfig, Benchmark],
    out: Optional[Union[str, os.PathLike]] = None,
    progress: bool = True,
) -> pd.DataFrame:
    """Time the match search on every instance of a benchmark.

    Parameters
    ----------
    config : BenchmarkConfig or Benchmark
        Parameters of a set to generate, or an already generated set.
    out : str or os.PathLike, optional
        Report file; '.feather' is written with pyarrow, anything else as
        CSV.
    progress : bool, optional
        Switch for the progress bars. The default is True.

    Returns
    -------
    pd.DataFrame
        One row per instance: id, steps, fluents, query, score, matched
        and time_ms.
    """
    bench = config if isinstance(config, Benchmark) else generate_benchmark(config, progress)
    rows = []
    for source, query in tqdm(
        list(zip(bench.sources, bench.queries)),
        desc="Timing",
        unit="instance",
        disable=not progress,
    ):
        start = time.perf_counter()
        result = find_match(source, query, bench.config.max_budget)
        elapsed = (time.perf_counter() - start) * 1e3
        rows.append(
            {
                "id": source.id,
                "steps": len(source.sequence),
                "fluents": len(source.fluents),
                "query": query.fluent,
                "score": float(result.score),
                "matched": result.matched,
                "time_ms": elapsed,
            }
        )
    report = pd.DataFrame(
        rows,
        columns=["id", "steps", "fluents", "query", "score", "matched", "time_ms"],
    )
    check_asymmetry(report)
    if out is not None:
        save_report(report, out)
    return report


def run_steps_experiment(
    config: BenchmarkConfig,
    steps_range: Tuple[int, int],
    out: Optional[Union[str, os.PathLike]] = None,
    progress: bool = True,
) -> pd.DataFrame:
    """Run one benchmark per sequence length in an inclusive range.

    Every length uses its own set drawn with the configured seed.
    """
    low, high = steps_range
    if low > high:
        raise ValueError("'steps_range' should be increasing.")
    reports = [
        run_bench(replace(config, steps=steps), progress=progress)
        for steps in range(low, high + 1)
    ]
    report = pd.concat(reports, ignore_index=True)
    if out is not None:
        save_report(report, out)
    return report


def save_report(report: pd.DataFrame, out: Union[str, os.PathLike]) -> None:
    utils.prepare_output(out, rewrite=True)
    if Path(out).suffix == ".feather":
        ft.write_feather(report.reset_index(drop=True), str(out))
    else:
        report.to_csv(out, index=False)
    logger.info("Benchmark report written to %s", out)


def summarize(report: pd.DataFrame) -> Dict[str, float]:
    """Timing statistics of a report.

    Returns
    -------
    Dict[str, float]
        Number of instances, ratio of matches, and the mean and standard
        deviation of time_ms over matching and non-matching instances
        (NaN for an empty group).
    """
    summary = {
        "instances": int(len(report)),
        "match_ratio": float(report["matched"].mean()) if len(report) else float("nan"),
    }
    for name, group in (
        ("match", report[report["matched"]]),
        ("no_match", report[~report["matched"]]),
    ):
        times = group["time_ms"].to_numpy(dtype=float)
        summary[f"{name}_count"] = int(times.size)
        summary[f"{name}_mean_ms"] = float(np.mean(times)) if times.size else float("nan")
        summary[f"{name}_std_ms"] = float(np.std(times)) if times.size else float("nan")
    return summary


def summarize_by_steps(report: pd.DataFrame) -> pd.DataFrame:
    return (
        report.groupby(["steps", "matched"])["time_ms"]
        .agg(["count", "mean", "std"])
        .reset_index()
    )


def check_asymmetry(report: pd.DataFrame) -> bool:
    """Soft check that matching instances are faster on average.

    Logs a warning and returns False when the mean time of matching
    instances is not below that of non-matching ones; True otherwise,
    including when a group is empty.
    """
    summary = summarize(report)
    if not summary["match_count"] or not summary["no_match_count"]:
        return True
    if summary["match_mean_ms"] >= summary["no_match_mean_ms"]:
        logger.warning(
            "Matching instances are not faster on average: %.2f ms vs %.2f ms",
            summary["match_mean_ms"],
            summary["no_match_mean_ms"],
        )
        return False
    return True


def plot_benchmark(
    report: pd.DataFrame,
    path: Union[str, os.PathLike],
    pickle_fig: bool = False,
    show_fig: bool = False,
):
    """Plot the execution time per instance.

    Matching and non-matching instances are drawn in different colours,
    with dashed lines at the two mean times.

    Parameters
    ----------
    report : pd.DataFrame
        Report from 'run_bench'.
    path : str or os.PathLike
        Output image; the figure is also pickled next to it when
        'pickle_fig' is True.
    pickle_fig : bool, optional
        Switch for pickling the figure. The default is False.
    show_fig : bool, optional
        Switch for showing the figure. The default is False.

    Returns
    -------
    matplotlib.figure.Figure
        The figure.
    """
    summary = summarize(report)
    with plt.style.context(style_path):
        fig, ax = plt.subplots(figsize=(12, 7))
        positions = np.arange(len(report))
        for flag, colour, label in ((True, "tab:blue", "match"), (False, "tab:red", "no match")):
            mask = (report["matched"] == flag).to_numpy()
            if not mask.any():
                continue
            ax.scatter(
                positions[mask],
                report["time_ms"].to_numpy()[mask],
                color=colour,
                label=label,
            )
            mean = summary["match_mean_ms" if flag else "no_match_mean_ms"]
            ax.axhline(mean, color=colour, linestyle="--", label=f"{label} mean: {mean:.1f} ms")
        ax.set_xlabel("Instance (#)")
        ax.set_ylabel("Execution time (ms)")
        ax.set_title(f"Match search time, {summary['instances']} instances")
        ax.legend()

        utils.prepare_output(path, rewrite=True)
        fig.savefig(path)
        if pickle_fig:
            with open(Path(path).with_suffix(".pickle"), "wb") as file:
                pickle.dump(fig, file)
    if show_fig:
        plt.show()
    else:
        plt.close(fig)
    return fig
