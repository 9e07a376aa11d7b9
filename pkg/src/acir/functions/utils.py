"""Module of utility functions.

This module provides helpers shared by the other modules: handling of
output files, locating the bundled example sources and resolving the
number of worker processes.

This file can also be imported as a module and contains the following
functions:

    * prepare_output - based on the file name given and the boolean
    parameter 'rewrite', handles overwriting of an output file and
    creates its folder.

    * params_path - path to a file bundled in the 'params' package.

    * example_paths - paths of the bundled example sources.

    * resolve_jobs - number of worker processes from an explicit value,
    the ACIR_JOBS environment variable or the CPU count.

    * unpickle_plot - load a pickled matplotlib figure.

"""

from __future__ import annotations

import logging
import os
import pickle
from pathlib import Path
from typing import List, Optional, Union

logger = logging.getLogger(__name__)

PARAMS_DIR = Path(__file__).resolve().parent.parent / "params"
JOBS_VARIABLE = "ACIR_JOBS"


def prepare_output(file: Union[str, os.PathLike], rewrite: bool) -> None:
    """Handle file rewriting based on the 'rewrite' parameter.

    If the file exists and 'rewrite' is True, it is deleted; if
    'rewrite' is False, an error is raised. The parent folder is created
    when missing.

    Parameters
    ----------
    file : str or os.PathLike
        The file path to check for existence and potentially rewrite.
    rewrite : bool
        Switch for overwriting an existing file.

    Raises
    ------
    FileExistsError
        If 'rewrite' is False and the file already exists.
    """
    path = Path(file)
    if path.is_file():
        if not rewrite:
            raise FileExistsError(
                f"'{path}' already exists, 'rewrite' set to 'False'."
            )
        logger.warning("'%s' already exists and will be rewritten", path)
        path.unlink()
    path.parent.mkdir(parents=True, exist_ok=True)


def params_path(name: str) -> Path:
    """Path to a file bundled in the 'params' package."""
    path = PARAMS_DIR / name
    if not path.is_file():
        raise FileNotFoundError(f"No bundled file named '{name}'.")
    return path


def example_paths() -> List[Path]:
    """Paths of the bundled example sources, sorted by name."""
    return sorted(PARAMS_DIR.glob("*.acir"))


def resolve_jobs(jobs: Optional[int] = None) -> int:
    """Resolve the number of worker processes.

    Parameters
    ----------
    jobs : int, optional
        Explicit number of workers. When None, the ACIR_JOBS environment
        variable is used; when that is unset or not a positive integer,
        the CPU count.

    Returns
    -------
    int
        Number of workers, at least 1.
    """
    if jobs is not None:
        if not isinstance(jobs, int) or jobs < 1:
            raise TypeError("'jobs' should be a positive integer.")
        return jobs
    value = os.environ.get(JOBS_VARIABLE, "")
    try:
        parsed = int(value)
    except ValueError:
        parsed = 0
    if parsed >= 1:
        return parsed
    if value:
        logger.warning("Ignoring invalid %s=%r", JOBS_VARIABLE, value)
    return os.cpu_count() or 1


def unpickle_plot(path: Union[str, os.PathLike], show: bool = False):
    """Load a pickled matplotlib figure.

    Parameters
    ----------
    path : str or os.PathLike
        Path to the '.pickle' file.
    show : bool, optional
        Switch for displaying the figure. The default is False.

    Returns
    -------
    matplotlib.figure.Figure
        The figure.
    """
    with open(path, "rb") as file:
        fig = pickle.load(file)
    if show:
        fig.show()
    return fig
