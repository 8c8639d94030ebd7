import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app import __version__
from app.core.config import settings
from app.schemas.model import ModelParams, NumericsConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class ResultExporter:
    """Writes result tables as CSV files with a ``#``-prefixed metadata header."""

    FLOAT_FORMAT = "%.12e"
    DELIMITER = ","

    def __init__(self, output_dir: Optional[PathLike] = None):
        self.output_dir = Path(output_dir or settings.OUTPUT_DIR)
        self.logger = logging.getLogger(__name__)

    def resolve_path(self, path: Optional[PathLike], default_name: str) -> Path:
        """Relative paths land in the output directory; parents are created."""
        target = Path(path) if path else Path(default_name)
        if not target.is_absolute() and target.parent == Path("."):
            target = self.output_dir / target
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def describe_window(self, numerics: NumericsConfig, params: Optional[ModelParams] = None) -> str:
        """Window description for the header; resolved bounds are added when a single point is exported."""
        rule = (
            f"[-max({numerics.window_tau_multiple:g} tau, {numerics.window_period_multiple:g}/omega1), "
            f"+max({numerics.window_tau_multiple:g} tau, {numerics.window_period_multiple:g}/omega2)]"
        )
        if numerics.t_min is not None and numerics.t_max is not None:
            return f"[{numerics.t_min:.12g}, {numerics.t_max:.12g}] (explicit)"
        if params is None:
            return f"default {rule}"
        t_min, t_max = numerics.resolve_window(params.omega1, params.omega2, params.tau)
        return f"[{t_min:.12g}, {t_max:.12g}] from default {rule}"

    def build_metadata(
        self,
        scenario: str,
        params: ModelParams,
        numerics: NumericsConfig,
        window: Optional[str] = None,
        **extra: Any,
    ) -> Dict[str, Any]:
        """
        Header fields of an exported file.

        Every parameter and tolerance is recorded so a figure can be rebuilt
        from the file alone.
        """
        metadata: Dict[str, Any] = {
            "artifact": f"casimir-sim {__version__}",
            "scenario": scenario,
            "params": json.dumps(params.model_dump(mode="json", by_alias=True), sort_keys=True),
            "numerics": json.dumps(numerics.model_dump(mode="json"), sort_keys=True),
            "window": window or self.describe_window(numerics, params),
        }
        for key, value in extra.items():
            metadata[key] = value if isinstance(value, str) else json.dumps(value, sort_keys=True)
        return metadata

    def _header(self, metadata: Dict[str, Any], columns: Sequence[str]) -> str:
        lines = [f"generated: {datetime.now(timezone.utc).isoformat(timespec='seconds')}"]
        lines += [f"{key}: {value}" for key, value in metadata.items()]
        lines.append(self.DELIMITER.join(columns))
        return "\n".join(lines)

    def write_table(
        self,
        path: PathLike,
        columns: Sequence[str],
        data: np.ndarray,
        metadata: Dict[str, Any],
    ) -> Path:
        """
        Write a numeric table.

        Args:
            path: Target file
            columns: Column names (last header line)
            data: 2-D array with one column per name
            metadata: Header fields from ``build_metadata``

        Returns:
            The written path
        """
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if data.shape[1] != len(columns):
            raise ValueError(f"{len(columns)} column names for a table of width {data.shape[1]}")
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(
            target,
            data,
            fmt=self.FLOAT_FORMAT,
            delimiter=self.DELIMITER,
            header=self._header(metadata, columns),
            comments="# ",
        )
        self.logger.info(f"Wrote {data.shape[0]} rows to {target}")
        return target

    def write_records(
        self,
        path: PathLike,
        columns: Sequence[str],
        records: Sequence[Sequence[Any]],
        metadata: Dict[str, Any],
    ) -> Path:
        """Write rows with mixed text and numeric fields; floats use the table format."""
        formatted: List[List[str]] = [[self._format_cell(value) for value in record] for record in records]
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(
            target,
            np.array(formatted, dtype=object).reshape(len(formatted), len(columns)),
            fmt="%s",
            delimiter=self.DELIMITER,
            header=self._header(metadata, columns),
            comments="# ",
        )
        self.logger.info(f"Wrote {len(formatted)} records to {target}")
        return target

    def _format_cell(self, value: Any) -> str:
        if isinstance(value, (bool, np.bool_)):
            return "true" if value else "false"
        if isinstance(value, (float, np.floating)):
            return self.FLOAT_FORMAT % value
        return str(value).replace(self.DELIMITER, ";")

    def trajectory_table(self, times: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> Tuple[List[str], np.ndarray]:
        """Columns t, Re alpha, Im alpha, Re beta, Im beta, |beta|^2."""
        columns = ["t", "re_alpha", "im_alpha", "re_beta", "im_beta", "beta_abs2"]
        data = np.column_stack([times, alpha.real, alpha.imag, beta.real, beta.imag, np.abs(beta) ** 2])
        return columns, data

    def oracle_tables(self, traj) -> Tuple[Tuple[List[str], np.ndarray], Tuple[List[str], np.ndarray]]:
        """Oracle trajectory columns and the final photon distribution (n, p_n)."""
        columns = ["t", "P_excited", "mean_photons", "even_weight", "odd_weight", "N_expectation"]
        data = np.column_stack([
            traj.times, traj.P_excited, traj.mean_photons, traj.even_weight, traj.odd_weight, traj.N_expectation,
        ])
        final = traj.photon_distribution[-1]
        distribution = np.column_stack([np.arange(len(final)), final])
        return (columns, data), (["n", "p_n"], distribution)


result_exporter = ResultExporter()
