import csv
import json
import logging
import re
from importlib import metadata
from pathlib import Path

import pandas as pd

from ..classes.results import CSV_COLUMNS, ResultRow

logger = logging.getLogger(__name__)

VERSIONED_PACKAGES = ("risopt", "numpy", "scipy", "pandas", "pydantic", "langgraph")


def package_versions() -> dict[str, str]:
    versions = {}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


class ResultWriter:
    """Writes result CSVs, the JSON run sidecar and gnuplot data files."""

    def __init__(self, output_dir: str | Path = "."):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def _sanitize_name(self, name: str) -> str:
        """Scenario name usable as a file stem."""
        sanitized = re.sub(r"[^\w\s-]", "", name).strip().replace(" ", "_")
        return sanitized.lower() or "scenario"

    def _generate_filename(self, name: str, suffix: str = ".csv") -> Path:
        return self.output_dir / f"{self._sanitize_name(name)}_results{suffix}"

    def resolve(self, out: str | Path | None, scenario_name: str) -> Path:
        if out is None:
            return self._generate_filename(scenario_name)
        return Path(out)

    def write_csv(self, rows: list[ResultRow], path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow(row.csv_fields())
        logger.info(f"Wrote {len(rows)} rows to {path}")
        return path

    def write_metadata(self, csv_path: str | Path, config: dict, seeds: dict[str, int], flags: dict | None = None) -> Path:
        """Sidecar next to the CSV: config echo, package versions and every stream seed."""
        path = Path(csv_path).with_suffix(".json")
        payload = {
            "config": config,
            "versions": package_versions(),
            "master_seed": config.get("master_seed"),
            "seeds": seeds,
            "flags": flags or {},
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def write_gnuplot(self, summary: pd.DataFrame, path: str | Path) -> Path:
        """Whitespace table: sweep value, then mean and stderr per algorithm."""
        path = Path(path)
        wide = summary.pivot(index="sweep_value", columns="algorithm", values=["mean", "stderr"])
        wide = wide.reindex(list(dict.fromkeys(summary["sweep_value"])))
        algorithms = list(dict.fromkeys(summary["algorithm"]))
        header = ["sweep_value"] + [f"{a}_{stat}" for a in algorithms for stat in ("mean", "stderr")]
        lines = ["# " + " ".join(header)]
        for value, record in wide.iterrows():
            cells = [str(value)]
            for a in algorithms:
                cells += [repr(float(record[("mean", a)])), repr(float(record[("stderr", a)]))]
            lines.append(" ".join(cells))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        logger.info(f"Wrote gnuplot data to {path}")
        return path

    def write_run(self, rows: list[ResultRow], out: str | Path, config: dict, seeds: dict[str, int], flags: dict | None = None):
        """
        Write the CSV and its sidecar.

        Returns:
            tuple: (success status, CSV path or error message)
        """
        try:
            csv_path = self.write_csv(rows, out)
            self.write_metadata(csv_path, config, seeds, flags)
            return True, csv_path
        except OSError as e:
            error_msg = f"Error writing results: {str(e)}"
            logger.error(error_msg)
            return False, error_msg


def read_results(path: str | Path) -> pd.DataFrame:
    """Load a results CSV with the sweep value kept as text so 'inf' and numbers group exactly."""
    return pd.read_csv(path, dtype={"sweep_value": str, "sweep_param": str, "algorithm": str, "status": str}, keep_default_na=False, na_values=["", "nan"])
