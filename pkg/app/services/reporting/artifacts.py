# report and CSV emission; every file opens with the resolved config

import csv
import io
import json
import logging
from pathlib import Path
from typing import Iterable, List, Sequence

from pydantic import BaseModel

from app.core.errors import ArtifactIOError


def config_header(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":"))


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


class ArtifactWriter:
    def __init__(self, output_dir: Path, config: dict):
        self.output_dir = Path(output_dir)
        self.header = config_header(config)
        self.written: List[Path] = []

    def _write(self, name: str, body: str) -> Path:
        path = self.output_dir / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as handle:
                handle.write(self.header + "\n")
                handle.write(body)
        except OSError as e:
            logging.error(f"Could not write {path}: {e}")
            raise ArtifactIOError(f"Cannot write artifact {path}: {e}")
        self.written.append(path)
        logging.info(f"Wrote {path}")
        return path

    def csv(self, name: str, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
        lines = io.StringIO()
        writer = csv.writer(lines, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
        return self._write(name, lines.getvalue())

    def report(self, name: str, model: BaseModel) -> Path:
        return self._write(name, model.model_dump_json(indent=2) + "\n")


def read_artifact(path) -> tuple:
    """(config dict, remaining text) of an artifact written by ArtifactWriter."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ArtifactIOError(f"Cannot read artifact {path}: {e}")
    first, _, rest = text.partition("\n")
    if not first.startswith("# config: "):
        raise ArtifactIOError(f"Artifact {path} has no config header")
    return json.loads(first[len("# config: "):]), rest
