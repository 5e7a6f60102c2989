"""
Writing report models as JSON or CSV files.
"""
import csv
import json
from datetime import datetime, timezone
from pathlib import Path

from pydantic import BaseModel

from ..models import ReportMetadata


def make_metadata(command: str) -> ReportMetadata:
    return ReportMetadata(generated_at=datetime.now(timezone.utc).isoformat(), command=command)


def report_json(report: BaseModel) -> str:
    """JSON text with the metadata block last, so everything above it is reproducible"""
    data = report.model_dump(mode="json", exclude={"metadata"})
    metadata = getattr(report, "metadata", None)
    data["metadata"] = metadata.model_dump(mode="json") if metadata is not None else None
    return json.dumps(data, indent=2) + "\n"


def write_report(report: BaseModel, path: Path, output_format: str = "json") -> Path:
    """Write `report` to `path`; CSV uses the report's own row layout"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if output_format == "csv":
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerows(report.csv_rows())
    else:
        with open(path, "w") as f:
            f.write(report_json(report))
    return path
