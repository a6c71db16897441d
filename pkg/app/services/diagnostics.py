import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO

from app.models import Diagnostic, Severity

logger = logging.getLogger(__name__)

_LOG_LEVELS = {
    Severity.INFO: logging.INFO,
    Severity.WARNING: logging.WARNING,
    Severity.ERROR: logging.ERROR,
}


class DiagnosticsCollector:
    """Collects structured diagnostics and mirrors them to the logger"""

    def __init__(self, stage: Optional[str] = None):
        self.stage = stage
        self.records: List[Diagnostic] = []

    def add(
        self,
        severity: Severity,
        code: str,
        message: str,
        file: Optional[str] = None,
    ) -> Diagnostic:
        record = Diagnostic(severity=severity, code=code, file=file, message=message)
        self.records.append(record)
        where = f" [{file}]" if file else ""
        logger.log(_LOG_LEVELS[severity], f"{code}{where}: {message}")
        return record

    def info(self, code: str, message: str, file: Optional[str] = None) -> Diagnostic:
        return self.add(Severity.INFO, code, message, file)

    def warning(self, code: str, message: str, file: Optional[str] = None) -> Diagnostic:
        return self.add(Severity.WARNING, code, message, file)

    def error(self, code: str, message: str, file: Optional[str] = None) -> Diagnostic:
        return self.add(Severity.ERROR, code, message, file)

    def extend(self, records: List[Diagnostic]):
        self.records.extend(records)

    def by_code(self, code: str) -> List[Diagnostic]:
        return [d for d in self.records if d.code == code]

    def has_errors(self) -> bool:
        return any(d.severity == Severity.ERROR for d in self.records)

    def write_jsonl(self, stream: TextIO):
        for record in self.records:
            stream.write(json.dumps(record.model_dump(mode="json"), sort_keys=True) + "\n")

    def flush(self, path: Optional[str] = None):
        """Write all records as JSON lines to ``path`` or standard error."""
        if path:
            target = Path(path)
            target.parent.mkdir(parents=True, exist_ok=True)
            with target.open("w", encoding="utf-8") as handle:
                self.write_jsonl(handle)
            logger.info(f"Wrote {len(self.records)} diagnostics to {target}")
        else:
            self.write_jsonl(sys.stderr)
