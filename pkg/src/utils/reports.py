"""
Structured reports written by the command-line tool.

Every subcommand produces one Report; with `--out` it is written as sorted,
indented JSON so two runs with the same inputs and seed produce the same
bytes once timing is left out.
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

REPORT_SCHEMA = "division-field-toolkit/report/1"
CACHE_ENV_VAR = "ECL_CACHE_DIR"
# Verdict values that make a command exit 1: a failed check or a prime
# separating two division fields.
FAILING_VERDICTS = frozenset({"fail", "unequal-with-witness"})
DEFAULT_CACHE_DIR = Path.home() / ".cache" / "division-field-toolkit"


@dataclass
class Report:
    """
    Attributes:
        command: Subcommand that produced the report
        parameters: Parsed arguments it ran with
        verdicts: One entry per check or decision
        witnesses: Primes, elements or groups backing the verdicts
        timing: Seconds per stage (dropped by include_timing=False)
        cache_hits: Enumeration cache counters (dropped with timing)
    """

    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    verdicts: List[Dict[str, Any]] = field(default_factory=list)
    witnesses: Dict[str, Any] = field(default_factory=dict)
    timing: Dict[str, float] = field(default_factory=dict)
    cache_hits: Dict[str, int] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return any(v.get('verdict') in FAILING_VERDICTS for v in self.verdicts)

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        payload = {
            'schema': REPORT_SCHEMA,
            'command': self.command,
            'parameters': self.parameters,
            'verdicts': self.verdicts,
            'witnesses': self.witnesses,
        }
        if include_timing:
            payload['timing'] = {k: round(v, 3) for k, v in self.timing.items()}
            payload['cache_hits'] = dict(self.cache_hits)
        return payload

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True, default=str)


def write_report(report: Report, filename: Union[str, Path], include_timing: bool = True) -> Path:
    """Write a report as JSON, creating parent directories."""
    path = Path(filename)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json(include_timing) + "\n", encoding='utf-8')
    return path


def load_report(filename: Union[str, Path]) -> Dict[str, Any]:
    return json.loads(Path(filename).read_text(encoding='utf-8'))


def resolve_cache_dir(flag: Optional[Union[str, Path]] = None) -> Path:
    """Cache directory: the flag, then $ECL_CACHE_DIR, then ~/.cache/division-field-toolkit."""
    if flag:
        return Path(flag)
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return DEFAULT_CACHE_DIR


def verdict_table(verdicts: Sequence[Dict[str, Any]]) -> pd.DataFrame:
    """Flat table of verdict entries for console output."""
    rows = []
    for entry in verdicts:
        rows.append({key: (json.dumps(value, sort_keys=True, default=str)
                           if isinstance(value, (dict, list)) else value)
                     for key, value in entry.items()})
    return pd.DataFrame(rows)
