"""
Group file handling: loading, validating and saving lists of labelled
generator sets, plus the bundled sample data.

File format (JSON)::

    {
      "modulus": 32,
      "groups": [
        {"label": "Mod4G", "level": 4,
         "generators": [[[1, 0], [3, 3]], "3,3;1,0"]}
      ]
    }

`level` is optional and defaults to `modulus`; generators are read mod
`level` and the group is the full preimage at `modulus`. Generators may be
nested 2x2 lists or "a,b;c,d" strings. Any other top-level keys are kept as
header fields (the enumeration cache stores its schema there).
"""

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from ..core.errors import GroupFileError
from ..core.groups import Subgroup, generate_subgroup, preimage
from ..core.modring import GL2Element

DATA_DIR = Path(__file__).resolve().parents[2] / "data"
SAMPLE_RZB_FILE = DATA_DIR / "rzb_sample.json"
SAMPLE_MOD7_FILE = DATA_DIR / "mod7_images_partial.json"


@dataclass
class GroupEntry:
    label: str
    level: int
    generators: List[GL2Element]


@dataclass
class GroupFile:
    """A modulus plus labelled generator lists."""

    modulus: int
    groups: List[GroupEntry] = field(default_factory=list)
    header: Dict[str, Any] = field(default_factory=dict)

    def subgroups(self) -> List[Subgroup]:
        """Each entry as a subgroup mod `modulus` (lifted from its level)."""
        result = []
        for entry in self.groups:
            group = generate_subgroup(entry.level, entry.generators, label=entry.label)
            if entry.level != self.modulus:
                group = preimage(group, self.modulus)
            group.label = entry.label
            result.append(group)
        return result

    @classmethod
    def from_subgroups(cls, modulus: int, groups: Sequence[Subgroup],
                       header: Optional[Dict[str, Any]] = None) -> 'GroupFile':
        entries = [GroupEntry(label=g.label or f"group-{i + 1}", level=modulus,
                              generators=list(g.generators))
                   for i, g in enumerate(groups)]
        return cls(modulus=modulus, groups=entries, header=dict(header or {}))

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = dict(self.header)
        payload['modulus'] = self.modulus
        payload['groups'] = [
            {
                'label': entry.label,
                'level': entry.level,
                'generators': [[[g.a, g.b], [g.c, g.d]] for g in entry.generators],
            }
            for entry in self.groups
        ]
        return payload

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame({
            'label': [e.label for e in self.groups],
            'level': [e.level for e in self.groups],
            'generators': [" | ".join(str(g) for g in e.generators) for e in self.groups],
        })


def _line_of(text: str, needle: str) -> int:
    """1-based line of the first occurrence of needle (0 if absent)."""
    index = text.find(needle)
    return text.count("\n", 0, index) + 1 if index >= 0 else 0


def _parse_matrix(raw: Any, level: int) -> GL2Element:
    if isinstance(raw, str):
        return GL2Element.parse(raw, level)
    if (isinstance(raw, list) and len(raw) == 2
            and all(isinstance(row, list) and len(row) == 2 for row in raw)):
        (a, b), (c, d) = raw
        if not all(isinstance(v, int) for v in (a, b, c, d)):
            raise ValueError(f"matrix {raw} has a non-integer entry")
        return GL2Element(level, a, b, c, d)
    raise ValueError(f"matrix {raw!r} is neither a 2x2 list nor 'a,b;c,d' text")


def parse_group_file(text: str) -> GroupFile:
    """
    Parse group-file text.

    Raises:
        GroupFileError: With the offending line number
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroupFileError(exc.msg, exc.lineno) from None
    if not isinstance(payload, dict):
        raise GroupFileError("top level must be an object", 1)
    if not isinstance(payload.get('modulus'), int) or payload['modulus'] < 2:
        raise GroupFileError("'modulus' must be an integer >= 2", _line_of(text, '"modulus"'))
    modulus = payload['modulus']
    raw_groups = payload.get('groups')
    if not isinstance(raw_groups, list):
        raise GroupFileError("'groups' must be a list", _line_of(text, '"groups"'))

    entries = []
    for index, raw in enumerate(raw_groups):
        label = raw.get('label') if isinstance(raw, dict) else None
        if not isinstance(label, str):
            raise GroupFileError(f"group #{index + 1} has no string 'label'",
                                 _line_of(text, '"groups"'))
        line = _line_of(text, f'"{label}"')
        level = raw.get('level', modulus)
        if not isinstance(level, int) or level < 2 or modulus % level:
            raise GroupFileError(f"group '{label}': level {level!r} must divide {modulus}", line)
        generators = raw.get('generators')
        if not isinstance(generators, list):
            raise GroupFileError(f"group '{label}': 'generators' must be a list", line)
        try:
            parsed = [_parse_matrix(g, level) for g in generators]
        except ValueError as exc:
            raise GroupFileError(f"group '{label}': {exc}", line) from None
        entries.append(GroupEntry(label=label, level=level, generators=parsed))

    header = {k: v for k, v in payload.items() if k not in ('modulus', 'groups')}
    return GroupFile(modulus=modulus, groups=entries, header=header)


def load_group_file(filename: Union[str, Path]) -> GroupFile:
    """
    Load a group file from disk.

    Args:
        filename: Path to the JSON file

    Returns:
        Parsed GroupFile
    """
    path = Path(filename)
    try:
        text = path.read_text(encoding='utf-8')
    except FileNotFoundError:
        raise GroupFileError(f"group file {path} not found") from None
    return parse_group_file(text)


def save_group_file(filename: Union[str, Path], group_file: GroupFile) -> Path:
    """
    Write a group file atomically (temporary file, then rename).

    Args:
        filename: Destination
        group_file: Content

    Returns:
        The destination path
    """
    path = Path(filename)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(group_file.to_dict(), indent=1, sort_keys=True)
    handle, temp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix='.tmp')
    try:
        with os.fdopen(handle, 'w', encoding='utf-8') as stream:
            stream.write(text + "\n")
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return path


def load_sample_groups() -> GroupFile:
    """The bundled 2-adic sample used by `rzb` when no file is given."""
    return load_group_file(SAMPLE_RZB_FILE)


def load_sample_mod7_images() -> GroupFile:
    """The bundled (partial) list of mod-7 images known to occur."""
    return load_group_file(SAMPLE_MOD7_FILE)
