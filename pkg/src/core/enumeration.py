"""
Enumeration of subgroups of GL(2, Z/NZ) up to conjugacy.

The lattice is grown bottom-up: starting from the trivial group, every
known class representative H is extended by one element x at a time.
Extensions <H, x> and <H, y> are conjugate whenever y lies in
H * (n^-1 x n) or (n^-1 x n) * H for n in the normaliser of H, so only one
candidate per such orbit is tried. New groups are deduplicated by exact
element set, then bucketed by class_key and compared with an explicit
conjugator search inside the bucket.

Results are memoised per process and, when a cache directory is given,
written as group files (see src.utils.group_data) keyed by modulus, filter
digest and CODE_VERSION. The disk cache is advisory: a missing or stale
file only costs the recomputation.
"""

import hashlib
import logging
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .errors import EnumerationCeilingError, GroupFileError, ModulusError
from .groups import (Subgroup, are_conjugate, class_key, extend_subgroup,
                     full_group, identity_code, invert, multiply, normalizer)
from .menagerie import determinant_surjective, has_cc_element
from .modring import GL2Element, check_modulus

logger = logging.getLogger(__name__)

# Largest ambient group (in elements) whose subgroup lattice is enumerated.
# Covers N in {2, ..., 10, 12}.
ENUMERATION_CEILING = 5000

# Bump whenever the enumeration output for a given filter could change.
CODE_VERSION = "1"
CACHE_SCHEMA = "division-field-toolkit/subgroups"

cache_stats: Counter = Counter()

_memo: Dict[Tuple[int, str], List[Subgroup]] = {}
_lattice_memo: Dict[Tuple[int, str, Optional[int]], List[Subgroup]] = {}
_memo_lock = threading.Lock()


@dataclass(frozen=True)
class SubgroupFilter:
    """
    Conjunction of subgroup predicates.

    Attributes:
        det_surjective: det(G) is all of (Z/NZ)^x
        cc_element: G has an element of trace 0 and det -1
        non_abelian: G is not abelian
        min_order: Lower bound on |G|
        max_order: Upper bound on |G| (also prunes the lattice)
        container: Only subgroups of this group are enumerated
    """

    det_surjective: bool = False
    cc_element: bool = False
    non_abelian: bool = False
    min_order: int = 1
    max_order: Optional[int] = None
    container: Optional[Subgroup] = field(default=None, compare=False, hash=False)

    @classmethod
    def admissible(cls, **kwargs) -> 'SubgroupFilter':
        """Surjective determinant and a complex-conjugation candidate."""
        return cls(det_surjective=True, cc_element=True, **kwargs)

    def describe(self) -> str:
        parts = []
        if self.det_surjective:
            parts.append("det-surjective")
        if self.cc_element:
            parts.append("cc-element")
        if self.non_abelian:
            parts.append("non-abelian")
        if self.min_order > 1:
            parts.append(f"order>={self.min_order}")
        if self.max_order is not None:
            parts.append(f"order<={self.max_order}")
        if self.container is not None:
            codes_digest = hashlib.sha1(self.container.codes.tobytes()).hexdigest()[:12]
            parts.append(f"in {self.container.label or 'group'}[{codes_digest}]")
        return ", ".join(parts) if parts else "all"

    def digest(self) -> str:
        return hashlib.sha1(self.describe().encode('utf-8')).hexdigest()

    def accepts(self, group: Subgroup) -> bool:
        if group.order < self.min_order:
            return False
        if self.max_order is not None and group.order > self.max_order:
            return False
        if self.det_surjective and not determinant_surjective(group):
            return False
        if self.cc_element and not has_cc_element(group):
            return False
        if self.non_abelian and group.is_abelian():
            return False
        return True


def _trivial_group(modulus: int) -> Subgroup:
    return Subgroup(modulus, [identity_code(modulus)], generators=[])


def _extension_candidates(group: Subgroup, ambient: Subgroup) -> np.ndarray:
    """One element x of ambient - group per orbit of extensions <group, x>."""
    n = group.modulus
    norm = normalizer(group, within=ambient)
    norm_inv = invert(norm.codes, n)
    marked = group.contains_codes(ambient.codes)
    candidates = []
    while True:
        free = np.flatnonzero(~marked)
        if free.size == 0:
            break
        x = ambient.codes[free[0]]
        candidates.append(x)
        orbit = np.unique(multiply(multiply(norm_inv, x, n), norm.codes, n))
        left = multiply(group.codes[:, None], orbit[None, :], n).ravel()
        right = multiply(orbit[:, None], group.codes[None, :], n).ravel()
        marked[ambient.positions(left)] = True
        marked[ambient.positions(right)] = True
    return np.array(candidates, dtype=np.int64)


def _extensions(group: Subgroup, ambient: Subgroup,
                max_order: Optional[int]) -> List[Subgroup]:
    result = []
    for x in _extension_candidates(group, ambient):
        bigger = extend_subgroup(group, [GL2Element.from_code(int(x), group.modulus)])
        if max_order is None or bigger.order <= max_order:
            result.append(bigger)
    return result


def subgroup_lattice(ambient: Subgroup, max_order: Optional[int] = None,
                     jobs: int = 1) -> List[Subgroup]:
    """
    Representatives of the subgroups of `ambient` up to conjugacy in `ambient`.

    Args:
        ambient: The group whose subgroups are wanted
        max_order: Skip subgroups larger than this
        jobs: Worker threads used to compute extensions; the merge is serial
            and in a fixed order, so the result does not depend on jobs

    Returns:
        Representatives ordered by (order, discovery)
    """
    n = ambient.modulus
    trivial = _trivial_group(n)
    representatives = [trivial]
    seen = {trivial.codes.tobytes()}
    buckets: Dict[tuple, List[Subgroup]] = {class_key(trivial): [trivial]}
    layer = [trivial]
    depth = 0
    executor = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while layer:
            depth += 1
            if executor is not None:
                batches = list(executor.map(lambda h: _extensions(h, ambient, max_order), layer))
            else:
                batches = [_extensions(h, ambient, max_order) for h in layer]
            next_layer = []
            for batch in batches:
                for candidate in batch:
                    key = candidate.codes.tobytes()
                    if key in seen:
                        continue
                    seen.add(key)
                    bucket = buckets.setdefault(class_key(candidate), [])
                    if any(are_conjugate(candidate, known, within=ambient)[0] for known in bucket):
                        continue
                    bucket.append(candidate)
                    representatives.append(candidate)
                    next_layer.append(candidate)
            logger.info(f"Lattice of {ambient.label or 'group'} mod {n}: depth {depth}, "
                        f"{len(next_layer)} new classes, {len(representatives)} total")
            layer = next_layer
    finally:
        if executor is not None:
            executor.shutdown()
    representatives.sort(key=lambda g: g.order)
    # label as N.order.k, k counting classes of that order
    per_order: Counter = Counter()
    for group in representatives:
        per_order[group.order] += 1
        group.label = f"{n}.{group.order}.{per_order[group.order]}"
    return representatives


def _merge_classes(groups: List[Subgroup]) -> List[Subgroup]:
    """Collapse representatives that are conjugate in the full GL(2, Z/NZ)."""
    merged: List[Subgroup] = []
    buckets: Dict[tuple, List[Subgroup]] = {}
    for group in groups:
        bucket = buckets.setdefault(class_key(group), [])
        if any(are_conjugate(group, known)[0] for known in bucket):
            continue
        bucket.append(group)
        merged.append(group)
    return merged


def cache_path(cache_dir: Union[str, Path], modulus: int, subgroup_filter: SubgroupFilter) -> Path:
    return Path(cache_dir) / f"subgroups-v{CODE_VERSION}-N{modulus}-{subgroup_filter.digest()[:16]}.json"


def _read_cache(path: Path, modulus: int, subgroup_filter: SubgroupFilter) -> Optional[List[Subgroup]]:
    from ..utils.group_data import load_group_file

    if not path.exists():
        return None
    try:
        group_file = load_group_file(path)
    except (GroupFileError, ValueError) as exc:
        logger.warning(f"Ignoring unreadable cache file {path}: {exc}")
        return None
    header = group_file.header
    if (header.get('schema') != CACHE_SCHEMA or header.get('code_version') != CODE_VERSION
            or group_file.modulus != modulus or header.get('filter') != subgroup_filter.describe()):
        logger.warning(f"Ignoring stale cache file {path}")
        return None
    return group_file.subgroups()


def _write_cache(path: Path, modulus: int, subgroup_filter: SubgroupFilter,
                 groups: List[Subgroup]) -> None:
    from ..utils.group_data import GroupFile, save_group_file

    header = {'schema': CACHE_SCHEMA, 'code_version': CODE_VERSION,
              'filter': subgroup_filter.describe()}
    try:
        save_group_file(path, GroupFile.from_subgroups(modulus, groups, header))
    except OSError as exc:
        logger.warning(f"Could not write cache file {path}: {exc}")


def enumerate_subgroups(modulus: int,
                        subgroup_filter: Optional[SubgroupFilter] = None,
                        jobs: int = 1,
                        cache_dir: Optional[Union[str, Path]] = None) -> List[Subgroup]:
    """
    Conjugacy-class representatives of the subgroups passing a filter.

    Args:
        modulus: N
        subgroup_filter: Predicates to apply (default: all subgroups)
        jobs: Worker threads for the lattice search
        cache_dir: Directory for the advisory on-disk cache (None disables it)

    Returns:
        One subgroup per GL(2, Z/NZ)-conjugacy class, ordered by order

    Raises:
        EnumerationCeilingError: If the ambient group is too large
    """
    modulus = check_modulus(modulus)
    subgroup_filter = subgroup_filter or SubgroupFilter()
    container = subgroup_filter.container
    if container is not None and container.modulus != modulus:
        raise ModulusError(f"Container is mod {container.modulus}, expected mod {modulus}")
    ambient = container if container is not None else full_group(modulus)
    if ambient.order > ENUMERATION_CEILING:
        raise EnumerationCeilingError(
            f"Cannot enumerate subgroups of a group of order {ambient.order} mod {modulus}: "
            f"enumeration ceiling is {ENUMERATION_CEILING} elements", ENUMERATION_CEILING)

    key = (modulus, subgroup_filter.digest())
    with _memo_lock:
        if key in _memo:
            cache_stats['memory'] += 1
            return list(_memo[key])

    path = cache_path(cache_dir, modulus, subgroup_filter) if cache_dir else None
    result = _read_cache(path, modulus, subgroup_filter) if path else None
    if result is not None:
        cache_stats['disk'] += 1
        logger.info(f"Loaded {len(result)} classes mod {modulus} from {path}")
    else:
        cache_stats['miss'] += 1
        lattice_key = (modulus, SubgroupFilter(container=container).digest(),
                       subgroup_filter.max_order)
        with _memo_lock:
            lattice = _lattice_memo.get(lattice_key)
        if lattice is None:
            lattice = subgroup_lattice(ambient, subgroup_filter.max_order, jobs)
            with _memo_lock:
                _lattice_memo[lattice_key] = lattice
        result = [g for g in lattice if subgroup_filter.accepts(g)]
        if container is not None:
            result = _merge_classes(result)
        if path:
            _write_cache(path, modulus, subgroup_filter, result)
        logger.info(f"Enumerated {len(result)} classes mod {modulus} ({subgroup_filter.describe()})")

    with _memo_lock:
        _memo[key] = result
    return list(result)


def clear_memo() -> None:
    """Forget memoised enumerations (the disk cache is untouched)."""
    with _memo_lock:
        _memo.clear()
        _lattice_memo.clear()
    cache_stats.clear()
