"""
Utility functions for group files and structured reports.
"""

from .group_data import load_group_file, save_group_file, load_sample_groups
from .reports import Report, write_report, resolve_cache_dir

__all__ = ['load_group_file', 'save_group_file', 'load_sample_groups',
           'Report', 'write_report', 'resolve_cache_dir']
