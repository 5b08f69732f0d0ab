"""Utility functions for the mhdlayer lab."""

from .provenance import (
    build_manifest,
    get_library_versions,
    get_platform_info,
    write_manifest,
)

__all__ = [
    "build_manifest",
    "get_library_versions",
    "get_platform_info",
    "write_manifest",
]
