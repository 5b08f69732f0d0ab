"""Provenance helpers: library versions, platform and run manifests."""

import json
import logging
import platform
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Union

logger = logging.getLogger(__name__)

TRACKED_LIBRARIES = ("numpy", "scipy", "pandas", "tqdm")


def get_library_versions() -> Dict[str, Optional[str]]:
    """Get versions of the numerical libraries a run depends on.

    Returns:
        Mapping of library name to version string, None when not importable
    """
    from .. import __version__

    versions: Dict[str, Optional[str]] = {"mhdlayer": __version__}
    for name in TRACKED_LIBRARIES:
        try:
            module = __import__(name)
            versions[name] = getattr(module, "__version__", None)
        except ImportError:
            versions[name] = None
        except Exception as e:
            logger.warning(f"Error reading version of {name}: {e}")
            versions[name] = None
    return versions


def get_platform_info() -> Dict[str, str]:
    return {
        "python": sys.version.split()[0],
        "implementation": platform.python_implementation(),
        "system": platform.system(),
        "machine": platform.machine(),
    }


def build_manifest(
    cfg: Any, command: str, extra: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Everything needed to reproduce a run: config, its hash, seed and versions.

    Args:
        cfg: Resolved RunConfig
        command: CLI subcommand or library entry point that produced the run
        extra: Command-specific entries (fits, record paths, ...)
    """
    from ..config import config_hash

    manifest = {
        "command": command,
        "created": datetime.now(timezone.utc).isoformat(),
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "seed": cfg.io.seed,
        "versions": get_library_versions(),
        "platform": get_platform_info(),
    }
    if extra:
        manifest.update(extra)
    return manifest


def write_manifest(path: Union[str, Path], manifest: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str), encoding="utf-8")
    logger.info(f"Manifest written: {path}")
    return path
