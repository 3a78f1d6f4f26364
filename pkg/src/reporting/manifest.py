"""
Run manifest
Records what a run wrote, with sizes and checksums, and whether it finished
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Dict, Optional, Union

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class RunStatus(Enum):
    COMPLETE = "complete"
    PARTIAL = "partial"     # some artifacts written before a failure
    FAILED = "failed"


@dataclass
class ArtifactRecord:
    bytes: int
    sha256: str


@dataclass
class RunManifest:
    experiment: str
    config_hash: Optional[str] = None
    seed: Optional[int] = None
    transport: Optional[str] = None
    status: RunStatus = RunStatus.COMPLETE
    error: Optional[str] = None
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))
    artifacts: Dict[str, ArtifactRecord] = field(default_factory=dict)

    def add(self, path: Union[str, Path]) -> None:
        path = Path(path)
        data = path.read_bytes()
        self.artifacts[path.name] = ArtifactRecord(len(data), hashlib.sha256(data).hexdigest())

    def fail(self, error: BaseException) -> None:
        self.status = RunStatus.PARTIAL if self.artifacts else RunStatus.FAILED
        self.error = f"{type(error).__name__}: {error}"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["status"] = self.status.value
        return out

    def write(self, out_dir: Union[str, Path]) -> Path:
        from src import __version__

        path = Path(out_dir) / MANIFEST_NAME
        payload = {"package_version": __version__, **self.to_dict()}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        logger.info(f"Manifest written to {path} (status: {self.status.value})")
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        data.pop("package_version", None)
        data["status"] = RunStatus(data["status"])
        data["artifacts"] = {k: ArtifactRecord(**v) for k, v in data.get("artifacts", {}).items()}
        return cls(**data)
