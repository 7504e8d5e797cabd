import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from .corpus import DEFAULT_SIZE_CAP
from .dataset import DEFAULT_GROUPS, KeywordGroupConfig
from .errors import ParseError
from .models import DetectionCriterion, Language

load_dotenv()  # loads .env file into environment

logger = logging.getLogger(__name__)

# Environment configuration
LOG_LEVEL = os.getenv('CITESCAN_LOG_LEVEL', 'INFO')
LOG_FILE = os.getenv('CITESCAN_LOG_FILE')
DEFAULT_JOBS = int(os.getenv('CITESCAN_JOBS', '1'))


def get_output_path() -> Path:
    """Get the output directory, creating it on demand"""
    path = Path(os.getenv('CITESCAN_OUTPUT_DIR', './output'))
    path.mkdir(parents=True, exist_ok=True)
    return path


class PipelineConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', protected_namespaces=())

    corpus_paths: List[Path] = []
    extension_overrides: Dict[str, Language] = {}
    groups: Dict[str, KeywordGroupConfig] = Field(default_factory=lambda: dict(DEFAULT_GROUPS))
    criterion: DetectionCriterion = DetectionCriterion()
    model_path: Optional[Path] = None
    lexicon_dir: Optional[Path] = None
    seed: int = 42
    output_dir: Optional[Path] = None
    size_cap: int = Field(default=DEFAULT_SIZE_CAP, gt=0)
    jobs: int = Field(default=DEFAULT_JOBS, ge=1)
    epochs: int = Field(default=5, ge=1)
    folds: int = Field(default=10, ge=2)
    min_count: int = Field(default=20, ge=1)
    log_level: str = LOG_LEVEL

    def resolved_output_dir(self) -> Path:
        if self.output_dir is None:
            return get_output_path()
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir


def load_config(path: Optional[Path] = None) -> PipelineConfig:
    """Load a TOML or JSON config file; no path gives the defaults"""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        if path.suffix.lower() == '.json':
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        else:
            with open(path, 'rb') as f:
                data = tomllib.load(f)
    except ValueError as e:
        raise ParseError(f"invalid config file: {e}", path=str(path))

    # [groups.<keyword>] sections name their keyword by key
    for keyword, group in data.get('groups', {}).items():
        if isinstance(group, dict):
            group.setdefault('keyword', keyword)

    config = PipelineConfig(**data)
    logger.info(f"Loaded configuration from {path}")
    return config
