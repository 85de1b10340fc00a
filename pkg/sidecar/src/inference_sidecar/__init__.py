"""Local inference sidecar for span-sleuth.

Serves the three model capabilities the detection pipeline consumes --
semantic role labeling (``POST /v1/srl``), dependency parsing
(``POST /v1/depparse``), and natural language inference
(``POST /v1/nli``) -- plus a ``GET /healthz`` probe, over plain JSON
HTTP.  A fixture recorder is included so live responses can be captured
into the exact cache layout the pipeline replays offline.
"""

from inference_sidecar.models import (
    ModelLoadError,
    RuleDepparseModel,
    RuleNliModel,
    RuleSrlModel,
)
from inference_sidecar.recorder import RecordingSummary, record_fixtures
from inference_sidecar.registry import ModelHandle, ModelRegistry
from inference_sidecar.service import make_server, serve

__version__ = "0.1.0"

__all__ = [
    "ModelHandle",
    "ModelLoadError",
    "ModelRegistry",
    "RecordingSummary",
    "RuleDepparseModel",
    "RuleNliModel",
    "RuleSrlModel",
    "make_server",
    "record_fixtures",
    "serve",
    "__version__",
]
