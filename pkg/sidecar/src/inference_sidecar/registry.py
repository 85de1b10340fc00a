"""Model registry: which checkpoints are loaded and how requests map to them.

The registry mirrors the deployment's model matrix -- an English SRL
model, a multilingual SRL model, an Arabic dependency parser, and one NLI
model -- as four handle slots plus a device string.  Slots stay ``None``
until :meth:`ModelRegistry.load` runs, and only for capabilities that were
configured; the service answers 503 before load and 501 for a capability
whose slot is empty.  Each handle carries its own lock so one underlying
model never runs two inferences concurrently, while distinct models still
serve in parallel.
"""

from __future__ import annotations

import threading
from collections.abc import Mapping
from typing import Callable

from inference_sidecar.models import (
    ModelLoadError,
    RuleDepparseModel,
    RuleNliModel,
    RuleSrlModel,
    load_transformers_nli,
)

CAPABILITIES = ("srl", "depparse", "nli")

_ENGINES = ("builtin", "transformers")

_CONFIG_KEYS = frozenset({"engine", "capabilities", "checkpoints", "device"})


class ModelHandle:
    """One loaded model: a name for health reporting and a serialized
    ``run`` so the underlying model sees at most one inference at a time."""

    def __init__(self, name: str, fn: Callable):
        self.name = name
        self._fn = fn
        self._lock = threading.Lock()

    def run(self, *args):
        with self._lock:
            return self._fn(*args)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"ModelHandle({self.name!r})"


class ModelRegistry:
    """Slots for the four deployment models, filled by :meth:`load`.

    Config keys (all optional):

    - ``engine``: ``builtin`` (default) or ``transformers``;
    - ``capabilities``: subset of ``srl``, ``depparse``, ``nli`` to load
      (default: all three);
    - ``checkpoints``: mapping of capability to local checkpoint path,
      required for the ``transformers`` engine;
    - ``device``: inference device string, default ``cpu``.
    """

    def __init__(self, config: Mapping | None = None):
        config = dict(config or {})
        unknown = set(config) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown registry config key(s): {sorted(unknown)}")

        self._engine = config.get("engine", "builtin")
        if self._engine not in _ENGINES:
            raise ValueError(
                f"engine must be one of {_ENGINES}, got {self._engine!r}"
            )

        capabilities = config.get("capabilities", list(CAPABILITIES))
        if isinstance(capabilities, str) or not isinstance(capabilities, (list, tuple)):
            raise ValueError("capabilities must be a list of capability names")
        bad = set(capabilities) - set(CAPABILITIES)
        if bad:
            raise ValueError(f"unknown capability name(s): {sorted(bad)}")
        self._capabilities = tuple(c for c in CAPABILITIES if c in set(capabilities))

        checkpoints = config.get("checkpoints", {})
        if not isinstance(checkpoints, Mapping):
            raise ValueError("checkpoints must be a mapping of capability to path")
        self._checkpoints = dict(checkpoints)

        self.device = str(config.get("device", "cpu"))

        self.srl_en: ModelHandle | None = None
        self.srl_multi: ModelHandle | None = None
        self.depparse_ar: ModelHandle | None = None
        self.nli: ModelHandle | None = None
        self._loaded = False

    @property
    def loaded(self) -> bool:
        return self._loaded

    @property
    def capabilities(self) -> tuple[str, ...]:
        return self._capabilities

    def load(self) -> "ModelRegistry":
        """Construct every configured model; idempotent."""
        if self._loaded:
            return self
        if "srl" in self._capabilities:
            self.srl_en = ModelHandle("builtin-srl-en-v1", RuleSrlModel())
            self.srl_multi = ModelHandle("builtin-srl-multi-v1", RuleSrlModel())
        if "depparse" in self._capabilities:
            self.depparse_ar = ModelHandle("builtin-depparse-ar-v1", RuleDepparseModel())
        if "nli" in self._capabilities:
            if self._engine == "transformers":
                checkpoint = self._checkpoints.get("nli")
                if not checkpoint:
                    raise ModelLoadError(
                        "engine 'transformers' needs checkpoints.nli, none configured"
                    )
                fn = load_transformers_nli(str(checkpoint), device=self.device)
                self.nli = ModelHandle(f"transformers-nli:{checkpoint}", fn)
            else:
                self.nli = ModelHandle("builtin-nli-v1", RuleNliModel())
        self._loaded = True
        return self

    def model_names(self) -> list[str]:
        """Names of exactly the loaded models, in slot order."""
        slots = (self.srl_en, self.srl_multi, self.depparse_ar, self.nli)
        return [handle.name for handle in slots if handle is not None]

    def handle_for(self, capability: str, lang: str = "EN") -> ModelHandle | None:
        """The handle serving ``capability`` for ``lang``, or ``None`` when
        that capability is not loaded."""
        if capability == "srl":
            if lang.upper() == "EN" and self.srl_en is not None:
                return self.srl_en
            return self.srl_multi
        if capability == "depparse":
            return self.depparse_ar
        if capability == "nli":
            return self.nli
        return None
