"""Shared configuration: defaults per module, TOML file overrides, flag overrides.

Precedence: built-in defaults < config file < command-line flags. Secrets
(API keys) come from environment variables only, never the file.

Config file grammar (TOML):

    [oracle]
    mode = "replay"            # live | record | replay
    base_url = "http://localhost:8080/v1"
    model = "gpt-4.1"
    embed_model = "stub"
    parallelism = 4
    transcript = "transcript.jsonl"

    [learn]
    k_test = 5
    theta = 0.6
    l_max = 5
    r_parse = 3

    [fusion]
    tau_p = 0.3
    tau_o = 0.3
    oracle_mode = "llm"        # llm | exact-name

    [planner]
    max_actions = 200000
    max_expansions = 1000000
    max_seconds = 60.0

    [eval]
    max_workers = 4
    min_sr = 0.0
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .domain_learn import LearnConfig
from .fusion import FusionConfig
from .oracle_client import OracleClient, OracleConfig, Transcript
from .planner import GroundLimit, SearchLimit


@dataclass(frozen=True)
class EvalSettings:
    max_workers: int = 4
    min_sr: float = 0.0


@dataclass(frozen=True)
class AppConfig:
    oracle: OracleConfig = field(default_factory=OracleConfig.from_env)
    transcript_path: str | None = None
    learn: LearnConfig = field(default_factory=LearnConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    ground_limits: GroundLimit = field(default_factory=GroundLimit)
    search_limits: SearchLimit = field(default_factory=SearchLimit)
    eval: EvalSettings = field(default_factory=EvalSettings)

    def make_oracle(self, transcript: Transcript | None = None,
                    transport=None) -> OracleClient:
        if transcript is None and self.transcript_path:
            transcript = Transcript(self.transcript_path)
        return OracleClient(self.oracle, transcript, transport)


def _take(doc: dict, section: str, keys: dict) -> dict:
    values = {}
    table = doc.get(section, {})
    for key, cast in keys.items():
        if key in table:
            values[key] = cast(table[key])
    return values


def load_config(path: str | Path | None = None) -> AppConfig:
    """Build an AppConfig from defaults, an optional TOML file, and env vars."""
    doc = {}
    if path:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)

    oracle_kwargs = _take(
        doc,
        "oracle",
        {
            "mode": str,
            "base_url": str,
            "model": str,
            "embed_model": str,
            "parallelism": int,
            "temperature": float,
            "max_tokens": int,
            "retries": int,
            "backoff_s": float,
            "timeout_s": float,
        },
    )
    oracle = OracleConfig.from_env(**oracle_kwargs)
    if os.environ.get("ORACLE_API_KEY"):
        oracle = replace(oracle, api_key=os.environ["ORACLE_API_KEY"])

    transcript_path = doc.get("oracle", {}).get("transcript")
    learn = LearnConfig(
        **_take(doc, "learn", {"k_test": int, "theta": float, "l_max": int, "r_parse": int})
    )
    fusion = FusionConfig(
        **_take(doc, "fusion", {"tau_p": float, "tau_o": float, "oracle_mode": str})
    )
    ground_limits = GroundLimit(**_take(doc, "planner", {"max_actions": int}))
    search_limits = SearchLimit(
        **_take(doc, "planner", {"max_expansions": int, "max_seconds": float})
    )
    eval_settings = EvalSettings(
        **_take(doc, "eval", {"max_workers": int, "min_sr": float})
    )
    return AppConfig(
        oracle=oracle,
        transcript_path=transcript_path,
        learn=learn,
        fusion=fusion,
        ground_limits=ground_limits,
        search_limits=search_limits,
        eval=eval_settings,
    )
