"""Shared fixtures: parsed corpus, record/replay oracle rig, fixture paths."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from domainforge.oracle_client import OracleClient, OracleConfig, Transcript
from domainforge.pddl_core import parse_domain, parse_problem

from scripted import ScriptedTransport

FIXTURES = Path(__file__).parent / "fixtures"


def forbid_network(url, payload, headers, timeout):
    raise AssertionError(f"network touched during replay: {url}")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def corpus_domains():
    domains = {}
    for f in sorted((FIXTURES / "corpus" / "domains").glob("*.pddl")):
        d = parse_domain(f.read_text())
        domains[d.name] = d
    return domains


@pytest.fixture(scope="session")
def blocksworld(corpus_domains):
    return corpus_domains["blocksworld"]


@pytest.fixture(scope="session")
def kitchen(corpus_domains):
    return corpus_domains["kitchen_desk"]


def load_problem(name: str, dom):
    text = (FIXTURES / "corpus" / "problems" / f"{name}.pddl").read_text()
    return parse_problem(text, dom)


@pytest.fixture(scope="session")
def kitchen_serve(kitchen):
    return load_problem("kitchen_serve", kitchen)


@pytest.fixture
def oracle_rig(tmp_path):
    """Factory for (record client, replay-client factory) over one transcript.

    The record client talks to a ScriptedTransport; replay clients get a
    transport that fails the test on any network attempt.
    """

    def make(responder, **overrides):
        path = tmp_path / "transcript.jsonl"
        record_cfg = OracleConfig(mode="record", **overrides)
        record = OracleClient(record_cfg, Transcript(path), ScriptedTransport(responder))

        def replay() -> OracleClient:
            replay_cfg = OracleConfig(mode="replay", **overrides)
            return OracleClient(replay_cfg, Transcript(path), forbid_network)

        return record, replay

    return make
