"""Deterministic fake LLM endpoints for recording transcripts in tests.

A ScriptedResponder recognizes each prompt template by its marker phrase and
returns canned content for the scenario under test. Wrapped in a
ScriptedTransport it stands in for the HTTP layer, so tests can run the real
record path once and then replay the captured transcript.
"""

from __future__ import annotations

import json
import re


def prompt_text(payload: dict) -> str:
    parts = payload["messages"][-1]["content"]
    return "".join(p["text"] for p in parts if p.get("type") == "text")


class ScriptedTransport:
    """Transport-compatible callable backed by a responder function."""

    def __init__(self, responder, latency: float = 0.01):
        self.responder = responder
        self.latency = latency

    def __call__(self, url, payload, headers, timeout):
        if url.endswith("/chat/completions"):
            content = self.responder(payload)
            body = json.dumps(
                {"choices": [{"message": {"role": "assistant", "content": content}}]}
            )
            return body, self.latency
        raise AssertionError(f"scripted transport got unexpected endpoint {url}")


def synonym_classes(pairs) -> dict[str, int]:
    """name -> class id for the transitive closure of synonym pairs."""
    classes: dict[str, int] = {}
    next_id = 0
    for a, b in pairs:
        ca, cb = classes.get(a), classes.get(b)
        if ca is None and cb is None:
            classes[a] = classes[b] = next_id
            next_id += 1
        elif ca is None:
            classes[a] = cb
        elif cb is None:
            classes[b] = ca
        else:
            for k, v in classes.items():
                if v == cb:
                    classes[k] = ca
    return classes


# Mirrors the authored atomic corpus under tests/fixtures/atomic/.
PRED_SYNONYMS = [
    ("on_table", "on_the_table"),
    ("in_drawer", "inside_drawer"),
    ("drawer_open", "drawer_opened"),
    ("lid_on", "lid_on_pot"),
    ("in_bowl", "bowl_contains"),
    ("table_dirty", "table_is_dirty"),
    ("folded", "is_folded"),
    ("on_rack", "on_the_rack"),
]
OP_SYNONYMS = [
    ("pick_from_table", "pick_up_from_table"),
    ("place_in_drawer", "put_in_drawer"),
    ("remove_lid", "remove_pot_lid"),
    ("put_in_bowl", "drop_in_bowl"),
    ("wipe_table", "wipe_the_table"),
    ("fold_cloth", "fold_the_cloth"),
    ("pick_from_rack", "take_from_rack"),
]

_FIRST_PRED_RE = re.compile(r"First: ([a-z0-9_\-]+)\(")
_SECOND_PRED_RE = re.compile(r"Second: ([a-z0-9_\-]+)\(")
_OP_NAME_RE = re.compile(r"^name: ([a-z0-9_\-]+)$", re.MULTILINE)
_LEVEL_RE = re.compile(r"Difficulty level (\d+) of")
_KEYFRAMES_RE = re.compile(r"keyframes (\d+) and (\d+)")
_INSTRUCTION_RE = re.compile(r"Task instruction: (.+)")


class ScriptedResponder:
    """Configurable per-scenario responder; unknown prompts raise immediately."""

    def __init__(
        self,
        fragments: dict[int, str] | None = None,
        revision: str | None = None,
        problems: dict[int, str] | None = None,
        solvability_fixes: list[str] | None = None,
        verdicts: list[str] | None = None,
        verification_fixes: list[str] | None = None,
        repairs: list[str] | None = None,
        grouping: str | None = None,
        initial_problems: dict[str, str] | None = None,
        refined_problems: dict[str, str] | None = None,
        pred_synonyms=PRED_SYNONYMS,
        op_synonyms=OP_SYNONYMS,
    ):
        self.fragments = fragments or {}
        self.revision = revision
        self.problems = problems or {}
        self.solvability_fixes = list(solvability_fixes or [])
        self.verdicts = list(verdicts or [])
        self.verification_fixes = list(verification_fixes or [])
        self.repairs = list(repairs or [])
        self.grouping = grouping
        self.initial_problems = initial_problems or {}
        self.refined_problems = refined_problems or {}
        self.pred_classes = synonym_classes(pred_synonyms)
        self.op_classes = synonym_classes(op_synonyms)
        self.stages: list[str] = []
        self.prompts: list[tuple[str, str]] = []

    # -- dispatch ------------------------------------------------------------

    def __call__(self, payload: dict) -> str:
        text = prompt_text(payload)
        stage = self.classify(text)
        self.stages.append(stage)
        self.prompts.append((stage, text))
        return getattr(self, "handle_" + stage.replace("-", "_"))(text)

    @staticmethod
    def classify(text: str) -> str:
        markers = [
            ("Name the single robot operator", "propose"),
            ("The PDDL you produced failed", "repair"),
            ("Review the PDDL domain below", "revise"),
            ("Create one PDDL test problem", "problem"),
            ("failed its solvability check", "fix-solvability"),
            ("Check the plan below", "verify"),
            ("commonsense violations in a plan", "fix-verification"),
            ("Sort the predicates", "grouping"),
            ("organized by semantic group", "initial-problem"),
            ("compact task-relevant domain", "refined-problem"),
            ("Do these two planning predicates", "equiv-pred"),
            ("Do these two robot operators", "equiv-op"),
        ]
        for marker, stage in markers:
            if marker in text:
                return stage
        raise AssertionError(f"unrecognized prompt: {text[:100]!r}")

    # -- handlers ------------------------------------------------------------

    def handle_propose(self, text: str) -> str:
        i = int(_KEYFRAMES_RE.search(text).group(1))
        return self.fragments[i]

    def handle_repair(self, text: str) -> str:
        if not self.repairs:
            raise AssertionError("unexpected repair prompt")
        return self.repairs.pop(0)

    def handle_revise(self, text: str) -> str:
        if self.revision is None:
            # identity revision: echo the embedded domain back
            start = text.index("(define")
            return text[start:]
        return self.revision

    def handle_problem(self, text: str) -> str:
        level = int(_LEVEL_RE.search(text).group(1))
        return self.problems[level]

    def handle_fix_solvability(self, text: str) -> str:
        if not self.solvability_fixes:
            raise AssertionError("unexpected solvability-refinement prompt")
        return self.solvability_fixes.pop(0)

    def handle_verify(self, text: str) -> str:
        if not self.verdicts:
            return "VERDICT: PASS"
        return self.verdicts.pop(0)

    def handle_fix_verification(self, text: str) -> str:
        if not self.verification_fixes:
            raise AssertionError("unexpected verification-refinement prompt")
        return self.verification_fixes.pop(0)

    def handle_grouping(self, text: str) -> str:
        if self.grouping is None:
            raise AssertionError("no grouping scripted")
        return self.grouping

    def _by_instruction(self, table: dict[str, str], text: str) -> str:
        instruction = _INSTRUCTION_RE.search(text).group(1).strip()
        return table[instruction]

    def handle_initial_problem(self, text: str) -> str:
        return self._by_instruction(self.initial_problems, text)

    def handle_refined_problem(self, text: str) -> str:
        return self._by_instruction(self.refined_problems, text)

    def handle_equiv_pred(self, text: str) -> str:
        a = _FIRST_PRED_RE.search(text).group(1)
        b = _SECOND_PRED_RE.search(text).group(1)
        return self._equiv(self.pred_classes, a, b)

    def handle_equiv_op(self, text: str) -> str:
        names = _OP_NAME_RE.findall(text)
        assert len(names) == 2, text
        return self._equiv(self.op_classes, names[0], names[1])

    @staticmethod
    def _equiv(classes: dict[str, int], a: str, b: str) -> str:
        same = a == b or (
            a in classes and b in classes and classes[a] == classes[b]
        )
        if same:
            return "YES - both describe the same behaviour."
        return "NO - these are different concepts."
