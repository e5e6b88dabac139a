"""Versioned prompt templates with named slots.

Templates are pinned text assets: transcripts recorded against one
TEMPLATE_VERSION replay only against the same version, so any wording change
must bump the version and re-record fixtures.
"""

TEMPLATE_VERSION = "1"

PROPOSE_OPERATOR = """\
You are watching a robot manipulation demonstration.
Task instruction: {instruction}

The two attached images are consecutive keyframes {index} and {next_index} of \
{n_keyframes}. Name the single robot operator that transforms the first keyframe \
into the second, identify its preconditions and effects, and reuse the predicate \
vocabulary below whenever it fits, inventing new predicates only when necessary.

Known predicates so far:
{known_predicates}

Respond with one complete PDDL domain block that declares every predicate the \
operator mentions and contains exactly that one operator. Use the domain name \
{domain_name}. Return PDDL only.
"""

REPAIR_PDDL = """\
The PDDL you produced failed to parse or validate.

Diagnostics:
{diagnostics}

Previous attempt:
{previous}

Return the corrected PDDL only, nothing else.
"""

REVISE_DOMAIN = """\
Review the PDDL domain below, which was assembled transition-by-transition from \
a demonstration of this task: {instruction}

Enforce syntactic correctness, predicate reuse, and naming consistency: merge \
predicates that mean the same thing, normalize names, and keep every operator's \
semantics intact. Return the full revised domain as PDDL only.

{domain}
"""

GEN_TEST_PROBLEM = """\
Create one PDDL test problem for a robot manipulation domain.
Task instruction: {instruction}
Difficulty level {level} of {levels}: higher levels must require strictly longer plans.

Declared object types:
{types}

Use ONLY these predicates when writing :init and :goal:
{predicates}

Declare every object you use with a type from the list. Name the problem \
{problem_name} and target domain {domain_name}. Return the problem as PDDL only.
"""

REFINE_FROM_SOLVABILITY = """\
The domain below failed its solvability check: a classical planner could not \
solve enough of its test problems.
Task instruction: {instruction}

Planner feedback per test problem:
{feedback}

Revise the domain so the unsolved problems become solvable. Keep predicate names \
stable unless a rename is strictly required. Return the full domain as PDDL only.

{domain}
"""

VERIFY_SOLUTION = """\
Check the plan below against physical constraints and commonsense expectations.
Task instruction: {instruction}

Domain:
{domain}

Problem:
{problem}

Plan (one action per line):
{plan}

Reply with a line "VERDICT: PASS" if the plan is physically sensible, or \
"VERDICT: FAIL" followed by one line explaining each violation.
"""

REFINE_FROM_VERIFICATION = """\
A reviewer found physical or commonsense violations in a plan produced from the \
domain below.
Task instruction: {instruction}

Reviewer feedback:
{feedback}

Revise the domain to rule these violations out. Keep predicate names stable \
unless a rename is strictly required. Return the full domain as PDDL only.

{domain}
"""

GROUP_PREDICATES = """\
Sort the predicates of a robot manipulation planning domain into exactly four \
semantic groups: object categories, state or attribute indicators, spatial \
relations, and affordances.

Predicates:
{predicates}

Respond with a JSON object containing four arrays keyed "object-category", \
"state-attribute", "spatial-relation" and "affordance". Every predicate name \
must appear in exactly one array.
"""

GEN_INITIAL_PROBLEM = """\
Construct a grounded PDDL problem for the task below from the attached scene image.
Task instruction: {instruction}

The domain's predicates, organized by semantic group:
{groups}

Declared object types:
{types}

List every scene object with its type, describe the visible initial state in \
:init, and express the instruction as a conjunctive :goal. Name the problem \
{problem_name} and target domain {domain_name}. Return PDDL only.
"""

GEN_REFINED_PROBLEM = """\
Construct a grounded PDDL problem for the task below from the attached scene \
image, using the compact task-relevant domain provided.
Task instruction: {instruction}

Domain:
{domain}

List every scene object with its type, describe the visible initial state in \
:init, and express the instruction as a conjunctive :goal. Name the problem \
{problem_name} and target domain {domain_name}. Return PDDL only.
"""

EQUIV_PREDICATE = """\
Do these two planning predicates describe the same property or relation?
First: {first}
Second: {second}
Answer YES or NO on the first line, then give a one-line justification.
"""

EQUIV_OPERATOR = """\
Do these two robot operators perform the same manipulation?

First:
{first}

Second:
{second}

Answer YES or NO on the first line, then give a one-line justification.
"""
