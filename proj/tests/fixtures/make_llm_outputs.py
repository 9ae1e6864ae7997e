#!/usr/bin/env python3
# Copyright 2026 The Mist Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the model-output fixtures used by the extraction tests.

Each NN.txt is a completion in one of several wrappings; NN.expected.json is
the list of statements embedded in it, written down before wrapping.
"""

import json
import pathlib
import random

STATEMENTS = [
    "CREATE TABLE t0 (c0 INTEGER PRIMARY KEY, c1 TEXT, c2 REAL);",
    "CREATE TABLE t1 (a INTEGER, b TEXT DEFAULT 'x;y');",
    "INSERT INTO t0 (c0, c1, c2) VALUES (1, 'alpha', 1.5), (2, 'beta', -3.25);",
    "INSERT INTO t1 VALUES (7, 'semi;colon'), (8, 'dash--dash');",
    "UPDATE t0 SET c1 = upper(c1) WHERE c0 > 1;",
    "DELETE FROM t1 WHERE b LIKE '%;%';",
    "SELECT c0, c1 FROM t0 ORDER BY c0 DESC;",
    "SELECT count(*) FROM t0 JOIN t1 ON t0.c0 = t1.a;",
    "SELECT c1 || '--' || c2 FROM t0;",
    "WITH cte AS (SELECT c0 FROM t0) SELECT * FROM cte;",
    "CREATE INDEX idx0 ON t0 (c1);",
    "CREATE VIEW v0 AS SELECT c0, c2 FROM t0 WHERE c2 IS NOT NULL;",
    "ALTER TABLE t1 ADD COLUMN c TEXT;",
    "DROP TABLE IF EXISTS t9;",
    "PRAGMA integrity_check;",
    "EXPLAIN QUERY PLAN SELECT * FROM t0 WHERE c0 = 1;",
    "BEGIN;",
    "COMMIT;",
    "ANALYZE;",
    "SELECT \"weird;name\" FROM (SELECT 1 AS \"weird;name\");",
    "SELECT CASE WHEN c2 > 0 THEN 'pos' ELSE 'neg' END FROM t0;",
    "CREATE TRIGGER trg0 AFTER INSERT ON t0 BEGIN UPDATE t1 SET a = a + 1; END;",
    "CREATE TRIGGER trg1 BEFORE DELETE ON t1 BEGIN SELECT CASE WHEN old.a < 0 THEN RAISE(ABORT, 'no') END; END;",
    "select c0 from t0 where c1 = 'lower;case';",
    "SELECT c0,\n       c1\nFROM t0\nWHERE c2 > 0;",
    "INSERT INTO t0 (c0, c1, c2)\nVALUES (10, 'multi\nline', 0.5);",
    "SELECT sum(c2) OVER (PARTITION BY c1 ORDER BY c0) FROM t0;",
    "SELECT x'00ff', 1e10, -0.0;",
]

PROSE_BEFORE = [
    "Here is the test case you asked for.",
    "Sure! The following statements exercise a few sqlite features:",
    "Below you will find the generated test.",
    "Of course. I kept the schema small.",
]
PROSE_AFTER = [
    "Hope this helps.",
    "Let me know if you need more cases; happy testing!",
    "Note: these run on sqlite 3.37 or newer.",
    "The last query checks ordering.",
]
COMMENTS = [
    "-- schema",
    "-- populate the tables",
    "/* queries start here */",
    "-- edge cases with quotes; and dashes",
    "/* note */",
]


def fenced(stmts, rng, tag="sql"):
    body = []
    for s in stmts:
        if rng.random() < 0.4:
            body.append(rng.choice(COMMENTS))
        line = s
        if rng.random() < 0.2 and "\n" not in s:
            line = s + " -- trailing remark"
        body.append(line)
    return ["```" + tag] + body + ["```"]


def wrap(stmts, style, rng):
    lines = []
    if style == "fenced":
        lines += fenced(stmts, rng)
    elif style == "prose_fenced":
        lines += [rng.choice(PROSE_BEFORE), ""] + fenced(stmts, rng) + ["", rng.choice(PROSE_AFTER)]
    elif style == "two_blocks":
        half = max(1, len(stmts) // 2)
        lines += [rng.choice(PROSE_BEFORE)] + fenced(stmts[:half], rng)
        lines += ["", "And the queries:", ""] + fenced(stmts[half:], rng, tag="")
        lines += [rng.choice(PROSE_AFTER)]
    elif style == "bare":
        for s in stmts:
            if rng.random() < 0.5:
                lines.append(rng.choice(COMMENTS))
            lines.append(s)
    elif style == "prose_bare":
        lines.append(rng.choice(PROSE_BEFORE))
        lines += stmts
        lines.append(rng.choice(PROSE_AFTER))
    elif style == "unterminated":
        # the last statement loses its semicolon but the fence closes it
        body = stmts[:-1] + [stmts[-1][:-1]]
        lines += [rng.choice(PROSE_BEFORE), "```sql"] + body + ["```"]
    return "\n".join(lines) + "\n"


def main():
    out = pathlib.Path(__file__).parent / "llm_outputs"
    out.mkdir(exist_ok=True)
    rng = random.Random(20260501)
    styles = ["fenced", "prose_fenced", "two_blocks", "bare", "prose_bare", "unterminated"]
    for n in range(50):
        k = rng.randint(1, 8)
        stmts = rng.sample(STATEMENTS, k)
        style = styles[n % len(styles)]
        if style == "two_blocks" and k < 2:
            stmts = rng.sample(STATEMENTS, 2)
        if style == "unterminated":
            # a trailing statement without ';' must be a single line of plain code
            stmts = [s for s in stmts if "\n" not in s and not s.startswith("CREATE TRIGGER")]
            if not stmts:
                stmts = [STATEMENTS[6]]
        (out / f"{n:02d}.txt").write_text(wrap(stmts, style, rng))
        (out / f"{n:02d}.expected.json").write_text(json.dumps(stmts, indent=2) + "\n")


if __name__ == "__main__":
    main()
