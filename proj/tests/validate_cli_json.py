#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Runs every dao2 subcommand with --format json and validates the output."""

import json
import subprocess
import sys

import jsonschema

RUNS = [
    (["demo"], 0),
    (["demo", "--mode", "plain"], 0),
    (["demo", "--n1", "5", "--n2", "4", "--t", "3"], 0),
    (["demo", "--t", "4", "--n1", "3"], 2),
    (["bench", "--n", "3,5", "--reps", "2"], 0),
    (["depth", "--depth", "12", "--reps", "3"], 0),
    (["attack", "--scenario", "none"], 0),
    (["attack", "--scenario", "bad-dkg-share"], 0),
    (["attack", "--scenario", "bad-dh-opening"], 0),
    (["attack", "--scenario", "bad-one-time-share"], 0),
    (["attack", "--scenario", "sub-threshold-sign"], 0),
    (["attack", "--scenario", "reused-tag"], 0),
    (["attack", "--scenario", "mismatched-derivation-state"], 0),
]


def main() -> int:
    binary, schema_path = sys.argv[1], sys.argv[2]
    with open(schema_path) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    failures = 0
    for args, expected_exit in RUNS:
        proc = subprocess.run([binary, *args, "--format", "json", "--seed", "11"], capture_output=True, text=True)
        label = " ".join(args)
        if proc.returncode != expected_exit:
            print(f"FAIL {label}: exit {proc.returncode}, expected {expected_exit}")
            failures += 1
            continue
        doc = json.loads(proc.stdout)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors:
            print(f"FAIL {label}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)
        if args == ["demo", "--mode", "plain"] and any("label" in e for e in doc["ledger"]):
            print("FAIL demo --mode plain: ledger entry carries a label")
            failures += 1
        if not errors:
            print(f"ok   {label}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
