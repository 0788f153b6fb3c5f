"""PASS/FAIL lines for acceptance criteria, printed in the pytest summary."""

import sys

LINES = []


def verdict(criterion: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} [{criterion}] {detail}"
    LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)
    return ok
