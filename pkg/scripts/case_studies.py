"""Regenerate the case-study fixtures and show their verdicts.

Writes golden ``.monitor``/``.dot`` files and seeded conforming and mutated
traces under ``fixtures/``, then runs ``cesc check`` over every trace. Use
``--check-only`` to leave the fixtures untouched.
"""

import argparse
import glob
import os
import sys

from cesc.cli import main as cesc

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir, "fixtures")
CASES = ("ocp_simple_read", "ocp_burst_read", "amba_ahb")
OTHERS = ("handshake", "multiclock_read", "req_grant_assert", "write_or_read", "beat_loop")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--check-only", action="store_true")
    args = ap.parse_args()
    status = 0
    for name in CASES + OTHERS:
        spec = os.path.join(ROOT, name + ".cesc")
        traces = os.path.join(ROOT, "traces")
        if not args.check_only:
            golden = os.path.join(ROOT, "golden", name)
            cesc(["synth", spec, "-o", golden + ".monitor", "--dot", golden + ".dot"])
            cesc(["gen", spec, "--conforming", "2", "--seed", str(args.seed), "-o", traces])
            cesc(["gen", spec, "--mutated", "4", "--seed", str(args.seed), "-o", traces])
        for path in sorted(glob.glob(os.path.join(traces, name + ".*.trace"))):
            want = 0 if ".mutated." not in path and "resp_before_accept" not in path else 1
            print(f"== {os.path.basename(path)} (expect exit {want})")
            got = cesc(["check", spec, path])
            if got != want:
                print(f"!! exit {got}")
                status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
