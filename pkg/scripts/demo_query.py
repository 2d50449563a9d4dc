#!/usr/bin/env python3
"""End-to-end demo: build the fixture resources in a temp directory and
run a few queries, printing the engine's JSON output for each.

Usage: python scripts/demo_query.py
"""

import sys
import tempfile
from pathlib import Path

from qqmatch.cli import main as qqmatch_main
from qqmatch.testing import write_fixture_tree

QUERIES = [
    "What is a mutual fund?",
    "what is cost for factnol trading",
    "how do i open an IRA?",
    "completely unrelated gibberish zzz",
]


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        config = write_fixture_tree(Path(tmp) / "demo")
        if qqmatch_main(["--config", str(config), "index"]) != 0:
            return 1
        for query in QUERIES:
            print(f"\n>>> {query}")
            code = qqmatch_main(["--config", str(config), "query", query, "--top-k", "2"])
            if code != 0:
                return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
