#!/usr/bin/env python3
"""Write the demo resource tree (fixture table, weights, corpus, meta
models, sentence cache, engine config) and build the index.

Usage: python scripts/make_fixtures.py [OUTPUT_DIR]

Afterwards:
    qqmatch --config OUTPUT_DIR/config.json query "what is cost for factnol trading"
    qqmatch --config OUTPUT_DIR/config.json serve
"""

import sys
from pathlib import Path

from qqmatch.cli import main as qqmatch_main
from qqmatch.testing import write_fixture_tree


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("assets/demo")
    config_path = write_fixture_tree(out)
    print(f"wrote resources under {out}")
    code = qqmatch_main(["--config", str(config_path), "index"])
    if code != 0:
        return code
    print(f"config: {config_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
