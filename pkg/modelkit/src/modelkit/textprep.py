"""Route texts through the engine's preprocessing pipeline.

The engine's CLI is the contract: one JSON object per input line from
`preprocess --stdin`.  Re-implementing the normalization rules here
would drift; shelling out cannot.
"""

from __future__ import annotations

import json
import subprocess
import sys

DEFAULT_CMD = (sys.executable, "-m", "qqmatch.cli")


def preprocess_texts(
    texts: list[str],
    cmd: tuple[str, ...] = DEFAULT_CMD,
    config: str | None = None,
) -> list[dict]:
    """Return one {"raw", "unnormalized", "normalized", ...} dict per text."""
    if not texts:
        return []
    args = list(cmd)
    if config:
        args += ["--config", config]
    args += ["preprocess", "--stdin"]
    payload = "\n".join(t.replace("\n", " ").replace("\r", " ") for t in texts)
    proc = subprocess.run(
        args, input=payload, capture_output=True, text=True, check=False
    )
    if proc.returncode != 0:
        raise RuntimeError(f"engine preprocess failed ({proc.returncode}): {proc.stderr.strip()}")
    rows = [json.loads(line) for line in proc.stdout.splitlines() if line.strip()]
    if len(rows) != len(texts):
        raise RuntimeError(
            f"engine preprocess returned {len(rows)} rows for {len(texts)} texts"
        )
    return rows
