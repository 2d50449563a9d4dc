import socket
import threading
import time

import httpx
import pytest
import uvicorn

from modelkit.embedder import make_embedder
from modelkit.sanity import synthetic_pairs
from modelkit.siamese_train import TrainingRun, train_siamese
from modelkit.sidecar import create_app

EMBED_MODEL = "hash:16"


@pytest.fixture(scope="session")
def toy_artifacts(tmp_path_factory):
    """Train the toy twin LSTM once per session; reused by fidelity tests."""
    work = tmp_path_factory.mktemp("toy_artifacts")
    train_rows, eval_rows = synthetic_pairs(60, 20, seed=1)
    pairs = work / "pairs.tsv"
    pairs.write_text(
        "\n".join(f"{a}\t{b}\t{label}" for a, b, label in train_rows) + "\n", encoding="utf-8"
    )
    run = TrainingRun(
        base_pairs=pairs,
        out_unnorm=work / "siamese_unnorm.slw",
        out_norm=work / "siamese_norm.slw",
        out_token_index=work / "tokens.txt",
        out_word_table=work / "table.vec",
        epochs=2,
        batch_size=16,
        seed=3,
        seq_len=8,
        embed_dim=8,
        hidden_dim=4,
    )
    summary = train_siamese(run)
    return {"dir": work, "run": run, "summary": summary, "eval_rows": eval_rows}


@pytest.fixture(scope="session")
def sidecar_url():
    """Real HTTP sidecar (uvicorn in a thread) over the hash embedder."""
    app = create_app(make_embedder(EMBED_MODEL))
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    url = f"http://127.0.0.1:{port}"
    deadline = time.time() + 15
    while time.time() < deadline:
        try:
            httpx.post(f"{url}/embed", json={"texts": []}, timeout=1.0).raise_for_status()
            break
        except httpx.HTTPError:
            time.sleep(0.05)
    else:
        raise RuntimeError("sidecar did not come up")
    yield url
    server.should_exit = True
