import http.server
import json
import sys
import threading
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qqmatch.fuzzy import FuzzyConfig
from qqmatch.index import Resources, build_index
from qqmatch.testing import (
    fixture_corpus,
    fixture_meta_model,
    fixture_table,
    fixture_weights,
    sentence_vector,
    write_fixture_tree,
)
from qqmatch.textnorm import NormalizationConfig

EMBED_DIM = 12


class _EmbedHandler(http.server.BaseHTTPRequestHandler):
    """Stub sidecar speaking the /embed protocol over the fixture embedder."""

    def do_POST(self):
        if self.path != "/embed":
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            body = json.loads(self.rfile.read(length))
            texts = body["texts"]
            vectors = [[float(x) for x in sentence_vector(t, EMBED_DIM)] for t in texts]
        except (json.JSONDecodeError, KeyError, TypeError):
            self.send_error(400)
            return
        out = json.dumps({"vectors": vectors, "dim": EMBED_DIM}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(out)))
        self.end_headers()
        self.wfile.write(out)

    def log_message(self, *args):
        pass


@pytest.fixture(scope="session")
def embed_server():
    server = http.server.ThreadingHTTPServer(("127.0.0.1", 0), _EmbedHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


@pytest.fixture(scope="session")
def norm_config():
    return NormalizationConfig.default()


@pytest.fixture(scope="session")
def table():
    return fixture_table()


@pytest.fixture(scope="session")
def weights():
    return fixture_weights()


@pytest.fixture(scope="session")
def corpus():
    return fixture_corpus()


@pytest.fixture(scope="session")
def resources(norm_config, table, weights):
    return Resources(
        norm_config=norm_config,
        table=table,
        weights_unnorm=weights,
        weights_norm=weights,
        fuzzy_config=FuzzyConfig(),
        meta_m1=fixture_meta_model("M1"),
        meta_m5=fixture_meta_model("M5"),
    )


@pytest.fixture(scope="session")
def built_index(corpus, resources):
    return build_index(corpus, resources)


@pytest.fixture()
def fixture_tree(tmp_path):
    return write_fixture_tree(tmp_path / "assets")
