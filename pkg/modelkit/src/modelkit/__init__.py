"""Offline toolkit for the qqmatch engine.

Trains the twin LSTM on labeled question pairs, exports weights into
the engine's "SLW1" container plus a token-index file, precomputes
sentence-embedding cache files, and serves the /embed HTTP sidecar.
The engine is consumed strictly through its external surfaces: its CLI
(for text preprocessing), its file formats, and its wire protocol.
"""

__version__ = "0.1.0"
