"""Type dependency graph extraction and neural type inference.

Thin wrapper over the compiled core. JSON-string returns are parsed here so
callers get plain dicts/lists.
"""

import json

try:
    from . import _typegraph as _core
except ImportError:  # running against a plain cmake build dir
    import _typegraph as _core

tokenize_identifier = _core.tokenize_identifier
cli = _core.cli


def extract_graph(source, project_id="py"):
    return json.loads(_core.extract_graph(source, project_id))


def train(corpus_dir, k=6, dim=32, seed=0, max_epochs=100, ablation="full"):
    return json.loads(_core.train(corpus_dir, k, dim, seed, max_epochs, ablation))


def evaluate(checkpoint, corpus_dir, split="test"):
    return json.loads(_core.evaluate(json.dumps(checkpoint), corpus_dir, split))


def predict(checkpoint, source, project_id="py"):
    return json.loads(_core.predict(json.dumps(checkpoint), source, project_id))
