"""Dataset and result files.

Datasets are JSON with fixed key order: ``n``, ``ell``, ``graph``
(``n`` and sorted ``edges``), ``observations`` (a list of
``[pair_index, sign]`` entry lists), and optionally ``ground_truth``
(``q`` and ``weights``).  Serialization is canonical: loading a dataset
and saving it again reproduces the bytes, which keeps seeded pipelines
reproducible at the file level.
"""

import json

import numpy as np

from .errors import ValidationError
from .graphs import ComparisonGraph
from .model import MixedMNLModel, ObservationBatch


def dataset_to_dict(batch, model=None):
    graph = batch.graph
    observations = [
        [[int(k), int(s)] for k, s in zip(row_idx, row_sgn)]
        for row_idx, row_sgn in zip(batch.pair_indices, batch.signs)
    ]
    out = {
        "n": graph.n_items,
        "ell": batch.ell,
        "graph": {
            "n": graph.n_items,
            "edges": [[int(i), int(j)] for i, j in graph.edges],
        },
        "observations": observations,
    }
    if model is not None:
        out["ground_truth"] = {
            "q": [float(v) for v in model.mixture],
            "weights": [[float(v) for v in row] for row in model.weights],
        }
    return out


def dataset_from_dict(data):
    """Rebuild (batch, model-or-None) from a parsed dataset dict."""
    try:
        n = int(data["n"])
        ell = int(data["ell"])
        graph = ComparisonGraph(int(data["graph"]["n"]), data["graph"]["edges"])
        observations = data["observations"]
    except (KeyError, TypeError) as err:
        raise ValidationError(f"malformed dataset: {err}") from err
    if graph.n_items != n:
        raise ValidationError("dataset n and graph n disagree")
    try:
        entries = np.asarray(observations, dtype=np.int64)
    except ValueError as err:
        raise ValidationError(f"malformed observations: {err}") from err
    if entries.size == 0:
        entries = np.empty((0, ell, 2), dtype=np.int64)
    if entries.ndim != 3 or entries.shape[1:] != (ell, 2):
        raise ValidationError("every observation needs exactly ell [pair, sign] entries")
    batch = ObservationBatch(graph, entries[:, :, 0], entries[:, :, 1])
    model = None
    if "ground_truth" in data:
        truth = data["ground_truth"]
        try:
            model = MixedMNLModel(truth["weights"], truth["q"])
        except (KeyError, TypeError) as err:
            raise ValidationError(f"malformed ground truth: {err}") from err
    return batch, model


def save_dataset(path, batch, model=None):
    with open(path, "w") as fh:
        json.dump(dataset_to_dict(batch, model), fh, separators=(",", ":"))
        fh.write("\n")


def load_dataset(path):
    with open(path) as fh:
        return dataset_from_dict(json.load(fh))


def results_to_dict(estimates):
    return {
        "q_hat": [float(v) for v in estimates.mixture],
        "w_hat": [[float(v) for v in row] for row in estimates.weights],
        "p_hat": [[float(v) for v in row] for row in estimates.outcome_matrix],
        "diagnostics": jsonable(estimates.diagnostics),
    }


def save_results(path, estimates):
    save_json(path, results_to_dict(estimates))


def save_json(path, payload):
    with open(path, "w") as fh:
        json.dump(jsonable(payload), fh, indent=2, sort_keys=False)
        fh.write("\n")


def jsonable(value):
    """Recursively convert numpy scalars/arrays into JSON-ready types."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value
