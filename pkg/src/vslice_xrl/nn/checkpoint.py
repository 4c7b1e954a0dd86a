"""JSON checkpoint format for dense networks.

A network document looks like::

    {"format": "vslice-densenet/1",
     "layers": [{"shape": [93, 256], "activation": "relu"}, ...],
     "params": [w0..., b0..., w1..., ...]}

Floats are written with Python's shortest round-trip repr, so save -> load -> save
is byte-identical.
"""
import json

import numpy as np

from .dense import DenseNet

FORMAT = "vslice-densenet/1"


def net_to_dict(net: DenseNet) -> dict:
    return {
        "format": FORMAT,
        "layers": [{"shape": list(W.shape), "activation": a} for W, a in zip(net.weights, net.activations)],
        "params": net.flat().tolist(),
    }


def net_from_dict(doc: dict) -> DenseNet:
    if doc.get("format") != FORMAT:
        raise ValueError(f"unsupported network format {doc.get('format')!r}")
    flat = np.array(doc["params"], dtype=np.float64)
    layers, pos = [], 0
    for spec in doc["layers"]:
        n_in, n_out = spec["shape"]
        W = flat[pos:pos + n_in * n_out].reshape(n_in, n_out)
        pos += n_in * n_out
        b = flat[pos:pos + n_out]
        pos += n_out
        layers.append((W, b, spec["activation"]))
    if pos != flat.size:
        raise ValueError("parameter count does not match layer shapes")
    return DenseNet(layers)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def save_net(net: DenseNet, path):
    with open(path, "w") as fh:
        fh.write(dumps(net_to_dict(net)))


def load_net(path) -> DenseNet:
    with open(path) as fh:
        return net_from_dict(json.load(fh))
