"""Deterministic artifact writers and the run manifest.

Floats are written with ``repr`` (shortest round-trip form) and JSON keys are
sorted, so identical results always give identical bytes. Non-finite floats
become ``null`` in JSON and ``nan``/``inf`` in CSV.
"""

import csv
import hashlib
import json
import math
import os
import platform

import numpy as np


def _plain(x):
    """Convert numpy scalars/arrays and tuples to JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, complex):
        return {"re": _plain(x.real), "im": _plain(x.imag)}
    return x


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_json(path, obj):
    text = json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def read_lines(path):
    with open(path, encoding="utf-8") as fh:
        return [ln.rstrip("\n") for ln in fh if ln.strip()]


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def library_versions():
    import pydantic
    import scipy

    from . import __version__

    return {"kerrcat": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "pydantic": pydantic.VERSION, "python": platform.python_version()}


def manifest_name(command):
    return "manifest_" + "_".join(command.split()) + ".json"


class Manifest:
    """Run manifest ``manifest_<command>.json`` in the output directory.

    Commands that share an output directory (``drb run`` then ``drb fit``)
    each keep their own manifest.

    It is written with ``status: "incomplete"`` before any computation and
    rewritten as ``"complete"`` (with output checksums) once every artifact is
    on disk. A run that dies keeps the incomplete marker and, when known, the
    error message. Timestamps and thread counts are deliberately left out.
    """

    def __init__(self, out_dir, command, config_hash, seed):
        self.out_dir = out_dir
        self.path = os.path.join(out_dir, manifest_name(command))
        self.data = {"command": command, "config_sha256": config_hash, "seed": int(seed),
                     "versions": library_versions(), "status": "incomplete", "outputs": {}}
        write_json(self.path, self.data)

    def file(self, name):
        return os.path.join(self.out_dir, name)

    def fail(self, message):
        self.data["error"] = message
        write_json(self.path, self.data)

    def complete(self, names, extra=None):
        self.data["outputs"] = {n: sha256_file(self.file(n)) for n in names}
        if extra:
            self.data["summary"] = extra
        self.data["status"] = "complete"
        write_json(self.path, self.data)
