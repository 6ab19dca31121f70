"""Partition functions of multi-spin systems."""

import json as _json

from ._multispin import (  # noqa: F401
    SpinSystem,
    approximate,
    build_ising,
    build_matching_tilt,
    exact,
    moments,
    scan_zeros,
    set_thread_count,
    validate,
    zero_free_radius,
)


def load(path):
    with open(path) as fh:
        return from_dict(_json.load(fh))


def from_dict(doc):
    if isinstance(doc, dict) and "model" in doc and "spaces" not in doc:
        doc = doc["model"]
    return SpinSystem.from_json(_json.dumps(doc))
