import json

import numpy as np
import pytest

from denoisekit.rng import make_rng, standard_normal


@pytest.fixture
def seeded_image():
    """Smooth 32x32 test image with mild seeded noise, values in [0, 1]."""
    rng = make_rng(2024)
    r = np.linspace(0.0, 1.0, 32)
    base = 0.4 + 0.3 * np.outer(np.sin(2.6 * r), np.cos(3.1 * r))
    return np.clip(base + 0.05 * standard_normal(rng, (32, 32)), 0.0, 1.0)


@pytest.fixture
def write_config(tmp_path):
    """Dump a dict as JSON into the test's temp dir, returning the path."""

    def _write(doc, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return _write
