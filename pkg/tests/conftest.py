import json
import math
import random
from dataclasses import replace
from pathlib import Path

import pytest

from quasi_sierpinski import closed_form
from quasi_sierpinski.fractal import HORIZONTAL, INCLINED, RatioSequence
from quasi_sierpinski.structure import Boundary, StructureConfig

ROOT = Path(__file__).resolve().parents[1]
EXAMPLE_CONFIG = ROOT / "configs" / "worked_example.json"

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def example_data():
    return json.loads(EXAMPLE_CONFIG.read_text())


@pytest.fixture(scope="session")
def example_config(example_data):
    return StructureConfig.from_dict(example_data)


def random_config(rng: random.Random, levels=None) -> StructureConfig:
    """A random admissible structure with strictly negative settlements."""
    N = levels if levels is not None else rng.randint(2, 8)
    n_sup = 2 ** (N - 1) + 1
    z1 = rng.randint(1, n_sup - 1)
    z2 = rng.randint(z1 + 1, n_sup)
    d1 = rng.uniform(-0.1, -0.01)
    d2 = d1 + rng.uniform(-0.01, 0.01)
    tan = rng.uniform(0.5, 3.0)
    base = dict(
        levels=N,
        beta=math.atan(tan),
        beta_tan=tan,
        height=rng.uniform(2000.0, 30000.0),
        load=rng.uniform(10.0, 500.0),
        area_inclined=rng.uniform(2.0, 50.0),
        modulus_inclined=rng.uniform(70.0, 210.0),
        area_horizontal=rng.uniform(0.5, 20.0),
        modulus_horizontal=rng.uniform(70.0, 210.0),
        ratios_inclined=RatioSequence(INCLINED, (1.0, *[rng.uniform(0.2, 2.0) for _ in range(N - 1)])),
        ratios_horizontal=RatioSequence(HORIZONTAL, (1.0, *[rng.uniform(0.3, 2.0) for _ in range(N - 2)])),
    )
    cfg = StructureConfig(boundary=Boundary(z1, z2, d1, d2), **base)
    delta = closed_form.support_displacements(cfg, allow_nonnegative=True)
    top = float(delta.max())
    if top >= -1e-3:
        # shifting both prescribed values shifts every settlement equally
        shift = -top - rng.uniform(1e-3, 0.02)
        cfg = replace(cfg, boundary=Boundary(z1, z2, d1 + shift, d2 + shift))
    return cfg


@pytest.fixture(scope="session")
def config_set():
    """>= 100 random admissible configs, levels cycling through 2..8."""
    rng = random.Random(20240611)
    return [random_config(rng, levels=2 + k % 7) for k in range(105)]
