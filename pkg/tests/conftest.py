import math
from pathlib import Path

import numpy as np
import pytest

from hexflow import ConformalFactor, default_base_point, load_surface

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

SURFACE_FILES = {
    ("f1", "eta0"): "f1_pants_eta0.json",
    ("f1", "eta15"): "f1_pants_eta15.json",
    ("f1", "mixed"): "f1_pants_mixed.json",
    ("f2", "eta0"): "f2_sixhex_eta0.json",
    ("f2", "eta15"): "f2_sixhex_eta15.json",
    ("f2", "mixed"): "f2_sixhex_mixed.json",
}

PROFILES = ("eta0", "eta15", "mixed")


def fixture_path(fixture: str, profile: str) -> Path:
    return FIXTURES / SURFACE_FILES[(fixture, profile)]


def load(fixture: str, profile: str):
    return load_surface(fixture_path(fixture, profile))


@pytest.fixture(scope="session")
def pants():
    return load("f1", "eta0")


@pytest.fixture(scope="session")
def pants_mixed():
    return load("f1", "mixed")


@pytest.fixture(scope="session")
def sixhex():
    return load("f2", "eta0")


@pytest.fixture(scope="session")
def sixhex_mixed():
    return load("f2", "mixed")


def reference_factor(surface) -> ConformalFactor:
    """A deterministic, mildly asymmetric admissible factor for a surface:
    the guaranteed-admissible base point stretched per component."""
    base = default_base_point(surface).alpha
    n = surface.n_boundary
    scale = 1.0 + 0.1 * np.arange(n) / max(1, n - 1)
    return ConformalFactor(base * scale)


def alpha_third() -> float:
    return math.pi / 6.0
