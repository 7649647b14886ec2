"""Shared fixtures: toy parameters, fields and seeded generators."""

import numpy as np
import pytest

from config.presets import BUILTIN_PRESETS
from services.field_core import make_fields


@pytest.fixture
def toy_params():
    return BUILTIN_PRESETS["toy16"].params


@pytest.fixture
def toy_fields(toy_params):
    return make_fields(toy_params.q_base, toy_params.q_exp, toy_params.s)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=[(2, 1), (2, 4), (5, 1)], ids=["gf2", "gf16", "gf5"])
def base_field(request):
    p, e = request.param
    base, _ = make_fields(p, e, 2)
    return base
