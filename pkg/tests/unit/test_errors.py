from __future__ import annotations

import pytest

from hodgelab.errors import (
    AliasingRiskError,
    ConfigurationError,
    ConventionError,
    HodgeLabError,
    InputError,
    IntegrabilityError,
    MetricError,
    PreconditionError,
    ProductMetricError,
    SchemaError,
    SoundnessError,
    SymmetryError,
    TheoremViolationError,
    exit_code_for,
)


@pytest.mark.parametrize(
    "exc",
    [
        SchemaError("bad toml"),
        ConfigurationError("bad flag"),
        IntegrabilityError("d^2 != 0"),
        AliasingRiskError("grid too coarse"),
        ProductMetricError("coupled blocks"),
        PreconditionError("n must be 1"),
    ],
)
def test_input_problems_exit_with_one(exc):
    assert exit_code_for(exc) == 1


@pytest.mark.parametrize(
    "exc",
    [
        TheoremViolationError("identity off"),
        SoundnessError("fired but E_3"),
        ConventionError("Lambda omega != n"),
        SymmetryError("not self-adjoint"),
        RuntimeError("unexpected"),
    ],
)
def test_violations_exit_with_two(exc):
    assert exit_code_for(exc) == 2


def test_hierarchy():
    assert issubclass(ProductMetricError, MetricError)
    assert issubclass(MetricError, InputError)
    assert issubclass(SoundnessError, TheoremViolationError)
    assert issubclass(PreconditionError, HodgeLabError)
    assert not issubclass(PreconditionError, InputError)
