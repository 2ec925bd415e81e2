"""Shared helpers for building randomized test instances."""

import numpy as np
import pytest

from sensel import model


def rand_spd(n: int, rng: np.random.Generator, ridge: float = 0.5) -> np.ndarray:
    a = rng.normal(size=(n, n))
    return a @ a.T + ridge * np.eye(n)


def rand_correlated_noise(sizes, rng, ridge=1.0) -> model.NoiseModel:
    dim = sum(sizes)
    return model.NoiseModel.from_full(rand_spd(dim, rng, ridge), sizes)


def rand_diagonal_noise(sizes, rng, lo=0.5, hi=5.0) -> model.NoiseModel:
    blocks = [np.diag(rng.uniform(lo, hi, size=n)) for n in sizes]
    return model.NoiseModel.build(sizes, base_blocks=blocks)


def rand_scenario(
    rng: np.random.Generator,
    num_sensors: int,
    horizon: int,
    state_dim: int = 2,
    meas_dims=None,
    correlated: bool = False,
    per_step=None,
    energy=None,
    weights=None,
) -> model.Scenario:
    """Small random scenario with a stable (near-identity) transition."""
    sizes = list(meas_dims) if meas_dims is not None else [
        int(rng.integers(1, 3)) for _ in range(num_sensors)
    ]
    f = np.eye(state_dim) + 0.1 * rng.normal(size=(state_dim, state_dim))
    system = model.DynamicSystem.build(f, rand_spd(state_dim, rng))
    sensors = [
        model.SensorModel.build(
            rng.normal(size=(n, state_dim)), rng.uniform(0.0, 100.0, size=2)
        )
        for n in sizes
    ]
    noise = (
        rand_correlated_noise(sizes, rng)
        if correlated
        else rand_diagonal_noise(sizes, rng)
    )
    if per_step is None:
        per_step = [int(rng.integers(1, num_sensors + 1)) for _ in range(horizon)]
    constraints = model.ConstraintSet.build(per_step, energy=energy)
    if weights is None:
        weights = rng.uniform(0.1, 1.0, size=horizon)
    return model.make_scenario(
        system,
        sensors,
        noise,
        constraints,
        weights,
        x0=rng.normal(size=state_dim),
        p0=rand_spd(state_dim, rng),
        seed=int(rng.integers(0, 2**31)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
