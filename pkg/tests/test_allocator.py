"""Inversion of the force law: forward model, capacity, greedy allocation."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

import maghaptics as mh
from maghaptics.allocator import MIN_AUTHORITY, coil_authorities
from maghaptics.coils import MIDGAP_Z
from maghaptics.magnet import MagnetPose


def priority_order(stack, z):
    return sorted(range(6), key=lambda i: (abs(stack.centers_z[i] - z), i))


def random_position(rng, fmap, stack):
    r = rng.uniform(0.0, fmap.r_max)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    z = rng.uniform(stack.z_min, stack.z_max)
    return (r * np.cos(angle), r * np.sin(angle), z)


# ---------------------------------------------------------------- forward

def test_forward_zero_duties(fmap, stack):
    assert mh.forward_force(np.zeros(6), (0.02, 0.0, 0.1), fmap, stack) == 0.0


def test_forward_single_coil_on_its_midplane(fmap, stack):
    duties = np.zeros(6)
    duties[2] = 1.0
    position = (0.04, 0.0, stack.centers_z[2])
    assert abs(mh.forward_force(duties, position, fmap, stack)) < 1e-9


def test_forward_matches_direct_physics(fmap, stack, magnet):
    rng = np.random.default_rng(4)
    per_coil_bound = 0.05 * np.max(np.abs(fmap.values)) * stack.coil.max_current
    for _ in range(30):
        position = random_position(rng, fmap, stack)
        duties = rng.uniform(-1.0, 1.0, 6)
        table = mh.forward_force(duties, position, fmap, stack)
        pose = MagnetPose(position)
        direct = mh.dipole_force_z(
            magnet, pose, stack, duties * stack.coil.max_current
        )
        assert abs(table - direct) <= 6 * per_coil_bound


def test_forward_rejects_invalid_duties(fmap, stack):
    with pytest.raises(ValueError):
        mh.forward_force([2.0, 0, 0, 0, 0, 0], (0.0, 0.0, 0.1), fmap, stack)
    with pytest.raises(ValueError):
        mh.forward_force(np.zeros(5), (0.0, 0.0, 0.1), fmap, stack)


# ---------------------------------------------------------------- capacity

def test_capacity_symmetric_about_midgap(fmap, stack):
    position = (0.0, 0.0, MIDGAP_Z)
    f_min, f_max = mh.capacity(position, fmap, stack)
    assert f_min == -f_max
    g = coil_authorities(position, fmap, stack)
    assert np.abs(g[:3][::-1]) == pytest.approx(np.abs(g[3:]), rel=1e-9)
    lower_triplet = np.sum(np.abs(g[:3]))
    assert f_max == pytest.approx(
        2.0 * lower_triplet * stack.coil.max_current, rel=1e-9
    )


def test_capacity_far_above_stack_single_coil_tail(fmap, stack):
    position = (0.0, 0.0, 0.40)  # only the top coil is within table reach
    g = coil_authorities(position, fmap, stack)
    assert np.all(g[:5] == 0.0)
    expected = abs(
        mh.interpolate_g(fmap, 0.0, 0.40 - stack.centers_z[5])
    ) * stack.coil.max_current
    _, f_max = mh.capacity(position, fmap, stack)
    assert f_max == pytest.approx(expected, rel=1e-12)


def test_capacity_reached_by_saturated_duties(fmap, stack):
    rng = np.random.default_rng(6)
    for _ in range(20):
        position = random_position(rng, fmap, stack)
        g = coil_authorities(position, fmap, stack)
        duties = np.sign(g)
        _, f_max = mh.capacity(position, fmap, stack)
        assert mh.forward_force(duties, position, fmap, stack) == pytest.approx(
            f_max, rel=1e-12
        )


def test_capacity_out_of_grid(fmap, stack):
    with pytest.raises(mh.OutOfGrid):
        mh.capacity((0.095, 0.0, 0.1), fmap, stack)


# ---------------------------------------------------------------- allocate

def test_allocate_zero_force(fmap, stack):
    result = mh.allocate(0.0, (0.03, 0.01, 0.12), fmap, stack)
    assert np.all(result.duties == 0.0)
    assert result.coils_used == 0
    assert result.achieved == 0.0


def test_allocate_small_force_uses_single_nearest_coil(fmap, stack):
    rng = np.random.default_rng(8)
    for _ in range(30):
        position = random_position(rng, fmap, stack)
        g = coil_authorities(position, fmap, stack)
        order = [i for i in priority_order(stack, position[2])
                 if abs(g[i]) >= MIN_AUTHORITY]
        nearest = order[0]
        f = 0.9 * abs(g[nearest]) * stack.coil.max_current
        if f < 2e-3:
            continue
        result = mh.allocate(f, position, fmap, stack)
        assert result.coils_used == 1
        assert result.duties[nearest] != 0.0
        assert abs(mh.forward_force(result.duties, position, fmap, stack) - f) <= 1e-3


def test_allocate_infeasible_overshoot(fmap, stack):
    rng = np.random.default_rng(9)
    for _ in range(10):
        position = random_position(rng, fmap, stack)
        _, f_max = mh.capacity(position, fmap, stack)
        if f_max < 0.05:
            continue
        with pytest.raises(mh.Infeasible) as excinfo:
            mh.allocate(1.05 * f_max, position, fmap, stack)
        assert excinfo.value.residual == pytest.approx(0.05 * f_max, rel=1e-6)
        assert np.all(np.abs(excinfo.value.duties[np.nonzero(excinfo.value.duties)]) == 1.0)


@given(seed=st.integers(0, 2**31 - 1), frac=st.floats(-0.95, 0.95))
def test_allocate_round_trip(seed, frac, fmap, stack):
    rng = np.random.default_rng(seed)
    position = random_position(rng, fmap, stack)
    _, f_max = mh.capacity(position, fmap, stack)
    f = frac * f_max
    result = mh.allocate(f, position, fmap, stack)
    assert abs(mh.forward_force(result.duties, position, fmap, stack) - f) <= 1e-3
    assert abs(result.residual) <= 1e-3
    assert result.coils_used == int(np.count_nonzero(result.duties))


def test_allocate_prefix_and_saturation_structure(fmap, stack):
    rng = np.random.default_rng(10)
    checked = 0
    while checked < 200:
        position = random_position(rng, fmap, stack)
        _, f_max = mh.capacity(position, fmap, stack)
        f = rng.uniform(-0.95, 0.95) * f_max
        if abs(f) < 2e-3:
            continue
        result = mh.allocate(f, position, fmap, stack)
        g = coil_authorities(position, fmap, stack)
        order = [i for i in priority_order(stack, position[2])
                 if abs(g[i]) >= MIN_AUTHORITY]
        used = result.coils_used
        prefix = order[:used]
        # Nonzero duties occupy exactly the first `used` slots of the order.
        assert set(np.nonzero(result.duties)[0]) == set(prefix)
        # Every used coil except the last is saturated.
        for i in prefix[:-1]:
            assert abs(result.duties[i]) == 1.0
        # Each contribution pushes toward the request, never against it.
        for i in prefix:
            assert np.sign(g[i] * result.duties[i]) == np.sign(f)
        checked += 1


def test_allocate_minimal_coil_count(fmap, stack):
    """coils_used equals the shortest saturated prefix that covers |F|."""
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 200:
        position = random_position(rng, fmap, stack)
        g = coil_authorities(position, fmap, stack)
        order = [i for i in priority_order(stack, position[2])
                 if abs(g[i]) >= MIN_AUTHORITY]
        _, f_max = mh.capacity(position, fmap, stack)
        f = rng.uniform(0.05, 0.95) * f_max * rng.choice([-1.0, 1.0])
        if abs(f) < 2e-3:
            continue
        result = mh.allocate(f, position, fmap, stack)
        authority = np.array([abs(g[i]) for i in order]) * stack.coil.max_current
        cumulative = np.cumsum(authority)
        smallest = int(np.searchsorted(cumulative, abs(f) - 1e-3)) + 1
        assert result.coils_used == smallest
        checked += 1


def test_allocate_sign_antisymmetry(fmap, stack):
    rng = np.random.default_rng(13)
    for _ in range(50):
        position = random_position(rng, fmap, stack)
        _, f_max = mh.capacity(position, fmap, stack)
        f = rng.uniform(0.05, 0.9) * f_max
        if f < 2e-3:
            continue
        fwd = mh.forward_force(
            mh.allocate(f, position, fmap, stack).duties, position, fmap, stack
        )
        rev = mh.forward_force(
            mh.allocate(-f, position, fmap, stack).duties, position, fmap, stack
        )
        assert abs(fwd + rev) <= 2e-3
