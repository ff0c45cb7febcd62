import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normsynth.errors import DomainError
from normsynth.indicators import (
    HV_REF_OFFSET,
    build_reference,
    hypervolume,
    hypervolume_monte_carlo,
    igd_plus,
    normalize,
    normalize_for_indicators,
)
from normsynth.kernel import dominates, nondominated_mask


def random_front(rng, n, d):
    """Points on a noisy concave surface; mostly mutually non-dominated."""
    x = rng.random((n, d)) + 0.05
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return 1.0 - x * rng.uniform(0.8, 1.0, (n, 1))


def grid_hypervolume(front, ref):
    """Inclusion-exclusion free oracle for 2-D/3-D fronts: exact volume over the coordinate grid."""
    front = np.asarray(front, float)
    d = front.shape[1]
    axes = [np.unique(np.append(front[:, k], ref[k])) for k in range(d)]
    mesh = np.meshgrid(*[a[:-1] for a in axes], indexing="ij")
    widths = np.meshgrid(*[np.diff(a) for a in axes], indexing="ij")
    corners = np.stack([m.ravel() for m in mesh], axis=1)
    cell = np.prod(np.stack([w.ravel() for w in widths], axis=1), axis=1)
    covered = np.zeros(len(corners), bool)
    for p in front:
        covered |= np.all(corners >= p, axis=1)
    return float(cell[covered].sum())


def test_hand_example():
    front = np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
    assert hypervolume(front, np.array([2.0, 2.0])) == 3.25


def test_single_box_and_duplicates():
    p, r = np.array([0.1, 0.2, 0.3]), np.array([1.0, 1.0, 1.0])
    assert hypervolume(p[None], r) == pytest.approx(np.prod(r - p))
    front = np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
    assert hypervolume(np.vstack([front, front]), np.array([2.0, 2.0])) == 3.25


def test_edge_cases():
    assert hypervolume(np.empty((0, 3)), np.ones(3)) == 0.0
    assert hypervolume(np.array([[2.0, 0.0]]), np.ones(2)) == 0.0
    with pytest.raises(DomainError):
        hypervolume(np.zeros((2, 3)), np.ones(2))


@pytest.mark.parametrize("d", [2, 3])
def test_matches_grid_oracle(d):
    rng = np.random.default_rng(d)
    for _ in range(5):
        front = random_front(rng, 12, d)
        ref = np.full(d, 1.1)
        assert hypervolume(front, ref) == pytest.approx(grid_hypervolume(front, ref), rel=1e-12)


def test_matches_monte_carlo_5d():
    rng = np.random.default_rng(7)
    front = random_front(rng, 20, 5)
    ref = np.full(5, 1.1)
    est, se = hypervolume_monte_carlo(front, ref, 200_000, rng)
    assert abs(hypervolume(front, ref) - est) < 3 * se


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), d=st.integers(2, 4))
def test_monotone_on_adding_nondominated_point(seed, d):
    rng = np.random.default_rng(seed)
    front = random_front(rng, 8, d)
    ref = np.full(d, 1.1)
    extra = random_front(rng, 1, d)
    assert hypervolume(np.vstack([front, extra]), ref) >= hypervolume(front, ref) - 1e-12


def test_affine_scaling_preserves_ordering():
    rng = np.random.default_rng(3)
    a, b = random_front(rng, 10, 3), random_front(rng, 10, 3) + 0.05
    ref = np.full(3, 1.2)
    scale, shift = np.array([2.0, 0.5, 3.0]), np.array([1.0, -1.0, 0.0])
    before = hypervolume(a, ref) > hypervolume(b, ref)
    after = hypervolume(a * scale + shift, ref * scale + shift) > hypervolume(b * scale + shift, ref * scale + shift)
    assert before == after


def test_igd_plus_examples():
    ref = np.array([[0.0, 0.0]])
    assert igd_plus(np.array([[1.0, 1.0]]), ref) == pytest.approx(np.sqrt(2))
    front = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert igd_plus(front, front) == 0.0
    assert igd_plus(front - 0.5, front) == 0.0
    assert igd_plus(np.empty((0, 2)), front) == np.inf
    with pytest.raises(DomainError):
        igd_plus(front, np.empty((0, 2)))


def test_igd_plus_oracle():
    rng = np.random.default_rng(4)
    A, Z = rng.random((15, 3)), rng.random((25, 3))
    expected = np.mean([min(np.sqrt(sum(max(a[i] - z[i], 0) ** 2 for i in range(3))) for a in A) for z in Z])
    assert igd_plus(A, Z) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_igd_plus_weakly_compliant(seed):
    rng = np.random.default_rng(seed)
    Z = random_front(rng, 10, 3)
    B = random_front(rng, 8, 3)
    A = B - rng.random(B.shape) * 0.1  # every point of A weakly dominates its partner in B
    assert igd_plus(A, Z) <= igd_plus(B, Z) + 1e-12


def test_build_reference():
    a = np.array([[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    ref = build_reference([a])
    assert ref.front.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    b = np.array([[0.5, 0.5], [3.0, 3.0]])
    ref = build_reference([a, b])
    assert sorted(map(tuple, ref.front.tolist())) == [(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]
    assert ref.nadir.tolist() == [3.0, 3.0] and ref.ideal.tolist() == [0.0, 0.0]
    assert nondominated_mask(ref.front).all()
    with pytest.raises(DomainError):
        build_reference([a, np.zeros((1, 3))])
    with pytest.raises(DomainError):
        build_reference([])


def test_normalization():
    ref = build_reference([np.array([[0.0, 4.0, 1.0], [2.0, 2.0, 1.0]])])
    assert np.array_equal(normalize(ref.ideal, ref), [[0.0, 0.0, 0.0]])
    assert np.array_equal(normalize(ref.nadir, ref), [[1.0, 1.0, 0.0]])
    fronts, ref_front, ref_point = normalize_for_indicators([ref.front], ref)
    assert np.array_equal(ref_point, np.full(3, 1 + HV_REF_OFFSET))
    assert np.array_equal(fronts[0], ref_front)


def test_normalization_preserves_dominance():
    rng = np.random.default_rng(5)
    P = rng.random((30, 4)) * [1, 10, 100, 0.1]
    ref = build_reference([P])
    N = normalize(P, ref)
    for i in range(30):
        for j in range(30):
            # dominance in min sense equals dominance of negated vectors in max sense
            assert dominates(-P[i], -P[j]) == dominates(-N[i], -N[j])
