import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from relu_invstab.errors import BoundaryError, UsageError
from relu_invstab.network import (
    Architecture,
    BiasedShallowNet,
    ShallowNet,
    biased_eval,
    concat,
    evaluate,
    jacobian_at,
    jacobian_from_pattern,
    negate,
    param_distance,
    permute,
    rescale,
    sign_pattern_at,
)


def g_k(k):
    return ShallowNet([[k, 0.0], [k, -1.0 / k**2]], [[k, -k]])


@st.composite
def nets(draw, max_d=4, max_m=6, max_D=2):
    d = draw(st.integers(1, max_d))
    m = draw(st.integers(1, max_m))
    D = draw(st.integers(1, max_D))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return ShallowNet(rng.standard_normal((m, d)), rng.standard_normal((D, m)))


class TestConstruction:
    def test_architecture_validation(self):
        with pytest.raises(UsageError):
            Architecture(0, 1, 1)

    def test_shapes_must_agree(self):
        with pytest.raises(UsageError):
            ShallowNet([[1.0, 0.0]], [[1.0, 2.0]])

    def test_rejects_nonfinite(self):
        with pytest.raises(UsageError):
            ShallowNet([[np.nan, 0.0]], [[1.0]])

    def test_arrays_are_read_only(self):
        net = g_k(2)
        with pytest.raises(ValueError):
            net.A[0, 0] = 5.0

    def test_equality_and_hash(self):
        assert g_k(2) == g_k(2)
        assert hash(g_k(2)) == hash(g_k(2))
        assert g_k(2) != g_k(3)

    def test_biased_validation(self):
        with pytest.raises(UsageError):
            BiasedShallowNet([[1.0]], [0.0, 1.0], [[1.0]], [0.0])


class TestEvaluate:
    def test_redundant_gamma(self):
        net = ShallowNet([[1, 0], [1, 0]], [[1, 1]])
        assert_allclose(evaluate(net, [1, 1]), [2.0])

    def test_origin_is_zero(self):
        net = ShallowNet(np.ones((3, 2)), np.ones((2, 3)))
        assert_array_equal(evaluate(net, np.zeros(2)), np.zeros(2))

    def test_exploding_k2(self):
        assert_allclose(evaluate(g_k(2), [1, 1]), [0.5], rtol=1e-15)

    def test_batch_matches_pointwise(self):
        rng = np.random.default_rng(0)
        net = ShallowNet(rng.standard_normal((4, 3)), rng.standard_normal((2, 4)))
        X = rng.standard_normal((10, 3))
        batch = evaluate(net, X)
        for x, y in zip(X, batch):
            assert_allclose(evaluate(net, x), y)

    def test_dimension_mismatch(self):
        with pytest.raises(UsageError):
            evaluate(g_k(2), [1.0, 2.0, 3.0])

    def test_biased_eval(self):
        net = BiasedShallowNet([[2.0]], [-1.0], [[1.0]], [0.5])
        assert_allclose(biased_eval(net, [1.0]), [1.5])
        assert_allclose(biased_eval(net, [0.0]), [0.5])

    @given(nets(), st.floats(0, 100))
    def test_positive_homogeneity(self, net, lam):
        x = np.random.default_rng(1).standard_normal(net.d)
        assert_allclose(evaluate(net, lam * x), lam * evaluate(net, x), rtol=1e-12, atol=1e-12 * (1 + lam))


class TestJacobian:
    def test_single_ridge(self):
        net = ShallowNet([[1, 2]], [[3]])
        assert_array_equal(jacobian_at(net, [1, 1]), [[3, 6]])

    def test_exploding_k2(self):
        assert_allclose(jacobian_at(g_k(2), [1, 1]), [[0, 0.5]], atol=1e-15)

    def test_all_inactive(self):
        net = ShallowNet([[1, 0], [0, 1]], [[1, 1]])
        assert_array_equal(jacobian_at(net, [-1, -1]), np.zeros((1, 2)))

    def test_boundary_names_neuron(self):
        net = ShallowNet([[0, 1], [1, 0]], [[1, 1]])
        with pytest.raises(BoundaryError) as info:
            jacobian_at(net, [0.0, 1.0])
        assert info.value.neuron == 1

    def test_finite_differences(self):
        rng = np.random.default_rng(3)
        net = ShallowNet(rng.standard_normal((5, 3)), rng.standard_normal((2, 5)))
        h = 1e-6
        for x in rng.standard_normal((1000, 3)):
            if np.abs(net.A @ x).min() < 1e-4:
                continue
            fd = np.stack(
                [(evaluate(net, x + h * e) - evaluate(net, x - h * e)) / (2 * h) for e in np.eye(3)], axis=1
            )
            assert_allclose(jacobian_at(net, x), fd, atol=1e-5)

    @given(nets())
    def test_pattern_determines_jacobian(self, net):
        x = np.random.default_rng(7).standard_normal(net.d)
        try:
            s = sign_pattern_at(net, x)
        except BoundaryError:
            return
        assert_array_equal(jacobian_from_pattern(net, s), jacobian_at(net, x))


class TestSignPattern:
    @pytest.mark.parametrize(
        "A, x, expected",
        [
            ([[1, 0], [0, 1]], [1, -1], (1, 0)),
            ([[1, 0], [0, 1]], [1, 1], (1, 1)),
            ([[1, 0], [-1, 0]], [1, 0], (1, 0)),
        ],
    )
    def test_examples(self, A, x, expected):
        net = ShallowNet(A, np.ones((1, len(A))))
        assert sign_pattern_at(net, x) == expected

    def test_zero_direction_bit_is_zero(self):
        net = ShallowNet([[0, 0], [1, 0]], [[1, 1]])
        assert sign_pattern_at(net, [1, 1]) == (0, 1)


class TestParamDistance:
    def test_identical(self):
        assert param_distance(g_k(3), g_k(3)) == 0.0

    def test_unbalanced_complete(self):
        gamma = ShallowNet([[0.5, 0]], [[0]])
        phi = ShallowNet([[0, 1]], [[1]])
        assert param_distance(gamma, phi) == 1.0

    def test_opposite_pair_k2(self):
        # Rows of the two parametrizations are negatives of each other, so the
        # largest entry of 2a_i is 2 * sqrt(2) * k.
        k = 2.0
        s2 = np.sqrt(2.0)
        rows = np.array([[k, k, 1 / k], [-k, k, 1 / k], [0, -s2 * k, 1 / (s2 * k)]])
        C = [[k, k, s2 * k]]
        assert_allclose(param_distance(ShallowNet(rows, C), ShallowNet(-rows, C)), 4 * s2)

    def test_architecture_mismatch(self):
        with pytest.raises(UsageError):
            param_distance(g_k(2), ShallowNet([[1, 0]], [[1]]))


class TestStructural:
    def test_concat_negate(self):
        net = g_k(2)
        both = concat(net, negate(net))
        x = np.array([0.3, -0.2])
        assert_allclose(evaluate(both, x), [0.0], atol=1e-15)

    def test_permute_and_rescale_keep_realization(self):
        net = g_k(3)
        moved = rescale(permute(net, [1, 0]), [2.0, 0.5])
        X = np.random.default_rng(0).standard_normal((50, 2))
        assert_allclose(evaluate(moved, X), evaluate(net, X), rtol=1e-13, atol=1e-13)
