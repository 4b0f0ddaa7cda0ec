import numpy as np
import pytest

from focal import autodiff as ad
from focal.autodiff import Tape, Tensor


def _scalar(f, *tensors):
    with Tape() as tape:
        out = f(*tensors)
        tape.backward(out)
    return out


class TestForwardValues:
    def test_softmax_symmetry(self):
        out = ad.softmax(Tensor([0.0, 0.0]), axis=0)
        np.testing.assert_allclose(out.data, [0.5, 0.5])

    def test_softmax_closed_form(self):
        out = ad.softmax(Tensor([np.log(1.0), np.log(3.0)]), axis=0)
        np.testing.assert_allclose(out.data, [0.25, 0.75], atol=1e-12)

    def test_softmax_large_inputs_stable(self):
        out = ad.softmax(Tensor([1000.0, 1000.0]), axis=0)
        np.testing.assert_allclose(out.data, [0.5, 0.5])

    def test_softmax_sums_to_one(self):
        rng = np.random.default_rng(0)
        x = Tensor(rng.normal(size=(5, 7)))
        out = ad.softmax(x, axis=0)
        np.testing.assert_allclose(out.data.sum(axis=0), np.ones(7), atol=1e-12)
        assert np.all(out.data >= 0)

    def test_softmax_empty_axis_rejected(self):
        with pytest.raises(ValueError):
            ad.softmax(Tensor(np.zeros((0,))), axis=0)

    def test_sigmoid_tanh_open_bounds(self):
        # float64 saturates tanh at |x|~19 and sigmoid at |x|~36; test the
        # representable range.
        x = Tensor(np.linspace(-18, 18, 101))
        s = ad.sigmoid(x).data
        t = ad.tanh(x).data
        assert np.all((s > 0) & (s < 1))
        assert np.all((t > -1) & (t < 1))

    def test_relu_subgradient_at_zero(self):
        x = Tensor([0.0], requires_grad=True)
        with Tape() as tape:
            out = ad.reduce_sum(ad.relu(x))
            tape.backward(out)
        np.testing.assert_allclose(x.grad, [0.0])

    def test_forward_deterministic(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(4, 4))
        r1 = ad.matmul(ad.tanh(Tensor(a)), Tensor(a)).data
        r2 = ad.matmul(ad.tanh(Tensor(a)), Tensor(a)).data
        assert np.array_equal(r1, r2)

    def test_nonfinite_forward_raises(self):
        with pytest.raises(ad.NonFiniteError):
            ad.log(Tensor([0.0]))


class TestCosineSimilarity:
    def test_identical_vectors(self):
        a = Tensor([1.0, 2.0, 3.0])
        assert ad.cosine_similarity(a, Tensor([1.0, 2.0, 3.0])).item() == pytest.approx(1.0)

    def test_orthogonal_vectors(self):
        v = ad.cosine_similarity(Tensor([1.0, 0.0]), Tensor([0.0, 2.0]))
        assert v.item() == pytest.approx(0.0)

    def test_antipodal_vectors(self):
        v = ad.cosine_similarity(Tensor([1.0, -2.0]), Tensor([-2.0, 4.0]))
        assert v.item() == pytest.approx(-1.0)

    def test_zero_norm_is_zero_with_zero_grad(self):
        a = Tensor([0.0, 0.0], requires_grad=True)
        b = Tensor([1.0, 1.0], requires_grad=True)
        with Tape() as tape:
            out = ad.cosine_similarity(a, b)
            tape.backward(out)
        assert out.item() == 0.0
        np.testing.assert_allclose(a.grad, [0.0, 0.0])
        np.testing.assert_allclose(b.grad, [0.0, 0.0])

    def test_range(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = Tensor(rng.normal(size=6))
            b = Tensor(rng.normal(size=6))
            assert -1.0 - 1e-12 <= ad.cosine_similarity(a, b).item() <= 1.0 + 1e-12


class TestBackward:
    def test_chain(self):
        x = Tensor(3.0, requires_grad=True)
        with Tape() as tape:
            y = ad.mul(x, x)
            z = ad.mul(y, y)  # x^4
            tape.backward(z)
        assert x.grad == pytest.approx(4 * 3.0**3)

    def test_reused_leaf_accumulates_once_per_path(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            out = ad.reduce_sum(ad.add(ad.mul(x, x), x))  # x^2 + x
            tape.backward(out)
        np.testing.assert_allclose(x.grad, [3.0, 5.0])

    def test_broadcast_bias_grad(self):
        w = Tensor(np.ones((3, 2)), requires_grad=True)
        b = Tensor(np.zeros(2), requires_grad=True)
        with Tape() as tape:
            out = ad.reduce_sum(ad.add(w, b))
            tape.backward(out)
        np.testing.assert_allclose(b.grad, [3.0, 3.0])

    def test_take_scatter_grad(self):
        x = Tensor(np.arange(8.0).reshape(4, 2), requires_grad=True)
        with Tape() as tape:
            out = ad.reduce_sum(ad.take(x, [0, 0, 3]))
            tape.backward(out)
        np.testing.assert_allclose(x.grad, [[2, 2], [0, 0], [0, 0], [1, 1]])

    def test_segment_sum_grad(self):
        v = Tensor(np.ones((4, 3)), requires_grad=True)
        with Tape() as tape:
            seg = ad.segment_sum(v, [0, 1, 1, 0], num_segments=2)
            out = ad.reduce_sum(ad.mul(seg, Tensor([[1.0], [2.0]])))
            tape.backward(out)
        np.testing.assert_allclose(v.grad, [[1] * 3, [2] * 3, [2] * 3, [1] * 3])

    def test_backward_requires_scalar(self):
        x = Tensor([1.0, 2.0], requires_grad=True)
        with Tape() as tape:
            y = ad.mul(x, x)
            with pytest.raises(ValueError):
                tape.backward(y)

    def test_nested_tape_rejected(self):
        with Tape():
            with pytest.raises(RuntimeError):
                with Tape():
                    pass


class TestGradientCheck:
    def test_sigmoid_sum_closed_form(self):
        x = Tensor(np.zeros(5), requires_grad=True)

        def f():
            return ad.reduce_sum(ad.sigmoid(x))

        report = ad.gradient_check(f, {"x": x})
        assert report.ok, str(report)
        np.testing.assert_allclose(x.grad, np.full(5, 0.25), atol=1e-12)

    @pytest.mark.parametrize(
        "name",
        [
            "add", "sub", "mul", "scale", "matmul", "transpose", "reshape",
            "concat", "take", "segment_sum", "relu", "sigmoid", "tanh", "log",
            "softmax", "log_softmax", "mean", "reduce_sum", "cosine",
        ],
    )
    def test_every_primitive(self, name):
        rng = np.random.default_rng(hash(name) % 2**32)
        a = Tensor(rng.normal(size=(3, 4)) + 0.1, requires_grad=True)
        b = Tensor(rng.normal(size=(3, 4)) + 0.1, requires_grad=True)
        sq = Tensor(rng.normal(size=(4, 4)), requires_grad=True)
        vec1 = Tensor(rng.normal(size=5), requires_grad=True)
        vec2 = Tensor(rng.normal(size=5), requires_grad=True)
        pos = Tensor(np.abs(rng.normal(size=(3, 4))) + 0.5, requires_grad=True)

        builders = {
            "add": ({"a": a, "b": b}, lambda: ad.reduce_sum(ad.add(a, b))),
            "sub": ({"a": a, "b": b}, lambda: ad.reduce_sum(ad.sub(a, b))),
            "mul": ({"a": a, "b": b}, lambda: ad.reduce_sum(ad.mul(a, b))),
            "scale": ({"a": a}, lambda: ad.reduce_sum(ad.scale(a, 2.5))),
            "matmul": ({"a": a, "sq": sq}, lambda: ad.reduce_sum(ad.matmul(a, sq))),
            "transpose": ({"a": a}, lambda: ad.reduce_sum(ad.mul(ad.transpose(a), ad.transpose(b)))),
            "reshape": ({"a": a}, lambda: ad.reduce_sum(ad.mul(ad.reshape(a, (4, 3)), 1.5))),
            "concat": ({"a": a, "b": b}, lambda: ad.reduce_sum(ad.tanh(ad.concat([a, b], axis=1)))),
            "take": ({"a": a}, lambda: ad.reduce_sum(ad.tanh(ad.take(a, [0, 2, 0])))),
            "segment_sum": ({"a": a}, lambda: ad.reduce_sum(ad.tanh(ad.segment_sum(a, [1, 0, 1], 2)))),
            "relu": ({"a": a}, lambda: ad.reduce_sum(ad.relu(a))),
            "sigmoid": ({"a": a}, lambda: ad.reduce_sum(ad.sigmoid(a))),
            "tanh": ({"a": a}, lambda: ad.reduce_sum(ad.tanh(a))),
            "log": ({"pos": pos}, lambda: ad.reduce_sum(ad.log(pos))),
            "softmax": ({"a": a}, lambda: ad.reduce_sum(ad.mul(ad.softmax(a, axis=0), b))),
            "log_softmax": ({"a": a}, lambda: ad.reduce_sum(ad.mul(ad.log_softmax(a, axis=1), b))),
            "mean": ({"a": a}, lambda: ad.reduce_sum(ad.tanh(ad.mean(a, axis=0)))),
            "reduce_sum": ({"a": a}, lambda: ad.tanh(ad.reduce_sum(a))),
            "cosine": ({"vec1": vec1, "vec2": vec2}, lambda: ad.cosine_similarity(vec1, vec2)),
        }
        params, f = builders[name]
        report = ad.gradient_check(f, params)
        assert report.ok, str(report)

    def test_corrupted_backward_detected(self, monkeypatch):
        real_relu = ad.relu

        def bad_relu(a):
            a = ad._as_tensor(a)
            out = np.maximum(a.data, 0.0)
            mask = a.data > 0.0

            def backward(g):
                return (g * mask * 1.5,)  # wrong slope

            return ad._record("relu", (a,), out, backward)

        monkeypatch.setattr(ad, "relu", bad_relu)
        x = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
        report = ad.gradient_check(lambda: ad.reduce_sum(ad.relu(x)), {"x": x})
        monkeypatch.setattr(ad, "relu", real_relu)
        assert not report.ok
        assert report.failures

    def test_coordinate_sampling_caps_work(self):
        x = Tensor(np.random.default_rng(3).normal(size=(10, 10)), requires_grad=True)
        report = ad.gradient_check(
            lambda: ad.reduce_sum(ad.tanh(x)), {"x": x}, max_coords_per_param=7
        )
        assert report.ok
        assert report.n_checked == 7
