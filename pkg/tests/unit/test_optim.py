"""Unit tests for initialisation, Adam and parameter checkpoints."""

import math

import numpy as np
import pytest

from graphleaf.exceptions import CacheCorruptionError, CacheFormatError, InputError, NumericError
from graphleaf.nn.checkpoint import (
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from graphleaf.nn.init import he_bound, he_uniform_init
from graphleaf.nn.optim import Adam, ParamSet, adam_step
from graphleaf.nn.tensor import Tensor


class TestHeInit:
    """He-uniform initialisation."""

    def test_bound_for_512_inputs(self):
        assert he_bound(512) == pytest.approx(0.108253, abs=1e-6)

    def test_six_inputs_stay_in_unit_interval(self):
        w = he_uniform_init((1000,), 6, np.random.default_rng(0))
        assert np.all(np.abs(w.data) <= 1.0)

    def test_distribution_at_512_inputs(self):
        w = he_uniform_init((100_000,), 512, np.random.default_rng(1))
        bound = math.sqrt(6.0 / 512)
        assert w.dtype == np.float32
        assert np.all(np.abs(w.data) <= bound)
        assert abs(float(np.var(w.data.astype(np.float64))) - 2.0 / 512) < 0.1 * (2.0 / 512)

    def test_trainable(self):
        assert he_uniform_init((2, 2), 2, np.random.default_rng(0)).requires_grad

    def test_same_seed_same_values(self):
        a = he_uniform_init((4, 4), 4, np.random.default_rng(5))
        b = he_uniform_init((4, 4), 4, np.random.default_rng(5))
        np.testing.assert_array_equal(a.data, b.data)

    @pytest.mark.parametrize("n_in", [0, -3, 2.5])
    def test_invalid_fan_in(self, n_in):
        with pytest.raises(InputError):
            he_uniform_init((2,), n_in, np.random.default_rng(0))


class TestAdam:
    """Bias-corrected Adam updates."""

    @pytest.fixture
    def params(self):
        rng = np.random.default_rng(3)
        return ParamSet({
            "w": Tensor(rng.normal(size=(3, 2))),
            "b": Tensor(rng.normal(size=(2,))),
        })

    def test_zero_gradient_leaves_parameters(self, params):
        before = {n: t.data.copy() for n, t in params.items()}
        adam_step(params, {n: np.zeros(t.shape) for n, t in params.items()})
        assert params.t == 1
        for name, value in before.items():
            np.testing.assert_array_equal(params[name].data, value)

    def test_first_step_moves_by_learning_rate(self, params):
        rng = np.random.default_rng(4)
        grads = {n: rng.uniform(0.1, 1.0, size=t.shape) * rng.choice([-1, 1], size=t.shape)
                 for n, t in params.items()}
        before = {n: t.data.copy() for n, t in params.items()}
        adam_step(params, grads, lr=0.01)
        for name in params:
            delta = params[name].data - before[name]
            np.testing.assert_allclose(np.abs(delta), 0.01, rtol=1e-6)
            assert np.all(np.sign(delta) == -np.sign(grads[name]))

    def test_path_dependence(self):
        def fresh():
            return ParamSet({"x": Tensor(np.array([1.0]))})

        twice = fresh()
        adam_step(twice, {"x": np.array([0.5])}, lr=0.1)
        adam_step(twice, {"x": np.array([0.5])}, lr=0.1)
        once = fresh()
        adam_step(once, {"x": np.array([0.5])}, lr=0.2)
        assert twice["x"].data[0] != once["x"].data[0]

    def test_non_finite_gradient_names_parameter(self, params):
        before = params["w"].data.copy()
        grads = {n: np.zeros(t.shape) for n, t in params.items()}
        grads["b"] = np.array([np.nan, 0.0])
        with pytest.raises(NumericError, match="'b'"):
            adam_step(params, grads)
        np.testing.assert_array_equal(params["w"].data, before)
        assert params.t == 0

    def test_mismatched_names(self, params):
        with pytest.raises(InputError):
            adam_step(params, {"w": np.zeros((3, 2))})

    def test_mismatched_shapes(self, params):
        with pytest.raises(InputError):
            adam_step(params, {"w": np.zeros((2, 3)), "b": np.zeros(2)})

    def test_optimizer_uses_accumulated_gradients(self, params):
        optimizer = Adam(params, lr=0.05)
        optimizer.zero_grad()
        ((params["w"] * params["w"]).sum() + params["b"].sum()).backward()
        before = params["w"].data.copy()
        optimizer.step()
        assert params.t == 1
        assert not np.array_equal(params["w"].data, before)

    def test_float32_update_stays_float32(self):
        params = ParamSet({"w": Tensor(np.ones(3, dtype=np.float32))})
        adam_step(params, {"w": np.ones(3)})
        assert params["w"].dtype == np.float32
        assert params.m["w"].dtype == np.float32


class TestParamSet:
    def test_missing_parameter(self):
        with pytest.raises(InputError):
            ParamSet()["nope"]

    def test_copy_is_independent(self):
        params = ParamSet({"w": Tensor(np.zeros(2))})
        clone = params.copy()
        clone["w"].data += 1
        assert params["w"].data[0] == 0
        assert not params.state_equal(clone)

    def test_grads_default_to_zero(self):
        params = ParamSet({"w": Tensor(np.ones(2))})
        np.testing.assert_array_equal(params.grads()["w"], [0.0, 0.0])


class TestCheckpoint:
    """``GLWT`` checkpoint files."""

    @pytest.fixture
    def trained(self):
        rng = np.random.default_rng(9)
        params = ParamSet({
            "gcn.0.weight": Tensor(rng.normal(size=(3, 4)).astype(np.float32)),
            "gcn.0.bias": Tensor(np.zeros(4, dtype=np.float32)),
        })
        for _ in range(3):
            adam_step(params, {n: rng.normal(size=t.shape) for n, t in params.items()})
        return params

    def test_round_trip(self, tmp_path, trained):
        path = tmp_path / "model.glwt"
        save_checkpoint(path, trained, {"epoch": 3, "class_names": ["a", "b"]})
        loaded, metadata = load_checkpoint(path)
        assert loaded.state_equal(trained)
        assert loaded.names() == trained.names()
        assert metadata == {"epoch": 3, "class_names": ["a", "b"]}

    def test_bad_magic(self, trained):
        payload = b"XXXX" + encode_checkpoint(trained)[4:]
        with pytest.raises(CacheFormatError):
            decode_checkpoint(payload)

    def test_bad_version(self, trained):
        payload = bytearray(encode_checkpoint(trained))
        payload[4] = 9
        with pytest.raises(CacheFormatError):
            decode_checkpoint(bytes(payload))

    def test_truncated(self, trained):
        payload = encode_checkpoint(trained)
        with pytest.raises(CacheCorruptionError) as info:
            decode_checkpoint(payload[:len(payload) // 2])
        assert info.value.offset is not None

    def test_trailing_bytes(self, trained):
        with pytest.raises(CacheCorruptionError):
            decode_checkpoint(encode_checkpoint(trained) + b"\x00")

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_checkpoint(tmp_path / "absent.glwt")
