"""
Unit Tests for the Differentiable Substrate

Primitive gradients, checkpoint files and parameter sets.
"""

import pytest
import torch
from torch import nn

from src.diffcore import (
    MAGIC,
    ParamSet,
    backward_grad,
    finite_diff_check,
    forward_eval,
    load_checkpoint,
    primitive_cases,
    save_checkpoint,
)
from src.diffcore import ops
from src.models.errors import (
    CheckpointFormatError,
    EntailKitValidationError,
    PrecisionError,
    ShapeMismatchError,
)


class TwoBranchGraph(nn.Module):
    """Loss depends on `used` only; `unused` never reaches it"""

    def __init__(self):
        super().__init__()
        self.used = nn.Parameter(torch.tensor([1.0, -2.0], dtype=torch.float64))
        self.unused = nn.Parameter(torch.tensor([3.0], dtype=torch.float64))

    def forward(self, x):
        return {"loss": ops.reduce_sum(self.used * x), "side": self.unused * 2.0}


# ========== Primitive Gradient Tests ==========

class TestFiniteDifferences:
    """Analytic gradients agree with central differences"""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_every_primitive_within_tolerance(self, seed):
        """Each primitive's worst relative error stays below 1e-4"""
        for name, case in primitive_cases(seed).items():
            error = finite_diff_check(case.graph, case.inputs, case.params, eps=1e-6, wrt_inputs=case.wrt_inputs)
            assert error < 1e-4, f"{name} seed {seed}: {error:.3e}"

    def test_cases_cover_every_primitive(self):
        assert set(primitive_cases(0)) == {
            "affine", "softmax", "sigmoid", "relu", "layer_norm",
            "attention", "embedding", "concat_mean", "cross_entropy",
        }

    def test_eps_out_of_range(self):
        case = primitive_cases(0)["affine"]
        with pytest.raises(EntailKitValidationError):
            finite_diff_check(case.graph, case.inputs, case.params, eps=1e-3)

    def test_float32_refused(self):
        case = primitive_cases(0, dtype=torch.float32)["affine"]
        with pytest.raises(PrecisionError):
            finite_diff_check(case.graph, case.inputs, case.params)

    def test_wrong_gradient_is_reported_not_raised(self):
        """A graph whose autograd is deliberately wrong yields a large error"""

        class Wrong(torch.autograd.Function):
            @staticmethod
            def forward(ctx, x):
                return x * x

            @staticmethod
            def backward(ctx, grad):
                return grad * 0.0

        class WrongGraph(nn.Module):
            def __init__(self):
                super().__init__()
                self.w = nn.Parameter(torch.tensor([1.5], dtype=torch.float64))

            def forward(self):
                return {"loss": Wrong.apply(self.w).sum()}

        graph = WrongGraph()
        error = finite_diff_check(graph, {}, ParamSet.from_module(graph))
        assert error > 0.5


# ========== Backward Tests ==========

class TestBackwardGrad:
    """Tests for reverse-mode gradients"""

    def test_unused_parameter_gets_exact_zero(self):
        graph = TwoBranchGraph()
        x = torch.tensor([0.5, 4.0], dtype=torch.float64)
        grads = backward_grad(graph, {"x": x}, ParamSet.from_module(graph), wrt_inputs=["x"])

        assert torch.equal(grads["unused"], torch.zeros(1, dtype=torch.float64))
        assert torch.allclose(grads["used"], x)
        assert torch.allclose(grads["input:x"], torch.tensor([1.0, -2.0], dtype=torch.float64))

    def test_scale_multiplies_gradient(self):
        graph = TwoBranchGraph()
        x = torch.tensor([0.5, 4.0], dtype=torch.float64)
        params = ParamSet.from_module(graph)
        single = backward_grad(graph, {"x": x}, params)["used"]
        scaled = backward_grad(graph, {"x": x}, params, scale=3.0)["used"]
        assert torch.allclose(scaled, 3.0 * single)

    def test_non_scalar_loss(self):
        graph = TwoBranchGraph()
        with pytest.raises(ShapeMismatchError):
            backward_grad(graph, {"x": torch.ones(2, dtype=torch.float64)}, ParamSet.from_module(graph), loss_name="side")

    def test_missing_output(self):
        graph = TwoBranchGraph()
        with pytest.raises(KeyError):
            backward_grad(graph, {"x": torch.ones(2, dtype=torch.float64)}, ParamSet.from_module(graph), loss_name="nope")

    def test_forward_rejects_non_finite(self):
        graph = TwoBranchGraph()
        x = torch.tensor([float("inf"), 1.0], dtype=torch.float64)
        with pytest.raises(EntailKitValidationError):
            forward_eval(graph, {"x": x}, ParamSet.from_module(graph))

    def test_params_are_not_mutated(self):
        graph = TwoBranchGraph()
        params = ParamSet.from_module(graph)
        before = params["used"].clone()
        backward_grad(graph, {"x": torch.ones(2, dtype=torch.float64)}, params)
        assert torch.equal(params["used"], before)


# ========== Primitive Shape Tests ==========

class TestOps:
    """Shape validation of primitives"""

    def test_affine_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            ops.affine(torch.ones(2, 3), torch.ones(4, 5))

    def test_masked_softmax_ignores_masked_keys(self):
        x = torch.tensor([[1.0, 2.0, 3.0]], dtype=torch.float64)
        mask = torch.tensor([[True, True, False]])
        probs = ops.softmax(x, mask=mask)
        assert probs[0, 2] == 0.0
        assert torch.isclose(probs.sum(), torch.tensor(1.0, dtype=torch.float64))


# ========== Parameter Set Tests ==========

class TestParamSet:
    """Tests for ParamSet"""

    def test_replace_copies(self):
        graph = TwoBranchGraph()
        params = ParamSet.from_module(graph, rng_seed=7)
        swapped = params.replace("used", torch.zeros(2, dtype=torch.float64))
        assert swapped.rng_seed == 7
        assert not torch.equal(params["used"], swapped["used"])

    def test_load_into_mismatch(self):
        with pytest.raises(KeyError):
            ParamSet({"other": torch.zeros(1)}).load_into(TwoBranchGraph())


# ========== Checkpoint Tests ==========

class TestCheckpoint:
    """Tests for the checkpoint file format"""

    def test_save_load_preserves_values_and_meta(self, tmp_path):
        graph = TwoBranchGraph()
        params = ParamSet.from_module(graph, rng_seed=11)
        path = save_checkpoint(tmp_path / "model.ckpt", params, {"kind": "scratch"})

        loaded, meta = load_checkpoint(path)
        assert loaded.rng_seed == 11
        assert meta == {"kind": "scratch"}
        for name in params:
            assert torch.equal(loaded[name], params[name])

    def test_identical_params_identical_bytes(self, tmp_path):
        params = ParamSet.from_module(TwoBranchGraph())
        a = save_checkpoint(tmp_path / "a.ckpt", params).read_bytes()
        b = save_checkpoint(tmp_path / "b.ckpt", params).read_bytes()
        assert a == b
        assert a.startswith(MAGIC)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ckpt"
        path.write_bytes(b"NOT-A-CHECKPOINT" + b"\0" * 32)
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(path)

    def test_truncated_payload(self, tmp_path):
        path = save_checkpoint(tmp_path / "model.ckpt", ParamSet.from_module(TwoBranchGraph()))
        blob = path.read_bytes()
        path.write_bytes(blob[:-4])
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointFormatError):
            load_checkpoint(tmp_path / "absent.ckpt")
