"""Backend seams: dtype control, checkpoint bytes, optimizers, gradcheck."""

import math
import struct

import numpy as np
import pytest
import torch

from stg.errors import CorruptHeaderError, NumericsError, TruncatedPayloadError
from stg.numerics import (
    Optimizer,
    backward,
    current_dtype,
    ftype,
    gradient_check,
    load_tensors,
    parameter_fingerprint,
    save_tensors,
    seed_everything,
    use_dtype,
)


def test_ftype_names():
    assert ftype("f32") == torch.float32
    assert ftype("f64") == torch.float64
    with pytest.raises(ValueError):
        ftype("f16")


def test_use_dtype_restores_previous():
    base = current_dtype()
    with use_dtype("f64"):
        assert current_dtype() == torch.float64
        x = torch.zeros(3)
        assert x.dtype == torch.float64
    assert current_dtype() == base


def test_seed_everything_reproduces_streams():
    seed_everything(123)
    a = (torch.randn(5), np.random.rand(5))
    seed_everything(123)
    b = (torch.randn(5), np.random.rand(5))
    assert torch.equal(a[0], b[0])
    assert (a[1] == b[1]).all()


def test_seed_everything_sets_single_thread():
    seed_everything(0, threads=1)
    assert torch.get_num_threads() == 1


# ----------------------------------------------------------------------
# checkpoint container
# ----------------------------------------------------------------------

def test_checkpoint_round_trip(tmp_path):
    path = tmp_path / "m.stgc"
    tensors = {
        "w": torch.arange(6, dtype=torch.float32).reshape(2, 3),
        "b": torch.tensor(2.5),  # rank 0
        "arr": np.linspace(0, 1, 4, dtype=np.float32).reshape(2, 2, 1),
    }
    save_tensors(path, tensors)
    back = load_tensors(path)
    assert list(back) == ["w", "b", "arr"]  # record order preserved
    assert torch.equal(back["w"], tensors["w"])
    assert back["b"].shape == () and back["b"].item() == 2.5
    assert back["b"].dtype == torch.float32
    np.testing.assert_array_equal(back["arr"].numpy(), tensors["arr"])


def test_checkpoint_header_layout(tmp_path):
    """The first bytes are frozen: magic, version, then per-record headers."""
    path = tmp_path / "one.stgc"
    save_tensors(path, {"x": torch.tensor([1.0, 2.0])})
    blob = path.read_bytes()
    assert blob[:4] == b"STGC"
    (version,) = struct.unpack_from("<I", blob, 4)
    assert version == 1
    (name_len,) = struct.unpack_from("<I", blob, 8)
    assert name_len == 1
    assert blob[12:13] == b"x"
    rank, ext = struct.unpack_from("<II", blob, 13)
    assert (rank, ext) == (1, 2)
    assert blob[21:]  == struct.pack("<2f", 1.0, 2.0)


def test_checkpoint_bad_magic(tmp_path):
    path = tmp_path / "bad.stgc"
    save_tensors(path, {"x": torch.zeros(2)})
    blob = bytearray(path.read_bytes())
    blob[:4] = b"NOPE"
    path.write_bytes(bytes(blob))
    with pytest.raises(CorruptHeaderError, match="magic"):
        load_tensors(path)


def test_checkpoint_truncation_reports_byte_counts(tmp_path):
    path = tmp_path / "cut.stgc"
    save_tensors(path, {"x": torch.zeros(4)})
    blob = path.read_bytes()
    path.write_bytes(blob[:-7])
    with pytest.raises(TruncatedPayloadError) as exc:
        load_tensors(path)
    # message carries both the needed and the available byte counts
    assert "37" in str(exc.value) and "30" in str(exc.value)


def test_checkpoint_casts_doubles_to_f32(tmp_path):
    path = tmp_path / "f64.stgc"
    save_tensors(path, {"x": torch.tensor([1 / 3], dtype=torch.float64)})
    back = load_tensors(path)
    assert back["x"].dtype == torch.float32
    assert back["x"].item() == np.float32(1 / 3)


# ----------------------------------------------------------------------
# optimizers against the textbook update rules (float64 oracle)
# ----------------------------------------------------------------------

def _oracle_adamw(p, g, lr, wd, betas, eps, steps):
    """Decoupled-weight-decay Adam, computed in float64."""
    p = p.astype(np.float64).copy()
    m = np.zeros_like(p)
    v = np.zeros_like(p)
    b1, b2 = betas
    for t in range(1, steps + 1):
        p = p - lr * wd * p
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        p = p - lr * mhat / (np.sqrt(vhat) + eps)
    return p


def _oracle_rmsprop(p, g, lr, alpha, eps, steps):
    p = p.astype(np.float64).copy()
    sq = np.zeros_like(p)
    for _ in range(steps):
        sq = alpha * sq + (1 - alpha) * g * g
        p = p - lr * g / (np.sqrt(sq) + eps)
    return p


@pytest.mark.parametrize("steps", [1, 3])
def test_adamw_matches_update_rule(steps):
    init = np.array([0.5, -1.25, 2.0], dtype=np.float64)
    grad = np.array([0.1, -0.4, 0.02], dtype=np.float64)
    lin = torch.nn.Linear(3, 1, bias=False)
    with torch.no_grad():
        lin.weight.copy_(torch.tensor(init, dtype=torch.float32))
    opt = Optimizer(lin, kind="adamw", lr=1e-2, weight_decay=0.04)
    g = torch.tensor(grad, dtype=torch.float32)
    for _ in range(steps):
        lin.weight.grad = g.clone().reshape(1, 3)
        opt.step()
    want = _oracle_adamw(init, grad, 1e-2, 0.04, (0.9, 0.999), 1e-8, steps)
    np.testing.assert_allclose(lin.weight.detach().numpy().ravel(), want, rtol=1e-5)


@pytest.mark.parametrize("steps", [1, 4])
def test_rmsprop_matches_update_rule(steps):
    init = np.array([1.0, -0.5], dtype=np.float64)
    grad = np.array([0.3, 0.7], dtype=np.float64)
    lin = torch.nn.Linear(2, 1, bias=False)
    with torch.no_grad():
        lin.weight.copy_(torch.tensor(init, dtype=torch.float32))
    opt = Optimizer(lin, kind="rmsprop", lr=1e-3, alpha=0.99)
    g = torch.tensor(grad, dtype=torch.float32)
    for _ in range(steps):
        lin.weight.grad = g.clone().reshape(1, 2)
        opt.step()
    want = _oracle_rmsprop(init, grad, 1e-3, 0.99, 1e-8, steps)
    np.testing.assert_allclose(lin.weight.detach().numpy().ravel(), want, rtol=1e-5)


def test_optimizer_requires_gradients():
    lin = torch.nn.Linear(2, 2)
    opt = Optimizer(lin, kind="adamw", lr=1e-3)
    with pytest.raises(NumericsError, match="missing gradient"):
        opt.step()


def test_optimizer_rejects_unknown_kind():
    with pytest.raises(ValueError):
        Optimizer(torch.nn.Linear(1, 1), kind="sgd", lr=1e-3)


def test_backward_rejects_nonfinite_loss():
    lin = torch.nn.Linear(2, 1)
    x = torch.ones(1, 2)
    loss = lin(x).sum() * float("inf")
    with pytest.raises(NumericsError, match="loss"):
        backward(loss, lin)


def test_backward_zero_fills_unreached_parameters():
    """Parameters outside the graph still get .grad (zeros), so the
    optimizer step never sees a None."""
    net = torch.nn.ModuleDict(
        {"used": torch.nn.Linear(2, 1), "idle": torch.nn.Linear(2, 1)}
    )
    loss = net["used"](torch.ones(1, 2)).sum()
    backward(loss, net)
    assert net["idle"].weight.grad is not None
    assert torch.count_nonzero(net["idle"].weight.grad) == 0
    assert net["used"].weight.grad is not None


def test_parameter_fingerprint_tracks_values():
    a = torch.nn.Linear(3, 3)
    before = parameter_fingerprint(a)
    assert before == parameter_fingerprint(a)
    with torch.no_grad():
        a.weight += 1.0
    assert parameter_fingerprint(a) != before


# ----------------------------------------------------------------------
# gradient checking
# ----------------------------------------------------------------------

class _SinNet(torch.nn.Module):
    def __init__(self):
        super().__init__()
        self.p = torch.nn.Parameter(torch.tensor([0.3, -0.8, 1.1]))

    def loss(self):
        return torch.sin(self.p).sum()


def test_gradient_check_passes_analytic_gradient():
    net = _SinNet()
    report = gradient_check(lambda: net.loss(), net, perturbation=1e-3)
    # d/dp sum(sin p) = cos p; central differences agree to ~h^2
    assert report.max_rel_error < 1e-4
    assert "max relative error" in report.summary()


class _WrongGrad(torch.autograd.Function):
    @staticmethod
    def forward(ctx, x):
        ctx.save_for_backward(x)
        return (x**2).sum()

    @staticmethod
    def backward(ctx, gout):
        (x,) = ctx.saved_tensors
        return gout * 3.0 * x  # should be 2x


def test_gradient_check_catches_wrong_backward():
    net = torch.nn.Module()
    net.p = torch.nn.Parameter(torch.tensor([0.7, -0.2]))
    report = gradient_check(lambda: _WrongGrad.apply(net.p), net, perturbation=1e-3)
    assert report.max_rel_error > 0.2
    assert report.worst_param == "p"


def test_gradient_check_rejects_stochastic_loss():
    net = torch.nn.Module()
    net.p = torch.nn.Parameter(torch.ones(2))

    def noisy():
        return (net.p * torch.rand(2)).sum()

    with pytest.raises(NumericsError, match="deterministic"):
        gradient_check(noisy, net, perturbation=1e-3)


def test_symlog_helpers():
    from stg.distance import symexp, symlog, symlog_distance

    assert symlog(0.0) == 0.0
    assert math.isclose(symlog_distance(3, 5), math.log(3), rel_tol=1e-12)
    assert symlog_distance(5, 3) == -symlog_distance(3, 5)
    for x in (-4.7, -1.0, 0.0, 0.3, 9.9):
        assert math.isclose(symexp(symlog(x)), x, rel_tol=1e-12, abs_tol=1e-15)
