"""Quick numerical self-checks behind ``pvqc selftest``.

Each check returns ``(name, passed, detail)``.  The checks are small versions
of the test suite's oracles so an installed copy can be verified without the
repository's tests.
"""

from __future__ import annotations

import numpy as np

from . import gradients, models, neural, observable, qstate
from .prng import Pcg32
from .qstate import AnsatzConfig


def _rel_err(a, b, floor: float = 1e-8) -> float:
    a, b = np.asarray(a), np.asarray(b)
    diff = np.abs(a - b)
    scale = np.maximum(np.abs(b), floor)
    return float(np.max(diff / scale)) if diff.size else 0.0


def check_simulator(rng: Pcg32, trials: int = 20):
    worst = 0.0
    for _ in range(trials):
        n = 1 + int(rng.next_u32() % 4)
        cfg = AnsatzConfig(n, 1 + int(rng.next_u32() % 3))
        x = rng.uniform(-np.pi, np.pi, 1 + int(rng.next_u32() % 4))
        params = rng.uniform(0, 2 * np.pi, cfg.n_params)
        ours = qstate.forward_state(x, params, cfg)
        ref = gradients.dense_circuit_oracle(x, params, cfg)
        worst = max(worst, float(np.max(np.abs(ours - ref))))
    return "simulator vs dense oracle", worst < 1e-10, f"max |diff| {worst:.2e}"


def check_angle_gradients(rng: Pcg32, trials: int = 10):
    worst = 0.0
    for _ in range(trials):
        n = 1 + int(rng.next_u32() % 3)
        cfg = AnsatzConfig(n, 2)
        x = rng.uniform(-np.pi, np.pi, 2)
        params = rng.uniform(0, 2 * np.pi, cfg.n_params)
        mat = observable.hermitian_from_params(rng.normal(observable.n_params_for(n)))
        shift = gradients.parameter_shift(x, params, cfg, mat)
        fd = gradients.finite_difference(
            lambda p: gradients.measure(qstate.forward_state(x, p, cfg), mat)[0], params
        )
        worst = max(worst, float(np.max(np.abs(shift - fd))))
    return "parameter shift vs finite differences", worst < 1e-7, f"max |diff| {worst:.2e}"


def check_observable_gradients(rng: Pcg32, trials: int = 10):
    worst = 0.0
    for _ in range(trials):
        n = 1 + int(rng.next_u32() % 3)
        psi = qstate.forward_state(rng.uniform(-1, 1, 2), rng.uniform(0, 6, 3 * n), AnsatzConfig(n, 1))
        b = rng.normal(observable.n_params_for(n))
        analytic = observable.expectation_grad_params(psi)
        fd = gradients.finite_difference(
            lambda v: observable.expectation(psi, observable.hermitian_from_params(v)), b
        )
        worst = max(worst, float(np.max(np.abs(analytic - fd))))
    return "observable gradient vs finite differences", worst < 1e-8, f"max |diff| {worst:.2e}"


def check_rayleigh(rng: Pcg32, trials: int = 50):
    ok = True
    for _ in range(trials):
        n = 1 + int(rng.next_u32() % 3)
        mat = observable.hermitian_from_params(rng.normal(observable.n_params_for(n)))
        raw = rng.normal(2 << n)
        psi = raw[: 1 << n] + 1j * raw[1 << n:]
        psi /= np.linalg.norm(psi)
        lo, hi = observable.eigen_bounds(mat)
        value = observable.expectation(psi, mat)
        ok &= lo - 1e-8 <= value <= hi + 1e-8
    return "Rayleigh containment", bool(ok), f"{trials} pairs"


def check_model_gradients(rng: Pcg32):
    worst = 0.0
    cfg = AnsatzConfig(2, 1)
    x = rng.normal((3, 2))
    y = np.array([0, 1, 1])
    for kind in models.VARIANTS:
        model = models.build_model(kind, cfg, 2, rng, latent_dim=3)
        _, cache = models.model_forward(model, x)
        grads = models.model_backward(model, cache, y)
        for name, tensor in model.tensors.items():
            def loss(values, name=name):
                saved = model.tensors[name].copy()
                model.tensors[name][...] = values
                model.version += 1
                out = models.batch_loss(model, x, y)
                model.tensors[name][...] = saved
                model.version += 1
                return out

            fd = gradients.finite_difference(loss, tensor.copy(), step=1e-6)
            worst = max(worst, _rel_err(grads[name], fd, floor=1e-3))
    return "model gradients vs finite differences", worst < 1e-4, f"max rel err {worst:.2e}"


def check_optimizer_step():
    opt = neural.RMSProp(lr=0.1)
    p = np.array([1.0, -2.0])
    g = np.array([0.5, -0.25])
    opt.step(p, g)
    v = 0.1 * g * g
    expected = np.array([1.0, -2.0]) - 0.1 * g / (np.sqrt(v) + 1e-8)
    err = float(np.max(np.abs(p - expected)))
    return "RMSProp single step", err < 1e-15, f"max |diff| {err:.1e}"


def run_all(seed: int = 2024) -> list[tuple[str, bool, str]]:
    rng = Pcg32(seed, 99)
    return [
        check_simulator(rng),
        check_angle_gradients(rng),
        check_observable_gradients(rng),
        check_rayleigh(rng),
        check_model_gradients(rng),
        check_optimizer_step(),
    ]
