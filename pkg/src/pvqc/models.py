"""The seven learning configurations as trainable binary classifiers.

Every variant follows the same pipeline::

    theta_eff, b_eff  <- static tensor | frozen tensor | controller(x)
    psi = W(theta_eff) U(x) |0>
    e   = <psi| B(b_eff) |psi>      (or <Z_readout> for fixed-observable kinds)
    p   = sigmoid(e)

``model_forward`` / ``model_backward`` work on a whole batch at once and
``model_backward`` returns gradients of the *summed* loss; ``model_step``
divides by the batch size before stepping each tensor's optimizer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import gradients, neural, observable, qstate
from .qstate import AnsatzConfig

VARIANTS = (
    "VQC",
    "VQC_LearnObs",
    "VQC_LearnObs_SepOpt",
    "VQC_LearnObsOnly",
    "FWP_CircuitParams",
    "FWP_Observable",
    "FWP_Both",
)

# (circuit source, observable source) per kind
_SOURCES = {
    "VQC": ("trained", "pauli"),
    "VQC_LearnObs": ("trained", "trained"),
    "VQC_LearnObs_SepOpt": ("trained", "trained"),
    "VQC_LearnObsOnly": ("frozen", "trained"),
    "FWP_CircuitParams": ("controller", "pauli"),
    "FWP_Observable": ("frozen", "controller"),
    "FWP_Both": ("controller", "controller"),
}

LATENT_DIM = 16
OBS_INIT_STD = 0.1
MEMORY_WARN_QUBITS = 10


@dataclass(frozen=True)
class LearningRates:
    circuit: float = 0.01
    observable: float = 0.1
    controller: float = 0.01


@dataclass
class Model:
    kind: str
    cfg: AnsatzConfig
    n_features: int
    tensors: dict[str, np.ndarray]
    optimizers: dict[str, object]
    frozen_theta: np.ndarray | None = None
    readout: int = 0
    version: int = 0

    @property
    def circuit_source(self) -> str:
        return _SOURCES[self.kind][0]

    @property
    def observable_source(self) -> str:
        return _SOURCES[self.kind][1]

    def layer(self, prefix: str) -> neural.LinearLayer:
        return neural.LinearLayer(self.tensors[f"{prefix}.weight"], self.tensors[f"{prefix}.bias"])

    def checksum(self) -> float:
        """Cheap fingerprint used to check which tensors moved."""
        theta = self.frozen_theta if self.frozen_theta is not None else self.tensors.get("theta")
        return float(np.sum(theta)) if theta is not None else 0.0


@dataclass
class ForwardCache:
    version: int
    x: np.ndarray
    theta: np.ndarray  # (n_params,) shared or (batch, n_params)
    psi: np.ndarray  # (batch, N)
    lam: np.ndarray  # B_eff psi, (batch, N)
    expectation: np.ndarray
    probability: np.ndarray
    latent: np.ndarray | None = None  # encoder output for FWP_Both
    obs_inputs: np.ndarray | None = None  # controller input that produced b_eff
    obs_parts: np.ndarray | None = None  # <psi|B(W[:, k])|psi> per controller input column
    extras: dict = field(default_factory=dict)


def build_model(
    kind: str,
    cfg: AnsatzConfig,
    n_features: int,
    rng,
    rates: LearningRates = LearningRates(),
    latent_dim: int = LATENT_DIM,
    obs_dtype=np.float64,
    readout: int = 0,
) -> Model:
    """Initialize a variant from ``rng`` (angles, then observable, then controllers)."""
    if kind not in _SOURCES:
        raise ValueError(f"unknown variant {kind!r}; valid kinds: {', '.join(VARIANTS)}")
    if n_features < 1:
        raise ValueError("n_features must be >= 1")
    if not 0 <= readout < cfg.n_qubits:
        raise ValueError("readout qubit out of range")
    circuit, obs = _SOURCES[kind]
    n_obs = observable.n_params_for(cfg.n_qubits)
    if obs == "controller" and cfg.n_qubits > MEMORY_WARN_QUBITS:
        in_dim = latent_dim if circuit == "controller" else n_features
        size_gb = n_obs * (in_dim + 1) * np.dtype(obs_dtype).itemsize * 3 / 1e9
        warnings.warn(
            f"{kind} at {cfg.n_qubits} qubits needs about {size_gb:.1f} GB for the observable head "
            "and its optimizer state",
            ResourceWarning,
            stacklevel=2,
        )

    tensors: dict[str, np.ndarray] = {}
    opts: dict[str, object] = {}
    frozen = None

    if circuit in ("trained", "frozen"):
        theta = rng.uniform(0.0, 2.0 * np.pi, cfg.n_params)
        if circuit == "trained":
            tensors["theta"] = theta
            opts["theta"] = neural.RMSProp(lr=rates.circuit)
        else:
            frozen = theta
    if obs == "trained":
        tensors["obs"] = rng.normal(n_obs, scale=OBS_INIT_STD).astype(obs_dtype)
        obs_opt = "Adam" if kind == "VQC_LearnObs_SepOpt" else "RMSProp"
        opts["obs"] = neural.make_optimizer(obs_opt, rates.observable)

    def add_layer(prefix, in_dim, out_dim, dtype=np.float64):
        layer = neural.init_layer(in_dim, out_dim, rng, dtype=dtype)
        tensors[f"{prefix}.weight"] = layer.weights
        tensors[f"{prefix}.bias"] = layer.bias
        opts[f"{prefix}.weight"] = neural.RMSProp(lr=rates.controller)
        opts[f"{prefix}.bias"] = neural.RMSProp(lr=rates.controller)

    if kind == "FWP_CircuitParams":
        add_layer("ctrl", n_features, cfg.n_params)
    elif kind == "FWP_Observable":
        add_layer("ctrl", n_features, n_obs, obs_dtype)
    elif kind == "FWP_Both":
        add_layer("encoder", n_features, latent_dim)
        add_layer("head_theta", latent_dim, cfg.n_params)
        add_layer("head_obs", latent_dim, n_obs, obs_dtype)

    return Model(kind, cfg, n_features, tensors, opts, frozen_theta=frozen, readout=readout)


def _obs_prefix(model: Model) -> str:
    return "head_obs" if model.kind == "FWP_Both" else "ctrl"


def _controller_apply(model: Model, coef: np.ndarray, states: np.ndarray, rows: np.ndarray):
    """``B(b_s) psi`` with ``b_s = W u_s + c`` for controller-emitted observables.

    Returns ``(lam, parts)`` where ``parts[s, k] = <psi_s|B(W[:, k])|psi_s>``
    and the last column belongs to the bias.
    """
    layer = model.layer(_obs_prefix(model))
    applied_w = observable.apply_packed(layer.weights, states)
    applied_b = observable.apply_packed(layer.bias[:, None], states)[:, :, 0]
    lam = np.einsum("sik,sk->si", applied_w, coef[rows]) + applied_b
    parts = np.empty((states.shape[0], layer.in_dim + 1))
    parts[:, :-1] = np.einsum("si,sik->sk", np.conj(states), applied_w).real
    parts[:, -1] = np.einsum("si,si->s", np.conj(states), applied_b).real
    return lam, parts


def _inputs(model: Model, x) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {x.shape[1]}")
    return x


def model_forward(model: Model, x):
    """Probabilities for a batch (or a single input) plus the backward cache."""
    single = np.ndim(x) == 1
    xb = _inputs(model, x)
    batch = xb.shape[0]
    latent = None
    if model.kind == "FWP_Both":
        latent = neural.tanh_forward(neural.linear_forward(model.layer("encoder"), xb))

    if model.circuit_source == "trained":
        theta = model.tensors["theta"]
    elif model.circuit_source == "frozen":
        theta = model.frozen_theta
    elif model.kind == "FWP_Both":
        theta = neural.linear_forward(model.layer("head_theta"), latent)
    else:
        theta = neural.linear_forward(model.layer("ctrl"), xb)

    psi = qstate.forward_state(xb, theta, model.cfg)
    if psi.ndim == 1:
        psi = np.broadcast_to(psi, (batch, psi.size)).copy()
    obs_inputs = obs_parts = None
    if model.observable_source == "pauli":
        lam = gradients.apply_measurement(psi, model.readout, None)
    elif model.observable_source == "trained":
        lam = observable.apply_packed(model.tensors["obs"][:, None], psi)[:, :, 0]
    else:
        obs_inputs = latent if model.kind == "FWP_Both" else xb
        lam, obs_parts = _controller_apply(model, obs_inputs, psi, np.arange(batch))
    raw = np.einsum("si,si->s", np.conj(psi), lam)
    if np.any(np.abs(raw.imag) >= observable.IMAG_TOLERANCE):
        raise observable.ConsistencyError("expectation has non-negligible imaginary residue")
    e = raw.real
    p = np.atleast_1d(neural.sigmoid(e))
    cache = ForwardCache(model.version, xb, theta, psi, lam, e, p, latent, obs_inputs, obs_parts)
    return (float(p[0]) if single else p), cache


def _measurement(model: Model, cache: ForwardCache):
    """Observable with b_eff held fixed, in the form the gradient routines accept."""
    if model.observable_source == "pauli":
        return model.readout
    if model.observable_source == "trained":
        return observable.hermitian_from_params(model.tensors["obs"])
    return lambda states, rows: _controller_apply(model, cache.obs_inputs, states, rows)[0]


def model_backward(model: Model, cache: ForwardCache, y, method: str = "adjoint") -> dict[str, np.ndarray]:
    """Gradients of the summed BCE loss for every trainable tensor.

    ``method`` selects how circuit-angle gradients are obtained: ``"adjoint"``
    (one reverse sweep) or ``"parameter_shift"`` (two circuits per angle).
    """
    if cache.version != model.version:
        raise ValueError("stale forward cache: the model was stepped after this forward pass")
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    p = cache.probability
    if y.shape != p.shape:
        raise ValueError("label count does not match the cached batch")
    _, dloss_dp = neural.bce_loss(p, y)
    delta = np.atleast_1d(neural.sigmoid_backward(p, dloss_dp))
    grads: dict[str, np.ndarray] = {}
    grad_latent = None

    if model.observable_source == "trained":
        grads["obs"] = observable.weighted_grad_params(cache.psi, delta).astype(model.tensors["obs"].dtype, copy=False)
    elif model.observable_source == "controller":
        prefix = _obs_prefix(model)
        layer = model.layer(prefix)
        u = cache.obs_inputs
        grads[f"{prefix}.weight"] = observable.packed_grad(cache.psi, delta[:, None] * u).astype(layer.weights.dtype, copy=False)
        grads[f"{prefix}.bias"] = observable.weighted_grad_params(cache.psi, delta).astype(layer.bias.dtype, copy=False)
        if model.kind == "FWP_Both":
            grad_latent = delta[:, None] * cache.obs_parts[:, :-1]

    if model.circuit_source != "frozen":
        theta_rows = np.broadcast_to(cache.theta, (len(delta), model.cfg.n_params))
        if method == "adjoint":
            angle_grads = gradients.adjoint_sweep(cache.psi, cache.lam, theta_rows, model.cfg)
        elif method == "parameter_shift":
            angle_grads = gradients.parameter_shift(cache.x, theta_rows, model.cfg, _measurement(model, cache))
        else:
            raise ValueError(f"unknown gradient method {method!r}")
        dtheta = delta[:, None] * angle_grads
        if model.circuit_source == "trained":
            grads["theta"] = dtheta.sum(axis=0)
        elif model.kind == "FWP_Both":
            gw, gb, gh = neural.linear_backward(model.layer("head_theta"), cache.latent, dtheta)
            grads["head_theta.weight"], grads["head_theta.bias"] = gw, gb
            grad_latent = gh if grad_latent is None else grad_latent + gh
        else:
            gw, gb, _ = neural.linear_backward(model.layer("ctrl"), cache.x, dtheta)
            grads["ctrl.weight"], grads["ctrl.bias"] = gw, gb

    if model.kind == "FWP_Both":
        pre = neural.tanh_backward(cache.latent, grad_latent)
        gw, gb, _ = neural.linear_backward(model.layer("encoder"), cache.x, pre)
        grads["encoder.weight"], grads["encoder.bias"] = gw, gb
    return grads


def model_step(model: Model, grads: dict[str, np.ndarray], batch_size: int) -> Model:
    """One optimizer step per trainable tensor on batch-averaged gradients."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    for name, tensor in model.tensors.items():
        if name not in grads:
            raise ValueError(f"missing gradient for {name}")
        grad = grads[name]
        if grad.shape != tensor.shape:
            raise ValueError(f"gradient for {name} has shape {grad.shape}, expected {tensor.shape}")
        model.optimizers[name].step(tensor, grad / batch_size)
    model.version += 1
    return model


def effective_parameters(model: Model, x):
    """``(theta_eff, b_eff)`` per input row; ``b_eff`` is ``None`` for Pauli readout.

    Materializes one N**2 vector per row, so keep batches small at high qubit counts.
    """
    xb = _inputs(model, x)
    batch = xb.shape[0]
    latent = None
    if model.kind == "FWP_Both":
        latent = neural.tanh_forward(neural.linear_forward(model.layer("encoder"), xb))
    if model.circuit_source == "trained":
        theta = np.tile(model.tensors["theta"], (batch, 1))
    elif model.circuit_source == "frozen":
        theta = np.tile(model.frozen_theta, (batch, 1))
    elif model.kind == "FWP_Both":
        theta = neural.linear_forward(model.layer("head_theta"), latent)
    else:
        theta = neural.linear_forward(model.layer("ctrl"), xb)
    if model.observable_source == "pauli":
        obs = None
    elif model.observable_source == "trained":
        obs = np.tile(model.tensors["obs"], (batch, 1))
    else:
        obs = neural.linear_forward(model.layer(_obs_prefix(model)), latent if latent is not None else xb)
    return theta, obs


def batch_loss(model: Model, x, y) -> float:
    """Summed BCE loss; the scalar the finite-difference checks differentiate."""
    p, _ = model_forward(model, np.atleast_2d(x))
    loss, _ = neural.bce_loss(p, np.atleast_1d(y))
    return float(np.sum(loss))


def predict(model: Model, x) -> np.ndarray:
    """Class labels with ties (p == 0.5) going to class 1."""
    p, _ = model_forward(model, np.atleast_2d(x))
    return (p >= 0.5).astype(np.int64)
