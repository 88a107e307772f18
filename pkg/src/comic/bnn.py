"""Mean-field variational Bayesian network for a scalar conditional density.

The model is a one-hidden-layer network mapping a scalar input to the mean
and log-scale of a Gaussian likelihood. Every weight carries a factorized
Gaussian posterior N(mu, sigma^2) and a zero-mean Gaussian prior whose
per-weight scale is itself a free (log-parametrized) hyperparameter; biases
keep a fixed standard-normal prior. The stochastic forward pass samples
layer pre-activations from their induced Gaussians rather than sampling
weights, which gives identical output distributions at lower variance.

Gradients for both training objectives are hand-derived for this fixed
architecture, so the package needs no autodiff dependency; they are checked
against central differences in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericError
from .rng import RngStream, draw_standard_normal

HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# pre-link clamp on the log-scale head: keeps exp() in [e^-15, e^15]
LOG_SCALE_LIMIT = 15.0

# initial log posterior variance (-9 -> posterior std ~ 0.011)
INIT_LOGVAR = -9.0


@dataclass
class VariationalLinearLayer:
    """Fully-connected layer with Gaussian posteriors and priors.

    mean_w, logvar_w: posterior mean and log-variance per weight (A x B).
    mean_b, logvar_b: posterior mean and log-variance per bias (B).
    log_prior_scale_w: log of the prior std per weight (A x B); the bias
    prior std is fixed at 1 and carries no hyperparameter.
    """

    mean_w: np.ndarray
    logvar_w: np.ndarray
    mean_b: np.ndarray
    logvar_b: np.ndarray
    log_prior_scale_w: np.ndarray

    def __post_init__(self):
        a, b = self.mean_w.shape
        if self.logvar_w.shape != (a, b) or self.log_prior_scale_w.shape != (a, b):
            raise ArgumentError("weight blocks must share the same A x B shape")
        if self.mean_b.shape != (b,) or self.logvar_b.shape != (b,):
            raise ArgumentError("bias blocks must have length B")

    @property
    def in_dim(self) -> int:
        return self.mean_w.shape[0]

    @property
    def out_dim(self) -> int:
        return self.mean_w.shape[1]

    @classmethod
    def initial(cls, in_dim: int, out_dim: int, stream: RngStream) -> "VariationalLinearLayer":
        """Mean init uniform in +-1/sqrt(fan_in); tiny posterior variances; unit priors."""
        bound = 1.0 / math.sqrt(in_dim)
        gen = stream.generator()
        mean_w = gen.uniform(-bound, bound, size=(in_dim, out_dim))
        return cls(
            mean_w=mean_w,
            logvar_w=np.full((in_dim, out_dim), INIT_LOGVAR),
            mean_b=np.zeros(out_dim),
            logvar_b=np.full(out_dim, INIT_LOGVAR),
            log_prior_scale_w=np.zeros((in_dim, out_dim)),
        )


@dataclass
class ConditionalModel:
    """One-hidden-layer Bayesian network emitting (mean, std) of y given x.

    Output node 0 is the mean; node 1 is clamped to +-LOG_SCALE_LIMIT and
    exponentiated, so the predicted std is always positive and finite.
    """

    hidden: VariationalLinearLayer
    output: VariationalLinearLayer

    def __post_init__(self):
        if self.hidden.in_dim != 1:
            raise ArgumentError("hidden layer must take a scalar input")
        if self.output.in_dim != self.hidden.out_dim or self.output.out_dim != 2:
            raise ArgumentError("output layer must map hidden width to 2 nodes")

    @property
    def hidden_width(self) -> int:
        return self.hidden.out_dim

    @classmethod
    def initial(cls, hidden_width: int, stream: RngStream) -> "ConditionalModel":
        return cls(
            hidden=VariationalLinearLayer.initial(1, hidden_width, stream.child("hidden")),
            output=VariationalLinearLayer.initial(hidden_width, 2, stream.child("output")),
        )

    # duck-typed surface used by the codelength estimator
    def sample_predictions(self, x: np.ndarray, stream: RngStream) -> tuple[np.ndarray, np.ndarray]:
        return model_forward(self, x, mode="sampled", stream=stream)

    def kl(self) -> float:
        return kl_model(self)


@dataclass
class LayerGrads:
    mean_w: np.ndarray
    logvar_w: np.ndarray
    mean_b: np.ndarray
    logvar_b: np.ndarray
    log_prior_scale_w: np.ndarray


@dataclass
class ModelGrads:
    hidden: LayerGrads
    output: LayerGrads


_BLOCK_FIELDS = ("mean_w", "logvar_w", "mean_b", "logvar_b", "log_prior_scale_w")


def param_blocks(model: ConditionalModel) -> list[tuple[str, int]]:
    """(name, length) for each contiguous block of the packed vector."""
    blocks = []
    for lname, layer in (("hidden", model.hidden), ("output", model.output)):
        for f in _BLOCK_FIELDS:
            blocks.append((f"{lname}.{f}", getattr(layer, f).size))
    return blocks


def pack_params(model: ConditionalModel) -> np.ndarray:
    parts = []
    for layer in (model.hidden, model.output):
        parts.extend(getattr(layer, f).ravel() for f in _BLOCK_FIELDS)
    return np.concatenate(parts)


def pack_grads(grads: ModelGrads) -> np.ndarray:
    parts = []
    for layer in (grads.hidden, grads.output):
        parts.extend(getattr(layer, f).ravel() for f in _BLOCK_FIELDS)
    return np.concatenate(parts)


def unpack_params(model: ConditionalModel, vec: np.ndarray) -> ConditionalModel:
    """Rebuild a model with the same shapes from a packed vector."""
    layers = []
    offset = 0
    for layer in (model.hidden, model.output):
        fields = {}
        for f in _BLOCK_FIELDS:
            block = getattr(layer, f)
            fields[f] = vec[offset:offset + block.size].reshape(block.shape)
            offset += block.size
        layers.append(VariationalLinearLayer(**fields))
    if offset != vec.size:
        raise ArgumentError(f"packed vector has {vec.size} entries, expected {offset}")
    return ConditionalModel(hidden=layers[0], output=layers[1])


def _check_input(layer: VariationalLinearLayer, h_in: np.ndarray) -> np.ndarray:
    h_in = np.asarray(h_in, dtype=float)
    if h_in.ndim != 2 or h_in.shape[1] != layer.in_dim:
        raise ArgumentError(
            f"input shape {h_in.shape} incompatible with layer {layer.in_dim}x{layer.out_dim}"
        )
    return h_in


def layer_forward_mean(layer: VariationalLinearLayer, h_in: np.ndarray) -> np.ndarray:
    """Deterministic pass through the posterior means."""
    h_in = _check_input(layer, h_in)
    return h_in @ layer.mean_w + layer.mean_b


def _reparam_forward(layer: VariationalLinearLayer, h_in: np.ndarray, eps: np.ndarray):
    """Sampled pass: pre-activations drawn from their induced Gaussian.

    Returns (h_out, cache); the cache holds what backprop needs.
    """
    v_w = np.exp(layer.logvar_w)
    v_b = np.exp(layer.logvar_b)
    h_sq = h_in * h_in
    m_out = h_in @ layer.mean_w + layer.mean_b
    v_out = h_sq @ v_w + v_b
    s_out = np.sqrt(v_out)
    h_out = m_out + s_out * eps
    cache = (h_in, h_sq, v_w, v_b, s_out, eps)
    return h_out, cache


def layer_forward_local_reparam(
    layer: VariationalLinearLayer, h_in: np.ndarray, stream: RngStream
) -> np.ndarray:
    h_in = _check_input(layer, h_in)
    eps = draw_standard_normal(stream, h_in.shape[0], layer.out_dim)
    h_out, _ = _reparam_forward(layer, h_in, eps)
    return h_out


def _reparam_backward(layer: VariationalLinearLayer, cache, g_out: np.ndarray):
    """Gradients of a reparametrized layer given d(loss)/d(h_out).

    Returns (LayerGrads with zero prior-scale block, d(loss)/d(h_in)).
    """
    h_in, h_sq, v_w, v_b, s_out, eps = cache
    g_v = g_out * eps * (0.5 / s_out)
    g_mean_w = h_in.T @ g_out
    g_mean_b = g_out.sum(axis=0)
    g_logvar_w = (h_sq.T @ g_v) * v_w
    g_logvar_b = g_v.sum(axis=0) * v_b
    g_in = g_out @ layer.mean_w.T + 2.0 * h_in * (g_v @ v_w.T)
    grads = LayerGrads(g_mean_w, g_logvar_w, g_mean_b, g_logvar_b,
                       np.zeros_like(layer.log_prior_scale_w))
    return grads, g_in


def _mean_backward(layer: VariationalLinearLayer, h_in: np.ndarray, g_out: np.ndarray):
    grads = LayerGrads(
        h_in.T @ g_out,
        np.zeros_like(layer.logvar_w),
        g_out.sum(axis=0),
        np.zeros_like(layer.logvar_b),
        np.zeros_like(layer.log_prior_scale_w),
    )
    return grads, g_out @ layer.mean_w.T


def model_forward(
    model: ConditionalModel,
    x: np.ndarray,
    mode: str = "mean",
    stream: RngStream | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Predict (mu, sigma) for each x; sigma = exp(clamped log-scale) > 0.

    mode "mean" uses posterior means throughout; mode "sampled" draws one
    pre-activation noise matrix per layer from the given stream.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ArgumentError(f"x must be a 1-D vector, got shape {x.shape}")
    h_in = x[:, None]
    if mode == "sampled":
        if stream is None:
            raise ArgumentError("sampled mode needs an RngStream")
        p1 = layer_forward_local_reparam(model.hidden, h_in, stream.child("hidden"))
    elif mode == "mean":
        p1 = layer_forward_mean(model.hidden, h_in)
    else:
        raise ArgumentError(f"unknown forward mode {mode!r}")
    if not np.isfinite(p1).all():
        raise NumericError("non-finite activations in hidden layer")
    a = np.tanh(p1)
    if mode == "sampled":
        p2 = layer_forward_local_reparam(model.output, a, stream.child("output"))
    else:
        p2 = layer_forward_mean(model.output, a)
    if not np.isfinite(p2).all():
        raise NumericError("non-finite activations in output layer")
    mu = p2[:, 0]
    sigma = np.exp(np.clip(p2[:, 1], -LOG_SCALE_LIMIT, LOG_SCALE_LIMIT))
    return mu, sigma


def gaussian_nll(y: np.ndarray, mu: np.ndarray, sigma: np.ndarray) -> float:
    """Total negative Gaussian log-likelihood in nats."""
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise ArgumentError("sigma must be strictly positive")
    r = y - mu
    return float(np.sum(HALF_LOG_2PI + np.log(sigma) + r * r / (2.0 * sigma * sigma)))


def _kl_layer(layer: VariationalLinearLayer) -> float:
    ls = layer.log_prior_scale_w
    lv = layer.logvar_w
    mu = layer.mean_w
    inv_z2 = np.exp(-2.0 * ls)
    kl_w = np.sum(ls - 0.5 * lv + (np.exp(lv) + mu * mu) * inv_z2 * 0.5 - 0.5)
    lvb = layer.logvar_b
    mub = layer.mean_b
    kl_b = np.sum(-0.5 * lvb + (np.exp(lvb) + mub * mub) * 0.5 - 0.5)
    return float(kl_w + kl_b)


def kl_model(model: ConditionalModel) -> float:
    """Closed-form KL from all factorized posteriors to their priors, in nats."""
    return _kl_layer(model.hidden) + _kl_layer(model.output)


def _kl_layer_grads(layer: VariationalLinearLayer, scale: float) -> LayerGrads:
    inv_z2 = np.exp(-2.0 * layer.log_prior_scale_w)
    v_w = np.exp(layer.logvar_w)
    return LayerGrads(
        mean_w=scale * layer.mean_w * inv_z2,
        logvar_w=scale * (-0.5 + 0.5 * v_w * inv_z2),
        mean_b=scale * layer.mean_b,
        logvar_b=scale * (-0.5 + 0.5 * np.exp(layer.logvar_b)),
        log_prior_scale_w=scale * (1.0 - (v_w + layer.mean_w ** 2) * inv_z2),
    )


def _add_grads(a: LayerGrads, b: LayerGrads) -> LayerGrads:
    return LayerGrads(
        a.mean_w + b.mean_w,
        a.logvar_w + b.logvar_w,
        a.mean_b + b.mean_b,
        a.logvar_b + b.logvar_b,
        a.log_prior_scale_w + b.log_prior_scale_w,
    )


def _nll_head(y: np.ndarray, p2: np.ndarray):
    """Loss and d(loss)/d(p2) for the Gaussian head with clamped log-scale."""
    mu = p2[:, 0]
    t = p2[:, 1]
    tc = np.clip(t, -LOG_SCALE_LIMIT, LOG_SCALE_LIMIT)
    inv_var = np.exp(-2.0 * tc)
    r = y - mu
    loss = float(np.sum(HALF_LOG_2PI + tc + 0.5 * r * r * inv_var))
    g_mu = -r * inv_var
    g_tc = 1.0 - r * r * inv_var
    active = (t > -LOG_SCALE_LIMIT) & (t < LOG_SCALE_LIMIT)
    g_p2 = np.stack([g_mu, np.where(active, g_tc, 0.0)], axis=1)
    return loss, g_p2


def elbo_objective(
    model: ConditionalModel,
    x: np.ndarray,
    y: np.ndarray,
    beta: float,
    stream: RngStream,
) -> tuple[float, ModelGrads]:
    """Sampled NLL plus beta-weighted KL, with exact gradients under the draw.

    The noise matrices are a pure function of the stream, so repeated calls
    with the same stream evaluate the identical stochastic objective.
    """
    if not 0.0 <= beta <= 1.0:
        raise ArgumentError(f"beta must lie in [0, 1], got {beta}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    h_in = x[:, None]
    eps1 = draw_standard_normal(stream.child("hidden"), n, model.hidden_width)
    eps2 = draw_standard_normal(stream.child("output"), n, 2)

    p1, cache1 = _reparam_forward(model.hidden, h_in, eps1)
    a = np.tanh(p1)
    p2, cache2 = _reparam_forward(model.output, a, eps2)
    loss_nll, g_p2 = _nll_head(y, p2)

    grads_out, g_a = _reparam_backward(model.output, cache2, g_p2)
    g_p1 = g_a * (1.0 - a * a)
    grads_hid, _ = _reparam_backward(model.hidden, cache1, g_p1)

    loss = loss_nll + beta * kl_model(model)
    grads = ModelGrads(
        hidden=_add_grads(grads_hid, _kl_layer_grads(model.hidden, beta)),
        output=_add_grads(grads_out, _kl_layer_grads(model.output, beta)),
    )
    return loss, grads


def _map_penalty(layer: VariationalLinearLayer) -> float:
    """Negative log prior of the posterior means, constants dropped."""
    ls = layer.log_prior_scale_w
    mu = layer.mean_w
    pen_w = np.sum(ls + 0.5 * mu * mu * np.exp(-2.0 * ls))
    pen_b = 0.5 * np.sum(layer.mean_b ** 2)
    return float(pen_w + pen_b)


def _map_penalty_grads(layer: VariationalLinearLayer) -> LayerGrads:
    inv_z2 = np.exp(-2.0 * layer.log_prior_scale_w)
    return LayerGrads(
        mean_w=layer.mean_w * inv_z2,
        logvar_w=np.zeros_like(layer.logvar_w),
        mean_b=layer.mean_b.copy(),
        logvar_b=np.zeros_like(layer.logvar_b),
        log_prior_scale_w=1.0 - layer.mean_w ** 2 * inv_z2,
    )


def map_objective(
    model: ConditionalModel, x: np.ndarray, y: np.ndarray
) -> tuple[float, ModelGrads]:
    """Joint negative log-likelihood of data, mean parameters and prior scales.

    Deterministic point-estimate phase: posterior variances take no gradient.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h_in = x[:, None]
    p1 = h_in @ model.hidden.mean_w + model.hidden.mean_b
    a = np.tanh(p1)
    p2 = a @ model.output.mean_w + model.output.mean_b
    loss_nll, g_p2 = _nll_head(y, p2)

    grads_out, g_a = _mean_backward(model.output, a, g_p2)
    g_p1 = g_a * (1.0 - a * a)
    grads_hid, _ = _mean_backward(model.hidden, h_in, g_p1)

    loss = loss_nll + _map_penalty(model.hidden) + _map_penalty(model.output)
    grads = ModelGrads(
        hidden=_add_grads(grads_hid, _map_penalty_grads(model.hidden)),
        output=_add_grads(grads_out, _map_penalty_grads(model.output)),
    )
    return loss, grads
