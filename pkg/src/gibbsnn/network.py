"""Dense-tensor network kernel: layer specs, forward evaluation, and
reverse-mode gradients for the smooth part of the training energy.

Conventions
-----------
* Values are float64 numpy arrays; images are laid out (H, W, C) and batches
  as (n, H, W, C) / (n, features).
* Convolutions are 3x3, stride 1, zero-padded to keep spatial size ("same");
  max-pooling is 2x2 stride 2 (trailing odd row/column dropped).
* Per-layer weights live in flat vectors (kernel then bias); the list of
  those vectors is the weight set W^1..W^L referenced by the priors.
* Gradients at activation kinks and pooling ties follow the conventions of
  the activations module (subgradient 0; first maximum wins a tie).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationParams, activation_grads, activation_value
from .errors import NumericalError, ShapeError

KERNEL = 3


@dataclass(frozen=True)
class LayerSpec:
    """One layer: kind in {dense, conv2d, maxpool2x2, flatten, softmax,
    activation}; dims is (in, out) for dense and (out_c, in_c, 3, 3) for
    conv2d; activation layers carry a registered activation name."""

    kind: str
    dims: tuple = ()
    activation: str | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.dims:
            d["dims"] = list(self.dims)
        if self.activation is not None:
            d["activation"] = self.activation
        return d

    @staticmethod
    def from_dict(d: dict) -> "LayerSpec":
        return LayerSpec(d["kind"], tuple(d.get("dims", ())), d.get("activation"))


def dense(n_in: int, n_out: int) -> LayerSpec:
    return LayerSpec("dense", (n_in, n_out))


def conv2d(out_channels: int, in_channels: int) -> LayerSpec:
    return LayerSpec("conv2d", (out_channels, in_channels, KERNEL, KERNEL))


def maxpool() -> LayerSpec:
    return LayerSpec("maxpool2x2")


def flatten() -> LayerSpec:
    return LayerSpec("flatten")


def softmax_layer() -> LayerSpec:
    return LayerSpec("softmax")


def act(name: str) -> LayerSpec:
    return LayerSpec("activation", activation=name)


@dataclass(frozen=True)
class NetworkSpec:
    """Ordered layers plus the input shape and class count."""

    layers: tuple
    input_shape: tuple
    class_count: int

    def to_dict(self) -> dict:
        return {
            "layers": [l.to_dict() for l in self.layers],
            "input_shape": list(self.input_shape),
            "class_count": self.class_count,
        }

    @staticmethod
    def from_dict(d: dict) -> "NetworkSpec":
        return NetworkSpec(
            tuple(LayerSpec.from_dict(l) for l in d["layers"]),
            tuple(d["input_shape"]),
            int(d["class_count"]),
        )


def concat_weights(w: list) -> np.ndarray:
    return np.concatenate([wi.ravel() for wi in w]) if w else np.zeros(0)


def split_weights(vec: np.ndarray, lengths: list) -> list:
    out, pos = [], 0
    for k in lengths:
        out.append(vec[pos : pos + k].copy())
        pos += k
    return out


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


_LOG_FLOOR = 1e-300  # keeps log/div finite when softmax underflows to 0


class Network:
    """A compiled NetworkSpec: validated shapes, weight layout, forward and
    backward passes.

    All activation layers in one network must reference the same registered
    name; the parameter set passed to forward/backward is shared by every
    site (pass a sequence of per-site parameter sets to opt in to the
    per-layer extension).
    """

    def __init__(self, spec: NetworkSpec):
        self.spec = spec
        self.weight_lengths = []  # K_l per weighted layer
        self.weight_shapes = []  # (kernel shape, bias shape) per weighted layer
        self.layer_shapes = []  # output shape per layer (sample-local, no batch dim)
        self.activation_name = None
        self.n_activation_sites = 0

        shape = tuple(spec.input_shape)
        for i, layer in enumerate(spec.layers):
            where = f"layer {i} ({layer.kind})"
            if layer.kind == "dense":
                n_in, n_out = layer.dims
                if shape != (n_in,):
                    raise ShapeError(f"{where}: expected input ({n_in},), got {shape}")
                self.weight_shapes.append(((n_in, n_out), (n_out,)))
                self.weight_lengths.append(n_in * n_out + n_out)
                shape = (n_out,)
            elif layer.kind == "conv2d":
                out_c, in_c = layer.dims[0], layer.dims[1]
                if len(shape) != 3 or shape[2] != in_c:
                    raise ShapeError(f"{where}: expected input (H, W, {in_c}), got {shape}")
                self.weight_shapes.append(((out_c, in_c, KERNEL, KERNEL), (out_c,)))
                self.weight_lengths.append(out_c * in_c * KERNEL * KERNEL + out_c)
                shape = (shape[0], shape[1], out_c)
            elif layer.kind == "maxpool2x2":
                if len(shape) != 3 or shape[0] < 2 or shape[1] < 2:
                    raise ShapeError(f"{where}: needs (H>=2, W>=2, C), got {shape}")
                shape = (shape[0] // 2, shape[1] // 2, shape[2])
            elif layer.kind == "flatten":
                shape = (int(np.prod(shape)),)
            elif layer.kind == "activation":
                if layer.activation is None:
                    raise ShapeError(f"{where}: missing activation name")
                if self.activation_name is None:
                    self.activation_name = layer.activation
                elif self.activation_name != layer.activation:
                    raise ShapeError(f"{where}: mixed activation names are not supported")
                self.n_activation_sites += 1
            elif layer.kind == "softmax":
                if i != len(spec.layers) - 1:
                    raise ShapeError(f"{where}: softmax must be the final layer")
                if len(shape) != 1 or shape[0] != spec.class_count:
                    raise ShapeError(
                        f"{where}: expected ({spec.class_count},) logits, got {shape}"
                    )
            else:
                raise ShapeError(f"{where}: unknown layer kind")
            self.layer_shapes.append(shape)
        self.n_weights = int(sum(self.weight_lengths))
        self.n_layers = len(self.weight_lengths)  # L in the prior

    # -- weights ----------------------------------------------------------

    def init_weights(self, rng: np.random.Generator, scale: float | None = None) -> list:
        """He-style init: kernel entries N(0, 2/fan_in), biases 0."""
        out = []
        for (kshape, bshape) in self.weight_shapes:
            fan_in = kshape[0] if len(kshape) == 2 else int(np.prod(kshape[1:]))
            std = np.sqrt(2.0 / fan_in) if scale is None else scale
            kernel = rng.normal(0.0, std, size=kshape)
            out.append(np.concatenate([kernel.ravel(), np.zeros(bshape)]))
        return out

    def _unpack(self, flat: np.ndarray, idx: int):
        kshape, bshape = self.weight_shapes[idx]
        nk = int(np.prod(kshape))
        return flat[:nk].reshape(kshape), flat[nk:]

    def _site_params(self, act_params, site: int):
        if isinstance(act_params, (list, tuple)):
            return act_params[site]
        return act_params

    # -- forward ----------------------------------------------------------

    def forward(self, w: list, act_params, x: np.ndarray, check: bool = True) -> np.ndarray:
        """Evaluate the network; accepts one sample or a batch."""
        x = np.asarray(x, dtype=np.float64)
        single = x.shape == tuple(self.spec.input_shape)
        h = x[None] if single else x
        if h.shape[1:] != tuple(self.spec.input_shape):
            raise ShapeError(
                f"input shape {x.shape} does not match spec {tuple(self.spec.input_shape)}"
            )
        h, _ = self._run(w, act_params, h, record=False, check=check)
        return h[0] if single else h

    def loss(self, w, act_params, x, y, loss_kind: str = "cross-entropy",
             average: bool = False) -> float:
        """Batch loss only, no gradient bookkeeping."""
        if loss_kind not in ("squared-error", "cross-entropy"):
            raise ValueError(f"unknown loss kind {loss_kind!r}")
        x = np.asarray(x, dtype=np.float64)
        single = x.shape == tuple(self.spec.input_shape)
        h = x[None] if single else x
        n = h.shape[0]
        yb = _prepare_targets(y, n, self.layer_shapes[-1], single)
        out, _ = self._run(w, act_params, h, record=False)
        scale = 1.0 / n if average else 1.0
        if loss_kind == "squared-error":
            diff = out - yb
            return float(np.sum(diff * diff)) * scale
        p = np.maximum(out, _LOG_FLOOR)
        return float(-np.sum(yb * np.log(p))) * scale

    def _run(self, w, act_params, h, record: bool, check: bool = True,
             dropout: dict | None = None):
        # dropout maps layer index -> multiplicative mask applied to that
        # layer's output (mask carries its own 1/keep scaling); training-only
        caches = []
        wi = 0
        ai = 0
        for i, layer in enumerate(self.spec.layers):
            if layer.kind == "dense":
                W, b = self._unpack(w[wi], wi)
                caches.append(h if record else None)
                h = h @ W + b
                wi += 1
            elif layer.kind == "conv2d":
                W, b = self._unpack(w[wi], wi)
                xp = np.pad(h, ((0, 0), (1, 1), (1, 1), (0, 0)))
                caches.append(xp if record else None)
                h = _conv_forward(xp, W, b)
                wi += 1
            elif layer.kind == "maxpool2x2":
                h, idx, inshape = _maxpool_forward(h)
                caches.append((idx, inshape) if record else None)
            elif layer.kind == "flatten":
                caches.append(h.shape if record else None)
                h = h.reshape(h.shape[0], -1)
            elif layer.kind == "activation":
                caches.append((h, ai) if record else None)
                h = activation_value(layer.activation, self._site_params(act_params, ai), h)
                ai += 1
            elif layer.kind == "softmax":
                h = _softmax(h)
                caches.append(h if record else None)
            if dropout is not None and i in dropout:
                h = h * dropout[i]
            if check and not np.all(np.isfinite(h)):
                bad = h[~np.isfinite(h)]
                raise NumericalError(
                    f"non-finite value {bad.flat[0]!r} after layer {i} ({layer.kind})"
                )
        return h, caches

    # -- backward ---------------------------------------------------------

    def backward(
        self,
        w: list,
        act_params,
        x: np.ndarray,
        y: np.ndarray,
        loss_kind: str = "cross-entropy",
        average: bool = False,
        dropout: dict | None = None,
    ):
        """Loss and gradients of the whole batch.

        Returns (grad_w, grad_act, loss) where grad_w mirrors the weight
        set, grad_act maps each activation parameter name to its summed
        gradient, and loss is the total (or per-sample mean) of the chosen
        data term: squared-error sum_i (yhat_i - y_i)^2 or cross-entropy
        -sum_i y_i log yhat_i.  dropout maps layer index to a mask applied
        to that layer's output (training-time regularization path).
        """
        if loss_kind not in ("squared-error", "cross-entropy"):
            raise ValueError(f"unknown loss kind {loss_kind!r}")
        x = np.asarray(x, dtype=np.float64)
        single = x.shape == tuple(self.spec.input_shape)
        h = x[None] if single else x
        n = h.shape[0]
        yb = _prepare_targets(y, n, self.layer_shapes[-1], single)

        out, caches = self._run(w, act_params, h, record=True, dropout=dropout)
        scale = 1.0 / n if average else 1.0

        if loss_kind == "squared-error":
            diff = out - yb
            loss = float(np.sum(diff * diff)) * scale
            g = 2.0 * diff * scale
        else:
            p = np.maximum(out, _LOG_FLOOR)
            loss = float(-np.sum(yb * np.log(p))) * scale
            g = -(yb / p) * scale

        grad_w = [np.zeros_like(wi) for wi in w]
        per_site = isinstance(act_params, (list, tuple))
        grad_act = (
            [_zero_param_grads(self.activation_name, p) for p in act_params]
            if per_site
            else _zero_param_grads(self.activation_name, act_params)
        )

        wi = len(w)
        for i in range(len(self.spec.layers) - 1, -1, -1):
            layer = self.spec.layers[i]
            cache = caches[i]
            if dropout is not None and i in dropout:
                g = g * dropout[i]
            if layer.kind == "dense":
                wi -= 1
                W, _ = self._unpack(w[wi], wi)
                h_in = cache
                gW = h_in.reshape(-1, W.shape[0]).T @ g.reshape(-1, W.shape[1])
                gb = g.sum(axis=0)
                grad_w[wi] = np.concatenate([gW.ravel(), gb])
                g = g @ W.T
            elif layer.kind == "conv2d":
                wi -= 1
                W, _ = self._unpack(w[wi], wi)
                gW, gb, g = _conv_backward(cache, W, g)
                grad_w[wi] = np.concatenate([gW.ravel(), gb])
            elif layer.kind == "maxpool2x2":
                idx, inshape = cache
                g = _maxpool_backward(g, idx, inshape)
            elif layer.kind == "flatten":
                g = g.reshape(cache)
            elif layer.kind == "activation":
                h_in, ai = cache
                params = self._site_params(act_params, ai)
                d_x, d_params = activation_grads(layer.activation, params, h_in)
                target = grad_act[ai] if per_site else grad_act
                for name, dval in d_params.items():
                    if dval.ndim == g.ndim:
                        target[name] += float(np.sum(g * dval))
                    else:  # vector parameter: leading axis indexes components
                        target[name] += np.tensordot(dval, g, axes=g.ndim)
                g = g * d_x
            elif layer.kind == "softmax":
                p = cache
                g = p * (g - np.sum(g * p, axis=-1, keepdims=True))
            if not np.all(np.isfinite(g)):
                bad = g[~np.isfinite(g)]
                raise NumericalError(
                    f"non-finite gradient {bad.flat[0]!r} at layer {i} ({layer.kind})"
                )
        return grad_w, grad_act, loss


def _zero_param_grads(name, params):
    if name is None:
        return {}
    if isinstance(params, ActivationParams):
        return {"c": 0.0, "gamma": 0.0, "b": 0.0}
    out = {}
    for key, val in params.items():
        if key == "basis":
            continue
        arr = np.asarray(val, dtype=np.float64)
        out[key] = np.zeros_like(arr) if arr.ndim else 0.0
    return out


def _prepare_targets(y, n, out_shape, single):
    y = np.asarray(y)
    if single and y.ndim <= 1 and y.shape != (n,):
        y = y[None] if y.ndim == 1 else y.reshape(1)
    if y.ndim == 1 and np.issubdtype(y.dtype, np.integer):
        k = out_shape[0]
        onehot = np.zeros((len(y), k))
        onehot[np.arange(len(y)), y] = 1.0
        y = onehot
    y = y.astype(np.float64, copy=False)
    if y.shape != (n,) + tuple(out_shape):
        raise ShapeError(f"targets shaped {y.shape}, expected {(n,) + tuple(out_shape)}")
    return y


def _conv_forward(xp, W, b):
    # xp is zero-padded (n, H+2, W+2, C_in); one matmul per kernel tap
    n, Hp, Wp, cin = xp.shape
    H, Wd = Hp - 2, Wp - 2
    out = np.tile(b, (n, H, Wd, 1)).astype(np.float64)
    for di in range(KERNEL):
        for dj in range(KERNEL):
            tap = W[:, :, di, dj].T  # (C_in, C_out)
            out += xp[:, di : di + H, dj : dj + Wd, :] @ tap
    return out


def _conv_backward(xp, W, g):
    n, Hp, Wp, cin = xp.shape
    H, Wd = Hp - 2, Wp - 2
    gW = np.zeros_like(W)
    gxp = np.zeros_like(xp)
    gflat = g.reshape(-1, W.shape[0])
    for di in range(KERNEL):
        for dj in range(KERNEL):
            patch = xp[:, di : di + H, dj : dj + Wd, :]
            gW[:, :, di, dj] = (patch.reshape(-1, cin).T @ gflat).T
            gxp[:, di : di + H, dj : dj + Wd, :] += g @ W[:, :, di, dj]
    gb = gflat.sum(axis=0)
    return gW, gb, gxp[:, 1:-1, 1:-1, :]


def _maxpool_forward(h):
    n, H, W, C = h.shape
    H2, W2 = H // 2, W // 2
    t = h[:, : 2 * H2, : 2 * W2, :].reshape(n, H2, 2, W2, 2, C)
    t = t.transpose(0, 1, 3, 5, 2, 4).reshape(n, H2, W2, C, 4)
    idx = t.argmax(axis=-1)  # first max wins: one routed position per window
    out = np.take_along_axis(t, idx[..., None], axis=-1)[..., 0]
    return out, idx, h.shape


def _maxpool_backward(g, idx, inshape):
    n, H, W, C = inshape
    H2, W2 = H // 2, W // 2
    g4 = np.zeros((n, H2, W2, C, 4))
    np.put_along_axis(g4, idx[..., None], g[..., None], axis=-1)
    g4 = g4.reshape(n, H2, W2, C, 2, 2).transpose(0, 1, 4, 2, 5, 3)
    out = np.zeros(inshape)
    out[:, : 2 * H2, : 2 * W2, :] = g4.reshape(n, 2 * H2, 2 * W2, C)
    return out
