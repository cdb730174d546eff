"""Gradient-descent comparison arm: Adam/SGD training of any registered
activation, with trainable activation parameters updated by backprop
alongside the weights.

Regularization follows the comparison protocol: optional per-layer l1
penalty (subgradient sign(w) added to the smooth gradient) and dropout
masks drawn per batch from a dedicated RNG stream, disabled at
evaluation time.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .activations import ActivationParams, default_params, registered_names, trainable_names
from .errors import ConfigError, NumericalError
from .network import Network
from .optim import Adam, SGD

OPTIMIZERS = ("adam", "sgd")


@dataclass
class BaselineConfig:
    activation: str = "relu"
    act_params: dict | None = None  # None -> registry defaults
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    epochs: int = 50
    batch_size: int = 32
    l1: float = 0.0  # scalar or per-layer sequence
    dropout: dict = field(default_factory=dict)  # layer index -> rate
    loss_kind: str = "cross-entropy"
    train_activation: bool = True

    def validate(self):
        if self.activation not in registered_names():
            raise ConfigError(f"unknown activation {self.activation!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}")
        # learning_rate 0 is allowed (freeze); negative rates are not
        if self.learning_rate < 0:
            raise ConfigError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        for i, rate in self.dropout.items():
            if not 0.0 <= rate < 1.0:
                raise ConfigError(f"dropout rate at layer {i} must lie in [0,1), got {rate}")
        return self


@dataclass
class Metrics:
    accuracy: float
    loss: float
    sensitivity: float
    specificity: float

    def as_dict(self) -> dict:
        return {"accuracy": self.accuracy, "loss": self.loss,
                "sensitivity": self.sensitivity, "specificity": self.specificity}


def evaluate(net: Network, w, act_params, dataset, loss_kind="cross-entropy") -> Metrics:
    """Accuracy, mean loss, and sensitivity/specificity.

    Two classes: standard binary definitions with class 1 as positive.
    More classes: macro one-vs-rest averages.
    """
    if dataset.n == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    probs = net.forward(w, act_params, dataset.inputs)
    pred = np.argmax(probs, axis=-1)
    y = np.asarray(dataset.labels)
    loss = net.loss(w, act_params, dataset.inputs, y, loss_kind, average=True)
    acc = float(np.mean(pred == y))

    k = dataset.class_count or int(max(y.max(), pred.max())) + 1
    if k == 2:
        sens = _rate(pred, y, positive=1)
        spec = _rate(pred, y, positive=0)
    else:
        sens_vals, spec_vals = [], []
        for cls in range(k):
            if np.any(y == cls):
                sens_vals.append(_rate(pred, y, positive=cls))
            if np.any(y != cls):
                # true-negative rate for class cls one-vs-rest
                spec_vals.append(float(np.mean(pred[y != cls] != cls)))
        sens = float(np.mean(sens_vals)) if sens_vals else float("nan")
        spec = float(np.mean(spec_vals)) if spec_vals else float("nan")
    return Metrics(acc, float(loss), sens, spec)


def _rate(pred, y, positive) -> float:
    """Fraction of class `positive` samples predicted as that class."""
    mask = y == positive
    if not np.any(mask):
        return float("nan")
    return float(np.mean(pred[mask] == positive))


def _l1_vector(l1, n_layers):
    arr = np.asarray(l1, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n_layers, float(arr))
    if arr.shape != (n_layers,):
        raise ConfigError(f"l1 must be a scalar or one value per weighted layer ({n_layers})")
    if np.any(arr < 0):
        raise ConfigError("l1 coefficients must be non-negative")
    return arr


def train_baseline(net: Network, cfg: BaselineConfig, train, test, seed: int = 0):
    """Epoch loop over mini-batches; returns (w, act_params, history).

    history rows are dicts (epoch, split, accuracy, loss) recorded after
    every epoch on both splits.  On divergence (non-finite loss) training
    aborts and the last end-of-epoch state is returned, with the event
    recorded in history[-1]["diverged"].
    """
    cfg.validate()
    if net.activation_name is not None and net.activation_name != cfg.activation:
        raise ConfigError(
            f"network is built for activation {net.activation_name!r}, "
            f"config says {cfg.activation!r}")
    root = np.random.SeedSequence(seed)
    init_ss, order_ss, mask_ss = root.spawn(3)
    rng = np.random.Generator(np.random.PCG64(init_ss))
    order_rng = np.random.Generator(np.random.PCG64(order_ss))
    mask_rng = np.random.Generator(np.random.PCG64(mask_ss))  # dropout-only stream

    w = net.init_weights(rng)
    params = dict(default_params(cfg.activation))
    if cfg.act_params:
        params.update(cfg.act_params)
    if cfg.activation == "mmelu":
        act = ActivationParams(**{k: float(v) for k, v in params.items()})
    else:
        act = params
    t_names = trainable_names(cfg.activation) if cfg.train_activation else ()
    l1 = _l1_vector(cfg.l1, net.n_layers)

    opt_cls = Adam if cfg.optimizer == "adam" else SGD
    opt_w = opt_cls(cfg.learning_rate)
    opt_a = opt_cls(cfg.learning_rate)

    def act_values():
        if cfg.activation == "mmelu":
            return [np.float64(getattr(act, nm)) for nm in t_names]
        return [np.asarray(act[nm], dtype=np.float64) for nm in t_names]

    def set_act(values):
        nonlocal act
        if cfg.activation == "mmelu":
            upd = {nm: float(v) for nm, v in zip(t_names, values)}
            # keep the chain-rule update inside the legal box
            upd["c"] = min(max(upd.get("c", act.c), 0.0), 1.0)
            upd["b"] = max(upd.get("b", act.b), 0.0)
            act = ActivationParams(**{**act.as_dict(), **upd})
        else:
            for nm, v in zip(t_names, values):
                act[nm] = v if np.ndim(act[nm]) else float(v)

    history = []
    n = train.n
    last_good = ([wi.copy() for wi in w], act)
    for epoch in range(cfg.epochs):
        order = order_rng.permutation(n)
        diverged = False
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb, yb = train.inputs[idx], train.labels[idx]
            masks = None
            if cfg.dropout:
                masks = {}
                for li, rate in cfg.dropout.items():
                    shape = (len(idx),) + tuple(net.layer_shapes[li])
                    keep = (mask_rng.random(shape) >= rate)
                    masks[li] = keep.astype(np.float64) / (1.0 - rate)
            try:
                gw, ga, loss = net.backward(w, act, xb, yb, cfg.loss_kind,
                                            average=True, dropout=masks)
            except NumericalError:
                diverged = True
                break
            if not np.isfinite(loss):
                diverged = True
                break
            gw = [g + c * np.sign(wi) for g, c, wi in zip(gw, l1, w)]
            w = opt_w.step(w, gw)
            if t_names:
                grads = [np.asarray(ga[nm], dtype=np.float64) for nm in t_names]
                set_act(opt_a.step(act_values(), grads))
        if diverged:
            w, act = last_good
            row = {"epoch": epoch, "split": "train", "accuracy": float("nan"),
                   "loss": float("nan"), "diverged": True}
            history.append(row)
            break
        last_good = ([wi.copy() for wi in w], act)
        for split, ds in (("train", train), ("test", test)):
            m = evaluate(net, w, act, ds, cfg.loss_kind)
            history.append({"epoch": epoch, "split": split,
                            "accuracy": m.accuracy, "loss": m.loss})
    return w, act, history


def write_history(history, path):
    """Metrics-history CSV: epoch, split, accuracy, loss."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["epoch", "split", "accuracy", "loss"])
        for row in history:
            wr.writerow([row["epoch"], row["split"],
                         repr(float(row["accuracy"])), repr(float(row["loss"]))])
