"""Hierarchical posterior over network weights and activation parameters.

The joint density combines a data-fit term exp(-E) with a per-layer
Laplace prior on weights, a uniform prior on the blend weight c, a
Gaussian prior on the hat center gamma, an exponential prior on the hat
width b, and inverse-gamma hyperpriors on every scale (the per-layer
Laplace scales, the exponential scale, and the Gaussian variance).

All conditional densities are expressed through one log_posterior so the
Gibbs blocks can be cross-checked against it term by term.
"""

from dataclasses import dataclass, replace

import numpy as np

from .activations import ActivationParams
from .network import Network

BLOCKS = ("c", "gamma", "b", "sigma2", "lambda_b", "lambda_l")


@dataclass
class FixedHypers:
    """Shape/scale constants of the inverse-gamma hyperpriors."""

    delta: float = 1e-3
    mu: float = 1e-3


@dataclass
class HyperState:
    """Scale parameters that are sampled rather than fixed.

    lam holds one Laplace scale per weighted layer, lam_b the scale of
    the exponential prior on b, sigma2 the variance of the prior on
    gamma.  All must stay positive; in_support reports violations
    instead of raising so density code can map them to -inf.
    """

    lam: np.ndarray
    lam_b: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=np.float64)

    @property
    def in_support(self) -> bool:
        return (
            bool(np.all(self.lam > 0.0))
            and self.lam_b > 0.0
            and self.sigma2 > 0.0
            and bool(np.all(np.isfinite(self.lam)))
            and np.isfinite(self.lam_b)
            and np.isfinite(self.sigma2)
        )

    def copy(self) -> "HyperState":
        return HyperState(self.lam.copy(), self.lam_b, self.sigma2)


@dataclass
class ModelState:
    """One point of the sampled space: weights, activation triple, scales."""

    w: list
    act: ActivationParams
    hyper: HyperState

    def copy(self) -> "ModelState":
        return ModelState([wi.copy() for wi in self.w], replace(self.act), self.hyper.copy())


def l1_norms(w: list) -> np.ndarray:
    """Per-layer sums of absolute weight values."""
    return np.array([float(np.sum(np.abs(wi))) for wi in w])


def cond_ig_params_lambda_l(layer: int, w: list, fixed: FixedHypers,
                            literal: bool = False):
    """Inverse-gamma conditional for the layer's Laplace scale.

    Corrected: IG(delta + K_l, mu + |W_l|_1).  The literal flag drops the
    weight norm from the scale, reproducing a published misprint.
    """
    k = w[layer].size
    if literal:
        return fixed.delta + k, fixed.mu
    return fixed.delta + k, fixed.mu + float(np.sum(np.abs(w[layer])))


def cond_ig_params_lambda_b(b: float, fixed: FixedHypers):
    """IG(delta + 1, mu + b), exact conditional of the exponential scale."""
    if b < 0.0:
        raise ValueError(f"b must be non-negative, got {b}")
    return fixed.delta + 1.0, fixed.mu + b


def cond_ig_params_sigma2(gamma: float, fixed: FixedHypers,
                          literal: bool = False):
    """Inverse-gamma conditional for the prior variance of the hat center.

    Corrected: IG(delta + 1/2, mu + gamma^2/2); the 1/2s come from the
    Gaussian's (sigma2)^(-1/2) normalization and squared exponent.  The
    literal flag reproduces the published IG(delta, gamma + 2 mu), whose
    scale can go non-positive; kept only for comparison.
    """
    if literal:
        return fixed.delta, gamma + 2.0 * fixed.mu
    return fixed.delta + 0.5, fixed.mu + gamma**2 / 2.0


class BayesModel:
    """Posterior evaluator bound to a network and a training set.

    paper_literal switches two inverse-gamma conditionals to their
    uncorrected published parameterizations; everything else, including
    log_posterior, always uses the corrected forms.
    """

    def __init__(
        self,
        net: Network,
        inputs: np.ndarray,
        labels: np.ndarray,
        fixed: FixedHypers | None = None,
        loss_kind: str = "cross-entropy",
        paper_literal: bool = False,
    ):
        if loss_kind not in ("squared-error", "cross-entropy"):
            raise ValueError(f"unknown loss kind {loss_kind!r}")
        self.net = net
        self.inputs = np.asarray(inputs, dtype=np.float64)
        self.labels = np.asarray(labels)
        self.fixed = fixed or FixedHypers()
        self.loss_kind = loss_kind
        self.paper_literal = paper_literal
        self.n_data = int(self.inputs.shape[0])

    # -- data term ----------------------------------------------------------

    def data_energy(self, w: list, act, subset=None) -> float:
        """Negative log-likelihood up to constants: the batch loss.

        With subset (an index array) the subset loss is rescaled by
        n_total/n_subset, an unbiased stand-in for the full-batch value.
        """
        if self.n_data == 0:
            return 0.0
        if subset is None:
            x, y = self.inputs, self.labels
            scale = 1.0
        else:
            x, y = self.inputs[subset], self.labels[subset]
            scale = self.n_data / len(subset)
        return scale * self.net.loss(w, act, x, y, self.loss_kind)

    def energy_grad(self, w: list, act, subset=None):
        """(grad_w, grad_act, energy) of the data term, same scaling rules."""
        if self.n_data == 0:
            return [np.zeros_like(wi) for wi in w], None, 0.0
        if subset is None:
            x, y = self.inputs, self.labels
            scale = 1.0
        else:
            x, y = self.inputs[subset], self.labels[subset]
            scale = self.n_data / len(subset)
        gw, gact, loss = self.net.backward(w, act, x, y, self.loss_kind)
        if scale != 1.0:
            gw = [scale * g for g in gw]
            if gact is not None:
                gact = {k: scale * v for k, v in gact.items()}
        return gw, gact, scale * loss

    # -- joint density ------------------------------------------------------

    def prior_logdensity(self, state: ModelState) -> float:
        """Every log-posterior term except the data energy.

        Terms, with K_l the weight count of layer l and d/m the fixed
        hyper shape/scale:

            sum_l [ -K_l log(lam_l) - |W_l|_1 / lam_l ]          Laplace
            sum_l [ -(1+d) log(lam_l) - m / lam_l ]              IG hyper
            -(1/2) log(sigma2) - gamma^2 / (2 sigma2)            Gaussian
            -(1+d) log(sigma2) - m / sigma2                      IG hyper
            -log(lam_b) - b / lam_b                              exponential
            -(1+d) log(lam_b) - m / lam_b                        IG hyper

        c contributes 0 on [0,1].  Additive constants are dropped.  The
        (1/2) log(sigma2) term is the Gaussian prior normalization; it is
        what makes the sigma2 conditional come out as IG(d + 1/2, ...).
        """
        act, hyp = state.act, state.hyper
        if not act.in_support or not hyp.in_support:
            return -np.inf
        d, m = self.fixed.delta, self.fixed.mu
        norms = l1_norms(state.w)
        k = np.asarray(self.net.weight_lengths, dtype=np.float64)
        lp = float(np.sum(-k * np.log(hyp.lam) - norms / hyp.lam))
        lp += float(np.sum(-(1.0 + d) * np.log(hyp.lam) - m / hyp.lam))
        lp += -0.5 * np.log(hyp.sigma2) - act.gamma**2 / (2.0 * hyp.sigma2)
        lp += -(1.0 + d) * np.log(hyp.sigma2) - m / hyp.sigma2
        lp += -np.log(hyp.lam_b) - act.b / hyp.lam_b
        lp += -(1.0 + d) * np.log(hyp.lam_b) - m / hyp.lam_b
        return float(lp)

    def log_posterior(self, state: ModelState, subset=None) -> float:
        """Unnormalized log joint density; -inf encodes support violations
        (c outside [0,1], negative b, any scale <= 0)."""
        prior = self.prior_logdensity(state)
        if prior == -np.inf:
            return -np.inf
        return prior - self.data_energy(state.w, state.act, subset)

    # -- scalar conditionals (log, up to constants in the block value) -------

    def cond_logdensity(self, block: str, value: float, state: ModelState,
                        layer: int | None = None, subset=None) -> float:
        """Log conditional density of one block at `value`, other blocks
        held at `state`.  For "lambda_l" pass the layer index."""
        if block == "c":
            if not 0.0 <= value <= 1.0:
                return -np.inf
            act = replace(state.act, c=value)
            return -self.data_energy(state.w, act, subset)
        if block == "gamma":
            if not np.isfinite(value):
                return -np.inf
            act = replace(state.act, gamma=value)
            e = self.data_energy(state.w, act, subset)
            return -e - value**2 / (2.0 * state.hyper.sigma2)
        if block == "b":
            if value < 0.0:
                return -np.inf
            act = replace(state.act, b=value)
            e = self.data_energy(state.w, act, subset)
            return -e - value / state.hyper.lam_b
        if block in ("sigma2", "lambda_b", "lambda_l"):
            if value <= 0.0:
                return -np.inf
            shape, scale = self.ig_params(block, state, layer)
            return -(shape + 1.0) * np.log(value) - scale / value
        raise ValueError(f"unknown block {block!r}; expected one of {BLOCKS}")

    # -- exact inverse-gamma conditionals ------------------------------------

    def ig_params(self, block: str, state: ModelState, layer: int | None = None):
        """(shape, scale) of the inverse-gamma conditional for a scale block.

        Corrected forms (default):
            lambda_l | W   ~ IG(delta + K_l, mu + |W_l|_1)
            lambda_b | b   ~ IG(delta + 1,   mu + b)
            sigma2  | gamma ~ IG(delta + 1/2, mu + gamma^2 / 2)

        paper_literal instead reproduces the published parameterizations
        IG(delta + K_l, mu) and IG(delta, gamma + 2 mu) for comparison;
        lambda_b is unaffected.
        """
        if block == "lambda_l":
            if layer is None:
                raise ValueError("lambda_l conditional needs a layer index")
            return cond_ig_params_lambda_l(layer, state.w, self.fixed, self.paper_literal)
        if block == "lambda_b":
            return cond_ig_params_lambda_b(state.act.b, self.fixed)
        if block == "sigma2":
            return cond_ig_params_sigma2(state.act.gamma, self.fixed, self.paper_literal)
        raise ValueError(f"no inverse-gamma conditional for block {block!r}")

    def l1_term(self, w: list, lam: np.ndarray) -> float:
        """sum_l |W_l|_1 / lam_l, the non-smooth part of -log posterior."""
        return float(np.sum(l1_norms(w) / np.asarray(lam, dtype=np.float64)))


def init_state(net: Network, rng: np.random.Generator) -> ModelState:
    """Default chain start: He-scaled weights, centered activation triple,
    unit scales."""
    w = net.init_weights(rng)
    act = ActivationParams(c=0.5, gamma=0.0, b=1.0)
    hyper = HyperState(lam=np.ones(net.n_layers), lam_b=1.0, sigma2=1.0)
    return ModelState(w, act, hyper)
