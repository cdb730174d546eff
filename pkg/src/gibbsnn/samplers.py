"""Gibbs sampler over (c, gamma, b, sigma2, lambda_b, lambda_l, W).

One sweep updates, in that fixed order: Metropolis-within-Gibbs moves for
the three activation parameters (Gaussian random walk, reflected at the
support boundaries), exact inverse-gamma draws for the three scale blocks,
and a proximal non-smooth HMC move for the weight vector.

Proposal scales and the HMC step size adapt by Robbins-Monro on log scale
during burn-in only (targets: 0.40 for the scalar moves, 0.65 for HMC),
then stay frozen so the post-burn-in chain is a valid MCMC kernel.

Mini-batch energies (SamplerConfig.batch_size) are supported but make the
target approximate; full batch is the default and the exact mode.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .activations import ActivationParams
from .errors import ConfigError, NumericalError
from .model import BayesModel, HyperState, ModelState, init_state
from .network import concat_weights, split_weights


# --- low-level draws -------------------------------------------------------


def sample_gamma_shape(rng: np.random.Generator, shape: float) -> float:
    """Gamma(shape, 1) draw by the squeeze/rejection method.

    For shape >= 1: d = shape - 1/3, c = 1/sqrt(9d); propose v = (1+cx)^3
    from x ~ N(0,1), accept by the squeeze test or the exact log test.
    For shape < 1 a boosted draw is scaled by U^(1/shape).
    """
    if shape <= 0.0:
        raise ValueError(f"shape must be positive, got {shape}")
    if shape < 1.0:
        # boost: Gamma(a) = Gamma(a+1) * U^(1/a)
        u = rng.random()
        while u == 0.0:
            u = rng.random()
        return sample_gamma_shape(rng, shape + 1.0) * u ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = rng.standard_normal()
        v = (1.0 + c * x) ** 3
        if v <= 0.0:
            continue
        u = rng.random()
        if u < 1.0 - 0.0331 * x**4:
            return d * v
        if u > 0.0 and math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v


def sample_inverse_gamma(shape: float, scale: float, rng: np.random.Generator) -> float:
    """Draw X with density proportional to x^(-1-shape) exp(-scale/x)."""
    if shape <= 0.0 or scale <= 0.0:
        raise ValueError(f"shape and scale must be positive, got {shape}, {scale}")
    return scale / sample_gamma_shape(rng, shape)


def soft_threshold(x, tau):
    """Proximity operator of tau*|.|: sign(x) * max(|x| - tau, 0)."""
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def reflect_into(x: float, lower=None, upper=None) -> float:
    """Fold a real into [lower, upper] by successive boundary reflections."""
    if lower is not None and upper is not None:
        width = upper - lower
        # reflection is periodic with period 2*width
        y = (x - lower) % (2.0 * width)
        return lower + (y if y <= width else 2.0 * width - y)
    if lower is not None and x < lower:
        return 2.0 * lower - x
    if upper is not None and x > upper:
        return 2.0 * upper - x
    return x


def mh_step(value: float, logdens, rng: np.random.Generator, scale: float,
            lower=None, upper=None):
    """One Gaussian random-walk Metropolis update of a scalar.

    The proposal is reflected at the support bounds, which keeps it
    symmetric, so the accept ratio is the plain density ratio.  logdens is
    called once at the current value and once at the candidate.
    Returns (new_value, accepted).
    """
    cand = reflect_into(value + scale * rng.standard_normal(), lower, upper)
    lc = logdens(cand)
    if lc == -np.inf:
        return value, False
    l0 = logdens(value)
    if math.log(max(rng.random(), 1e-300)) < lc - l0:
        return cand, True
    return value, False


# --- non-smooth HMC --------------------------------------------------------


def nshmc_step(q, rng, smooth_energy, smooth_grad, l1_scale, step,
               n_leapfrog, divergence_threshold=1000.0, energy0=None):
    """One proximal-leapfrog HMC trajectory on potential
    U(q) = smooth_energy(q) + sum_i |q_i| / l1_scale_i.

    The l1 term enters through its Moreau envelope with smoothing mu =
    step^2/2, whose gradient is evaluated via the proximity operator:
    (q - soft_threshold(q, tau)) / mu with per-coordinate threshold tau =
    (step^2/2) / l1_scale.  Written out, each position update applies the
    soft-threshold to the current point and adds the momentum drift.  The
    resulting map is an ordinary leapfrog on a differentiable surrogate,
    hence reversible and volume-preserving, so the terminal Metropolis
    test against the exact U keeps the stationary law correct whatever
    the discretization does; the surrogate only affects acceptance.

    Returns (q_new, info) with info keys: accepted, divergent, delta_h,
    accept_prob, energy (smooth energy at the returned point).
    """
    q = np.asarray(q, dtype=np.float64)
    l1_scale = np.broadcast_to(np.asarray(l1_scale, dtype=np.float64), q.shape)
    p = rng.standard_normal(q.shape)

    e0 = smooth_energy(q) if energy0 is None else energy0
    h0 = e0 + float(np.sum(np.abs(q) / l1_scale)) + 0.5 * float(p @ p)
    mu = 0.5 * step * step
    tau = mu / l1_scale

    def envelope_grad(qv):
        # d/dq of the Moreau envelope: sign(q)/lam clipped to q/mu near 0
        return (qv - soft_threshold(qv, tau)) / mu

    qn = q.copy()
    g = smooth_grad(qn) + envelope_grad(qn)
    for _ in range(n_leapfrog):
        p = p - 0.5 * step * g
        qn = qn + step * p
        g = smooth_grad(qn) + envelope_grad(qn)
        p = p - 0.5 * step * g
        if not np.all(np.isfinite(p)):
            break

    e1 = smooth_energy(qn)
    h1 = e1 + float(np.sum(np.abs(qn) / l1_scale)) + 0.5 * float(p @ p)
    dh = h1 - h0

    if not np.isfinite(dh) or abs(dh) > divergence_threshold:
        return q, {"accepted": False, "divergent": True, "delta_h": dh,
                   "accept_prob": 0.0, "energy": e0}
    a = min(1.0, math.exp(-dh))
    if rng.random() < a:
        return qn, {"accepted": True, "divergent": False, "delta_h": dh,
                    "accept_prob": a, "energy": e1}
    return q, {"accepted": False, "divergent": False, "delta_h": dh,
               "accept_prob": a, "energy": e0}


# --- configuration and chain containers -------------------------------------


@dataclass
class SamplerConfig:
    """Knobs of the Gibbs run.

    n_sweeps counts total sweeps including burn_in; burn_in draws are kept
    in the trace (for plots) but excluded from estimators.  batch_size
    turns on approximate mini-batch energies.  w_history_limit caps the
    weight count up to which full post-burn-in weight draws are retained;
    above it only running mean/variance accumulators are kept.
    """

    n_sweeps: int = 1000
    burn_in: int = 350
    n_chains: int = 2
    leapfrog_steps: int = 5
    step_size: float = 0.02
    mh_scale_c: float = 0.25
    mh_scale_gamma: float = 0.25
    mh_scale_b: float = 0.25
    target_accept_mh: float = 0.40
    target_accept_hmc: float = 0.65
    divergence_threshold: float = 1000.0
    thin: int = 1
    adapt: bool = True
    batch_size: int | None = None
    w_history_limit: int = 64
    update_weights: bool = True
    update_activation: bool = True
    # extra MH refreshes of c/gamma/b per sweep; 1 reproduces the printed
    # single-proposal block order, larger values speed up the heavy-tailed
    # scalar walks without touching the stationary law
    scalar_subsweeps: int = 1

    def validate(self):
        if self.n_sweeps < 1:
            raise ConfigError("n_sweeps must be >= 1")
        if not 0 <= self.burn_in < self.n_sweeps:
            raise ConfigError(
                f"burn_in must lie in [0, n_sweeps), got {self.burn_in} of {self.n_sweeps}")
        if self.thin < 1:
            raise ConfigError("thin must be >= 1")
        if self.leapfrog_steps < 1:
            raise ConfigError("leapfrog_steps must be >= 1")
        if self.step_size <= 0:
            raise ConfigError("step_size must be positive")
        if self.n_chains < 1:
            raise ConfigError("n_chains must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1 when set")
        if self.scalar_subsweeps < 1:
            raise ConfigError("scalar_subsweeps must be >= 1")
        return self


@dataclass
class ChainState:
    """Everything a chain owns: the model point, its RNG, adapted scales,
    and acceptance counters.  (seed, config) determines the trajectory."""

    model: ModelState
    rng: np.random.Generator
    iteration: int = 0
    step_size: float = 0.02
    mh_scales: dict = field(default_factory=lambda: {"c": 0.25, "gamma": 0.25, "b": 0.25})
    accept_counts: dict = field(default_factory=lambda: {"c": 0, "gamma": 0, "b": 0, "w": 0})
    proposal_counts: dict = field(default_factory=lambda: {"c": 0, "gamma": 0, "b": 0, "w": 0})
    divergences: int = 0
    energy: float = np.nan  # smooth data energy at the current point

    def accept_rates(self) -> dict:
        return {k: (self.accept_counts[k] / n if (n := self.proposal_counts[k]) else np.nan)
                for k in self.accept_counts}


class ChainTrace:
    """Column-wise record of one chain, plus weight posterior accumulators."""

    scalar_fields = ("c", "gamma", "b", "sigma2", "lambda_b")
    flag_fields = ("accept_c", "accept_gamma", "accept_b", "accept_w", "divergent")

    def __init__(self, chain_id: int, n_layers: int, n_weights: int,
                 keep_w_history: bool):
        self.chain_id = chain_id
        self.n_layers = n_layers
        self.iteration = []
        self.columns = {f: [] for f in self.scalar_fields}
        self.lam = []
        self.energy = []
        self.log_posterior = []
        self.flags = {f: [] for f in self.flag_fields}
        # post-burn-in weight accumulators (Welford over the flat vector)
        self.w_count = 0
        self.w_mean = np.zeros(n_weights)
        self.w_m2 = np.zeros(n_weights)
        self.w_history = [] if keep_w_history else None
        self.final_state = None

    def record(self, it, state: ModelState, energy, log_post, flags: dict):
        self.iteration.append(it)
        self.columns["c"].append(state.act.c)
        self.columns["gamma"].append(state.act.gamma)
        self.columns["b"].append(state.act.b)
        self.columns["sigma2"].append(state.hyper.sigma2)
        self.columns["lambda_b"].append(state.hyper.lam_b)
        self.lam.append(state.hyper.lam.copy())
        self.energy.append(energy)
        self.log_posterior.append(log_post)
        for f in self.flag_fields:
            self.flags[f].append(int(flags.get(f, 0)))

    def accumulate_weights(self, w: list):
        flat = concat_weights(w)
        self.w_count += 1
        d = flat - self.w_mean
        self.w_mean += d / self.w_count
        self.w_m2 += d * (flat - self.w_mean)
        if self.w_history is not None:
            self.w_history.append(flat)

    def finalize(self):
        self.iteration = np.asarray(self.iteration, dtype=np.int64)
        for f in self.scalar_fields:
            self.columns[f] = np.asarray(self.columns[f])
        self.lam = np.asarray(self.lam) if self.lam else np.zeros((0, self.n_layers))
        self.energy = np.asarray(self.energy)
        self.log_posterior = np.asarray(self.log_posterior)
        for f in self.flag_fields:
            self.flags[f] = np.asarray(self.flags[f], dtype=np.int64)
        if self.w_history is not None:
            self.w_history = (np.asarray(self.w_history) if self.w_history
                              else np.zeros((0, self.w_mean.size)))
        return self

    def series(self, name: str) -> np.ndarray:
        """Trace column by name; lambda_1..lambda_L address prior scales."""
        if name in self.columns:
            return self.columns[name]
        if name.startswith("lambda_"):
            idx = int(name.split("_", 1)[1])
            return self.lam[:, idx - 1]
        if name == "energy":
            return self.energy
        if name == "log_posterior":
            return self.log_posterior
        raise KeyError(f"no trace column {name!r}")

    def parameter_names(self) -> list:
        return list(self.scalar_fields) + [f"lambda_{i + 1}" for i in range(self.n_layers)]

    def w_variance(self) -> np.ndarray:
        if self.w_count < 2:
            return np.zeros_like(self.w_m2)
        return self.w_m2 / (self.w_count - 1)

    def to_csv(self, path):
        """iteration, c, gamma, b, sigma2, lambda_b, lambda_1..L, energy,
        log_posterior, accept flags; one row per recorded sweep."""
        header = (["iteration"] + list(self.scalar_fields)
                  + [f"lambda_{i + 1}" for i in range(self.n_layers)]
                  + ["energy", "log_posterior"] + list(self.flag_fields))
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            for i in range(len(self.iteration)):
                row = [int(self.iteration[i])]
                row += [repr(float(self.columns[f][i])) for f in self.scalar_fields]
                row += [repr(float(v)) for v in self.lam[i]]
                row += [repr(float(self.energy[i])), repr(float(self.log_posterior[i]))]
                row += [int(self.flags[f][i]) for f in self.flag_fields]
                wr.writerow(row)


# --- the sweep --------------------------------------------------------------


def _guarded_energy(model, w, act, subset):
    try:
        e = model.data_energy(w, act, subset)
    except NumericalError:
        return np.inf
    return e if np.isfinite(e) else np.inf


def _draw_ig(model, block, state, rng, it, layer=None):
    shape, scale = model.ig_params(block, state, layer)
    if scale <= 0.0 or not np.isfinite(scale):
        raise NumericalError(
            f"sweep {it}: conditional for {block} has non-positive scale "
            f"{scale!r} (shape {shape!r}); state dump: act={state.act.as_dict()}, "
            f"hyper=(lam={state.hyper.lam!r}, lam_b={state.hyper.lam_b!r}, "
            f"sigma2={state.hyper.sigma2!r})")
    x = sample_inverse_gamma(shape, scale, rng)
    if not np.isfinite(x) or x <= 0.0:
        raise NumericalError(f"sweep {it}: {block} draw returned {x!r}")
    return x


def gibbs_sweep(model: BayesModel, chain: ChainState, cfg: SamplerConfig,
                adapting: bool) -> dict:
    """One full sweep in the fixed block order; mutates chain in place.

    Returns the per-block accept flags for the trace row.  Raises
    NumericalError with a state dump if a conditional degenerates.
    """
    rng = chain.rng
    st = chain.model
    it = chain.iteration

    subset = None
    if cfg.batch_size is not None and cfg.batch_size < model.n_data:
        subset = rng.choice(model.n_data, size=cfg.batch_size, replace=False)
        chain.energy = _guarded_energy(model, st.w, st.act, subset)
    elif not np.isfinite(chain.energy):
        chain.energy = _guarded_energy(model, st.w, st.act, None)

    eta = (it + 1) ** -0.6 if adapting else 0.0
    flags = {}

    if cfg.update_activation:
        for _ in range(cfg.scalar_subsweeps):
            # c block: conditional is exp(-E) restricted to [0,1]
            e_cur = chain.energy
            cand = reflect_into(st.act.c + chain.mh_scales["c"] * rng.standard_normal(), 0.0, 1.0)
            e_cand = _guarded_energy(model, st.w, replace(st.act, c=cand), subset)
            acc = math.log(max(rng.random(), 1e-300)) < e_cur - e_cand
            if acc:
                st.act = replace(st.act, c=cand)
                chain.energy = e_cand
            chain.proposal_counts["c"] += 1
            chain.accept_counts["c"] += acc
            flags["accept_c"] = acc
            if adapting:
                chain.mh_scales["c"] *= math.exp(eta * (float(acc) - cfg.target_accept_mh))

            # gamma block: Gaussian prior N(0, sigma2) times the likelihood
            s2 = st.hyper.sigma2
            cand = st.act.gamma + chain.mh_scales["gamma"] * rng.standard_normal()
            e_cand = _guarded_energy(model, st.w, replace(st.act, gamma=cand), subset)
            num = -e_cand - cand**2 / (2.0 * s2)
            den = -chain.energy - st.act.gamma**2 / (2.0 * s2)
            acc = math.log(max(rng.random(), 1e-300)) < num - den
            if acc:
                st.act = replace(st.act, gamma=cand)
                chain.energy = e_cand
            chain.proposal_counts["gamma"] += 1
            chain.accept_counts["gamma"] += acc
            flags["accept_gamma"] = acc
            if adapting:
                chain.mh_scales["gamma"] *= math.exp(eta * (float(acc) - cfg.target_accept_mh))

            # b block: exponential prior, support [0, inf), reflect at 0
            cand = reflect_into(st.act.b + chain.mh_scales["b"] * rng.standard_normal(), 0.0, None)
            e_cand = _guarded_energy(model, st.w, replace(st.act, b=cand), subset)
            num = -e_cand - cand / st.hyper.lam_b
            den = -chain.energy - st.act.b / st.hyper.lam_b
            acc = math.log(max(rng.random(), 1e-300)) < num - den
            if acc:
                st.act = replace(st.act, b=cand)
                chain.energy = e_cand
            chain.proposal_counts["b"] += 1
            chain.accept_counts["b"] += acc
            flags["accept_b"] = acc
            if adapting:
                chain.mh_scales["b"] *= math.exp(eta * (float(acc) - cfg.target_accept_mh))

    # exact scale draws
    st.hyper.sigma2 = _draw_ig(model, "sigma2", st, rng, it)
    st.hyper.lam_b = _draw_ig(model, "lambda_b", st, rng, it)
    for l in range(model.net.n_layers):
        st.hyper.lam[l] = _draw_ig(model, "lambda_l", st, rng, it, layer=l)

    if cfg.update_weights and model.net.n_weights > 0:
        lengths = model.net.weight_lengths
        l1_scale = np.repeat(st.hyper.lam, lengths)
        act = st.act

        def smooth_energy(qv):
            return _guarded_energy(model, split_weights(qv, lengths), act, subset)

        def smooth_grad(qv):
            try:
                gw, _, _ = model.energy_grad(split_weights(qv, lengths), act, subset)
            except NumericalError:
                return np.full(qv.shape, np.nan)
            return concat_weights(gw)

        q0 = concat_weights(st.w)
        e0 = chain.energy if np.isfinite(chain.energy) else None
        q1, info = nshmc_step(
            q0, rng, smooth_energy, smooth_grad, l1_scale,
            chain.step_size, cfg.leapfrog_steps,
            divergence_threshold=cfg.divergence_threshold, energy0=e0)
        if info["accepted"]:
            st.w = split_weights(q1, lengths)
        chain.energy = info["energy"]
        chain.proposal_counts["w"] += 1
        chain.accept_counts["w"] += info["accepted"]
        chain.divergences += info["divergent"]
        flags["accept_w"] = info["accepted"]
        flags["divergent"] = info["divergent"]
        if adapting:
            if info["divergent"]:
                chain.step_size *= 0.5
            else:
                chain.step_size *= math.exp(
                    eta * (info["accept_prob"] - cfg.target_accept_hmc))

    chain.iteration += 1
    return flags


# --- chain drivers -----------------------------------------------------------


def run_chain(model: BayesModel, cfg: SamplerConfig, rng: np.random.Generator,
              chain_id: int = 0, init: ModelState | None = None,
              callback=None) -> ChainTrace:
    """Drive one chain for cfg.n_sweeps sweeps and return its trace.

    callback(sweep, chain) runs after every sweep (metrics hooks); it must
    not touch chain.rng or the trajectory changes.
    """
    cfg.validate()
    st = init.copy() if init is not None else init_state(model.net, rng)
    chain = ChainState(
        model=st, rng=rng, step_size=cfg.step_size,
        mh_scales={"c": cfg.mh_scale_c, "gamma": cfg.mh_scale_gamma, "b": cfg.mh_scale_b})
    keep_hist = model.net.n_weights <= cfg.w_history_limit
    trace = ChainTrace(chain_id, model.net.n_layers, model.net.n_weights, keep_hist)

    for sweep in range(cfg.n_sweeps):
        adapting = cfg.adapt and sweep < cfg.burn_in
        flags = gibbs_sweep(model, chain, cfg, adapting)
        if sweep % cfg.thin == 0:
            lp = model.prior_logdensity(st)
            lp = lp - chain.energy if lp != -np.inf else lp
            trace.record(sweep, st, chain.energy, lp, flags)
            if sweep >= cfg.burn_in:
                trace.accumulate_weights(st.w)
        if callback is not None:
            callback(sweep, chain)

    trace.final_state = st.copy()
    trace.rng_state = rng.bit_generator.state
    trace.accept_rates = chain.accept_rates()
    trace.divergences = chain.divergences
    trace.step_size = chain.step_size
    trace.mh_scales = dict(chain.mh_scales)
    return trace.finalize()


def run_chains(model: BayesModel, cfg: SamplerConfig, seed: int,
               init: ModelState | None = None, callback=None) -> list:
    """Independent chains from one seed: per-chain RNG streams are spawned
    from a root SeedSequence so chain k is reproducible in isolation."""
    cfg.validate()
    root = np.random.SeedSequence(seed)
    traces = []
    for k, child in enumerate(root.spawn(cfg.n_chains)):
        rng = np.random.Generator(np.random.PCG64(child))
        cb = (lambda sweep, chain, k=k: callback(k, sweep, chain)) if callback else None
        traces.append(run_chain(model, cfg, rng, chain_id=k, init=init, callback=cb))
    return traces


# --- estimators --------------------------------------------------------------


@dataclass
class PosteriorSummary:
    """Posterior means/stds per block; state() rebuilds the mean point."""

    means: dict
    stds: dict
    w_mean: list
    w_std: list
    n_samples: int

    def activation(self) -> ActivationParams:
        return ActivationParams(
            c=self.means["c"], gamma=self.means["gamma"], b=self.means["b"])

    def hyper(self, n_layers: int) -> HyperState:
        lam = np.array([self.means[f"lambda_{i + 1}"] for i in range(n_layers)])
        return HyperState(lam=lam, lam_b=self.means["lambda_b"], sigma2=self.means["sigma2"])

    def state(self) -> ModelState:
        n_layers = sum(1 for k in self.means if k.startswith("lambda_") and k != "lambda_b")
        return ModelState(
            [m.copy() for m in self.w_mean], self.activation(), self.hyper(n_layers))


def estimate(traces, burn_in: int, lengths=None) -> PosteriorSummary:
    """Pool post-burn-in draws across chains into MMSE point estimates.

    traces: one ChainTrace or a list of them.  burn_in is an iteration
    cutoff (rows with iteration >= burn_in enter the estimate).  lengths
    optionally splits the flat weight mean back into per-layer vectors.

    Weight draws are only retained from the run's own burn-in onward, so
    the weight window is the intersection of the two cutoffs: with full
    per-draw history (small nets) the cutoff applies exactly; otherwise
    the run-time Welford accumulators are used as-is and burn_in only
    moves the scalar windows.
    """
    if isinstance(traces, ChainTrace):
        traces = [traces]
    if not traces:
        raise ValueError("need at least one trace")
    names = traces[0].parameter_names()
    keep = [t.iteration >= burn_in for t in traces]
    if sum(int(k.sum()) for k in keep) == 0:
        raise ValueError(
            f"no post-burn-in samples: burn_in={burn_in}, "
            f"max iteration={max(int(t.iteration[-1]) for t in traces)}")

    means, stds = {}, {}
    for name in names + ["energy", "log_posterior"]:
        pooled = np.concatenate([t.series(name)[k] for t, k in zip(traces, keep)])
        means[name] = float(np.mean(pooled))
        stds[name] = float(np.std(pooled))

    if all(t.w_history is not None for t in traces):
        # history row i belongs to the i-th accumulated (post run burn-in)
        # recorded sweep, i.e. the last w_count entries of t.iteration
        rows = []
        for t in traces:
            if t.w_count == 0:
                continue
            iters = t.iteration[len(t.iteration) - t.w_count:]
            rows.append(t.w_history[iters >= burn_in])
        pooled = (np.concatenate(rows) if rows
                  else np.zeros((0, traces[0].w_mean.size)))
        n = pooled.shape[0]
        mean = pooled.mean(axis=0) if n else np.zeros_like(traces[0].w_mean)
        var = pooled.var(axis=0, ddof=1) if n > 1 else np.zeros_like(traces[0].w_m2)
    else:
        # pool the per-chain Welford accumulators
        n = 0
        mean = np.zeros_like(traces[0].w_mean)
        m2 = np.zeros_like(traces[0].w_m2)
        for t in traces:
            if t.w_count == 0:
                continue
            d = t.w_mean - mean
            tot = n + t.w_count
            m2 = m2 + t.w_m2 + d * d * (n * t.w_count / tot)
            mean = mean + d * (t.w_count / tot)
            n = tot
        var = m2 / (n - 1) if n > 1 else np.zeros_like(m2)
    w_mean, w_std = [mean], [np.sqrt(var)]
    if lengths is not None:
        w_mean = split_weights(mean, lengths)
        w_std = split_weights(np.sqrt(var), lengths)
    return PosteriorSummary(means, stds, w_mean, w_std, n)
