"""Delay estimation and precision analysis.

Pipeline: invert a measured spectrum to the delay domain and read off
side-peak positions (fast, initializes everything else); refine with a
multinomial maximum-likelihood fit over layer delays and weights; compare
against the per-trial Fisher information of the outcome model and the
quantum bound set by the source bandwidth alone.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize
from scipy.signal import find_peaks

from .biphoton import (
    BiphotonSource,
    DelayProfile,
    ForwardModelConfig,
    envelope_density,
    envelope_peak_normalized,
)
from .errors import (
    ConfigurationError,
    EstimationError,
    InputDataError,
    MalformedSpectrumError,
    QuadratureError,
)
from .hom import DetectionModel, OutcomeTable, binned_envelope
from .transform import FrequencyGrid, SpectralPattern, TemporalGrid, inverse_qwkt

_MAX_LAYERS = 4
_MAX_AXIS_POINTS = 256
_COARSE_POINTS = 21
_COARSE_SPAN_STEPS = 10.0
_QUAD_RTOL = 1e-8


@dataclass(frozen=True)
class PeakReport:
    """Delays read from side peaks of the inverted spectrum.

    ``delays`` holds (tau_hat, weight_hat, relative_height) triples sorted
    by increasing delay; weights are renormalized to sum to one.
    ``ambiguity_flag`` is set when two recovered delays are closer than two
    grid steps or a side peak overlaps the main peak.
    """

    delays: tuple[tuple[float, float, float], ...]
    ambiguity_flag: bool
    grid_resolution: float

    @property
    def taus(self) -> np.ndarray:
        return np.array([d[0] for d in self.delays])

    @property
    def weights(self) -> np.ndarray:
        return np.array([d[1] for d in self.delays])


@dataclass(frozen=True)
class MleResult:
    """Maximum-likelihood layer estimates with observed-information errors."""

    layers: tuple[tuple[float, float], ...]
    stderr_tau: tuple[float, ...]
    stderr_weight: tuple[float, ...]
    log_likelihood: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class FisherReport:
    """Per-trial delay information of an outcome model and the implied bound."""

    g_omega: float
    crb: float
    variant: str
    sigma: float
    tau: float
    gamma: float
    alpha: float
    n_trials: int


@dataclass(frozen=True)
class QfiReport:
    """Quantum information limit of the source itself."""

    q: float
    qcrb: float
    n_trials: int


def _parabolic_offset(y_minus: float, y_center: float, y_plus: float) -> tuple[float, float]:
    """Sub-grid vertex offset (in grid steps) and refined height."""
    denom = y_minus - 2.0 * y_center + y_plus
    if denom == 0.0:
        return 0.0, y_center
    delta = 0.5 * (y_minus - y_plus) / denom
    delta = float(np.clip(delta, -1.0, 1.0))
    height = y_center - 0.25 * (y_minus - y_plus) * delta
    return delta, height


def extract_delays(
    spectrum: SpectralPattern,
    source: BiphotonSource,
    threshold: float = 0.02,
    min_separation: int = 2,
) -> PeakReport:
    """Recover layer delays from the side peaks of the inverted spectrum.

    The spectrum is transformed to the delay domain; local maxima of |R(T)|
    at positive delay, above ``threshold`` times the main-peak height and at
    least ``min_separation`` grid steps apart, are refined by parabolic
    interpolation. Side-peak weights are twice the height ratio to the main
    peak, renormalized to unit sum.
    """
    if threshold <= 0.0 or threshold >= 1.0:
        raise ConfigurationError("threshold must lie in (0, 1)")
    if min_separation < 1:
        raise ConfigurationError("min_separation must be at least 1")
    correlation = inverse_qwkt(spectrum)
    t = correlation.grid.values
    dt = correlation.grid.delta_t
    y = np.abs(correlation.values)
    main_idx = int(np.argmax(y))
    if abs(t[main_idx]) > 2.0 * dt:
        raise MalformedSpectrumError(
            f"main correlation peak sits at T={t[main_idx]:.3e}s, "
            "not at zero delay; spectrum is malformed"
        )
    _, main_height = _parabolic_offset(
        y[main_idx - 1] if main_idx > 0 else y[main_idx],
        y[main_idx],
        y[main_idx + 1] if main_idx + 1 < y.size else y[main_idx],
    )
    if main_height <= 0.0:
        raise MalformedSpectrumError("spectrum inverts to an empty correlation")

    half = y.size // 2  # first index with positive T
    segment = y[half:]
    peak_idx, _ = find_peaks(
        segment, height=threshold * main_height, distance=min_separation
    )
    found = []
    for p in peak_idx:
        idx = half + int(p)
        if idx <= 0 or idx + 1 >= y.size:
            continue
        delta, height = _parabolic_offset(y[idx - 1], y[idx], y[idx + 1])
        tau_hat = t[idx] + delta * dt
        if tau_hat <= 0.0:
            continue
        found.append((tau_hat, height))
    found.sort()

    raw_weights = [2.0 * h / main_height for _, h in found]
    total = sum(raw_weights)
    delays = tuple(
        (tau, w / total, h / main_height)
        for (tau, h), w in zip(found, raw_weights)
    )

    overlap_limit = 3.0 / source.delta_temporal
    ambiguous = any(tau < overlap_limit for tau, _, _ in delays)
    taus = [tau for tau, _, _ in delays]
    ambiguous = ambiguous or any(
        b - a < 2.0 * dt for a, b in zip(taus, taus[1:])
    )
    return PeakReport(delays=delays, ambiguity_flag=ambiguous, grid_resolution=dt)


def _softmax_weights(logits: np.ndarray) -> np.ndarray:
    """Map k-1 free logits to k positive weights summing to one."""
    z = np.concatenate([logits, [0.0]])
    z = z - np.max(z)
    e = np.exp(z)
    return e / np.sum(e)


def _initial_layers(
    counts: OutcomeTable, source: BiphotonSource, k_layers: int, init
) -> list[tuple[float, float]]:
    """Starting (tau, weight) list, padded or truncated to k_layers."""
    if init is None:
        pattern = SpectralPattern(
            grid=counts.grid,
            values=np.asarray(counts.counts_coincidence, dtype=float),
            kind="counts",
        )
        init = extract_delays(pattern, source)
    if isinstance(init, PeakReport):
        layers = [(tau, weight) for tau, weight, _ in init.delays]
    else:
        layers = [(float(t), float(a)) for t, a in init]
    layers.sort()
    if len(layers) > k_layers:
        layers = sorted(sorted(layers, key=lambda la: -la[1])[:k_layers])
    grid_dt = TemporalGrid.conjugate_of(counts.grid).delta_t
    while len(layers) < k_layers:
        base = layers[-1][0] if layers else 10.0 / source.delta_temporal
        layers.append((base + 10.0 * grid_dt, 0.1))
    total = sum(a for _, a in layers)
    return [(t, a / total) for t, a in layers]


class _Likelihood:
    """Multinomial log-likelihood of an outcome table under candidate layers.

    Categories absent from the table (a spectrum file carries anti-bunch
    counts only) are handled by conditioning on the observed categories:
    their probabilities are renormalized by the observed total mass.
    """

    def __init__(
        self,
        counts: OutcomeTable,
        model: DetectionModel,
        source: BiphotonSource,
        cfg: ForwardModelConfig,
    ):
        if counts.counts_coincidence is None:
            raise InputDataError("outcome table holds no counts to fit")
        if counts.total_counts() <= 0:
            raise InputDataError("outcome table has zero total counts; no likelihood mass")
        self.model = model
        self.cfg = cfg
        self.omega = model.grid.values
        self.survive = (1.0 - model.gamma) ** 2
        self.alpha = model.alpha
        self.sign = cfg.fringe_sign
        self.phi = cfg.phi
        self.n_anti = np.asarray(counts.counts_coincidence, dtype=float)
        self.variant = counts.variant
        if self.variant == "two-port":
            self.env = binned_envelope(model.grid, source.sigma_spectral)
            self.n_bunch = (
                None
                if counts.counts_bunching is None
                else np.asarray(counts.counts_bunching, dtype=float)
            )
            self.n_single = counts.counts_single
            self.n_none = counts.counts_none
            self.complete = (
                self.n_bunch is not None
                and self.n_single is not None
                and self.n_none is not None
            )
            self.observed = float(np.sum(self.n_anti))
            if self.n_bunch is not None:
                self.observed += float(np.sum(self.n_bunch))
            if self.n_single is not None:
                self.observed += float(self.n_single)
            if self.n_none is not None:
                self.observed += float(self.n_none)
        else:
            self.env = envelope_peak_normalized(self.omega, source.sigma_spectral)
            self.n_single = (
                None
                if counts.counts_single is None
                else np.asarray(counts.counts_single, dtype=float)
            )
            self.n_none = (
                None
                if counts.counts_none is None
                else np.asarray(counts.counts_none, dtype=float)
            )
            self.complete = self.n_single is not None and self.n_none is not None

    def _fringe(self, taus: np.ndarray, weights: np.ndarray) -> np.ndarray:
        x = np.zeros_like(self.omega)
        for tau, weight in zip(taus, weights):
            x += weight * np.cos(self.omega * tau + self.phi)
        return x

    def log_likelihood(self, taus: np.ndarray, weights: np.ndarray) -> float:
        x = self._fringe(taus, weights)
        mod = self.sign * self.alpha * x
        if self.variant == "two-port":
            p_anti = self.survive * self.env * np.maximum(1.0 - mod, 0.0) / 2.0
            out = float(self.n_anti @ np.log(np.maximum(p_anti, 1e-300)))
            if self.n_bunch is not None:
                p_bunch = self.survive * self.env * np.maximum(1.0 + mod, 0.0) / 2.0
                out += float(self.n_bunch @ np.log(np.maximum(p_bunch, 1e-300)))
            gamma = self.model.gamma
            if self.n_single is not None:
                out += float(self.n_single) * math.log(max(2.0 * gamma * (1.0 - gamma), 1e-300))
            if self.n_none is not None:
                out += float(self.n_none) * math.log(max(gamma**2, 1e-300))
            if not self.complete:
                mass = float(np.sum(p_anti))
                if self.n_bunch is not None:
                    mass += float(np.sum(p_bunch))
                if self.n_single is not None:
                    mass += 2.0 * gamma * (1.0 - gamma)
                if self.n_none is not None:
                    mass += gamma**2
                out -= self.observed * math.log(max(mass, 1e-300))
            return out
        # trinomial: independent per-bin outcomes
        p_pair = (self.survive / 2.0) * self.env * np.maximum(1.0 + mod, 0.0)
        n_trials = self.model.n_trials
        if self.complete:
            p_single = np.maximum((1.0 - self.model.gamma**2) - p_pair, 1e-300)
            out = float(self.n_anti @ np.log(np.maximum(p_pair, 1e-300)))
            out += float(self.n_single @ np.log(p_single))
            p_none = max(self.model.gamma**2, 1e-300)
            out += float(np.sum(self.n_none)) * math.log(p_none)
            return out
        # pair counts only: per-bin binomial marginal with known trials
        out = float(self.n_anti @ np.log(np.maximum(p_pair, 1e-300)))
        out += float(
            (n_trials - self.n_anti) @ np.log(np.maximum(1.0 - p_pair, 1e-300))
        )
        return out


def mle_fit(
    counts: OutcomeTable,
    model: DetectionModel,
    source: BiphotonSource,
    k_layers: int,
    init=None,
    cfg: ForwardModelConfig = ForwardModelConfig(),
    max_iterations: int = 500,
) -> MleResult:
    """Maximum-likelihood fit of layer delays and weights to sampled counts.

    Free parameters are the k delays (optimized in units of the temporal
    width 1/delta) and k-1 weight logits; weights always sum to one. The
    search is a coarse scan around the initializer (21 points per parameter
    spanning +/-10 temporal grid steps for delays; a full Cartesian scan
    for up to three free parameters, coordinate sweeps beyond that)
    followed by Nelder-Mead descent to a delay tolerance of 1e-4/delta.
    Standard errors come from the finite-difference observed information
    at the optimum. Asking for more layers than the data shows is allowed;
    surplus layers converge to near-zero weights.
    """
    if not 1 <= k_layers <= _MAX_LAYERS:
        raise ConfigurationError(f"k_layers must lie in [1, {_MAX_LAYERS}]")
    if counts.variant != model.variant:
        raise ConfigurationError("counts table and model use different variants")
    like = _Likelihood(counts, model, source, cfg)
    delta = source.delta_temporal
    layers0 = _initial_layers(counts, source, k_layers, init)
    grid_dt = TemporalGrid.conjugate_of(counts.grid).delta_t

    k = k_layers
    taus0 = np.array([t for t, _ in layers0])
    weights0 = np.array([a for _, a in layers0])

    def unpack(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        taus = theta[:k] / delta
        if k == 1:
            return taus, np.array([1.0])
        return taus, _softmax_weights(theta[k:])

    def neg_log_likelihood(theta: np.ndarray) -> float:
        taus, weights = unpack(theta)
        return -like.log_likelihood(taus, weights)

    theta0 = np.concatenate(
        [
            taus0 * delta,
            np.log(np.maximum(weights0[:-1], 1e-6) / max(weights0[-1], 1e-6))
            if k > 1
            else [],
        ]
    )

    # Coarse scan around the initializer.
    tau_span = _COARSE_SPAN_STEPS * grid_dt * delta
    axes = [
        np.linspace(theta0[i] - tau_span, theta0[i] + tau_span, _COARSE_POINTS)
        for i in range(k)
    ]
    axes += [
        np.linspace(theta0[k + i] - 2.0, theta0[k + i] + 2.0, _COARSE_POINTS)
        for i in range(len(theta0) - k)
    ]
    best_theta = np.array(theta0, dtype=float)
    best_val = neg_log_likelihood(best_theta)
    if len(axes) <= 3:
        for combo in itertools.product(*axes):
            val = neg_log_likelihood(np.array(combo))
            if val < best_val:
                best_val = val
                best_theta = np.array(combo)
    else:
        for _ in range(2):
            for i, axis in enumerate(axes):
                trial = np.array(best_theta)
                for v in axis:
                    trial[i] = v
                    val = neg_log_likelihood(trial)
                    if val < best_val:
                        best_val = val
                        best_theta = np.array(trial)

    result = minimize(
        neg_log_likelihood,
        best_theta,
        method="Nelder-Mead",
        options={
            "maxiter": max_iterations,
            "xatol": 1e-4,
            "fatol": 1e-6,
        },
    )
    theta_hat = result.x if result.fun <= best_val else best_theta
    taus_hat, weights_hat = unpack(theta_hat)

    stderr_tau, stderr_weight = _observed_information_errors(
        like, taus_hat, weights_hat, source.sigma_spectral
    )
    order = np.argsort(taus_hat)
    layers = tuple((float(taus_hat[i]), float(weights_hat[i])) for i in order)
    return MleResult(
        layers=layers,
        stderr_tau=tuple(float(stderr_tau[i]) for i in order),
        stderr_weight=tuple(float(stderr_weight[i]) for i in order),
        log_likelihood=float(-min(result.fun, best_val)),
        converged=bool(result.success),
        iterations=int(result.nit),
    )


def _observed_information_errors(
    like: _Likelihood, taus: np.ndarray, weights: np.ndarray, sigma: float
) -> tuple[np.ndarray, np.ndarray]:
    """Standard errors from finite-difference observed information.

    Natural coordinates: the k delays plus the first k-1 weights (the last
    weight is one minus the rest; its error follows by error propagation).
    """
    k = taus.size
    total = like.n_anti.sum()
    if like.variant == "two-port" and like.n_bunch is not None:
        total += like.n_bunch.sum()
    total = max(float(total), 1.0)
    h_tau = 0.5 / (2.0 * sigma * math.sqrt(total))
    h_wt = min(0.5 / math.sqrt(total), 0.05)
    d = k + (k - 1)

    def f(vec: np.ndarray) -> float:
        t = vec[:k]
        if k == 1:
            w = np.array([1.0])
        else:
            head = vec[k:]
            w = np.concatenate([head, [1.0 - np.sum(head)]])
            if np.any(w <= 0.0):
                return math.inf
        return -like.log_likelihood(t, w)

    x0 = np.concatenate([taus, weights[:-1]]) if k > 1 else np.array(taus)
    steps = np.concatenate([np.full(k, h_tau), np.full(k - 1, h_wt)])
    hessian = np.empty((d, d))
    f0 = f(x0)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = steps[i]
        hessian[i, i] = (f(x0 + ei) - 2.0 * f0 + f(x0 - ei)) / steps[i] ** 2
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = steps[j]
            hessian[i, j] = hessian[j, i] = (
                f(x0 + ei + ej) - f(x0 + ei - ej) - f(x0 - ei + ej) + f(x0 - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
    if not np.all(np.isfinite(hessian)):
        return np.full(k, math.nan), np.full(k, math.nan)
    try:
        # Balance by the step scales: delays (seconds) and weights live
        # ~30 orders of magnitude apart, far past pinv's relative cutoff.
        balanced = hessian * np.outer(steps, steps)
        cov = np.linalg.pinv(balanced) * np.outer(steps, steps)
    except np.linalg.LinAlgError:
        return np.full(k, math.nan), np.full(k, math.nan)
    diag = np.diag(cov)
    stderr = np.where(diag > 0.0, np.sqrt(np.abs(diag)), math.nan)
    stderr_tau = stderr[:k]
    if k == 1:
        return stderr_tau, np.array([0.0])
    block = cov[k:, k:]
    last_var = float(np.sum(block))
    stderr_weight = np.concatenate(
        [stderr[k:], [math.sqrt(last_var) if last_var > 0.0 else math.nan]]
    )
    return stderr_tau, stderr_weight


def _quad_limit(tau: float, span: float) -> int:
    oscillations = abs(tau) * span / (2.0 * math.pi)
    return int(max(200, 8 * math.ceil(oscillations)))


def fisher_information(
    source: BiphotonSource, tau: float, model: DetectionModel
) -> FisherReport:
    """Per-trial Fisher information about a single delay.

    two-port: closed-form reduction of the per-bin information to
    ``(1-gamma)^2 integral env(omega) alpha^2 omega^2 sin^2(omega tau) /
    (1 - alpha^2 cos^2(omega tau)) domega`` over the grid window (the
    integrand collapses to ``env omega^2`` at unit visibility, giving
    4 sigma^2 independent of tau).

    trinomial: adaptive quadrature of the summed per-outcome terms
    ``(dP)^2 / P`` in its canonical fringe convention, with the envelope
    entering as a normal density (the sampling model peak-normalizes the
    same shape to get per-bin probabilities; the two conventions are
    deliberately kept as published); the no-click term carries no delay
    dependence and is identically zero (kept explicit below for
    completeness).
    """
    sigma = source.sigma_spectral
    gamma, alpha = model.gamma, model.alpha
    survive = (1.0 - gamma) ** 2
    if survive == 0.0:
        return FisherReport(
            g_omega=0.0, crb=math.inf, variant=model.variant, sigma=sigma,
            tau=tau, gamma=gamma, alpha=alpha, n_trials=model.n_trials,
        )
    lo, hi = model.grid.omega_min, model.grid.omega_max
    limit = _quad_limit(tau, hi - lo)

    if model.variant == "two-port":
        if alpha == 1.0:
            def integrand(w: float) -> float:
                return envelope_density(w, sigma) * w * w
        else:
            def integrand(w: float) -> float:
                s = math.sin(w * tau)
                c = math.cos(w * tau)
                return (
                    envelope_density(w, sigma)
                    * alpha**2 * w * w * s * s
                    / (1.0 - alpha**2 * c * c)
                )
    else:
        # Envelope enters as the printed normal density, not the per-bin
        # peak-normalized shape the sampling model uses.
        def integrand(w: float) -> float:
            env = envelope_density(w, sigma)
            c = math.cos(w * tau)
            s = math.sin(w * tau)
            p_pair = (survive / 2.0) * env * (1.0 + alpha * c)
            p_single = (1.0 - gamma**2) - p_pair
            dp = (survive / 2.0) * env * alpha * w * s
            if alpha == 1.0:
                term_pair = (survive / 2.0) * env * w * w * (1.0 - c)
            elif p_pair > 0.0:
                term_pair = dp * dp / p_pair
            else:
                term_pair = 0.0
            term_single = dp * dp / p_single if p_single > 1e-13 * (1.0 - gamma**2) else 0.0
            term_none = 0.0  # no-click probability is delay-independent
            return (term_pair + term_single + term_none) / survive

    value, error_estimate = quad(
        integrand, lo, hi, limit=limit, epsabs=1e-16 * sigma**2, epsrel=1e-10
    )
    tolerance = max(_QUAD_RTOL * abs(value), 1e-15 * sigma**2)
    if error_estimate > tolerance:
        raise QuadratureError(
            "Fisher information quadrature did not reach 1e-8 relative accuracy",
            value=value,
            error_estimate=error_estimate,
        )
    g_omega = survive * value
    crb = 1.0 / math.sqrt(model.n_trials * g_omega) if g_omega > 0.0 else math.inf
    return FisherReport(
        g_omega=g_omega,
        crb=crb,
        variant=model.variant,
        sigma=sigma,
        tau=tau,
        gamma=gamma,
        alpha=alpha,
        n_trials=model.n_trials,
    )


def quantum_fisher_information(source: BiphotonSource, n_trials: int) -> QfiReport:
    """Quantum information limit for delay sensing with this source.

    The delay enters as a phase generated by the idler frequency, so the
    information per pair is four times the idler-frequency variance of the
    joint spectral density. With a monochromatic pump the idler detuning is
    half the difference frequency (RMS 2 sigma), giving Q = sigma^2 and the
    bound ``qcrb = 1 / (2 sqrt(n Q))`` after n trials.
    """
    if n_trials < 1:
        raise ConfigurationError("n_trials must be at least 1")
    q = source.sigma_spectral**2
    # written as 1/(2 sigma sqrt(N)) so the printed value matches that
    # formula digit for digit
    qcrb = 1.0 / (2.0 * source.sigma_spectral * math.sqrt(n_trials))
    return QfiReport(q=q, qcrb=qcrb, n_trials=int(n_trials))


@dataclass(frozen=True)
class SweepCell:
    sigma: float
    tau: float
    gamma: float
    alpha: float
    variant: str
    g_omega: float | None
    crb: float | None
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepCell, ...]
    monotonicity: dict


def _worker_count(max_workers: int | None) -> int:
    if max_workers is not None:
        value = max_workers
    else:
        raw = os.environ.get("QWKT_THREADS", "1")
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigurationError(f"QWKT_THREADS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigurationError("worker count must be at least 1")
    return value


def sweep(
    sigma_values,
    tau_values,
    gamma_values,
    alpha_values,
    variant: str = "two-port",
    n_trials: int = 1,
    span_sd: float = 6.0,
    max_workers: int | None = None,
) -> SweepResult:
    """Fisher information over a Cartesian parameter grid.

    Evaluates every (sigma, tau, gamma, alpha) combination; numerical
    failures are recorded per cell instead of aborting the sweep. Worker
    thread count comes from ``max_workers`` or the QWKT_THREADS environment
    variable (cells are independent, results keep deterministic order).
    The ``monotonicity`` map labels the Fisher information trend along each
    axis as increasing / decreasing / constant / mixed, or unavailable when
    errors prevent the comparison.
    """
    axes = {
        "sigma": np.atleast_1d(np.asarray(sigma_values, dtype=float)),
        "tau": np.atleast_1d(np.asarray(tau_values, dtype=float)),
        "gamma": np.atleast_1d(np.asarray(gamma_values, dtype=float)),
        "alpha": np.atleast_1d(np.asarray(alpha_values, dtype=float)),
    }
    for name, values in axes.items():
        if values.size == 0:
            raise ConfigurationError(f"{name} axis is empty")
        if values.size > _MAX_AXIS_POINTS:
            raise ConfigurationError(
                f"{name} axis has {values.size} points, limit is {_MAX_AXIS_POINTS}"
            )
    combos = list(
        itertools.product(axes["sigma"], axes["tau"], axes["gamma"], axes["alpha"])
    )

    def evaluate(combo) -> SweepCell:
        sigma, tau, gamma, alpha = (float(v) for v in combo)
        try:
            source = BiphotonSource(sigma_spectral=sigma)
            grid = FrequencyGrid(omega_max=span_sd * 2.0 * sigma, n_bins=16)
            model = DetectionModel(
                grid=grid, gamma=gamma, alpha=alpha, n_trials=n_trials, variant=variant
            )
            report = fisher_information(source, tau, model)
            return SweepCell(
                sigma=sigma, tau=tau, gamma=gamma, alpha=alpha, variant=variant,
                g_omega=report.g_omega, crb=report.crb, error=None,
            )
        except (ConfigurationError, EstimationError, InputDataError) as exc:
            return SweepCell(
                sigma=sigma, tau=tau, gamma=gamma, alpha=alpha, variant=variant,
                g_omega=None, crb=None, error=str(exc),
            )

    workers = _worker_count(max_workers)
    if workers == 1 or len(combos) <= 1:
        rows = tuple(evaluate(c) for c in combos)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(evaluate, combos))
    shape = tuple(axes[name].size for name in ("sigma", "tau", "gamma", "alpha"))
    return SweepResult(rows=rows, monotonicity=_monotonicity(rows, shape))


def _monotonicity(rows: tuple[SweepCell, ...], shape: tuple[int, ...]) -> dict:
    names = ("sigma", "tau", "gamma", "alpha")
    if any(s == 0 for s in shape):
        return {}
    g = np.array(
        [row.g_omega if row.error is None else np.nan for row in rows], dtype=float
    ).reshape(shape)
    ok = np.array([row.error is None for row in rows]).reshape(shape)
    scale = float(np.nanmax(np.abs(g))) if np.any(ok) else 0.0
    tol = 1e-12 * scale if scale > 0.0 else 0.0
    labels = {}
    for axis, name in enumerate(names):
        if shape[axis] < 2:
            # a single point has no trend to violate
            labels[name] = "constant"
            continue
        moved = np.moveaxis(g, axis, -1).reshape(-1, shape[axis])
        moved_ok = np.moveaxis(ok, axis, -1).reshape(-1, shape[axis])
        slice_labels = set()
        for values, valid in zip(moved, moved_ok):
            if not np.all(valid):
                slice_labels.add("unavailable")
                continue
            diffs = np.diff(values)
            if np.all(np.abs(diffs) <= tol):
                slice_labels.add("constant")
            elif np.all(diffs > tol):
                slice_labels.add("increasing")
            elif np.all(diffs < -tol):
                slice_labels.add("decreasing")
            else:
                slice_labels.add("mixed")
        labels[name] = slice_labels.pop() if len(slice_labels) == 1 else "mixed"
    return labels
