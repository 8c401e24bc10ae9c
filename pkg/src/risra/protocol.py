"""Frame structure and orchestration: timing arithmetic with switching
overhead, Poisson load, and the single-frame pipeline
(training -> access -> acknowledgment).

A frame is a deterministic function of (scenario, generator state); sweep
harnesses derive one generator per trial so results are order-independent.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import access as ac
from . import ack as ak
from . import training as tr
from .channel import (
    NodePlacement,
    RadioConstants,
    RisGeometry,
    array_factor_closed_form,
    far_field_min_distance,
    response_matrix,
    sample_ue_placements,
)
from .config import ScenarioConfig


# ---------------------------------------------------------------------------
# Frame timing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameTiming:
    """Per-phase durations T_i = C_i L_i + xi_i C_i T_sw, in channel uses."""

    c_tr: int
    c_ac: int
    c_ack: int
    l_tr: int
    l_ac: int
    l_ack: int
    t_sw: float
    ack_mode: str
    xi_tr: float
    xi_ac: float
    xi_ack: float
    t_tr: float
    t_ac: float
    t_ack: float
    total: float


def frame_timing(c_tr: int, c_ac: int, c_ack: int, l_tr: int, l_ac: int,
                 l_ack: int, t_sw: float, ack_mode: str) -> FrameTiming:
    """Durations with the switching ratios: one switch per training/access
    slot; one switch total for precoding ACK, one per slot for TDMA ACK."""
    xi_tr = 1.0
    xi_ac = 1.0
    if c_ack == 0:
        xi_ack = 0.0
    elif ack_mode == ak.PRECODING:
        xi_ack = 1.0 / c_ack
    else:
        xi_ack = 1.0
    t_tr = c_tr * l_tr + xi_tr * c_tr * t_sw
    t_ac = c_ac * l_ac + xi_ac * c_ac * t_sw
    t_ack = c_ack * l_ack + xi_ack * c_ack * t_sw
    return FrameTiming(c_tr, c_ac, c_ack, l_tr, l_ac, l_ack, t_sw, ack_mode,
                       xi_tr, xi_ac, xi_ack, t_tr, t_ac, t_ack,
                       t_tr + t_ac + t_ack)


def sample_load(rng: np.random.Generator, kappa: float) -> int:
    """Number of contending UEs in a frame."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return int(rng.poisson(kappa))


# ---------------------------------------------------------------------------
# Scenario compilation (codebooks are built once, not per frame)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompiledScenario:
    config: ScenarioConfig
    radio: RadioConstants
    geom: RisGeometry
    ap: NodePlacement
    n_tr: int
    training: tr.TrainingDesign
    sigma_training: float   # effective noise power so the MVU variance is delta_tol
    n_ac: int
    access: ac.AccessDesign
    rho_k: float
    p_ref: float            # reference channel power normalizing SE targets
    delta_tol: float        # absolute per-estimate variance after inversion
    tse_norm: float         # normalized interpolation-only error floor
    lambda_mean: float      # grid average of the kernel weight sum


def _reference_power(geom, radio, cfg, reflect_angles) -> float:
    """Population-average |channel|^2 over UE positions at the given sweep
    angles; converts normalized SE targets into absolute estimate variance."""
    g = cfg.gain_ap * cfg.gain_ue
    e_inv_d2 = 2 * math.log(cfg.d_max_m / cfg.d_min_m) / (cfg.d_max_m**2 - cfg.d_min_m**2)
    base = (g / (4 * np.pi) ** 2 * (geom.d_x * geom.d_z / cfg.d_ap_m) ** 2
            * math.cos(cfg.theta_ap) ** 2 * e_inv_d2)
    grid_k = np.linspace(0.0, np.pi / 2, 128)
    a = array_factor_closed_form(geom, radio, grid_k[:, None],
                                 np.asarray(reflect_angles)[None, :])
    return float(base * np.mean(np.abs(a) ** 2))


def _reconstruction_floor(geom, radio, ap, gain_ue, codebook, sample_period,
                          query_angles):
    """Deterministic normalized interpolation error (TSE) of the training
    design at the angles the oracle is queried at, plus the average kernel
    weight sum there.

    The error/power ratio is independent of UE distance (both scale with
    the same pathloss), so a fixed-distance angle sweep suffices.
    """
    tks = np.linspace(0.0, np.pi / 2, 64)
    ds = np.full(tks.size, 50.0)
    truth = response_matrix(geom, radio, ap, ds, tks, gain_ue, query_angles,
                            direction="dl")
    samples = response_matrix(geom, radio, ap, ds, tks, gain_ue, codebook.angles,
                              direction="dl")
    predicted = tr.reconstruct(samples, sample_period).query(query_angles)
    tse = float(np.mean(np.abs(predicted - truth) ** 2) / np.mean(np.abs(truth) ** 2))
    lam = tr.interpolation_weights(len(codebook), sample_period, tr.SPLINE,
                                   query_angles)
    return tse, float(np.mean(lam.sum(axis=0)))


def _resolve_n_tr(cfg: ScenarioConfig, geom, radio) -> int:
    mode = cfg.n_tr_mode
    if mode not in ("median", "maximum", "taylor"):
        return int(mode)
    stats = tr.codebook_statistics(geom, radio, cfg.epsilon)
    return {
        "median": stats.median_bound,
        "maximum": stats.max_bound,
        "taylor": stats.taylor_bound,
    }[mode]


@functools.lru_cache(maxsize=64)
def compile_scenario(cfg: ScenarioConfig) -> CompiledScenario:
    cfg = cfg.validate()
    radio = RadioConstants.from_frequency(cfg.carrier_frequency_hz)
    geom = RisGeometry(cfg.m_x, cfg.m_z,
                       cfg.d_x_wavelengths * radio.wavelength,
                       cfg.d_z_wavelengths * radio.wavelength)
    geom.validate(radio)
    ap = NodePlacement(cfg.d_ap_m, cfg.theta_ap, cfg.gain_ap)

    ff = far_field_min_distance(geom, radio)
    if cfg.d_min_m < ff:
        warnings.warn(
            f"placements closer than the far-field distance ({ff:.1f} m) are "
            "allowed to keep the reference parameterization; the plane-wave "
            "model is optimistic below it",
            UserWarning,
            stacklevel=2,
        )

    bound = ac.access_lower_bound(geom, radio, cfg.tau)
    n_ac = max(int(round(cfg.kappa)), bound)
    codebook = ac.design_access_codebook(geom, radio, cfg.theta_ap, cfg.tau, n_ac)

    # the SE budget is anchored at the access sweep, the angles the oracle
    # is actually queried at during inference
    p_ref = _reference_power(geom, radio, cfg, codebook.angles)
    snr_dl = cfg.rho_ap / cfg.noise_power if cfg.noise_power > 0 else float("inf")

    n_tr = _resolve_n_tr(cfg, geom, radio)
    codebook_tr = tr.design_training_codebook(geom, radio, cfg.theta_ap, n_tr)
    t_samp = tr.training_sample_period(n_tr)
    tse_norm, lambda_mean = _reconstruction_floor(geom, radio, ap, cfg.gain_ue,
                                                  codebook_tr, t_samp,
                                                  codebook.angles)
    # invert the expected-SE decomposition: the estimate variance covers
    # whatever error budget remains above the interpolation floor
    if cfg.se_target > 0:
        delta_tol = max(0.0, cfg.se_target - tse_norm) * p_ref / lambda_mean
    else:
        delta_tol = 0.0
    training = tr.make_training_design(geom, radio, cfg.theta_ap, n_tr, snr_dl,
                                       delta_tol)
    # noise level that makes the per-slot MVU variance exactly delta_tol
    sigma_training = (delta_tol * training.symbols_per_slot * cfg.rho_ap
                      if delta_tol > 0 else 0.0)
    if cfg.power == "policy":
        rho_k = ac.min_ue_power(geom, radio, cfg.gain_ap, cfg.gain_ue, cfg.d_ap_m,
                                cfg.d_min_m, cfg.d_max_m, cfg.gamma_ac, cfg.tau,
                                cfg.noise_power)
    else:
        rho_k = cfg.rho_ue
    design = ac.AccessDesign(codebook, cfg.tau, ac.solve_x_tau(cfg.tau),
                             cfg.gamma_ac, rho_k, cfg.l_ac)
    return CompiledScenario(cfg, radio, geom, ap, n_tr, training, sigma_training,
                            n_ac, design, rho_k, p_ref, delta_tol, tse_norm,
                            lambda_mean)


# ---------------------------------------------------------------------------
# Single-frame pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameOutcome:
    """One RA frame: contenders, decode/ACK results, timing, SE sample."""

    k: int
    contenders: frozenset
    access_sets: dict
    decoded: ac.DecodeResult
    acked: ak.AckOutcome | None
    timing: FrameTiming
    policy_id: str
    ack_mode: str
    se_sample: float
    reception: ac.SlotReception | None = None

    def success_count(self, stage: str) -> int:
        if stage == "ac":
            return self.decoded.count
        if self.acked is None:
            return 0
        return len(self.acked.acked)


_EMPTY_DECODE = ac.DecodeResult(frozenset(), frozenset(), {})


def _ack_channels(sc: CompiledScenario, design: ak.AckDesign, ds, thetas):
    """Per-UE downlink response under the assigned ACK configuration."""
    ues = sorted(design.angle_of)
    idx = np.array(ues)
    d = ds[idx]
    th = thetas[idx]
    angles = np.array([design.angle_of[u] for u in ues])
    g = sc.config.gain_ap * sc.config.gain_ue
    beta = (g / (4 * np.pi) ** 2
            * (sc.geom.d_x * sc.geom.d_z / (sc.ap.distance * d)) ** 2
            * np.cos(sc.ap.angle) ** 2)
    psi = -(sc.ap.distance + d
            - (np.sin(sc.ap.angle) - np.sin(th)) * (sc.geom.m_x + 1) / 2 * sc.geom.d_x)
    a = array_factor_closed_form(sc.geom, sc.radio, th, angles)
    zeta = np.sqrt(beta) * np.exp(1j * sc.radio.wavenumber * psi) * a
    return {u: complex(z) for u, z in zip(ues, np.atleast_1d(zeta))}


def run_frame(scenario, rng: np.random.Generator, trace: bool = False) -> FrameOutcome:
    """Simulate one RA frame end to end.

    `scenario` is a ScenarioConfig or an already compiled scenario. The
    result is a deterministic function of (scenario, generator state).
    """
    sc = scenario if isinstance(scenario, CompiledScenario) else compile_scenario(scenario)
    cfg = sc.config
    k = sample_load(rng, cfg.kappa)
    is_oracle = cfg.policy != ac.POLICY_RRS

    n_ac = sc.n_ac
    sigma2 = cfg.noise_power
    timing_args = dict(
        c_tr=sc.n_tr if is_oracle else 0,
        c_ac=n_ac,
        l_tr=sc.training.symbols_per_slot,
        l_ac=cfg.l_ac,
        l_ack=cfg.l_ack,
        t_sw=cfg.t_sw,
        ack_mode=cfg.ack_mode,
    )

    if k == 0:
        timing = frame_timing(c_ack=0, **timing_args)
        return FrameOutcome(0, frozenset(), {}, _EMPTY_DECODE, None, timing,
                            cfg.policy, cfg.ack_mode, float("nan"))

    ds, thetas = sample_ue_placements(rng, k, cfg.d_min_m, cfg.d_max_m)
    angles_ac = sc.access.codebook.angles
    se_sample = float("nan")

    # --- channel-oracle training and inference ---
    if is_oracle:
        if cfg.se_target == 0.0:
            predictions = response_matrix(sc.geom, sc.radio, sc.ap, ds, thetas,
                                          cfg.gain_ue, angles_ac, direction="dl")
            se_sample = 0.0
        else:
            true_tr = response_matrix(sc.geom, sc.radio, sc.ap, ds, thetas,
                                      cfg.gain_ue, sc.training.codebook.angles,
                                      direction="dl")
            rx = tr.simulate_training_rx(rng, true_tr, sc.training, cfg.rho_ap,
                                         sc.sigma_training)
            estimates = tr.mvu_estimate(rx, sc.training, cfg.rho_ap)
            model = tr.reconstruct(estimates, sc.training.sample_period)
            predictions = ac.infer_ul(model, sc.access.codebook)
            true_ac = response_matrix(sc.geom, sc.radio, sc.ap, ds, thetas,
                                      cfg.gain_ue, angles_ac, direction="dl")
            se_sample = float(np.mean(np.abs(predictions - true_ac) ** 2) / sc.p_ref)

        if cfg.policy == ac.POLICY_CARAP:
            rows = ac.carap_slots(rng, predictions, cfg.r_replicas)
            sets = {u: ac.AccessSet(tuple(map(int, rows[u])), cfg.r_replicas) for u in range(k)}
        elif cfg.policy == ac.POLICY_GSCAP:
            rows = ac.gscap_slots(predictions, cfg.r_replicas)
            sets = {u: ac.AccessSet(tuple(map(int, rows[u])), cfg.r_replicas) for u in range(k)}
        else:  # smap
            snr_ul = sc.rho_k / sigma2 if sigma2 > 0 else float("inf")
            slot_tuples = ac.smap_slots(predictions, snr_ul, cfg.gamma_ac)
            sets = {u: ac.AccessSet(slot_tuples[u], 2) for u in range(k)}
    else:
        rows = ac.rrs_slots(rng, k, n_ac, cfg.r_replicas)
        sets = {u: ac.AccessSet(tuple(map(int, rows[u])), cfg.r_replicas) for u in range(k)}

    # --- uplink access and decoding ---
    ul = response_matrix(sc.geom, sc.radio, sc.ap, ds, thetas, cfg.gain_ue,
                         angles_ac, direction="ul")
    reception = ac.simulate_access(rng, {u: ul[u] for u in range(k)}, sets,
                                   sc.rho_k, sigma2, cfg.l_ac, n_ac=n_ac)
    snr_map = {}
    for u, aset in sets.items():
        for slot in aset.slots:
            if sigma2 > 0:
                snr_map[(u, slot)] = sc.rho_k * abs(ul[u, slot]) ** 2 / sigma2
            else:
                snr_map[(u, slot)] = float("inf")
    decoded = ac.decode_access(reception, snr_map, cfg.gamma_ac)

    # --- downlink acknowledgment ---
    acked = None
    c_ack = 0
    if cfg.ack_mode != "none" and decoded.count > 0:
        if cfg.ack_mode == ak.PRECODING:
            design = ak.design_ack_precoding(decoded, sc.access.codebook, sc.geom,
                                             sc.radio, cfg.theta_ap, cfg.gamma_ack,
                                             cfg.l_ack)
        else:
            design = ak.design_ack_tdma(decoded, sc.access.codebook, sc.geom,
                                        sc.radio, cfg.theta_ap, cfg.gamma_ack,
                                        cfg.l_ack)
        channels = _ack_channels(sc, design, ds, thetas)
        acked = ak.simulate_and_check_ack(rng, decoded, design, channels,
                                          cfg.rho_ap, sigma2,
                                          contenders=range(k))
        c_ack = decoded.count
    elif cfg.ack_mode != "none":
        acked = ak.AckOutcome(frozenset(), frozenset(range(k)))

    timing = frame_timing(c_ack=c_ack, **timing_args)
    return FrameOutcome(k, frozenset(range(k)), sets, decoded, acked, timing,
                        cfg.policy, cfg.ack_mode, se_sample,
                        reception if trace else None)
