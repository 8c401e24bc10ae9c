"""Uplink access phase: codebook with minimum-gain overlap, UE power
control, channel-oracle inference, access policies, received-signal
simulation, and the SIC decoder.

Policies operate on magnitudes of inferred channel responses. The decoder
is structural: it peels the contender graph with per-(UE, slot) SNR gates
instead of subtracting waveforms, which matches a threshold-based decode
condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channel import (
    Codebook,
    RadioConstants,
    RisGeometry,
    fundamental_frequency,
)
from .training import ReconstructionModel

SIDELOBE_LEVEL = 0.045  # first sidelobe of the normalized phased-array power

POLICY_CARAP = "carap"
POLICY_GSCAP = "gscap"
POLICY_SMAP = "smap"
POLICY_RRS = "rrs-aloha"
POLICIES = (POLICY_CARAP, POLICY_GSCAP, POLICY_SMAP, POLICY_RRS)


def solve_x_tau(tau: float) -> float:
    """Positive abscissa where |sinc(x)|^2 equals tau, bisected on (0, pi).

    tau must exceed the sidelobe level so the answer stays on the main lobe.
    """
    if not SIDELOBE_LEVEL < tau <= 1.0:
        raise ValueError("tau must lie in (0.045, 1]")
    if tau == 1.0:
        return 0.0

    def power(x: float) -> float:
        return (math.sin(x) / x) ** 2

    lo, hi = 1e-15, math.pi - 1e-15
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if power(mid) > tau:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def access_lower_bound(geom: RisGeometry, radio: RadioConstants, tau: float = 0.5) -> int:
    """Minimum number of tau-overlapping lobes covering sin(theta) in [0, 1]."""
    x_tau = solve_x_tau(tau)
    f0 = fundamental_frequency(geom, radio)
    return int(math.ceil(math.pi * geom.m_x / (2 * x_tau) * f0))


def access_angles(geom: RisGeometry, radio: RadioConstants, tau: float, n_ac: int) -> np.ndarray:
    """Reflecting angles from the power-slicing rule.

    The last entry's right tau-edge is pinned to sin = 1 and consecutive
    lobes meet at equal gain. At the coverage bound the meeting gain is
    exactly tau (a first sine marginally below zero is clipped); with more
    slots than the bound the half-step shrinks so the slots tile sin-space
    uniformly, which raises the meeting gain above tau.
    """
    bound = access_lower_bound(geom, radio, tau)
    if n_ac < bound:
        raise ValueError(f"n_ac={n_ac} below the coverage lower bound {bound}")
    x_tau = solve_x_tau(tau)
    f0 = fundamental_frequency(geom, radio)
    half_step = x_tau / (np.pi * f0 * geom.m_x)
    n = np.arange(n_ac)
    d_theta = (np.pi / 2) / n_ac
    if d_theta <= 2 * half_step:
        # enough slots that uniform angular slicing still keeps every
        # direction inside a tau-main-lobe; this also equalizes the per-slot
        # load of position-aware policies since UE angles are uniform
        return (n + 0.5) * d_theta
    sines = 1.0 - (2 * (n_ac - n) - 1) * half_step
    if sines[0] < -half_step:
        # the tau-spaced rule ran out of room below sin = 0; tile sin-space
        # uniformly instead (lobes then meet above tau)
        half_step = 1.0 / (2 * n_ac)
        sines = 1.0 - (2 * (n_ac - n) - 1) * half_step
    sines = np.clip(sines, 0.0, 1.0)
    angles = np.arcsin(sines)
    if np.any(np.diff(angles) <= 0):
        raise ValueError(f"degenerate access codebook for n_ac={n_ac}")
    return angles


def design_access_codebook(geom: RisGeometry, radio: RadioConstants, theta_a: float,
                           tau: float, n_ac: int) -> Codebook:
    return Codebook.for_angles("access", geom, radio, theta_a,
                               access_angles(geom, radio, tau, n_ac))


@dataclass(frozen=True)
class AccessDesign:
    """Access sweep parameters: codebook plus decode/power constants."""

    codebook: Codebook
    min_gain: float        # tau
    gain_abscissa: float   # x_tau
    gamma_ac: float        # linear SNR threshold
    rho_k: float           # W
    symbols_per_slot: int

    @property
    def n_ac(self) -> int:
        return len(self.codebook)


def expected_ul_pathloss(geom: RisGeometry, radio: RadioConstants,
                         gain_ap: float, gain_ue: float, d_ap: float,
                         d_min: float, d_max: float) -> float:
    """Closed-form E{beta_ul} over the UE position distribution."""
    if not 0 < d_min < d_max:
        raise ValueError("need 0 < d_min < d_max")
    g = gain_ap * gain_ue
    return (g / (4 * np.pi) ** 2 * (geom.d_x * geom.d_z / d_ap) ** 2
            * (math.log(d_max) - math.log(d_min)) / (d_max**2 - d_min**2))


def min_ue_power(geom: RisGeometry, radio: RadioConstants, gain_ap: float,
                 gain_ue: float, d_ap: float, d_min: float, d_max: float,
                 gamma_ac: float, tau: float, sigma2: float) -> float:
    """Smallest UE transmit power meeting the threshold in expectation."""
    e_beta = expected_ul_pathloss(geom, radio, gain_ap, gain_ue, d_ap, d_min, d_max)
    m_total = geom.m_x * geom.m_z
    return sigma2 * gamma_ac / (e_beta * m_total**2 * tau)


# ---------------------------------------------------------------------------
# Inference and access policies
# ---------------------------------------------------------------------------

def infer_ul(model: ReconstructionModel, codebook: Codebook) -> np.ndarray:
    """Predicted channel response at each access configuration."""
    return model.query(codebook.angles)


@dataclass(frozen=True)
class AccessSet:
    """Slots a UE transmits in, in selection order."""

    slots: tuple
    replicas: int

    def __post_init__(self):
        if len(self.slots) > self.replicas:
            raise ValueError("more slots than replicas")
        if len(set(self.slots)) != len(self.slots):
            raise ValueError("duplicate slots")


def _gumbel_top_r(rng, log_weights, r):
    """Rows of r distinct indices drawn without replacement, probability
    proportional to the weights (Gumbel-top-k)."""
    keys = log_weights + rng.gumbel(size=log_weights.shape)
    order = np.argsort(-keys, axis=1, kind="stable")
    return order[:, :r]


def carap_slots(rng: np.random.Generator, predictions: np.ndarray, r: int) -> np.ndarray:
    """Batched configuration-aware random selection: pmf proportional to
    |prediction|, sampled without replacement. All-zero rows fall back to
    a uniform pmf."""
    mags = np.abs(np.atleast_2d(predictions))
    k, n_ac = mags.shape
    if r > n_ac:
        raise ValueError("r exceeds the number of access slots")
    zero_rows = mags.sum(axis=1) == 0
    mags = np.where(zero_rows[:, None], 1.0, mags)
    with np.errstate(divide="ignore"):
        logw = np.log(mags)
    return _gumbel_top_r(rng, logw, r)


def gscap_slots(predictions: np.ndarray, r: int) -> np.ndarray:
    """Batched greedy strongest-configuration selection; ties break toward
    the lowest slot index."""
    mags = np.abs(np.atleast_2d(predictions))
    if r > mags.shape[1]:
        raise ValueError("r exceeds the number of access slots")
    order = np.argsort(-mags, axis=1, kind="stable")
    return order[:, :r]


def smap_slots(predictions: np.ndarray, snr_ul: float, gamma_ac: float) -> list:
    """Batched strongest-minimum selection: the best slot plus the slot
    closest above the threshold, when one exists."""
    mags = np.abs(np.atleast_2d(predictions))
    k, n_ac = mags.shape
    n1 = np.argmax(mags, axis=1)
    margin = snr_ul * mags**2 - gamma_ac
    margin[margin < 0] = np.inf
    margin[np.arange(k), n1] = np.inf
    n2 = np.argmin(margin, axis=1)
    has_n2 = np.isfinite(margin[np.arange(k), n2])
    return [
        (int(n1[i]), int(n2[i])) if has_n2[i] else (int(n1[i]),)
        for i in range(k)
    ]


def rrs_slots(rng: np.random.Generator, k: int, n_ac: int, r: int) -> np.ndarray:
    """Batched uniform selection without replacement (repetition ALOHA)."""
    if r > n_ac:
        raise ValueError("r exceeds the number of access slots")
    keys = rng.gumbel(size=(k, n_ac))
    return np.argsort(-keys, axis=1, kind="stable")[:, :r]


def policy_carap(rng: np.random.Generator, predictions, r: int) -> AccessSet:
    row = carap_slots(rng, np.asarray(predictions)[None, :], r)[0]
    return AccessSet(tuple(int(s) for s in row), r)


def policy_gscap(predictions, r: int) -> AccessSet:
    row = gscap_slots(np.asarray(predictions)[None, :], r)[0]
    return AccessSet(tuple(int(s) for s in row), r)


def policy_smap(predictions, snr_ul: float, gamma_ac: float) -> AccessSet:
    slots = smap_slots(np.asarray(predictions)[None, :], snr_ul, gamma_ac)[0]
    return AccessSet(slots, 2)


def policy_rrs_aloha(rng: np.random.Generator, n_ac: int, r: int) -> AccessSet:
    row = rrs_slots(rng, 1, n_ac, r)[0]
    return AccessSet(tuple(int(s) for s in row), r)


# ---------------------------------------------------------------------------
# Uplink reception and SIC decoding
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlotReception:
    """Per-slot received signals plus the ground-truth contender map."""

    signals: np.ndarray                  # (n_ac, l_ac) complex
    contenders: Mapping[int, frozenset]  # slot -> UE ids


def simulate_access(rng: np.random.Generator, ul_responses: Mapping[int, np.ndarray],
                    access_sets: Mapping[int, AccessSet], rho_k: float,
                    sigma2: float, l_ac: int, packets: Mapping[int, np.ndarray] | None = None,
                    n_ac: int | None = None) -> SlotReception:
    """Superpose contending UEs' uplink signals per slot and add noise.

    `ul_responses[k]` holds UE k's true uplink response for every slot.
    Default packets are unit-modulus QPSK symbols (zero mean, energy l_ac).
    """
    if n_ac is None:
        n_ac = len(next(iter(ul_responses.values()))) if ul_responses else 0
    signals = np.sqrt(sigma2 / 2) * (
        rng.standard_normal((n_ac, l_ac)) + 1j * rng.standard_normal((n_ac, l_ac))
    )
    contenders: dict[int, set] = {n: set() for n in range(n_ac)}
    for ue, aset in access_sets.items():
        if packets is not None and ue in packets:
            nu = np.asarray(packets[ue])
        else:
            nu = np.exp(1j * (np.pi / 2) * rng.integers(0, 4, size=l_ac) + 1j * np.pi / 4)
        for slot in aset.slots:
            signals[slot] += np.sqrt(rho_k) * ul_responses[ue][slot] * nu
            contenders[slot].add(ue)
    return SlotReception(signals, {n: frozenset(s) for n, s in contenders.items()})


@dataclass(frozen=True)
class DecodeResult:
    """Decoded UEs, the slots they were decoded in, and the assignment map."""

    decoded_ues: frozenset
    decode_slots: frozenset
    slot_of: Mapping[int, int]  # decoded UE -> first successful slot

    @property
    def count(self) -> int:
        return len(self.decoded_ues)


def decode_access(reception: SlotReception, true_ul_snr: Mapping[tuple, float],
                  gamma_ac: float) -> DecodeResult:
    """Singleton decoding plus repeated interference cancellation.

    A slot with exactly one remaining contender decodes when that pair's
    SNR meets gamma_ac; a decoded packet reveals the UE's whole access set
    so its replicas leave every slot. Repeats until no new singleton.
    """
    remaining = {n: set(ues) for n, ues in reception.contenders.items()}
    slots_of_ue: dict[int, list] = {}
    for n, ues in reception.contenders.items():
        for ue in ues:
            slots_of_ue.setdefault(ue, []).append(n)

    decoded: dict[int, int] = {}
    progress = True
    while progress:
        progress = False
        for n in sorted(remaining):
            ues = remaining[n]
            if len(ues) != 1:
                continue
            (ue,) = ues
            if ue in decoded:  # pragma: no cover - replicas are removed on decode
                continue
            if true_ul_snr[(ue, n)] >= gamma_ac:
                decoded[ue] = n
                for slot in slots_of_ue[ue]:
                    remaining[slot].discard(ue)
                progress = True
    return DecodeResult(
        decoded_ues=frozenset(decoded),
        decode_slots=frozenset(decoded.values()),
        slot_of=decoded,
    )
