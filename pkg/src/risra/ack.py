"""Downlink acknowledgment phase: the two codebook designs, the ACK signal
model, and the success check."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .channel import Codebook, RadioConstants, RisGeometry
from .access import DecodeResult

PRECODING = "prec"
TDMA = "tdma"
ACK_MODES = (PRECODING, TDMA)


@dataclass(frozen=True)
class AckDesign:
    """ACK sweep: one configuration (precoding) or one per decoded slot
    (TDMA), plus each decoded UE's assigned reflecting angle."""

    mode: str
    codebook: Codebook
    angle_of: Mapping[int, float]  # decoded UE -> reflecting angle of its ACK
    gamma_ack: float
    symbols_per_slot: int

    @property
    def slot_count(self) -> int:
        # one ACK slot per decoded UE in both modes
        return len(self.angle_of)

    @property
    def switch_count(self) -> int:
        return 1 if self.mode == PRECODING else self.slot_count


def design_ack_precoding(decode_result: DecodeResult, access_codebook: Codebook,
                         geom: RisGeometry, radio: RadioConstants, theta_a: float,
                         gamma_ack: float, l_ack: int,
                         contender_count: int | None = None) -> AckDesign:
    """Single configuration at the mean of the decoded slots' angles.

    `contender_count` switches to the literal sum-over-decoded divided by
    the number of contenders, kept for fidelity experiments.
    """
    slots = sorted(decode_result.decode_slots)
    if not slots:
        raise ValueError("no decoded slots; ACK phase is skipped")
    angles = access_codebook.angles[slots]
    divisor = contender_count if contender_count else len(slots)
    mean_angle = float(np.sum(angles) / divisor)
    codebook = Codebook.for_angles("ack", geom, radio, theta_a, [mean_angle])
    angle_of = {ue: mean_angle for ue in decode_result.decoded_ues}
    return AckDesign(PRECODING, codebook, angle_of, gamma_ack, l_ack)


def design_ack_tdma(decode_result: DecodeResult, access_codebook: Codebook,
                    geom: RisGeometry, radio: RadioConstants, theta_a: float,
                    gamma_ack: float, l_ack: int) -> AckDesign:
    """One configuration per decoded slot, in slot order; each decoded UE is
    served with the configuration of the slot it was decoded in."""
    slots = sorted(decode_result.decode_slots)
    if not slots:
        raise ValueError("no decoded slots; ACK phase is skipped")
    angles = access_codebook.angles[slots]
    codebook = Codebook.for_angles("ack", geom, radio, theta_a, angles)
    angle_of = {
        ue: float(access_codebook.angles[decode_result.slot_of[ue]])
        for ue in decode_result.decoded_ues
    }
    return AckDesign(TDMA, codebook, angle_of, gamma_ack, l_ack)


@dataclass(frozen=True)
class AckOutcome:
    acked: frozenset
    unsuccessful: frozenset


def simulate_and_check_ack(rng: np.random.Generator, decode_result: DecodeResult,
                           ack_design: AckDesign, channels: Mapping[int, complex],
                           rho_a: float, sigma2: float,
                           contenders=()) -> AckOutcome:
    """Send each decoded UE its ACK and test the received-energy threshold.

    `channels[k]` is UE k's downlink response under its assigned ACK
    configuration. Success: ||w||^2 / (L * sigma2) >= gamma_ack; with
    sigma2 = 0 any nonzero received signal succeeds.
    """
    l_ack = ack_design.symbols_per_slot
    alpha = np.ones(l_ack)  # unit-energy ACK message
    acked = set()
    for ue in sorted(decode_result.decoded_ues):
        zeta = channels[ue]
        signal = np.sqrt(rho_a) * zeta * alpha
        if sigma2 == 0.0:
            if np.abs(zeta) > 0:
                acked.add(ue)
            continue
        noise = np.sqrt(sigma2 / 2) * (rng.standard_normal(l_ack) + 1j * rng.standard_normal(l_ack))
        w = signal + noise
        if np.sum(np.abs(w) ** 2) / (l_ack * sigma2) >= ack_design.gamma_ack:
            acked.add(ue)
    unsuccessful = frozenset(contenders) - frozenset(acked)
    return AckOutcome(frozenset(acked), unsuccessful)
