"""Physical-layer model of the RIS-assisted link.

Geometry, pathloss, propagation phase, array factor, phase-shift
configuration synthesis, UE placement sampling, and beam-pattern analysis.
All power quantities are linear ratios; dB only appears at I/O boundaries.
Every function here is pure, so trial workers can share the inputs freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299792458.0

# directions of operation for a phase-shift configuration
DL = "dl"
UL = "ul"

TWO_PI = 2.0 * np.pi


def _sinc(x):
    """Unnormalized sinc, sin(x)/x with sinc(0) = 1."""
    return np.sinc(np.asarray(x) / np.pi)


@dataclass(frozen=True)
class RadioConstants:
    """Carrier frequency, wavelength and wavenumber of the narrowband signal."""

    carrier_frequency: float  # Hz
    wavelength: float         # m
    wavenumber: float         # rad/m

    @classmethod
    def from_frequency(cls, carrier_frequency: float) -> "RadioConstants":
        if carrier_frequency <= 0:
            raise ValueError("carrier frequency must be positive")
        lam = SPEED_OF_LIGHT / carrier_frequency
        return cls(carrier_frequency, lam, TWO_PI / lam)


@dataclass(frozen=True)
class RisGeometry:
    """Planar surface of m_x-by-m_z phase-shifting elements.

    Element pitches d_x, d_z are in meters and must not exceed the
    wavelength (checked against a RadioConstants by `validate`).
    """

    m_x: int
    m_z: int
    d_x: float
    d_z: float

    def __post_init__(self):
        if self.m_x < 1 or self.m_z < 1:
            raise ValueError("element counts must be at least 1")
        if self.d_x <= 0 or self.d_z <= 0:
            raise ValueError("element sizes must be positive")

    @property
    def panel_width(self) -> float:
        return self.m_x * self.d_x

    @property
    def panel_height(self) -> float:
        return self.m_z * self.d_z

    @property
    def total_elements(self) -> int:
        return self.m_x * self.m_z

    def validate(self, radio: RadioConstants) -> None:
        if self.d_x > radio.wavelength or self.d_z > radio.wavelength:
            raise ValueError("element size exceeds the wavelength")


@dataclass(frozen=True)
class NodePlacement:
    """Polar placement of a node (AP or UE) relative to the surface center."""

    distance: float      # m
    angle: float         # rad, in [0, pi/2]
    antenna_gain: float  # linear power ratio

    def __post_init__(self):
        if not 0.0 <= self.angle <= np.pi / 2:
            raise ValueError("placement angle outside [0, pi/2]")
        if self.distance < 0:
            raise ValueError("negative distance")


def fundamental_frequency(geom: RisGeometry, radio: RadioConstants) -> float:
    """Spatial frequency d_x / wavelength of the reflected-angle signal."""
    return geom.d_x / radio.wavelength


def far_field_min_distance(geom: RisGeometry, radio: RadioConstants) -> float:
    """Distance beyond which plane-wave propagation holds for the panel."""
    return 2.0 / radio.wavelength * max(geom.panel_width**2, geom.panel_height**2)


# ---------------------------------------------------------------------------
# Phase-shift configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Configuration:
    """Per-element phase shifts realizing one reflecting angle.

    The downlink and uplink realizations of the same angle are elementwise
    negatives modulo 2*pi.
    """

    reflect_angle: float
    phase_shifts: np.ndarray  # (m_x,), radians in [0, 2*pi)
    direction: str            # DL or UL


def _phase_profile(geom, radio, theta_in, theta_r):
    m1 = np.arange(1, geom.m_x + 1)
    return radio.wavenumber * geom.d_x * m1 * (np.sin(theta_in) - np.sin(theta_r))


def config_for_angle(geom: RisGeometry, radio: RadioConstants,
                     theta_a: float, theta_r: float, direction: str = DL) -> Configuration:
    """Phase-shift configuration steering an incoming wave from theta_a
    toward theta_r (downlink) or the reverse (uplink)."""
    for name, val in (("theta_a", theta_a), ("theta_r", theta_r)):
        if not 0.0 <= val <= np.pi / 2:
            raise ValueError(f"{name} outside [0, pi/2]")
    phases = _phase_profile(geom, radio, theta_a, theta_r)
    if direction == UL:
        phases = -phases
    elif direction != DL:
        raise ValueError(f"unknown direction {direction!r}")
    return Configuration(theta_r, np.mod(phases, TWO_PI), direction)


@dataclass(frozen=True)
class Codebook:
    """Ordered set of reflecting angles with their DL and UL phase profiles."""

    role: str                 # "training" | "access" | "ack"
    angles: np.ndarray        # (n,)
    dl_phases: np.ndarray     # (n, m_x)
    ul_phases: np.ndarray     # (n, m_x)

    def __len__(self) -> int:
        return len(self.angles)

    def entry(self, n: int, direction: str = DL) -> Configuration:
        phases = self.dl_phases[n] if direction == DL else self.ul_phases[n]
        return Configuration(float(self.angles[n]), phases, direction)

    @classmethod
    def for_angles(cls, role: str, geom: RisGeometry, radio: RadioConstants,
                   theta_a: float, angles) -> "Codebook":
        angles = np.atleast_1d(np.asarray(angles, dtype=float))
        dl = np.stack([_phase_profile(geom, radio, theta_a, t) for t in angles])
        return cls(role, angles, np.mod(dl, TWO_PI), np.mod(-dl, TWO_PI))


# ---------------------------------------------------------------------------
# Array factor
# ---------------------------------------------------------------------------

def array_factor(geom: RisGeometry, radio: RadioConstants, theta_k, theta_r):
    """Complex array gain by direct summation over the element columns.

    Broadcasts over array-valued angles; |result| <= m_x * m_z.
    """
    delta = np.sin(np.asarray(theta_k)) - np.sin(np.asarray(theta_r))
    m1 = np.arange(1, geom.m_x + 1)
    phase = radio.wavenumber * geom.d_x * np.multiply.outer(delta, m1)
    return geom.m_z * np.exp(1j * phase).sum(axis=-1)


def array_factor_closed_form(geom: RisGeometry, radio: RadioConstants, theta_k, theta_r):
    """Geometric-series form of `array_factor` (Dirichlet kernel magnitude).

    The removable singularities where sin(theta_k) - sin(theta_r) hits a
    grating condition are handled by an explicit branch returning m_x*m_z.
    """
    delta = np.sin(np.asarray(theta_k, dtype=float)) - np.sin(np.asarray(theta_r, dtype=float))
    half = 0.5 * radio.wavenumber * geom.d_x * delta  # x/2
    den = np.sin(half)
    singular = np.abs(den) < 1e-12
    safe = np.where(singular, 1.0, den)
    ratio = np.sin(geom.m_x * half) / safe
    out = geom.m_z * np.exp(1j * (geom.m_x + 1) * half) * ratio
    out = np.where(singular, geom.m_x * geom.m_z + 0j, out)
    if out.ndim == 0:
        return complex(out)
    return out


def normalized_array_power(geom: RisGeometry, radio: RadioConstants, theta_k, theta_r):
    """|A|^2 / (m_x*m_z)^2, the phased-array power pattern in [0, 1]."""
    a = array_factor_closed_form(geom, radio, theta_k, theta_r)
    return np.abs(a) ** 2 / (geom.m_x * geom.m_z) ** 2


# ---------------------------------------------------------------------------
# Pathloss and propagation phase
# ---------------------------------------------------------------------------

def _cascade_factor(geom, radio, ap, ue):
    if ap.distance <= 0 or ue.distance <= 0:
        raise ValueError("zero distance in pathloss")
    g = ap.antenna_gain * ue.antenna_gain
    return g / (4 * np.pi) ** 2 * (geom.d_x * geom.d_z / (ap.distance * ue.distance)) ** 2


def dl_pathloss(geom: RisGeometry, radio: RadioConstants,
                ap: NodePlacement, ue: NodePlacement) -> float:
    """Downlink cascaded pathloss; carries cos^2 of the AP-side angle."""
    return _cascade_factor(geom, radio, ap, ue) * np.cos(ap.angle) ** 2


def ul_pathloss(geom: RisGeometry, radio: RadioConstants,
                ap: NodePlacement, ue: NodePlacement) -> float:
    """Uplink cascaded pathloss; carries cos^2 of the UE-side angle."""
    return _cascade_factor(geom, radio, ap, ue) * np.cos(ue.angle) ** 2


def propagation_phase(geom: RisGeometry, radio: RadioConstants,
                      ap: NodePlacement, ue: NodePlacement) -> float:
    """Propagation phase distance psi (meters of path, sign included).

    Not reduced modulo the wavelength; reduction only happens inside
    exp(1j * wavenumber * psi).
    """
    offset = (np.sin(ap.angle) - np.sin(ue.angle)) * (geom.m_x + 1) / 2 * geom.d_x
    return -(ap.distance + ue.distance - offset)


@dataclass(frozen=True)
class ChannelResponse:
    """Cascaded complex channel with its factored pieces."""

    value: complex
    pathloss: float
    phase: float          # wavenumber * psi, radians
    array_factor: complex
    direction: str


def channel_response(geom: RisGeometry, radio: RadioConstants,
                     ap: NodePlacement, ue: NodePlacement,
                     theta_r: float, direction: str = DL) -> ChannelResponse:
    """sqrt(beta) * exp(+-j w psi) * A with direction-appropriate pieces."""
    psi = propagation_phase(geom, radio, ap, ue)
    phase = radio.wavenumber * psi
    a_dl = array_factor_closed_form(geom, radio, ue.angle, theta_r)
    if direction == DL:
        beta = dl_pathloss(geom, radio, ap, ue)
        value = np.sqrt(beta) * np.exp(1j * phase) * a_dl
        a = a_dl
    elif direction == UL:
        beta = ul_pathloss(geom, radio, ap, ue)
        a = np.conj(a_dl)
        value = np.sqrt(beta) * np.exp(-1j * phase) * a
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return ChannelResponse(complex(value), float(beta), float(phase), complex(a), direction)


def response_matrix(geom: RisGeometry, radio: RadioConstants, ap: NodePlacement,
                    ue_distances, ue_angles, ue_gain, reflect_angles,
                    direction: str = DL):
    """Channel responses for many UEs against many reflecting angles.

    Returns a (n_ue, n_angles) complex matrix; row k is UE k's response
    when the surface sweeps over `reflect_angles`.
    """
    d = np.asarray(ue_distances, dtype=float)[:, None]
    th = np.asarray(ue_angles, dtype=float)[:, None]
    g = ap.antenna_gain * ue_gain
    base = g / (4 * np.pi) ** 2 * (geom.d_x * geom.d_z / (ap.distance * d)) ** 2
    cos2 = np.cos(ap.angle) ** 2 if direction == DL else np.cos(th) ** 2
    beta = base * cos2
    psi = -(ap.distance + d - (np.sin(ap.angle) - np.sin(th)) * (geom.m_x + 1) / 2 * geom.d_x)
    a = array_factor_closed_form(geom, radio, th, np.asarray(reflect_angles)[None, :])
    if direction == UL:
        return np.sqrt(beta) * np.exp(-1j * radio.wavenumber * psi) * np.conj(a)
    return np.sqrt(beta) * np.exp(1j * radio.wavenumber * psi) * a


# ---------------------------------------------------------------------------
# UE placement sampling
# ---------------------------------------------------------------------------

def sample_ue_placements(rng: np.random.Generator, n: int, d_min: float, d_max: float):
    """Distances by inverse-CDF of p(d) = 2d/(d_max^2 - d_min^2); angles
    uniform on [0, pi/2]. Returns (distances, angles) arrays."""
    if not 0 < d_min < d_max:
        raise ValueError("need 0 < d_min < d_max")
    u = rng.random(n)
    d = np.sqrt(d_min**2 + u * (d_max**2 - d_min**2))
    theta = rng.random(n) * (np.pi / 2)
    return d, theta


def sample_ue_placement(rng: np.random.Generator, d_min: float, d_max: float,
                        gain: float) -> NodePlacement:
    d, theta = sample_ue_placements(rng, 1, d_min, d_max)
    return NodePlacement(float(d[0]), float(theta[0]), gain)


# ---------------------------------------------------------------------------
# Generalized bistatic pathloss and beam-pattern analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BistaticLink:
    """Source/destination directions in spherical angles plus the derived
    spatial frequencies of the scattered field."""

    source_azimuth: float
    source_elevation: float
    destination_azimuth: float
    destination_elevation: float
    omega_x: float = field(default=0.0)
    omega_z: float = field(default=0.0)

    @classmethod
    def from_angles(cls, radio: RadioConstants, source_azimuth: float,
                    source_elevation: float, destination_azimuth: float,
                    destination_elevation: float) -> "BistaticLink":
        wx = radio.wavenumber * (np.cos(source_azimuth) * np.sin(source_elevation)
                                 + np.cos(destination_azimuth) * np.sin(destination_elevation))
        wz = radio.wavenumber * (np.cos(source_elevation) + np.cos(destination_elevation))
        return cls(source_azimuth, source_elevation,
                   destination_azimuth, destination_elevation, wx, wz)


def bistatic_pathloss(link: BistaticLink, geom: RisGeometry, radio: RadioConstants,
                      gains: tuple, distances: tuple, array_factor_sq: float) -> float:
    """Scattered-field pathloss for arbitrary incidence/observation angles.

    Analysis-only: the protocol simulation uses the principal-plane model
    of `dl_pathloss`/`ul_pathloss`.
    """
    g_s, g_d = gains
    r_s, r_d = distances
    geo = (geom.d_x * geom.d_z / (r_s * r_d)) ** 2
    angular = np.sin(link.source_azimuth) ** 2 * np.sin(link.destination_elevation) ** 2
    taper = (_sinc(geom.d_x * link.omega_x / 2) ** 2
             * _sinc(geom.d_z * link.omega_z / 2) ** 2)
    return float(g_s * g_d / (4 * np.pi) ** 2 * geo * angular * taper * array_factor_sq)


@dataclass(frozen=True)
class BeamWidths:
    """First-null and half-power beam widths in sin-space, plus the number
    of half-power lobes needed to cover sin(theta) in [0, 1]."""

    fnbw: float
    hpbw: float
    coverage_count: int


# half-power abscissa of sin(x)/x; kept at full precision so the coverage
# count agrees exactly with the access-codebook lower bound at tau = 0.5
HALF_POWER_ABSCISSA = 1.3915573782515103


def beam_widths(geom: RisGeometry, radio: RadioConstants) -> BeamWidths:
    lam = radio.wavelength
    a = HALF_POWER_ABSCISSA
    fnbw = 2.0 * lam / (geom.d_x * geom.m_x)
    hpbw = 2.0 * lam * a / (geom.m_x * geom.d_x * np.pi)
    coverage = int(np.ceil(geom.m_x * geom.d_x * np.pi / (2 * lam * a)))
    return BeamWidths(float(fnbw), float(hpbw), coverage)
