"""mmWave link model: path loss, blockage, sparse multipath over a half-wavelength ULA, and
the DFT beamspace used for single-RF-chain beam selection.

Beam grid convention: beam ``m`` of an ``n``-element array points at ``sin(theta) = -1 + 2m/n``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0

__all__ = [
    "SPEED_OF_LIGHT",
    "RadioConfig",
    "ChannelRealization",
    "DeadLinkError",
    "pathloss_db",
    "pathloss_gain",
    "dbm_to_watt",
    "watt_to_dbm",
    "sample_blockage",
    "steering_vector",
    "beam_grid",
    "beamspace_transform",
    "select_beam",
    "effective_gain",
    "sample_paths",
    "sample_multipath",
    "beam_response",
]


class DeadLinkError(ValueError):
    """Raised when beam selection is asked to pick a beam for links carrying no energy."""


@dataclass(frozen=True)
class RadioConfig:
    """Radio constants. Defaults are the 28 GHz small-cell deployment values."""

    fc: float = 28e9
    bandwidth: float = 100e6
    p_sbs: float = 24.0  # dBm
    p_user: float = 20.0  # dBm
    noise_power: float = -104.0  # dBm
    residual_si: float = -110.0  # dBm
    n_tx_sbs: int = 64
    n_tx_user: int = 32
    los_decay: float = 100.0  # m
    n_nlos_paths: int = 2
    n_dl: int = 2
    n_ul: int = 2

    def __post_init__(self):
        if not self.fc > 0 or not self.bandwidth > 0:
            raise ValueError("fc and bandwidth must be positive")
        if self.n_tx_sbs < 1 or self.n_tx_user < 1:
            raise ValueError("antenna counts must be at least 1")
        if not self.los_decay > 0:
            raise ValueError("los_decay must be positive")
        if self.n_nlos_paths < 0:
            raise ValueError("n_nlos_paths must be non-negative")
        if self.n_dl < 0 or self.n_ul < 0:
            raise ValueError("user counts must be non-negative")
        for name in ("p_sbs", "p_user", "noise_power", "residual_si"):
            if math.isnan(getattr(self, name)) or getattr(self, name) == math.inf:
                raise ValueError(f"{name} must be finite or -inf dBm")

    @property
    def p_sbs_w(self) -> float:
        return dbm_to_watt(self.p_sbs)

    @property
    def p_user_w(self) -> float:
        return dbm_to_watt(self.p_user)

    @property
    def noise_w(self) -> float:
        return dbm_to_watt(self.noise_power)

    @property
    def residual_si_w(self) -> float:
        return dbm_to_watt(self.residual_si)


@dataclass(frozen=True)
class ChannelRealization:
    link_distance: float
    los: bool
    path_gains: np.ndarray
    path_angles: np.ndarray
    vector_channel: np.ndarray
    selected_beam: int
    effective_gain: float
    extra: dict = field(default_factory=dict, repr=False, compare=False)


def _fspl_offset_db(fc: float) -> float:
    return 20 * math.log10(4 * math.pi * fc / SPEED_OF_LIGHT)


def pathloss_db(d, los, fc: float = 28e9):
    """Close-in path loss in dB; exponent 2.01 (LOS) or 3.40 (NLOS).

    Distances below 1 m are clamped to 1 m. Accepts scalars or arrays for ``d`` and ``los``.
    """
    d_arr = np.asarray(d, dtype=float)
    if np.any(~(d_arr > 0)):
        raise ValueError("link distance must be positive")
    d_arr = np.maximum(d_arr, 1.0)
    slope = np.where(np.asarray(los, dtype=bool), 20.1, 34.0)
    out = _fspl_offset_db(fc) + slope * np.log10(d_arr)
    return float(out) if out.ndim == 0 else out


def pathloss_gain(d, los, fc: float = 28e9):
    """Linear power gain ``10**(-PL/10)``."""
    return 10.0 ** (-np.asarray(pathloss_db(d, los, fc)) / 10)


def dbm_to_watt(x):
    out = 10.0 ** (np.asarray(x, dtype=float) / 10) * 1e-3
    return float(out) if out.ndim == 0 else out


def watt_to_dbm(w):
    with np.errstate(divide="ignore"):
        out = 10 * np.log10(np.asarray(w, dtype=float) * 1e3)
    return float(out) if out.ndim == 0 else out


def sample_blockage(d, los_decay: float, rng: np.random.Generator):
    """Return True (LOS) with probability ``exp(-d / los_decay)``; vectorized over ``d``."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr < 0):
        raise ValueError("distance must be non-negative")
    p_los = np.exp(-d_arr / los_decay)
    out = rng.random(d_arr.shape) < p_los
    return bool(out) if out.ndim == 0 else out


def steering_vector(n: int, theta: float) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    k = np.arange(n)
    return np.exp(1j * np.pi * k * math.sin(theta)) / math.sqrt(n)


def beam_grid(n: int) -> np.ndarray:
    """Beam directions as sin(theta) values, ``-1 + 2m/n``."""
    return -1.0 + 2.0 * np.arange(n) / n


def beamspace_transform(h) -> np.ndarray:
    """Project antenna-domain channel(s) onto the orthonormal beam grid, along the last axis.

    ``b[m] = u_m^H h`` with ``u_m`` the steering vector of beam ``m``; since
    ``u_m[k] = (-1)^k exp(2j*pi*k*m/n) / sqrt(n)`` this is a modulated unitary FFT.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[-1]
    sign = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return np.fft.fft(h * sign, axis=-1, norm="ortho")


def select_beam(beam_vectors, mode: str = "dl") -> int:
    """Pick the serving beam for a user group sharing one RF chain.

    ``mode="dl"``: the anchor is the user with the most beamspace energy and the beam is the
    anchor's strongest beam. ``mode="ul"``: argmax of the users' summed beam powers.
    Ties go to the lowest index.
    """
    b = np.atleast_2d(np.asarray(beam_vectors))
    power = np.abs(b) ** 2
    if not np.any(power > 0):
        raise DeadLinkError("no energy on any beam")
    if mode == "dl":
        anchor = int(np.argmax(power.sum(axis=1)))
        return int(np.argmax(power[anchor]))
    if mode == "ul":
        return int(np.argmax(power.sum(axis=0)))
    raise ValueError(f"unknown beam selection mode {mode!r}")


def effective_gain(h, beam: int, array_gain: float = 1.0) -> float:
    """Power gain of antenna-domain channel ``h`` on ``beam``, times a user-side array gain."""
    h = np.asarray(h, dtype=complex)
    n = h.shape[-1]
    if not 0 <= beam < n:
        raise IndexError(f"beam {beam} out of range for {n} antennas")
    u = steering_vector(n, math.asin(beam_grid(n)[beam]))
    return float(np.abs(np.vdot(u, h)) ** 2 * array_gain)


def sample_paths(d, los, cfg: RadioConfig, rng: np.random.Generator):
    """Draw path amplitudes and angles for a batch of links.

    Returns ``(gains, angles)`` each of shape ``d.shape + (1 + n_nlos_paths,)``. Column 0 is
    the LOS path (zero amplitude when blocked); the rest are Rayleigh NLOS paths.
    """
    d = np.asarray(d, dtype=float)
    los = np.broadcast_to(np.asarray(los, dtype=bool), d.shape)
    if np.any(d < 1.0):
        log.debug("clamping %d link distance(s) below 1 m", int(np.sum(d < 1.0)))
    d = np.maximum(d, 1.0)
    L = 1 + cfg.n_nlos_paths

    phase = rng.random(d.shape)
    nlos = rng.standard_normal(d.shape + (cfg.n_nlos_paths, 2))
    angles = rng.uniform(-np.pi / 2, np.pi / 2, d.shape + (L,))

    gains = np.empty(d.shape + (L,), dtype=complex)
    los_amp = np.sqrt(pathloss_gain(d, True, cfg.fc)) * los
    gains[..., 0] = los_amp * np.exp(2j * np.pi * phase)
    nlos_scale = np.sqrt(pathloss_gain(d, False, cfg.fc) / 2)[..., None]
    gains[..., 1:] = nlos_scale * (nlos[..., 0] + 1j * nlos[..., 1])
    return gains, angles


def _array_response(gains, angles, n: int) -> np.ndarray:
    k = np.arange(n)
    phases = np.exp(1j * np.pi * np.sin(angles)[..., None] * k)
    return (gains[..., None] * phases).sum(axis=-2)


def sample_multipath(d: float, los: bool, cfg: RadioConfig,
                     rng: np.random.Generator) -> ChannelRealization:
    """One SBS-side vector channel: ``sum_l g_l * sqrt(n) * a(theta_l)``."""
    if d < 1.0:
        log.warning("link distance %.3g m clamped to 1 m", d)
    d = max(float(d), 1.0)
    gains, angles = sample_paths(np.array([d]), np.array([los]), cfg, rng)
    gains, angles = gains[0], angles[0]
    if not los:
        gains, angles = gains[1:], angles[1:]
    n = cfg.n_tx_sbs
    h = _array_response(gains, angles, n)
    b = beamspace_transform(h)
    power = np.abs(b) ** 2
    beam = int(np.argmax(power))
    return ChannelRealization(
        link_distance=d,
        los=bool(los),
        path_gains=gains,
        path_angles=angles,
        vector_channel=h,
        selected_beam=beam,
        effective_gain=float(power[beam]),
    )


def _dirichlet(delta, n: int) -> np.ndarray:
    """``sum_{k<n} exp(j*pi*k*delta)`` in closed form, exact sum near the poles."""
    delta = np.asarray(delta, dtype=float)
    half = np.pi * delta / 2
    den = np.sin(half)
    singular = np.abs(den) < 1e-9
    safe_den = np.where(singular, 1.0, den)
    out = np.exp(1j * (n - 1) * half) * np.sin(n * half) / safe_den
    if np.any(singular):
        k = np.arange(n)
        out[singular] = np.exp(1j * np.pi * delta[singular][..., None] * k).sum(axis=-1)
    return out


def beam_response(gains, angles, n: int, beam) -> np.ndarray:
    """Beamspace coefficient of the multipath channel on ``beam``, without forming the vector.

    Equal to ``beamspace_transform(sum_l g_l sqrt(n) a(theta_l))[beam]``; ``beam`` broadcasts
    against the leading axes of ``gains``.
    """
    psi = beam_grid(n)[np.asarray(beam)]
    delta = np.sin(angles) - np.asarray(psi, dtype=float)[..., None]
    return (gains * _dirichlet(delta, n)).sum(axis=-1) / math.sqrt(n)
