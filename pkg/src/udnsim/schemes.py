"""SINR and Shannon-rate computation for the three access schemes.

All rate functions broadcast over numpy arrays so a whole network of cells can be evaluated
in one call; scalar inputs give scalar-shaped results.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Scheme",
    "SchemeConfig",
    "SinrBreakdown",
    "CellRates",
    "NetworkState",
    "OrderingError",
    "ConsistencyError",
    "shannon_rate",
    "classify_pair",
    "noma_dl_rates",
    "oma_dl_rates",
    "noma_ul_rates",
    "interference",
    "aggregate_interference",
    "network_rates",
    "cell_sum_rate",
    "default_schemes",
]


class OrderingError(ValueError):
    """NOMA pair passed with the weak user's gain above the strong user's."""


class ConsistencyError(RuntimeError):
    """Link-gain arrays do not cover every cross link of the network."""


class Scheme(str, enum.Enum):
    OMA_HD = "OMA_HD"
    NOMA_HD = "NOMA_HD"
    NOMA_FD = "NOMA_FD"

    @property
    def full_duplex(self) -> bool:
        return self is Scheme.NOMA_FD

    @property
    def label(self) -> str:
        return self.value.replace("_", "-")


@dataclass(frozen=True)
class SchemeConfig:
    """Access scheme and its DL power split between the weak and the strong user."""

    scheme: Scheme
    alpha_weak: float | None = None
    alpha_strong: float | None = None

    def __post_init__(self):
        scheme = Scheme(self.scheme)
        object.__setattr__(self, "scheme", scheme)
        default = (0.5, 0.5) if scheme is Scheme.OMA_HD else (0.7, 0.3)
        if self.alpha_weak is None:
            object.__setattr__(self, "alpha_weak", default[0])
        if self.alpha_strong is None:
            object.__setattr__(self, "alpha_strong", default[1])
        aw, as_ = self.alpha_weak, self.alpha_strong
        if aw < 0 or as_ < 0:
            raise ValueError("power coefficients must be non-negative")
        if abs(aw + as_ - 1.0) > 1e-12:
            raise ValueError(f"power coefficients must sum to 1, got {aw} + {as_}")
        if aw < as_:
            raise ValueError("the weak user must get at least as much power as the strong user")

    @property
    def name(self) -> str:
        return self.scheme.value


def default_schemes() -> tuple[SchemeConfig, ...]:
    return tuple(SchemeConfig(s) for s in Scheme)


@dataclass(frozen=True)
class SinrBreakdown:
    """Received power components at one receiver, in watts."""

    signal: float
    intra_cci: float
    inter_cci: float
    self_interference: float
    noise: float

    def __post_init__(self):
        for name in ("signal", "intra_cci", "inter_cci", "self_interference", "noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def interference_plus_noise(self) -> float:
        return self.intra_cci + self.inter_cci + self.self_interference + self.noise

    def sinr(self) -> float:
        return self.signal / self.interference_plus_noise()


@dataclass(frozen=True)
class CellRates:
    dl_rates: tuple[float, ...]
    ul_rates: tuple[float, ...] = ()

    @property
    def sum(self) -> float:
        return float(sum(self.dl_rates) + sum(self.ul_rates))


def shannon_rate(bandwidth, sinr):
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0):
        raise ValueError("SINR must be non-negative")
    if np.any(np.asarray(bandwidth) <= 0):
        raise ValueError("bandwidth must be positive")
    # log1p keeps relative accuracy at the very low SINRs of cell-edge links.
    return bandwidth * (np.log1p(sinr) / np.log(2.0))


def classify_pair(g_a: float, g_b: float) -> tuple[int, int]:
    """(weak, strong) indices into ``(g_a, g_b)``; a tie makes the first user weak."""
    if g_a < 0 or g_b < 0:
        raise ValueError("gains must be non-negative")
    return (1, 0) if g_b < g_a else (0, 1)


def noma_dl_rates(g_w, g_s, p, alpha: SchemeConfig, i_w, i_s, noise, bandwidth):
    """Two-user superposition: the strong user cancels the weak user's layer, the weak
    user decodes its own layer treating the strong user's as noise.
    """
    g_w = np.asarray(g_w, dtype=float)
    g_s = np.asarray(g_s, dtype=float)
    if np.any(g_w > g_s):
        raise OrderingError("weak-user gain exceeds strong-user gain")
    aw, as_ = alpha.alpha_weak, alpha.alpha_strong
    r_w = shannon_rate(bandwidth, aw * p * g_w / (as_ * p * g_w + i_w + noise))
    r_s = shannon_rate(bandwidth, as_ * p * g_s / (i_s + noise))
    return r_w, r_s


def oma_dl_rates(g_1, g_2, p, i_1, i_2, noise, bandwidth, alpha: SchemeConfig | None = None):
    """Each user gets half the band and its share of the power; interference and noise are
    counted over the half band only.
    """
    a1, a2 = (0.5, 0.5) if alpha is None else (alpha.alpha_weak, alpha.alpha_strong)
    half = bandwidth / 2
    r_1 = shannon_rate(half, a1 * p * np.asarray(g_1, dtype=float) / (0.5 * i_1 + 0.5 * noise))
    r_2 = shannon_rate(half, a2 * p * np.asarray(g_2, dtype=float) / (0.5 * i_2 + 0.5 * noise))
    return r_1, r_2


def noma_ul_rates(received, interference, si, noise, bandwidth) -> np.ndarray:
    """Uplink SIC at the SBS, strongest received user decoded first.

    ``received`` holds per-user received powers along its last axis; the returned rates are
    in the same (input) user order.
    """
    s = np.asarray(received, dtype=float)
    floor = np.asarray(interference + si + noise, dtype=float)[..., None]
    order = np.argsort(-s, axis=-1, kind="stable")
    s_sorted = np.take_along_axis(s, order, axis=-1)
    # Residual after decoding user k: everyone decoded later.
    later = np.zeros_like(s_sorted)
    later[..., :-1] = np.cumsum(s_sorted[..., :0:-1], axis=-1)[..., ::-1]
    rates_sorted = shannon_rate(bandwidth, s_sorted / (later + floor))
    rates = np.empty_like(rates_sorted)
    np.put_along_axis(rates, order, rates_sorted, axis=-1)
    return rates


@dataclass(frozen=True)
class NetworkState:
    """Effective link gains for one trial, shared by every scheme.

    Shapes use ``N`` cells, ``K`` DL users and ``J`` UL users per cell:

    - ``dl_gain[j, i, k]``: SBS ``j`` on its DL beam to DL user ``k`` of cell ``i``
    - ``ul_gain[i, j, k]``: UL user ``k`` of cell ``j`` into SBS ``i``'s UL beam. The
      diagonal ``i == j`` includes the user-side array gain, off-diagonal entries do not.
    - ``bs_gain[j, i]``: SBS ``j`` on its DL beam into SBS ``i`` (diagonal zero)
    - ``ue_gain[j, k, i, m]``: UL user ``(j, k)`` to DL user ``(i, m)``
    """

    dl_gain: np.ndarray
    ul_gain: np.ndarray
    bs_gain: np.ndarray
    ue_gain: np.ndarray
    p_sbs: float
    p_user: float
    noise: float
    residual_si: float
    bandwidth: float
    extra: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = self.dl_gain.shape[0]
        k = self.dl_gain.shape[-1]
        j = self.ul_gain.shape[-1]
        expected = {
            "dl_gain": (n, n, k),
            "ul_gain": (n, n, j),
            "bs_gain": (n, n),
            "ue_gain": (n, j, n, k),
        }
        for name, shape in expected.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ConsistencyError(f"{name} has shape {arr.shape}, expected {shape}")
            if np.any(np.isnan(arr)):
                raise ConsistencyError(f"{name} has missing (NaN) link gains")

    @property
    def n_cells(self) -> int:
        return self.dl_gain.shape[0]

    @classmethod
    def single_cell(cls, dl_gains, ul_gains=(), *, p_sbs=1.0, p_user=1.0, noise=1.0,
                    residual_si=0.0, bandwidth=1.0) -> NetworkState:
        """An isolated cell with hand-set effective gains."""
        dl = np.asarray(dl_gains, dtype=float).reshape(1, 1, -1)
        ul = np.asarray(ul_gains, dtype=float).reshape(1, 1, -1)
        return cls(
            dl_gain=dl,
            ul_gain=ul,
            bs_gain=np.zeros((1, 1)),
            ue_gain=np.zeros((1, ul.shape[-1], 1, dl.shape[-1])),
            p_sbs=p_sbs,
            p_user=p_user,
            noise=noise,
            residual_si=residual_si,
            bandwidth=bandwidth,
        )


@dataclass(frozen=True)
class Interference:
    """Per-receiver interference totals for the whole network, in watts."""

    dl_inter: np.ndarray  # (N, K): other SBSs
    dl_ue: np.ndarray  # (N, K): UL users (FD only, zeros otherwise)
    ul_inter: np.ndarray  # (N,): other SBSs + other cells' UL users (FD only)
    ul_si: np.ndarray  # (N,)


def _offdiag(n: int) -> np.ndarray:
    return ~np.eye(n, dtype=bool)


def interference(state: NetworkState, scheme: SchemeConfig, *,
                 own_cell_ue: bool = True) -> Interference:
    n = state.n_cells
    mask = _offdiag(n)
    dl_inter = state.p_sbs * np.einsum("jik,ji->ik", state.dl_gain, mask.astype(float))
    dl_ue = np.zeros_like(dl_inter)
    ul_inter = np.zeros(n)
    ul_si = np.zeros(n)
    if scheme.scheme.full_duplex:
        ue = state.ue_gain
        if not own_cell_ue:
            ue = ue * mask[:, None, :, None]
        dl_ue = state.p_user * ue.sum(axis=(0, 1))
        from_sbs = state.p_sbs * (state.bs_gain * mask).sum(axis=0)
        from_ues = state.p_user * (state.ul_gain.sum(axis=2) * mask).sum(axis=1)
        ul_inter = from_sbs + from_ues
        ul_si = np.full(n, state.residual_si)
    return Interference(dl_inter, dl_ue, ul_inter, ul_si)


def _ordered_pair(g: np.ndarray):
    """Split (N, 2) gains into weak/strong columns; ties keep the first user weak."""
    swap = g[:, 1] < g[:, 0]
    weak = np.where(swap, 1, 0)
    strong = 1 - weak
    return weak, strong


def _take(a: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return np.take_along_axis(a, idx[:, None], axis=1)[:, 0]


def network_rates(state: NetworkState, scheme: SchemeConfig, *, own_cell_ue: bool = True):
    """DL and UL rates of every cell: ``(dl (N, 2), ul (N, J))`` in bits/s.

    UL rates are an empty (N, 0) array for half-duplex schemes.
    """
    n = state.n_cells
    if state.dl_gain.shape[-1] != 2:
        raise ValueError("DL pairing needs exactly two DL users per cell")
    intf = interference(state, scheme, own_cell_ue=own_cell_ue)
    own = np.diagonal(state.dl_gain, axis1=0, axis2=1).T  # (N, 2)
    i_dl = intf.dl_inter + intf.dl_ue if scheme.scheme.full_duplex else intf.dl_inter
    p, noise, bw = state.p_sbs, state.noise, state.bandwidth

    weak, strong = _ordered_pair(own)
    g_w, g_s = _take(own, weak), _take(own, strong)
    i_w, i_s = _take(i_dl, weak), _take(i_dl, strong)
    if scheme.scheme is Scheme.OMA_HD:
        r_w, r_s = oma_dl_rates(g_w, g_s, p, i_w, i_s, noise, bw, scheme)
    else:
        r_w, r_s = noma_dl_rates(g_w, g_s, p, scheme, i_w, i_s, noise, bw)
    dl = np.empty((n, 2))
    np.put_along_axis(dl, weak[:, None], r_w[:, None], axis=1)
    np.put_along_axis(dl, strong[:, None], r_s[:, None], axis=1)

    if not scheme.scheme.full_duplex:
        return dl, np.zeros((n, 0))
    own_ul = np.diagonal(state.ul_gain, axis1=0, axis2=1).T  # (N, J)
    ul = noma_ul_rates(state.p_user * own_ul, intf.ul_inter, intf.ul_si, noise, bw)
    return dl, ul


def aggregate_interference(state: NetworkState, scheme: SchemeConfig, victim: tuple, *,
                           own_cell_ue: bool = True) -> SinrBreakdown:
    """Power breakdown seen by one receiver.

    ``victim`` is ``("dl", cell, user)`` for a DL user or ``("ul", cell)`` for an SBS
    receiver. For a DL user the signal/intra split follows the scheme's superposition; for an
    SBS, ``signal`` is the total own-cell UL power (SIC splits it further).
    """
    intf = interference(state, scheme, own_cell_ue=own_cell_ue)
    kind, cell = victim[0], victim[1]
    p, noise = state.p_sbs, state.noise
    if kind == "dl":
        k = victim[2]
        own = state.dl_gain[cell, cell]
        inter = intf.dl_inter[cell, k] + intf.dl_ue[cell, k]
        weak, _ = classify_pair(own[0], own[1])
        if scheme.scheme is Scheme.OMA_HD:
            a = scheme.alpha_weak if k == weak else scheme.alpha_strong
            return SinrBreakdown(a * p * own[k], 0.0, 0.5 * inter, 0.0, 0.5 * noise)
        if k == weak:
            return SinrBreakdown(scheme.alpha_weak * p * own[k],
                                 scheme.alpha_strong * p * own[k], inter, 0.0, noise)
        return SinrBreakdown(scheme.alpha_strong * p * own[k], 0.0, inter, 0.0, noise)
    if kind == "ul":
        if not scheme.scheme.full_duplex:
            raise ValueError(f"{scheme.name} schedules no uplink")
        signal = state.p_user * state.ul_gain[cell, cell].sum()
        return SinrBreakdown(signal, 0.0, float(intf.ul_inter[cell]),
                             float(intf.ul_si[cell]), noise)
    raise ValueError(f"unknown victim kind {kind!r}")


def cell_sum_rate(state: NetworkState, cell: int, scheme: SchemeConfig, *,
                  own_cell_ue: bool = True) -> CellRates:
    dl, ul = network_rates(state, scheme, own_cell_ue=own_cell_ue)
    return CellRates(tuple(float(r) for r in dl[cell]), tuple(float(r) for r in ul[cell]))
