"""Monte Carlo driver: one topology and one set of channel draws per trial, shared by all
schemes, aggregated per (density, scheme).

Each trial owns an independent PCG64 stream seeded from
``SeedSequence([base_seed, density_index, trial_index])``, so results do not depend on how
trials are spread over workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    DeadLinkError,
    RadioConfig,
    beam_response,
    beamspace_transform,
    pathloss_gain,
    sample_blockage,
    sample_paths,
    select_beam,
)
from .schemes import NetworkState, SchemeConfig, default_schemes, network_rates
from .topology import MIN_LINK_DISTANCE, SectorGeometry, Topology, generate_topology

log = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_DENSITIES",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "trial_rng",
    "build_network",
    "simulate_trial",
    "run_trial",
    "run_sweep",
    "aggregate",
]

DEFAULT_DENSITIES = (10.0, 25.0, 50.0, 100.0, 200.0, 400.0, 700.0, 1000.0)
_SEED_MAX = 2**64


@dataclass(frozen=True)
class SweepConfig:
    densities: tuple[float, ...] = DEFAULT_DENSITIES
    trials: int = 1000
    base_seed: int = 1
    schemes: tuple[SchemeConfig, ...] = field(default_factory=default_schemes)
    radio: RadioConfig = field(default_factory=RadioConfig)
    geometry: SectorGeometry = field(default_factory=SectorGeometry)
    own_cell_ue_interference: bool = True

    def __post_init__(self):
        object.__setattr__(self, "densities", tuple(float(d) for d in self.densities))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if not self.densities:
            raise ValueError("at least one density is required")
        if any(d < 0 or not math.isfinite(d) for d in self.densities):
            raise ValueError("densities must be finite and non-negative")
        if any(b <= a for a, b in zip(self.densities, self.densities[1:])):
            raise ValueError("densities must be strictly increasing")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.base_seed < _SEED_MAX:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        if not self.schemes:
            raise ValueError("at least one scheme is required")
        names = [s.name for s in self.schemes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate scheme")


@dataclass(frozen=True)
class SweepRow:
    density: float
    scheme: str
    trials: int
    mean: float
    std_dev: float
    ci95_low: float
    ci95_high: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    # samples[density_index, trial, scheme_index], bits/s
    samples: np.ndarray | None = field(default=None, compare=False, repr=False)

    def row(self, density: float, scheme: str) -> SweepRow:
        for r in self.rows:
            if r.density == density and r.scheme == scheme:
                return r
        raise KeyError((density, scheme))

    def means(self, scheme: str) -> np.ndarray:
        return np.array([r.mean for r in self.rows if r.scheme == scheme])


def trial_rng(base_seed: int, density_index: int, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([base_seed, density_index, trial_index])
    return np.random.Generator(np.random.PCG64(ss))


def _dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.norm(a - b, axis=-1)


def _own_beams(b: np.ndarray, mode: str) -> np.ndarray:
    beams = np.zeros(b.shape[0], dtype=int)
    for i, vectors in enumerate(b):
        try:
            beams[i] = select_beam(vectors, mode)
        except DeadLinkError:
            log.debug("cell %d has no %s energy; rates will be zero", i, mode)
    return beams


def build_network(topology: Topology, radio: RadioConfig, rng: np.random.Generator, *,
                  keep_paths: bool = False) -> NetworkState:
    """Draw every link of the topology and reduce it to effective gains on the chosen beams.

    With ``keep_paths`` the raw path amplitudes/angles are kept in ``state.extra``.
    """
    sbs = topology.sbs_positions
    dl = topology.dl_positions()
    ul = topology.ul_positions()
    n = topology.n_cells
    K, J = radio.n_dl, radio.n_ul
    nt = radio.n_tx_sbs
    if n == 0:
        return NetworkState(np.zeros((0, 0, K)), np.zeros((0, 0, J)), np.zeros((0, 0)),
                            np.zeros((0, J, 0, K)), radio.p_sbs_w, radio.p_user_w,
                            radio.noise_w, radio.residual_si_w, radio.bandwidth)
    if dl.shape[1] != K or ul.shape[1] != J:
        raise ValueError("topology user counts do not match the radio config")

    d_dl = _dist(sbs[:, None, None, :], dl[None, :, :, :])  # (j, i, k)
    d_ul = _dist(sbs[:, None, None, :], ul[None, :, :, :])  # (i, j, k)
    d_bs = _dist(sbs[:, None, :], sbs[None, :, :])  # (j, i)
    np.fill_diagonal(d_bs, MIN_LINK_DISTANCE)
    d_ue = _dist(ul[:, :, None, None, :], dl[None, None, :, :, :])  # (j, k, i, m)

    los_dl = sample_blockage(d_dl, radio.los_decay, rng)
    los_ul = sample_blockage(d_ul, radio.los_decay, rng)
    los_bs = sample_blockage(d_bs, radio.los_decay, rng)
    g_dl, a_dl = sample_paths(d_dl, los_dl, radio, rng)
    g_ul, a_ul = sample_paths(d_ul, los_ul, radio, rng)
    g_bs, a_bs = sample_paths(d_bs, los_bs, radio, rng)

    idx = np.arange(n)
    k = np.arange(nt)

    def own_beamspace(g, a):
        h = (g[..., None] * np.exp(1j * np.pi * np.sin(a)[..., None] * k)).sum(axis=-2)
        return beamspace_transform(h)

    b_dl = own_beamspace(g_dl[idx, idx], a_dl[idx, idx])  # (N, K, nt)
    b_ul = own_beamspace(g_ul[idx, idx], a_ul[idx, idx])
    beam_dl = _own_beams(b_dl, "dl")
    beam_ul = _own_beams(b_ul, "ul")

    dl_gain = np.abs(beam_response(g_dl, a_dl, nt, beam_dl[:, None, None])) ** 2
    dl_gain[idx, idx] = np.abs(b_dl[idx, :, beam_dl]) ** 2
    ul_gain = np.abs(beam_response(g_ul, a_ul, nt, beam_ul[:, None, None])) ** 2
    ul_gain[idx, idx] = np.abs(b_ul[idx, :, beam_ul]) ** 2 * radio.n_tx_user
    bs_gain = np.abs(beam_response(g_bs, a_bs, nt, beam_dl[:, None])) ** 2
    np.fill_diagonal(bs_gain, 0.0)
    ue_gain = pathloss_gain(np.maximum(d_ue, MIN_LINK_DISTANCE), False, radio.fc)

    extra = {"beam_dl": beam_dl, "beam_ul": beam_ul}
    if keep_paths:
        extra.update(paths_dl=(g_dl, a_dl), paths_ul=(g_ul, a_ul), paths_bs=(g_bs, a_bs),
                     los_dl=los_dl)
    return NetworkState(
        dl_gain=dl_gain,
        ul_gain=ul_gain,
        bs_gain=bs_gain,
        ue_gain=ue_gain,
        p_sbs=radio.p_sbs_w,
        p_user=radio.p_user_w,
        noise=radio.noise_w,
        residual_si=radio.residual_si_w,
        bandwidth=radio.bandwidth,
        extra=extra,
    )


def _density_index(cfg: SweepConfig, density: float) -> int:
    try:
        return cfg.densities.index(float(density))
    except ValueError:
        raise ValueError(f"density {density} is not part of the sweep") from None


def simulate_trial(cfg: SweepConfig, density: float, trial_index: int, *,
                   density_index: int | None = None, topology: Topology | None = None,
                   keep_paths: bool = False):
    """Run one trial and return ``(topology, state, {scheme: (dl, ul)})`` for inspection.

    ``topology`` overrides the random layout (channel draws still come from the trial stream).
    """
    if density_index is None:
        density_index = _density_index(cfg, density) if topology is None else 0
    rng = trial_rng(cfg.base_seed, density_index, trial_index)
    if topology is None:
        topology = generate_topology(density, cfg.geometry, rng, n_dl=cfg.radio.n_dl,
                                     n_ul=cfg.radio.n_ul, seed=cfg.base_seed)
    state = build_network(topology, cfg.radio, rng, keep_paths=keep_paths)
    rates = {}
    for sc in cfg.schemes:
        if state.n_cells == 0:
            rates[sc.name] = (np.zeros((0, cfg.radio.n_dl)), np.zeros((0, 0)))
            continue
        rates[sc.name] = network_rates(state, sc, own_cell_ue=cfg.own_cell_ue_interference)
    return topology, state, rates


def run_trial(cfg: SweepConfig, density: float, trial_index: int, *,
              density_index: int | None = None,
              topology: Topology | None = None) -> dict[str, float]:
    """Sector sum rate (bits/s) per scheme for one random drop."""
    _, _, rates = simulate_trial(cfg, density, trial_index, density_index=density_index,
                                 topology=topology)
    return {name: math.fsum(np.concatenate([dl.ravel(), ul.ravel()]))
            for name, (dl, ul) in rates.items()}


def aggregate(samples) -> tuple[float, float, tuple[float, float]]:
    """Mean, unbiased standard deviation and normal-approximation 95% CI.

    Uses exactly rounded sums, so the result does not depend on sample order.
    """
    x = [float(v) for v in samples]
    n = len(x)
    if n == 0:
        raise ValueError("cannot aggregate an empty sample")
    mean = math.fsum(x) / n
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in x) / (n - 1)) if n > 1 else 0.0
    half = 1.96 * std / math.sqrt(n)
    return mean, std, (mean - half, mean + half)


def _trial_block(args):
    cfg, di, start, stop = args
    density = cfg.densities[di]
    out = np.empty((stop - start, len(cfg.schemes)))
    for row, t in enumerate(range(start, stop)):
        rates = run_trial(cfg, density, t, density_index=di)
        out[row] = [rates[s.name] for s in cfg.schemes]
    return di, start, out


def _blocks(cfg: SweepConfig, size: int):
    for di in range(len(cfg.densities)):
        for start in range(0, cfg.trials, size):
            yield cfg, di, start, min(start + size, cfg.trials)


def run_sweep(cfg: SweepConfig, workers: int = 1, progress=None) -> SweepResult:
    """Evaluate every (density, trial) pair and aggregate per (density, scheme).

    ``progress``, if given, is called with the number of finished trials after each block.
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    samples = np.empty((len(cfg.densities), cfg.trials, len(cfg.schemes)))
    block = max(1, min(50, cfg.trials // max(workers, 1) or 1))
    jobs = list(_blocks(cfg, block))
    if workers == 1:
        results = map(_trial_block, jobs)
        for di, start, out in results:
            samples[di, start:start + len(out)] = out
            if progress:
                progress(len(out))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for di, start, out in pool.map(_trial_block, jobs):
                samples[di, start:start + len(out)] = out
                if progress:
                    progress(len(out))

    rows = []
    for di, density in enumerate(cfg.densities):
        for si, sc in enumerate(cfg.schemes):
            mean, std, (lo, hi) = aggregate(samples[di, :, si])
            rows.append(SweepRow(density, sc.name, cfg.trials, mean, std, lo, hi))
    return SweepResult(tuple(rows), samples)
