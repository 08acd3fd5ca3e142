"""Sum-rate Monte Carlo for ultra-dense mmWave small-cell networks.

Compares OMA-HD, NOMA-HD and NOMA-FD small cells over PPP deployments in one macro-cell
sector, with beamspace single-RF-chain beamforming and residual full-duplex self-interference.
"""

from .channel import (
    ChannelRealization,
    RadioConfig,
    beamspace_transform,
    dbm_to_watt,
    effective_gain,
    pathloss_db,
    sample_blockage,
    sample_multipath,
    select_beam,
    steering_vector,
    watt_to_dbm,
)
from .engine import (
    DEFAULT_DENSITIES,
    SweepConfig,
    SweepResult,
    SweepRow,
    aggregate,
    build_network,
    run_sweep,
    run_trial,
)
from .io import parse_config, serialize_config, write_csv
from .plot import render_plot
from .schemes import (
    CellRates,
    NetworkState,
    Scheme,
    SchemeConfig,
    SinrBreakdown,
    aggregate_interference,
    cell_sum_rate,
    classify_pair,
    noma_dl_rates,
    noma_ul_rates,
    oma_dl_rates,
    shannon_rate,
)
from .topology import Cell, SectorGeometry, Topology, drop_users, in_sector, sample_sbs_positions

__version__ = "0.1.0"
