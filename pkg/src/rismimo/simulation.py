"""Scenario construction, Monte Carlo orchestration, presets, and output.

The cell layout places the BS at the origin with its boresight along +x.
UEs served without a surface sit in a disk at 0.6 cell radii; each surface
sits at 0.8 cell radii and serves UEs on the circle 0.2 cell radii around
it (optionally a disk pushed outward instead). Sector centers start at
(n + 1/2) * 2*pi / reuse and the surface azimuths are then snapped onto
the deployment grid.

Every random draw derives from (master seed, stream, trial index) through
numpy's SeedSequence, so a run is reproducible bit for bit and trials form
independent substreams regardless of execution order.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .channels import (ArrayGeometry, ChannelRealization, FadingParams,
                       LinkGeometry, RISConfiguration, bs_ue_correlation,
                       complex_normal, compose_overall_channel,
                       covariance_factor, path_loss, ris_correlation_kernel,
                       ris_reflected_covariance, sample_bs_ris_channel)
from .combining import (SCHEMES, dl_sinr_from_moments, error_covariance_sum,
                        mmse_combiner, mr_combiner, precoders,
                        spectral_efficiency, ul_sinr_all, zf_combiner)
from .estimation import (PilotAssignment, assign_pilots, estimate_all,
                         simulate_pilot_phase)
from .phase_opt import build_quadratic, random_phases, riemannian_ascent
from .placement import build_angle_grid, normalized_interference, snap_to_grid

SPEED_OF_LIGHT = 299_792_458.0

MODES = ("nr", "rps", "mo")  # no surface / random phases / optimized phases
GROUPS = ("all", "closest", "farthest")
PRESETS = ("fig3", "fig4", "fig6", "fig7", "fig8", "fig9", "fig10")
POWER_TERMS = ("ds", "ipr", "iop", "ee")

# cell layout as fractions of the cell radius
UNAIDED_CENTER_FRAC = 0.6
RIS_DISTANCE_FRAC = 0.8
RIS_UE_OFFSET_FRAC = 0.2
UE_DISK_FRAC = 0.1
# a surface panel shadows the wedge directly behind itself; UEs of the
# interference study are placed wherever its front face is visible
SERVABLE_ARC = 4.0 * np.pi / 3.0

# substream labels under the master seed
_STREAM_TOPOLOGY = 0
_STREAM_TRIAL = 1
_STREAM_STATIC = 2


class InfeasibleScenarioError(ValueError):
    """The requested cell layout cannot be built."""


class ConfigError(ValueError):
    """A configuration file or override could not be interpreted."""


@dataclass(frozen=True)
class SystemConfig:
    """All scalar simulation parameters, with the defaults of the base setup."""

    bs_antennas: int = 128
    ris_rows: int = 16
    ris_cols: int = 16
    num_ues: int = 4
    num_ris: int = 3
    pilot_count: int = 1
    carrier_freq: float = 3.0e9
    bandwidth: float = 10.0e6
    cell_radius: float = 150.0
    tx_power_dbm: float = 20.0
    noise_psd_dbm_hz: float = -174.0
    noise_figure_db: float = 10.0
    ref_loss_db: float = -35.3
    corr_factor: float = 0.5
    rician_db: float = 5.0
    pathloss_exp_bs_ris: float = 2.3
    pathloss_exp_ris_ue: float = 2.3
    pathloss_exp_bs_ue: float = 4.2
    ris_aod_azimuth: float = np.pi / 6.0
    ris_aod_elevation: float = 0.0
    bs_spacing: float = 0.0  # 0 selects half a wavelength
    ris_spacing: float = 0.0
    trials: int = 1000
    seed: int = 1
    prelog: float = 1.0
    ris_ue_placement: str = "ring"  # ring | outward
    snap_ris_angles: bool = True
    redraw_ue_positions: bool = True
    freeze_bs_ris: bool = False
    opt_max_iter: int = 200
    opt_grad_tol: float = 1e-6
    antenna_grid: tuple = (8, 16, 32, 64, 128, 256)
    reuse_grid: tuple = (2, 3, 4, 5, 6, 7)
    rician_grid_db: tuple = (0.0, 3.0, 5.0, 10.0)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def bs_spacing_m(self):
        return self.bs_spacing if self.bs_spacing > 0 else self.wavelength / 2.0

    @property
    def ris_spacing_m(self):
        return self.ris_spacing if self.ris_spacing > 0 else self.wavelength / 2.0

    @property
    def ris_elements(self):
        return self.ris_rows * self.ris_cols

    @property
    def reuse_factor(self):
        return -(-self.num_ues // self.pilot_count)

    @property
    def ref_gain(self):
        return 10.0 ** (self.ref_loss_db / 10.0)

    @property
    def rician_factor(self):
        return 10.0 ** (self.rician_db / 10.0)

    @property
    def noise_floor_dbm(self):
        return (self.noise_psd_dbm_hz + 10.0 * np.log10(self.bandwidth)
                + self.noise_figure_db)

    @property
    def tx_snr(self):
        """Transmit power over the thermal noise floor, linear."""
        return 10.0 ** ((self.tx_power_dbm - self.noise_floor_dbm) / 10.0)

    def array_geometry(self):
        return ArrayGeometry(self.bs_antennas, self.bs_spacing_m, self.ris_rows,
                             self.ris_cols, self.ris_spacing_m, self.wavelength)

    def fading_params(self):
        return FadingParams(self.ref_gain, self.pathloss_exp_bs_ris,
                            self.pathloss_exp_ris_ue, self.pathloss_exp_bs_ue,
                            self.rician_factor, self.corr_factor)

    def validate(self):
        if min(self.bs_antennas, self.ris_rows, self.ris_cols, self.num_ues,
               self.num_ris, self.pilot_count, self.trials) < 1:
            raise ValueError("counts must be positive")
        if not 0.0 <= self.corr_factor <= 1.0:
            raise ValueError("correlation factor must lie in [0, 1]")
        if not 0.0 < self.prelog <= 1.0:
            raise ValueError("prelog must lie in (0, 1]")
        if min(self.carrier_freq, self.bandwidth, self.cell_radius) <= 0:
            raise ValueError("frequency, bandwidth and cell radius must be positive")
        if self.reuse_factor > self.num_ris + 1:
            raise ValueError(
                f"pilot reuse factor {self.reuse_factor} needs at least "
                f"{self.reuse_factor - 1} surfaces, have {self.num_ris}")

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass
class Scenario:
    """A concrete cell layout: positions, association, pilot map."""

    ue_positions: np.ndarray  # (K, 2) meters
    ris_angles: np.ndarray  # (R,) deployment azimuths
    ris_distance: float
    association: tuple  # association[0] unaided, association[r] surface r-1
    assignment: PilotAssignment
    serving_slot: np.ndarray  # (K,) 0 for unaided, r for surface r-1

    @property
    def ris_positions(self):
        return np.column_stack((self.ris_distance * np.cos(self.ris_angles),
                                self.ris_distance * np.sin(self.ris_angles)))


@dataclass
class CorrelationSet:
    """Second-order statistics of one scenario draw."""

    bs_ue: np.ndarray  # (K, M, M) direct-link covariances
    kernel: np.ndarray  # (N, N) surface element kernel
    bs_ue_gain: np.ndarray  # (K,)
    ris_ue_gain: np.ndarray  # (K,), zero for unaided UEs
    overall: np.ndarray = None  # (K, M, M) once a phase configuration is fixed


_KERNEL_CACHE = {}
_KERNEL_FACTOR_CACHE = {}
_EXP_CHOL_CACHE = {}


def _surface_kernel(geom):
    key = (geom.ris_rows, geom.ris_cols, geom.ris_spacing, geom.wavelength)
    if key not in _KERNEL_CACHE:
        kernel = ris_correlation_kernel(geom)
        kernel.flags.writeable = False
        _KERNEL_CACHE[key] = kernel
    return _KERNEL_CACHE[key]


def _surface_kernel_factor(geom):
    key = (geom.ris_rows, geom.ris_cols, geom.ris_spacing, geom.wavelength)
    if key not in _KERNEL_FACTOR_CACHE:
        factor = covariance_factor(_surface_kernel(geom))
        factor.flags.writeable = False
        _KERNEL_FACTOR_CACHE[key] = factor
    return _KERNEL_FACTOR_CACHE[key]


def _exp_model_cholesky(n_antennas, corr_factor):
    """Lower factor of the unit-gain boresight exponential correlation."""
    key = (n_antennas, corr_factor)
    if key not in _EXP_CHOL_CACHE:
        idx = np.arange(n_antennas)
        toeplitz = corr_factor ** np.abs(idx[:, None] - idx[None, :])
        try:
            factor = np.linalg.cholesky(toeplitz)
        except np.linalg.LinAlgError:  # corr_factor == 1 is rank one
            factor = covariance_factor(toeplitz.astype(complex))
        factor.flags.writeable = False
        _EXP_CHOL_CACHE[key] = factor
    return _EXP_CHOL_CACHE[key]


def _polar(distance, angle):
    return np.array([distance * np.cos(angle), distance * np.sin(angle)])


def _disk_points(center, radius, count, rng):
    radii = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    angles = rng.uniform(0.0, 2.0 * np.pi, count)
    return center[None, :] + np.column_stack((radii * np.cos(angles),
                                              radii * np.sin(angles)))


def _wrap(angle):
    wrapped = np.mod(np.asarray(angle) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def _ring_points(center, radius, count, rng):
    angles = rng.uniform(0.0, 2.0 * np.pi, count)
    return center[None, :] + radius * np.column_stack((np.cos(angles),
                                                       np.sin(angles)))


def _draw_ue_positions(config, scenario_angles, rng):
    """UE positions for the sector layout; scenario_angles[0] is the unaided
    sector center, the rest are the (possibly snapped) surface azimuths.

    Unaided UEs fill a disk at 0.6 cell radii. Surface-served UEs sit at the
    stated 0.2-cell-radii offset from their surface: uniformly on that
    circle ("ring", the default) or in a disk pushed outward along the
    BS-surface ray ("outward").
    """
    group = config.num_ues // config.reuse_factor
    d_c = config.cell_radius
    blocks = [_disk_points(_polar(UNAIDED_CENTER_FRAC * d_c, scenario_angles[0]),
                           UE_DISK_FRAC * d_c, group, rng)]
    for angle in scenario_angles[1:]:
        ris_pos = _polar(RIS_DISTANCE_FRAC * d_c, angle)
        if config.ris_ue_placement == "ring":
            blocks.append(_ring_points(ris_pos, RIS_UE_OFFSET_FRAC * d_c,
                                       group, rng))
        elif config.ris_ue_placement == "outward":
            center = _polar((RIS_DISTANCE_FRAC + RIS_UE_OFFSET_FRAC) * d_c,
                            angle)
            blocks.append(_disk_points(center, UE_DISK_FRAC * d_c, group, rng))
        else:
            raise InfeasibleScenarioError(
                f"unknown surface-UE placement {config.ris_ue_placement!r}")
    return np.concatenate(blocks, axis=0)


def build_topology(config, rng):
    """Sector cell layout with grid-snapped surface azimuths.

    The unaided UEs occupy the first sector; each surface takes one of the
    remaining sectors, so the layout needs exactly reuse_factor - 1 surfaces
    and a UE count divisible by the reuse factor.
    """
    config.validate()
    varsigma = config.reuse_factor
    if config.num_ues % varsigma:
        raise InfeasibleScenarioError(
            f"{config.num_ues} UEs cannot be split evenly over "
            f"{varsigma} sectors")
    if config.num_ris != varsigma - 1:
        raise InfeasibleScenarioError(
            f"sector layout needs exactly {varsigma - 1} surfaces for reuse "
            f"factor {varsigma}, have {config.num_ris}")
    centers = _wrap((np.arange(varsigma) + 0.5) * 2.0 * np.pi / varsigma)
    ris_angles = []
    if config.snap_ris_angles:
        grid = build_angle_grid(config.bs_antennas, config.bs_spacing_m,
                                config.wavelength)
        for target in centers[1:]:
            ris_angles.append(snap_to_grid(float(target), grid, ris_angles))
    else:
        ris_angles = [float(a) for a in centers[1:]]
    group = config.num_ues // varsigma
    association = tuple(tuple(range(slot * group, (slot + 1) * group))
                        for slot in range(varsigma))
    serving = np.repeat(np.arange(varsigma), group)
    assignment = assign_pilots(association, config.pilot_count)
    layout_angles = np.concatenate(([centers[0]], ris_angles))
    positions = _draw_ue_positions(config, layout_angles, rng)
    return Scenario(positions, np.asarray(ris_angles),
                    RIS_DISTANCE_FRAC * config.cell_radius, association,
                    assignment, serving)


def redraw_ue_positions(scenario, config, rng):
    """Fresh UE positions around the same layout anchors; all else kept."""
    layout_angles = np.concatenate(
        ([_wrap(0.5 * 2.0 * np.pi / config.reuse_factor)], scenario.ris_angles))
    positions = _draw_ue_positions(config, layout_angles, rng)
    return dataclasses.replace(scenario, ue_positions=positions)


def scenario_statistics(config, scenario):
    """Direct-link covariances and path gains for one UE placement draw.

    Returns the CorrelationSet (without the overall part, which depends on
    the phase configuration) and the UE azimuths needed to synthesize the
    direct channels.
    """
    n_antennas = config.bs_antennas
    n_ues = config.num_ues
    ref = config.ref_gain
    positions = scenario.ue_positions
    ue_dist = np.linalg.norm(positions, axis=1)
    ue_angle = np.arctan2(positions[:, 1], positions[:, 0])
    bs_ue_gain = np.array([path_loss(d, config.pathloss_exp_bs_ue, ref)
                           for d in ue_dist])
    bs_ue = np.stack([bs_ue_correlation(bs_ue_gain[k], config.corr_factor,
                                        ue_angle[k], n_antennas)
                      for k in range(n_ues)])
    ris_ue_gain = np.zeros(n_ues)
    ris_pos = scenario.ris_positions
    for k in range(n_ues):
        slot = scenario.serving_slot[k]
        if slot:
            d_ru = np.linalg.norm(positions[k] - ris_pos[slot - 1])
            ris_ue_gain[k] = path_loss(d_ru, config.pathloss_exp_ris_ue, ref)
    kernel = _surface_kernel(config.array_geometry())
    return CorrelationSet(bs_ue, kernel, bs_ue_gain, ris_ue_gain), ue_angle


def _draw_direct(stats, ue_angles, config, rng):
    """Direct channels via the structured factor of the exponential model."""
    n_antennas = config.bs_antennas
    white = complex_normal(rng, config.num_ues, n_antennas)
    chol = _exp_model_cholesky(n_antennas, config.corr_factor)
    ramp = np.exp(-1j * np.outer(ue_angles, np.arange(n_antennas)))
    return np.sqrt(stats.bs_ue_gain)[:, None] * ramp * (white @ chol.T)


def _ris_links(config, scenario):
    return [LinkGeometry(bs_ris_distance=scenario.ris_distance,
                         bs_ris_aoa=float(angle),
                         ris_aod_azimuth=config.ris_aod_azimuth,
                         ris_aod_elevation=config.ris_aod_elevation)
            for angle in scenario.ris_angles]


@dataclass
class LinkLevelResult:
    """Uplink and downlink statistics of one Monte Carlo run."""

    config: SystemConfig
    scenario: Scenario
    groups: dict  # group name -> UE index array
    ul_se: dict  # (scheme, mode) -> (trials, K) per-trial SE
    dl_sinr: dict  # (scheme, mode) -> (K,) hardening-bound SINR
    power_terms: dict  # (scheme, mode) -> (K, 4) mean ds/ipr/iop/ee

    def mean_ul_se(self, scheme, mode, group="all"):
        idx = self.groups[group]
        return float(self.ul_se[(scheme, mode)][:, idx].mean())

    def mean_dl_se(self, scheme, mode, group="all"):
        idx = self.groups[group]
        se = spectral_efficiency(self.dl_sinr[(scheme, mode)][idx],
                                 self.config.prelog)
        return float(np.mean(se))

    def mean_power_terms(self, scheme, mode, group="all"):
        idx = self.groups[group]
        means = self.power_terms[(scheme, mode)][idx].mean(axis=0)
        return dict(zip(POWER_TERMS, means))


def run_link_level(config):
    """Monte Carlo uplink/downlink run over all schemes and surface modes.

    Per trial: redraw UE positions (unless frozen), draw all channels once,
    then evaluate the three phase modes on the same draw. The no-surface
    mode zeroes the reflected component while keeping everything else. The
    pilot noise is also shared across modes, so mode comparisons are paired.
    """
    config.validate()
    scenario = build_topology(
        config, np.random.default_rng((config.seed, _STREAM_TOPOLOGY)))
    geom = config.array_geometry()
    kernel = _surface_kernel(geom)
    kernel_factor = _surface_kernel_factor(geom)
    fading = config.fading_params()
    snr = config.tx_snr
    n_trials, n_ues, n_ris = config.trials, config.num_ues, config.num_ris
    n_elements = config.ris_elements
    assignment = scenario.assignment
    association = scenario.association
    aided = [k for k in range(n_ues) if scenario.serving_slot[k]]
    links = _ris_links(config, scenario)

    keys = [(scheme, mode) for scheme in SCHEMES for mode in MODES]
    ul_se = {key: np.zeros((n_trials, n_ues)) for key in keys}
    power_sum = {key: np.zeros((n_ues, len(POWER_TERMS))) for key in keys}
    gain_first = {key: np.zeros((n_ues, n_ues), dtype=complex) for key in keys}
    gain_second = {key: np.zeros((n_ues, n_ues)) for key in keys}

    frozen_bs_ris = None
    if config.freeze_bs_ris:
        rng_static = np.random.default_rng((config.seed, _STREAM_STATIC))
        frozen_bs_ris = [sample_bs_ris_channel(links[r], fading, geom, rng_static)
                         for r in range(n_ris)]

    for trial in range(n_trials):
        rng = np.random.default_rng((config.seed, _STREAM_TRIAL, trial))
        scen = (redraw_ue_positions(scenario, config, rng)
                if config.redraw_ue_positions else scenario)
        stats, ue_angles = scenario_statistics(config, scen)
        direct = _draw_direct(stats, ue_angles, config, rng)
        bs_ris = (frozen_bs_ris if frozen_bs_ris is not None else
                  [sample_bs_ris_channel(links[r], fading, geom, rng)
                   for r in range(n_ris)])
        ris_ue = {}
        for k in aided:
            ris_ue[k] = np.sqrt(stats.ris_ue_gain[k]) \
                * (kernel_factor @ complex_normal(rng, n_elements))
        noise = complex_normal(rng, assignment.pilot_count,
                               config.bs_antennas) / np.sqrt(assignment.pilot_count)
        realization = ChannelRealization(bs_ris, ris_ue, direct)
        configs = {
            "nr": None,
            "rps": RISConfiguration([random_phases(n_elements, rng)
                                     for _ in range(n_ris)], "random"),
            "mo": RISConfiguration([riemannian_ascent(
                build_quadratic(bs_ris[r], kernel),
                max_iter=config.opt_max_iter,
                grad_tol=config.opt_grad_tol).phases
                for r in range(n_ris)], "optimized"),
        }
        for mode in MODES:
            phase_cfg = configs[mode]
            if phase_cfg is None:
                cov_overall = stats.bs_ue
                overall = direct
            else:
                reflected = [ris_reflected_covariance(bs_ris[r],
                                                      phase_cfg.phases[r], kernel)
                             for r in range(n_ris)]
                cov_overall = stats.bs_ue.copy()
                for k in aided:
                    slot = scen.serving_slot[k]
                    cov_overall[k] += stats.ris_ue_gain[k] * reflected[slot - 1]
                overall = np.stack([compose_overall_channel(k, realization,
                                                            phase_cfg, association)
                                    for k in range(n_ues)])
            despread = simulate_pilot_phase(overall, assignment, snr, None,
                                            noiseless=True) + noise
            est = estimate_all(despread, cov_overall, assignment, snr)
            err_sum = error_covariance_sum(cov_overall, est.estimate_cov)
            for scheme in SCHEMES:
                if scheme == "mr":
                    comb = mr_combiner(est.estimates)
                elif scheme == "zf":
                    comb = zf_combiner(est.estimates)
                else:
                    comb = mmse_combiner(est.estimates, cov_overall,
                                         est.estimate_cov, snr)
                key = (scheme, mode)
                weights = precoders(comb)
                gains = overall.conj() @ weights.T  # h_k^H w_j
                gain_first[key] += gains
                gain_second[key] += np.abs(gains) ** 2
                sinr, terms = ul_sinr_all(comb, overall, err_sum, snr,
                                          assignment)
                ul_se[key][trial] = spectral_efficiency(sinr, config.prelog)
                power_sum[key] += terms

    dl_sinr = {}
    for key in keys:
        first = gain_first[key] / n_trials
        second = gain_second[key] / n_trials
        dl_sinr[key] = np.array([dl_sinr_from_moments(first[k, k], second[k], snr)
                                 for k in range(n_ues)])
    power_terms = {key: power_sum[key] / n_trials for key in keys}
    unaided = np.array(association[0], dtype=int)
    groups = {"all": np.arange(n_ues),
              "closest": unaided,
              "farthest": np.array(aided, dtype=int)}
    return LinkLevelResult(config, scenario, groups, ul_se, dl_sinr, power_terms)


@dataclass
class InterferenceResult:
    """Cross-covariance interference samples for random vs snapped azimuths."""

    config: SystemConfig
    samples: dict  # (mode, placement) -> (trials,) array

    def mean(self, mode, placement):
        return float(self.samples[(mode, placement)].mean())


def run_interference(config):
    """Interference between UEs served by different surfaces, Monte Carlo.

    Each trial draws the surface azimuths uniformly, then scores the
    normalized interference of every surface pair once at the raw azimuths
    and once snapped to the deployment grid, for each phase mode. The
    diffuse BS-surface component, the random phase profiles, and the UE
    offsets are shared between the two placements so the comparison is
    paired. Each surface serves one UE on the 0.2-cell-radius circle
    around it, anywhere outside the panel's own shadow wedge ("ring"
    placement), or directly on its ray beyond it ("outward").
    """
    config.validate()
    if config.num_ris < 2:
        raise InfeasibleScenarioError("interference run needs at least 2 surfaces")
    geom = config.array_geometry()
    kernel = _surface_kernel(geom)
    fading = config.fading_params()
    n_ris = config.num_ris
    d_c = config.cell_radius
    d_ris = RIS_DISTANCE_FRAC * d_c
    d_ru = RIS_UE_OFFSET_FRAC * d_c
    gain_ru = path_loss(d_ru, config.pathloss_exp_ris_ue, config.ref_gain)
    grid = build_angle_grid(config.bs_antennas, config.bs_spacing_m,
                            config.wavelength)
    placements = ("random", "snapped")
    samples = {(mode, place): np.zeros(config.trials)
               for mode in MODES for place in placements}
    pairs = [(a, b) for a in range(n_ris) for b in range(a + 1, n_ris)]
    for trial in range(config.trials):
        rng = np.random.default_rng((config.seed, _STREAM_TRIAL, trial))
        raw = np.sort(_wrap(rng.uniform(0.0, 2.0 * np.pi, n_ris)))
        nlos = [complex_normal(rng, config.bs_antennas, config.ris_elements)
                for _ in range(n_ris)]
        rps = [random_phases(config.ris_elements, rng) for _ in range(n_ris)]
        # offset of each UE around its surface (anywhere the panel front is
        # visible), kept fixed relative to the ray when the surface snaps
        if config.ris_ue_placement == "ring":
            ue_offsets = np.pi + rng.uniform(-SERVABLE_ARC / 2.0,
                                             SERVABLE_ARC / 2.0, n_ris)
        else:
            ue_offsets = np.zeros(n_ris)
        snapped = []
        for angle in raw:
            snapped.append(snap_to_grid(float(angle), grid, snapped))
        for place, angles in (("random", raw), ("snapped", np.asarray(snapped))):
            covs = {mode: [] for mode in MODES}
            for r in range(n_ris):
                link = LinkGeometry(bs_ris_distance=d_ris,
                                    bs_ris_aoa=float(angles[r]),
                                    ris_aod_azimuth=config.ris_aod_azimuth,
                                    ris_aod_elevation=config.ris_aod_elevation)
                bs_ris = sample_bs_ris_channel(link, fading, geom, None,
                                               nlos=nlos[r])
                ue_pos = _polar(d_ris, float(angles[r])) \
                    + _polar(d_ru, float(angles[r]) + ue_offsets[r])
                gain_bu = path_loss(float(np.linalg.norm(ue_pos)),
                                    config.pathloss_exp_bs_ue, config.ref_gain)
                direct_cov = bs_ue_correlation(gain_bu, config.corr_factor,
                                               float(np.arctan2(ue_pos[1],
                                                                ue_pos[0])),
                                               config.bs_antennas)
                covs["nr"].append(direct_cov)
                covs["rps"].append(direct_cov + gain_ru *
                                   ris_reflected_covariance(bs_ris, rps[r],
                                                            kernel))
                opt = riemannian_ascent(build_quadratic(bs_ris, kernel),
                                        max_iter=config.opt_max_iter,
                                        grad_tol=config.opt_grad_tol).phases
                covs["mo"].append(direct_cov + gain_ru *
                                  ris_reflected_covariance(bs_ris, opt, kernel))
            for mode in MODES:
                score = np.mean([normalized_interference(covs[mode][a],
                                                         covs[mode][b])
                                 for a, b in pairs])
                samples[(mode, place)][trial] = score
    return InterferenceResult(config, samples)


@dataclass
class ExperimentResult:
    """Aggregated rows of one preset run plus reproducibility metadata."""

    preset: str
    config: dict
    rows: list  # dicts with metric, scheme, mode, point, group, value, trials
    seed: int
    runtime_s: float
    config_hash: str = ""

    def __post_init__(self):
        if not self.config_hash:
            self.config_hash = config_hash(self.config)


def config_hash(config_dict):
    payload = json.dumps(config_dict, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _row(metric, scheme, mode, point, group, value, trials):
    return {"metric": metric, "scheme": scheme, "mode": mode, "point": point,
            "group": group, "value": float(value), "trials": int(trials)}


def _se_rows(result, link, point, groups, schemes=SCHEMES):
    rows = []
    metric = f"{link}_se"
    for scheme in schemes:
        for mode in MODES:
            for group in groups:
                value = (result.mean_ul_se(scheme, mode, group) if link == "ul"
                         else result.mean_dl_se(scheme, mode, group))
                rows.append(_row(metric, scheme, mode, point, group, value,
                                 result.config.trials))
    return rows


def run_experiment(config, preset):
    """Run one experiment preset and collect plot-ready rows.

    Presets: fig3 (interference vs antennas, per Rician factor, random vs
    snapped azimuths), fig6/fig4 (uplink SE vs antennas, all UEs / per
    group), fig7 (uplink SE vs reuse factor), fig8 (normalized power terms
    vs reuse factor), fig9/fig10 (downlink SE vs antennas).
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; expected one of {PRESETS}")
    start = time.perf_counter()
    rows = []
    if preset == "fig3":
        for alpha_db in config.rician_grid_db:
            for antennas in config.antenna_grid:
                sub = replace(config, bs_antennas=antennas, rician_db=alpha_db)
                res = run_interference(sub)
                for mode in MODES:
                    for place in ("random", "snapped"):
                        rows.append(_row(f"varpi_alpha{alpha_db:g}db", "-", mode,
                                         antennas, place, res.mean(mode, place),
                                         sub.trials))
    elif preset in ("fig4", "fig6", "fig9", "fig10"):
        link = "dl" if preset in ("fig9", "fig10") else "ul"
        groups = (("all",) if preset in ("fig6", "fig9")
                  else ("closest", "farthest"))
        for antennas in config.antenna_grid:
            res = run_link_level(replace(config, bs_antennas=antennas))
            rows.extend(_se_rows(res, link, antennas, groups))
    elif preset in ("fig7", "fig8"):
        for varsigma in config.reuse_grid:
            sub = replace(config, num_ues=varsigma * config.pilot_count,
                          num_ris=varsigma - 1)
            res = run_link_level(sub)
            point = sub.num_ues
            if preset == "fig7":
                rows.extend(_se_rows(res, "ul", point, GROUPS,
                                     schemes=("mmse",)))
            else:
                for mode in MODES:
                    terms = res.mean_power_terms("mmse", mode)
                    for name in POWER_TERMS:
                        rows.append(_row(name, "mmse", mode, point, "all",
                                         terms[name], sub.trials))
    runtime = time.perf_counter() - start
    return ExperimentResult(preset, config.to_dict(), rows, config.seed, runtime)


def emit_results(result, fmt, path):
    """Write an ExperimentResult as CSV or JSON-lines, config embedded."""
    if fmt not in ("csv", "json-lines"):
        raise ValueError(f"unknown output format {fmt!r}")
    header = ["metric", "scheme", "mode", "point", "group", "value", "trials"]
    try:
        with open(path, "w", encoding="utf-8") as handle:
            if fmt == "csv":
                handle.write(f"# preset = {json.dumps(result.preset)}\n")
                handle.write(f"# seed = {result.seed}\n")
                handle.write(f"# runtime_s = {result.runtime_s!r}\n")
                handle.write(f"# config_hash = {result.config_hash}\n")
                for key, value in sorted(result.config.items()):
                    handle.write(f"# {key} = {json.dumps(value, default=str)}\n")
                handle.write(",".join(header) + "\n")
                for row in result.rows:
                    handle.write(",".join(str(row[col]) for col in header) + "\n")
            else:
                meta = {"kind": "config", "preset": result.preset,
                        "seed": result.seed, "runtime_s": result.runtime_s,
                        "config_hash": result.config_hash,
                        "config": result.config}
                handle.write(json.dumps(meta, default=str) + "\n")
                for row in result.rows:
                    handle.write(json.dumps({"kind": "row", **row}) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def load_results(path):
    """Parse a result file back into (metadata dict, list of row dicts)."""
    meta = {}
    rows = []
    try:
        with open(path, "r", encoding="utf-8") as handle:
            first = handle.read(1)
            handle.seek(0)
            if first == "{":
                for line in handle:
                    record = json.loads(line)
                    if record.pop("kind") == "config":
                        meta = record
                    else:
                        rows.append(record)
            else:
                header = None
                for line in handle:
                    line = line.rstrip("\n")
                    if not line:
                        continue
                    if line.startswith("#"):
                        key, _, value = line[1:].partition("=")
                        meta[key.strip()] = value.strip()
                        continue
                    parts = line.split(",")
                    if header is None:
                        header = parts
                        continue
                    record = dict(zip(header, parts))
                    record["point"] = int(record["point"])
                    record["value"] = float(record["value"])
                    record["trials"] = int(record["trials"])
                    rows.append(record)
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
    return meta, rows


_OPTIONAL_FLOAT_FIELDS = ()
_TUPLE_FIELDS = ("antenna_grid", "reuse_grid", "rician_grid_db")


def _coerce_value(name, raw):
    default = getattr(SystemConfig(), name)
    raw = raw.strip()
    if name in _TUPLE_FIELDS:
        elem = int if all(isinstance(v, int) for v in default) else float
        return tuple(elem(part) for part in raw.split(",") if part.strip())
    if isinstance(default, bool):
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"cannot parse boolean {name} = {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def load_config_file(path):
    """Parse a flat key = value config file into an override dict."""
    overrides = {}
    known = {f.name for f in dataclasses.fields(SystemConfig)}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                stripped = line.split("#", 1)[0].strip()
                if not stripped:
                    continue
                key, sep, value = stripped.partition("=")
                key = key.strip()
                if not sep or not key:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                if key not in known:
                    raise ConfigError(f"{path}:{lineno}: unknown parameter {key!r}")
                try:
                    overrides[key] = _coerce_value(key, value)
                except (ValueError, ConfigError) as exc:
                    raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise OSError(f"cannot read config from {path}: {exc}") from exc
    return overrides


def make_config(file_path=None, overrides=None):
    """SystemConfig from an optional file plus programmatic overrides."""
    values = {}
    if file_path:
        values.update(load_config_file(file_path))
    if overrides:
        values.update(overrides)
    try:
        config = SystemConfig(**values)
        config.validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return config
