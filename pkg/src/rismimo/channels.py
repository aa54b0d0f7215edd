"""Array geometry, spatial correlation models, and random channel synthesis.

Three link types make up the composite uplink channel: the direct link
between the base station (BS) uniform linear array and each single-antenna
user (UE), the Rician link between the BS and each reflecting surface, and
the correlated Rayleigh link between a surface and the UEs it serves.

Conventions: azimuth angles are in radians, measured counterclockwise from
the BS boresight (the +x axis). Path gains are linear power gains. Complex
Gaussians are circularly symmetric with the variance split equally between
the real and imaginary parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def complex_normal(rng, *shape):
    """Draw i.i.d. standard circularly-symmetric complex Gaussians."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def hermitize(mat):
    """Symmetrize a numerically near-Hermitian matrix."""
    return 0.5 * (mat + mat.conj().T)


def _check_unit_modulus(phases, tol=1e-9):
    phases = np.asarray(phases)
    if phases.ndim != 1 or np.max(np.abs(np.abs(phases) - 1.0)) > tol:
        raise ValueError("phase-shift vector must have unit-modulus entries")


@dataclass(frozen=True)
class ArrayGeometry:
    """Element counts and spacings of the BS ULA and the surface UPA."""

    bs_antennas: int
    bs_spacing: float
    ris_rows: int  # vertical element count, fast index in the flattened UPA
    ris_cols: int  # horizontal element count
    ris_spacing: float
    wavelength: float

    def __post_init__(self):
        if min(self.bs_antennas, self.ris_rows, self.ris_cols) < 1:
            raise ValueError("element counts must be positive")
        if min(self.bs_spacing, self.ris_spacing, self.wavelength) <= 0.0:
            raise ValueError("spacings and wavelength must be positive")

    @property
    def ris_elements(self):
        return self.ris_rows * self.ris_cols


@dataclass(frozen=True)
class LinkGeometry:
    """Distances and angles of one BS / surface / UE triplet.

    Only the fields an operation actually consumes need to be meaningful;
    unused ones may stay NaN.
    """

    bs_ris_distance: float = np.nan
    bs_ris_aoa: float = np.nan
    ris_aod_azimuth: float = np.nan
    ris_aod_elevation: float = 0.0
    ue_bs_distance: float = np.nan
    ue_bs_aoa: float = np.nan
    ue_ris_distance: float = np.nan


@dataclass(frozen=True)
class FadingParams:
    """Large-scale fading description shared by all links."""

    ref_gain: float  # linear power gain at 1 m
    bs_ris_exponent: float
    ris_ue_exponent: float
    bs_ue_exponent: float
    rician_factor: float  # linear; np.inf selects the pure LoS limit
    corr_factor: float  # adjacent-antenna correlation magnitude in [0, 1]

    def __post_init__(self):
        if self.ref_gain <= 0:
            raise ValueError("reference gain must be positive")
        if not 0.0 <= self.corr_factor <= 1.0:
            raise ValueError("correlation factor must lie in [0, 1]")
        if self.rician_factor < 0:
            raise ValueError("Rician factor must be nonnegative")


@dataclass
class ChannelRealization:
    """One Monte Carlo draw of every link in the network.

    bs_ris: list of (M, N) matrices, one per surface.
    ris_ue: (N,) vector per surface-served UE, keyed by UE index.
    direct: (K, M) direct-link vectors.
    overall: (K, M) composite channels for the active phase configuration.
    """

    bs_ris: list = field(default_factory=list)
    ris_ue: dict = field(default_factory=dict)
    direct: np.ndarray = None
    overall: np.ndarray = None


@dataclass
class RISConfiguration:
    """Per-surface unit-modulus phase profiles plus how they were produced."""

    phases: list  # one (N,) unit-modulus vector per surface
    provenance: str = "constant"  # random | optimized | constant


def steering_vector(phase_arg, length):
    """Standard array response [1, e^{-i pi a}, ..., e^{-i pi (F-1) a}]."""
    if length < 1:
        raise ValueError("array length must be at least 1")
    return np.exp(-1j * np.pi * phase_arg * np.arange(length))


def bs_array_response(aoa, geom):
    """BS ULA response for an azimuthal angle of arrival."""
    return steering_vector(2.0 * geom.bs_spacing / geom.wavelength * np.sin(aoa),
                           geom.bs_antennas)


def ris_array_response(aod_azimuth, aod_elevation, geom):
    """Surface UPA response, horizontal factor Kronecker vertical factor."""
    scale = 2.0 * geom.ris_spacing / geom.wavelength
    horizontal = steering_vector(scale * np.sin(aod_azimuth) * np.cos(aod_elevation),
                                 geom.ris_cols)
    vertical = steering_vector(scale * np.sin(aod_elevation), geom.ris_rows)
    return np.kron(horizontal, vertical)


def path_loss(distance, exponent, ref_gain):
    """Power-law path loss ref_gain * d^-exponent."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return ref_gain * distance ** (-exponent)


def bs_ue_correlation(gain, corr_factor, aoa, n_antennas):
    """Exponential spatial correlation matrix of the direct BS-UE link.

    Entry (m, n) is gain * corr^|n-m| * exp(i (n-m) aoa); Hermitian with a
    constant diagonal equal to the large-scale gain.
    """
    if not 0.0 <= corr_factor <= 1.0:
        raise ValueError("correlation factor must lie in [0, 1]")
    idx = np.arange(n_antennas)
    delta = idx[None, :] - idx[:, None]  # n - m at entry (m, n)
    return gain * corr_factor ** np.abs(delta) * np.exp(1j * aoa * delta)


def ris_correlation_kernel(geom):
    """Sinc correlation kernel of the UPA under isotropic scattering.

    Entry (m, n) is sinc(2 ||u_m - u_n|| / wavelength) with u_l the element
    position on a half-space-facing rectangular grid; real symmetric with a
    unit diagonal.
    """
    idx = np.arange(geom.ris_elements)
    row = idx % geom.ris_rows
    col = idx // geom.ris_rows
    dist = geom.ris_spacing * np.hypot(row[:, None] - row[None, :],
                                       col[:, None] - col[None, :])
    return np.sinc(2.0 * dist / geom.wavelength)


def sample_bs_ris_channel(link, fading, geom, rng, nlos=None):
    """Draw the (M, N) Rician BS-surface channel.

    The deterministic part is the outer product of the BS and surface array
    responses; the diffuse part has i.i.d. unit-variance complex Gaussian
    entries (pass nlos to reuse a draw, e.g. when comparing deployment
    angles under identical scattering). An infinite Rician factor returns
    the pure LoS matrix.
    """
    gain = path_loss(link.bs_ris_distance, fading.bs_ris_exponent, fading.ref_gain)
    los = np.outer(bs_array_response(link.bs_ris_aoa, geom),
                   ris_array_response(link.ris_aod_azimuth, link.ris_aod_elevation,
                                      geom).conj())
    if np.isinf(fading.rician_factor):
        return np.sqrt(gain) * los
    alpha = fading.rician_factor
    if nlos is None:
        nlos = complex_normal(rng, geom.bs_antennas, geom.ris_elements)
    return np.sqrt(gain) * (np.sqrt(alpha / (1.0 + alpha)) * los
                            + np.sqrt(1.0 / (1.0 + alpha)) * nlos)


def covariance_factor(cov, tol=1e-10):
    """Square-root factor A with A A^H = cov, via Hermitian eigendecomposition.

    Eigenvalues in [-tol * lam_max, 0) are clipped to zero; anything more
    negative means the input is not a covariance. A triangular factorization
    is deliberately avoided because the sinc kernel is numerically
    rank-deficient.
    """
    eigval, eigvec = np.linalg.eigh(cov)
    lam_max = max(float(eigval[-1]), 0.0)
    if eigval[0] < -tol * lam_max:
        raise ValueError("covariance matrix has a significantly negative eigenvalue")
    eigval = np.where(eigval < tol * lam_max, 0.0, eigval)
    return eigvec * np.sqrt(eigval)


def sample_correlated_vector(cov, rng):
    """Draw a zero-mean complex Gaussian vector with the given covariance."""
    factor = covariance_factor(np.asarray(cov))
    return factor @ complex_normal(rng, factor.shape[1])


def serving_ris(k, association):
    """Slot of UE k in the association partition; 0 means no surface.

    association[0] holds the unaided UEs, association[r] the UEs served by
    surface r-1. Membership in zero or several sets is an error.
    """
    hits = [slot for slot, members in enumerate(association) if k in members]
    if len(hits) != 1:
        raise ValueError(f"UE {k} appears in {len(hits)} association sets")
    return hits[0]


def compose_overall_channel(k, realization, ris_config, association):
    """Composite channel of UE k: direct link plus the reflected path, if any."""
    slot = serving_ris(k, association)
    direct = realization.direct[k]
    if slot == 0:
        return direct.copy()
    phases = np.asarray(ris_config.phases[slot - 1])
    return realization.bs_ris[slot - 1] @ (phases * realization.ris_ue[k]) + direct


def ris_reflected_covariance(bs_ris, phases, kernel):
    """Covariance contribution of the reflected path for a unit surface-UE gain.

    Treats the BS-surface channel and the phase profile as constants, so the
    result is H diag(phi) K diag(phi)^H H^H.
    """
    _check_unit_modulus(phases)
    scaled = bs_ris * np.asarray(phases)[None, :]
    return hermitize(scaled @ kernel @ scaled.conj().T)


def effective_correlation(bs_ue_cov, ris_ue_gain=0.0, bs_ris=None, phases=None,
                          kernel=None):
    """Overall-channel covariance of one UE for a fixed surface configuration.

    UEs served without a surface pass only their direct-link covariance;
    surface-served UEs add the reflected-path covariance scaled by their
    surface-UE path gain.
    """
    bs_ue_cov = np.asarray(bs_ue_cov)
    if bs_ris is None:
        return bs_ue_cov
    return bs_ue_cov + ris_ue_gain * ris_reflected_covariance(bs_ris, phases, kernel)
