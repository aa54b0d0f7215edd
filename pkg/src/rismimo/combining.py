"""Linear receive combining, transmit precoding, and SINR bookkeeping.

Channel and combiner arrays are UE-major: row k of a (K, M) array is the
vector of UE k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

SCHEMES = ("mr", "zf", "mmse")


@dataclass
class CombinerSet:
    vectors: np.ndarray  # (K, M)
    scheme: str


@dataclass
class PowerDecomposition:
    """Uplink power terms at the combiner output, normalized by the noise term.

    ds: desired signal; ipr: interference from UEs sharing the pilot;
    iop: interference from UEs on other pilots; ee: estimation-error term.
    """

    ds: float
    ipr: float
    iop: float
    ee: float
    noise: float = 1.0

    @property
    def sinr(self):
        return self.ds / (self.ipr + self.iop + self.ee + self.noise)


def mr_combiner(estimates):
    """Maximum-ratio combining: use the channel estimates as they are."""
    return CombinerSet(np.array(estimates, dtype=complex), "mr")


def zf_combiner(estimates):
    """Zero-forcing combining from the stacked channel estimates.

    Raises numpy.linalg.LinAlgError when the estimate matrix is rank
    deficient (in particular whenever K > M).
    """
    estimates = np.asarray(estimates)
    n_ues, n_antennas = estimates.shape
    message = "channel estimate matrix is rank deficient; zero-forcing undefined"
    if n_ues > n_antennas:
        raise np.linalg.LinAlgError(message)
    gram = estimates.conj() @ estimates.T  # (K, K)
    try:
        factor = cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(message) from exc
    pivots = np.abs(np.diag(factor[0]))
    if pivots.min() <= 1e-8 * pivots.max():
        raise np.linalg.LinAlgError(message)
    # columns of Hhat (Hhat^H Hhat)^-1, stored UE-major
    vectors = cho_solve(factor, estimates.conj()).conj()
    return CombinerSet(vectors, "zf")


def mmse_combiner(estimates, cov_overall, estimate_cov, tx_snr):
    """MMSE combining from estimates plus estimation-error statistics."""
    estimates = np.asarray(estimates)
    n_ues, n_antennas = estimates.shape
    inv_cov = estimates.T @ estimates.conj()  # sum of estimate outer products
    for k in range(n_ues):
        inv_cov += cov_overall[k] - estimate_cov[k]
    inv_cov[np.diag_indices(n_antennas)] += 1.0 / tx_snr
    vectors = cho_solve(cho_factor(inv_cov), estimates.T).T
    return CombinerSet(vectors, "mmse")


def error_covariance_sum(cov_overall, estimate_cov):
    """Sum over UEs of the estimation-error covariances."""
    total = np.zeros_like(np.asarray(cov_overall[0]))
    for cov, est in zip(cov_overall, estimate_cov):
        total += cov - est
    return total


def ul_sinr(k, combiners, overall, cov_overall, estimate_cov, tx_snr, assignment,
            error_cov_sum=None):
    """Uplink SINR of UE k and its normalized power decomposition.

    The interference is split by pilot: UEs sharing pilot c(k) contribute to
    the pilot-reuse term, all other UEs to the other-pilot term. The
    estimation-error term sums the error covariances of every UE.
    """
    vector = np.asarray(combiners.vectors[k])
    noise = np.vdot(vector, vector).real / tx_snr
    if noise == 0.0:
        raise ValueError("combiner vector is zero; SINR undefined")
    if error_cov_sum is None:
        error_cov_sum = error_covariance_sum(cov_overall, estimate_cov)
    gains = np.abs(np.asarray(overall) @ vector.conj()) ** 2  # |v^H h_k'|^2
    shared = assignment.share_sets[assignment.pilot_of[k]]
    ipr = sum(gains[i] for i in shared if i != k)
    iop = gains.sum() - gains[k] - ipr
    ee = np.vdot(vector, error_cov_sum @ vector).real
    decomposition = PowerDecomposition(ds=gains[k] / noise, ipr=ipr / noise,
                                       iop=iop / noise, ee=ee / noise)
    return decomposition.sinr, decomposition


def ul_sinr_all(combiners, overall, error_cov_sum, tx_snr, assignment):
    """Vectorized uplink SINRs and power terms for every UE at once.

    Returns (sinr, terms) with terms of shape (K, 4) holding the normalized
    ds/ipr/iop/ee columns; same arithmetic as ul_sinr row by row.
    """
    vectors = np.asarray(combiners.vectors)
    n_ues = vectors.shape[0]
    noise = np.einsum("km,km->k", vectors.conj(), vectors).real / tx_snr
    if np.any(noise == 0.0):
        raise ValueError("combiner vector is zero; SINR undefined")
    cross = np.abs(vectors.conj() @ np.asarray(overall).T) ** 2  # |v_k^H h_j|^2
    ee = np.einsum("km,mn,kn->k", vectors.conj(), error_cov_sum, vectors).real
    terms = np.zeros((n_ues, 4))
    for k in range(n_ues):
        shared = assignment.share_sets[assignment.pilot_of[k]]
        ipr = sum(cross[k, i] for i in shared if i != k)
        terms[k] = (cross[k, k], ipr, cross[k].sum() - cross[k, k] - ipr, ee[k])
    terms /= noise[:, None]
    sinr = terms[:, 0] / (terms[:, 1] + terms[:, 2] + terms[:, 3] + 1.0)
    return sinr, terms


def precoders(combiners):
    """Unit-norm precoders pointing along the combiner directions."""
    vectors = np.asarray(combiners.vectors)
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero combiner vector; precoder undefined")
    return vectors / norms[:, None]


def dl_sinr(k, precoder_ensemble, channel_ensemble, tx_snr):
    """Downlink SINR of UE k from the channel-hardening bound.

    Expectations of the effective gains are replaced by averages over the
    supplied ensemble of matched (channel, precoder) realizations, each of
    shape (S, K, M).
    """
    channel_ensemble = np.asarray(channel_ensemble)
    precoder_ensemble = np.asarray(precoder_ensemble)
    if channel_ensemble.size == 0 or precoder_ensemble.size == 0:
        raise ValueError("empty realization ensemble")
    # g[s, j] = h_k[s]^H w_j[s]
    gains = np.einsum("sm,sjm->sj", channel_ensemble[:, k, :].conj(),
                      precoder_ensemble)
    return dl_sinr_from_moments(gains[:, k].mean(),
                                (np.abs(gains) ** 2).mean(axis=0), tx_snr)


def dl_sinr_from_moments(mean_gain, mean_sq_gains, tx_snr):
    """Hardening-bound SINR from the first and second gain moments."""
    desired = tx_snr * np.abs(mean_gain) ** 2
    return desired / (tx_snr * np.sum(mean_sq_gains) - desired + 1.0)


def spectral_efficiency(sinr, prelog=1.0):
    """Achievable rate prelog * log2(1 + sinr) in bit/s/Hz."""
    sinr = np.asarray(sinr)
    if np.any(sinr < 0):
        raise ValueError("SINR must be nonnegative")
    if not 0.0 < prelog <= 1.0:
        raise ValueError("prelog factor must lie in (0, 1]")
    return prelog * np.log2(1.0 + sinr)
