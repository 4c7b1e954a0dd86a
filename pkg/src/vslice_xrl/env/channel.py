"""Link-level formulas: path loss, interference, Shannon rate over PRBs, delay, penalties.

All functions broadcast over numpy arrays.
"""
import numpy as np


def channel_gain(vehicle_pos, gnb_pos, exponent=3.5, d_ref=1.0):
    """Deterministic power-law gain ``(max(d, d_ref) / d_ref) ** -exponent``."""
    vehicle_pos = np.asarray(vehicle_pos, dtype=float)
    gnb_pos = np.asarray(gnb_pos, dtype=float)
    dist = np.sqrt(np.sum((vehicle_pos - gnb_pos) ** 2, axis=-1))
    return (np.maximum(dist, d_ref) / d_ref) ** (-exponent)


def gain_matrix(positions, gnb_positions, config):
    """Gains for every (vehicle, gNB) pair; positions has shape (..., N, 2)."""
    positions = np.asarray(positions, dtype=float)
    return channel_gain(
        positions[..., :, None, :],
        np.asarray(gnb_positions, dtype=float),
        config.pathloss_exponent,
        config.reference_distance,
    )


def interference_matrix(gains, tx_power):
    """Downlink inter-cell interference I[i, m] = sum over m' != m of P * G[i, m']."""
    gains = np.asarray(gains, dtype=float)
    return tx_power * (gains.sum(axis=-1, keepdims=True) - gains)


def interference_at(gains_row, serving, tx_power):
    """Interference seen by one vehicle served by gNB ``serving`` (zero-based)."""
    gains_row = np.asarray(gains_row, dtype=float)
    mask = np.ones(gains_row.shape[-1], dtype=bool)
    mask[serving] = False
    return tx_power * float(np.sum(gains_row[mask]))


def throughput(prbs, gain, interference, config):
    """Rate in bit/s: ``B * prb_bandwidth * log2(1 + P G / (noise + I))``."""
    sinr = config.tx_power * np.asarray(gain, dtype=float) / (config.noise_power + np.asarray(interference, dtype=float))
    rate = np.asarray(prbs, dtype=float) * config.prb_bandwidth * np.log2(1.0 + sinr)
    return rate if np.ndim(rate) else float(rate)


def delay(demand, rate, config):
    """End-to-end delay ``D / R + fixed_delay``; infinite when R = 0 and D > 0."""
    demand = np.asarray(demand, dtype=float)
    rate = np.asarray(rate, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(demand > 0, demand / rate, 0.0)
    out = np.where((rate <= 0) & (demand > 0), np.inf, tx + config.fixed_delay)
    return out if np.ndim(out) else float(out)


def urllc_penalty(delay_s, config):
    """Normalized delay excess ``max(0, T - T_th) / T_th`` capped at ``penalty_cap``."""
    excess = np.maximum(0.0, np.asarray(delay_s, dtype=float) - config.urllc_delay_max) / config.urllc_delay_max
    out = np.minimum(excess, config.penalty_cap)
    return out if np.ndim(out) else float(out)


def embb_penalty(rate, config):
    """Normalized rate shortfall ``max(0, R_th - R) / R_th``."""
    short = np.maximum(0.0, config.embb_rate_min - np.asarray(rate, dtype=float)) / config.embb_rate_min
    out = np.minimum(short, config.penalty_cap)
    return out if np.ndim(out) else float(out)
