"""Sound box-domain interval propagation through network layers."""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .network import BatchNorm, Dense, Network, Relu
from .errors import ShapeError


def propagate_dense(layer: Dense, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Interval matrix product via sign-split weights: exact for boxes."""
    wp = np.maximum(layer.weights, 0.0)
    wn = np.minimum(layer.weights, 0.0)
    out_lo = wp @ lo + wn @ hi + layer.bias
    out_hi = wp @ hi + wn @ lo + layer.bias
    return out_lo, out_hi


def propagate_relu(lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return np.maximum(lo, 0.0), np.maximum(hi, 0.0)


def propagate_batchnorm(layer: BatchNorm, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Affine per-channel map; endpoint images bracket the output interval."""
    a, c = layer.affine()
    lo_img = a * lo + c
    hi_img = a * hi + c
    return np.minimum(lo_img, hi_img), np.maximum(lo_img, hi_img)


def propagate_layer(layer, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(layer, Dense):
        return propagate_dense(layer, lo, hi)
    if isinstance(layer, Relu):
        return propagate_relu(lo, hi)
    if isinstance(layer, BatchNorm):
        return propagate_batchnorm(layer, lo, hi)
    raise ShapeError(f"cannot propagate through layer {type(layer).__name__}")


def propagate(
    net: Network,
    lo: np.ndarray,
    hi: np.ndarray,
    from_layer: int = 0,
    to_layer: int | None = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Propagate a box from one position to another; returns (lo, hi)."""
    if to_layer is None:
        to_layer = net.depth
    if not 0 <= from_layer < to_layer <= net.depth:
        raise ShapeError(
            f"invalid layer range [{from_layer}, {to_layer}] for depth {net.depth}"
        )
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if lo.shape != hi.shape or lo.shape != (net.dim_at(from_layer),):
        raise ShapeError("box shape does not match network dimension at position")
    if (lo > hi).any():
        raise ShapeError("box has lo > hi")
    for layer in net.layers[from_layer:to_layer]:
        lo, hi = propagate_layer(layer, lo, hi)
    return lo, hi
