"""Panel Gauss-Legendre rules in theta, optionally graded toward theta = 0."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThetaRule:
    nodes: np.ndarray
    weights: np.ndarray
    panel: np.ndarray      # panel index of each node
    breaks: np.ndarray     # panel boundaries, len = n_panels + 1
    needs_tail: bool       # graded rule starting at theta_min > 0 on a support touching 0

    @property
    def n_panels(self) -> int:
        return len(self.breaks) - 1

    def panel_sums(self, values: np.ndarray) -> np.ndarray:
        """Per-panel quadrature of node values (last axis)."""
        values = np.asarray(values, dtype=float)
        out = np.zeros(values.shape[:-1] + (self.n_panels,))
        np.add.at(out.T, self.panel, (values * self.weights).T)
        return out


def gauss_panels(breaks: np.ndarray, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    panel = np.repeat(np.arange(len(breaks) - 1), order)
    return nodes.ravel(), np.broadcast_to(weights, nodes.shape).ravel().copy(), panel


def graded_breaks(lo: float, hi: float, theta_min: float, ratio: float) -> np.ndarray:
    start = max(lo, theta_min)
    if hi <= start:
        return np.array([lo, hi])
    k = int(np.floor(np.log(hi / start) / np.log(ratio)))
    br = start * ratio ** np.arange(k + 1)
    br = br[br < hi]
    # merge a sliver last panel into its neighbour
    if len(br) > 1 and hi / br[-1] < np.sqrt(ratio):
        br = br[:-1]
    return np.append(br, hi)


def theta_rule(lo: float, hi: float, *, graded: bool, theta_min: float = 1e-6,
               ratio: float = 2.0, order: int = 8, n_panels: int = 4) -> ThetaRule:
    if hi < lo:
        raise ValueError("empty theta interval")
    if graded:
        breaks = graded_breaks(lo, hi, theta_min, ratio)
        needs_tail = lo == 0.0 and len(breaks) > 3
    else:
        breaks = np.linspace(lo, hi, n_panels + 1)
        needs_tail = False
    nodes, weights, panel = gauss_panels(breaks, order)
    return ThetaRule(nodes, weights, panel, breaks, needs_tail)


def geometric_tail(i0: float, i1: float):
    """Extrapolated integral over (0, theta_min) from the two innermost panels.

    For a local power law the panel integrals form a geometric sequence with
    ratio r = i1/i0 > 1; the remaining tail is i0 / (r - 1).  Returns
    ``(tail, r)``; ``tail`` is None when the sequence does not decay toward 0.
    """
    if i0 == 0.0:
        return 0.0, np.inf
    r = i1 / i0
    if not np.isfinite(r) or r <= 1.0:
        return None, r
    return i0 / (r - 1.0), r
