"""Interval elbow detection on sampled non-increasing error curves.

The curve is approximated by three line segments through ``(z_0, V(z_0))``,
``(k1, V(k1))``, ``(k2, V(k2))`` and ``(z_K, 0)``. The knot pair minimizing the
area under that polyline is the selected interval. The single-knot variant
(two segments) gives the point elbow.

Knot domain: ``k1`` ranges over the interior samples ``z_1 .. z_{K-1}`` and
``k2`` over ``z_2 .. z_K`` with ``k1 < k2``. Ties go to the smallest ``k1``,
then the smallest ``k2``. Areas within ``TIE_RTOL * V(z_0) * (z_K - z_0)`` (the
area of the bounding box) of the minimum count as ties, so the selection does
not depend on rounding and is unchanged when v or z is rescaled.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CurveTooShortError, MappingUnavailableError

log = logging.getLogger(__name__)

TIE_RTOL = 1e-9


@dataclass(frozen=True)
class ErrorCurve:
    z: np.ndarray
    v: np.ndarray
    lambda_at: Optional[np.ndarray] = None
    shift_applied: float = 0.0
    adjusted: int = 0

    def __len__(self):
        return len(self.z)


@dataclass(frozen=True)
class ElbowResult:
    k1_star: float
    k2_star: float
    total_area: float
    areas: tuple[float, float, float]
    point_elbow: float
    k1_index: int
    k2_index: int
    point_index: int
    degenerate: bool = False
    lambda_interval: Optional[tuple[float, float]] = None
    lambda_point: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "k1": self.k1_star,
            "k2": self.k2_star,
            "point_elbow": self.point_elbow,
            "total_area": self.total_area,
            "areas": {"A1": self.areas[0], "A2": self.areas[1], "A3": self.areas[2]},
            "degenerate": self.degenerate,
            "lambda_interval": list(self.lambda_interval) if self.lambda_interval else None,
            "lambda_point": self.lambda_point,
        }


def build_curve(samples: Iterable[Sequence]) -> ErrorCurve:
    """Normalize raw ``(z, value[, lambda])`` samples into an :class:`ErrorCurve`.

    Sorts by z, keeps the smallest value for repeated z, shifts so the minimum
    is zero and replaces v by its running minimum so the curve is non-increasing.
    """
    best: dict[float, tuple[float, Optional[float]]] = {}
    for s in samples:
        z, val = float(s[0]), float(s[1])
        lam = float(s[2]) if len(s) > 2 and s[2] is not None else None
        if not (np.isfinite(z) and np.isfinite(val)):
            raise ValueError(f"non-finite curve sample ({z}, {val})")
        if z not in best or val < best[z][0]:
            best[z] = (val, lam)
    if len(best) < 3:
        raise CurveTooShortError(f"need at least 3 distinct z values, got {len(best)}")

    zs = sorted(best)
    v = np.array([best[z][0] for z in zs])
    lams = [best[z][1] for z in zs]
    shift = float(v.min())
    v = v - shift
    mono = np.minimum.accumulate(v)
    adjusted = int(np.count_nonzero(mono < v))
    if adjusted:
        log.info("build_curve: %d sample(s) lowered to enforce monotonicity", adjusted)
    lambda_at = None if any(lam is None for lam in lams) else np.array(lams)
    return ErrorCurve(np.array(zs, dtype=float), mono, lambda_at, shift, adjusted)


def _areas(z: np.ndarray, v: np.ndarray):
    z0, zk, v0 = z[0], z[-1], v[0]
    a1 = (v0 + v) * (z - z0) / 2.0
    a2 = (v[:, None] + v[None, :]) * (z[None, :] - z[:, None]) / 2.0
    a3 = v * (zk - z) / 2.0
    return a1, a2, a3


def guaed(curve: ErrorCurve) -> ElbowResult:
    """Exhaustive search for the area-minimizing knot pair and the single-knot elbow."""
    z, v = np.asarray(curve.z, dtype=float), np.asarray(curve.v, dtype=float)
    k = len(z) - 1
    if k < 2:
        raise CurveTooShortError(f"need at least 3 samples, got {len(z)}")

    a1, a2, a3 = _areas(z, v)
    total = a1[:, None] + a2 + a3[None, :]
    valid = np.zeros_like(total, dtype=bool)
    i_idx, j_idx = np.triu_indices(k + 1, 1)
    valid[i_idx, j_idx] = True
    valid[0, :] = False
    total = np.where(valid, total, np.inf)
    band = TIE_RTOL * v[0] * (z[-1] - z[0])
    # row-major argmax of the tie set: the first hit has the smallest k1, then k2
    flat = int(np.argmax(total <= total.min() + band))
    i, j = divmod(flat, k + 1)

    single = a1[1:k] + a3[1:k]
    p = 1 + int(np.argmax(single <= single.min() + band))

    degenerate = not np.any(v)
    if degenerate:
        log.warning("guaed: curve is identically zero; returning the canonical interval")
    point = float(z[p])
    if not (z[i] <= point <= z[j]):
        log.warning("guaed: point elbow %g lies outside the interval [%g, %g]", point, z[i], z[j])
    return ElbowResult(
        k1_star=float(z[i]),
        k2_star=float(z[j]),
        total_area=float(total[i, j]),
        areas=(float(a1[i]), float(a2[i, j]), float(a3[j])),
        point_elbow=point,
        k1_index=i,
        k2_index=j,
        point_index=p,
        degenerate=degenerate,
    )


def map_to_lambda(curve: ErrorCurve, result: ElbowResult) -> ElbowResult:
    """Attach the lambda of each selected sample (interval given as (lam at k1, lam at k2))."""
    if curve.lambda_at is None:
        raise MappingUnavailableError("curve has no lambda annotations")
    lam = curve.lambda_at
    return replace(
        result,
        lambda_interval=(float(lam[result.k1_index]), float(lam[result.k2_index])),
        lambda_point=float(lam[result.point_index]),
    )


def detect(samples: Iterable[Sequence]) -> tuple[ErrorCurve, ElbowResult]:
    """build_curve + guaed (+ lambda mapping when every sample carries a lambda)."""
    curve = build_curve(samples)
    res = guaed(curve)
    if curve.lambda_at is not None:
        res = map_to_lambda(curve, res)
    return curve, res
