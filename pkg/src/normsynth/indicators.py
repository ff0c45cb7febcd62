"""Front quality indicators: exact hypervolume, IGD+, and the joint reference set.

Everything here is in minimisation space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .kernel import nondominated_mask

HV_REF_OFFSET = 1e-2


@dataclass(frozen=True)
class ReferenceSet:
    front: np.ndarray
    nadir: np.ndarray
    ideal: np.ndarray


def build_reference(fronts: list[np.ndarray]) -> ReferenceSet:
    """Join minimisation fronts, keep the non-dominated union, record nadir and ideal of the join."""
    fronts = [np.atleast_2d(np.asarray(f, dtype=float)) for f in fronts if len(f)]
    if not fronts:
        raise DomainError("no points to build a reference set from")
    dims = {f.shape[1] for f in fronts}
    if len(dims) != 1:
        raise DomainError(f"fronts have inconsistent objective dimensions {sorted(dims)}")
    joined = np.vstack(fronts)
    front = np.unique(joined[nondominated_mask(joined)], axis=0)
    return ReferenceSet(front=front, nadir=joined.max(axis=0), ideal=joined.min(axis=0))


def normalize(points: np.ndarray, reference: ReferenceSet) -> np.ndarray:
    """Affine map sending the ideal to the origin and the nadir to all-ones; flat axes map to 0."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    span = reference.nadir - reference.ideal
    scaled = (points - reference.ideal) / np.where(span > 0, span, 1.0)
    return np.where(span > 0, scaled, 0.0)


def normalize_for_indicators(fronts: list[np.ndarray], reference: ReferenceSet):
    """Normalised fronts, the normalised reference front and the hypervolume reference point."""
    m = reference.front.shape[1]
    ref_point = np.full(m, 1.0 + HV_REF_OFFSET)
    return [normalize(f, reference) for f in fronts], normalize(reference.front, reference), ref_point


# -- hypervolume ---------------------------------------------------------------


def _hv2d(points: np.ndarray, ref: np.ndarray) -> float:
    order = np.lexsort((points[:, 1], points[:, 0]))
    x = points[order, 0]
    y = points[order, 1]
    best_y = np.minimum.accumulate(y)
    # each point contributes the strip between its x and the next x, at the running best height
    widths = np.diff(np.append(x, ref[0]))
    return float(np.sum(widths * (ref[1] - best_y)))


def _nondominated(points: np.ndarray) -> np.ndarray:
    if len(points) <= 1:
        return points
    points = np.unique(points, axis=0)
    return points[nondominated_mask(points)]


def _wfg(points: np.ndarray, ref: np.ndarray) -> float:
    n, m = points.shape
    if n == 0:
        return 0.0
    if n == 1:
        return float(np.prod(ref - points[0]))
    if m == 2:
        return _hv2d(points, ref)
    # sorting on the last objective shrinks the limited sets quickly
    points = points[np.argsort(points[:, -1], kind="stable")[::-1]]
    total = 0.0
    for k in range(n):
        p = points[k]
        inclusive = float(np.prod(ref - p))
        rest = points[k + 1 :]
        if len(rest):
            limited = _nondominated(np.maximum(rest, p))
            inclusive -= _wfg(limited, ref)
        total += inclusive
    return total


def hypervolume(front, ref_point) -> float:
    """Exact Lebesgue measure dominated by ``front`` and bounded by ``ref_point``.

    Points that do not strictly dominate the reference point contribute nothing
    and are dropped.  Returns 0 for an empty front.
    """
    ref = np.asarray(ref_point, dtype=float)
    front = np.asarray(front, dtype=float)
    if front.size == 0:
        return 0.0
    front = np.atleast_2d(front)
    if front.shape[1] != ref.size:
        raise DomainError(f"points have {front.shape[1]} objectives, reference point {ref.size}")
    front = front[np.all(front < ref, axis=1)]
    if len(front) == 0:
        return 0.0
    return _wfg(_nondominated(front), ref)


def hypervolume_monte_carlo(front, ref_point, samples: int, rng, lower=None) -> tuple[float, float]:
    """Uniform-sampling estimate of the hypervolume and its standard error.

    Samples the box between ``lower`` (default: the front's ideal) and the
    reference point, in chunks to bound memory.
    """
    front = np.atleast_2d(np.asarray(front, dtype=float))
    ref = np.asarray(ref_point, dtype=float)
    lower = front.min(axis=0) if lower is None else np.asarray(lower, dtype=float)
    volume = float(np.prod(ref - lower))
    hits = 0
    chunk = 20_000
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        pts = lower + rng.random((size, ref.size)) * (ref - lower)
        covered = np.zeros(size, dtype=bool)
        for p in front:
            covered |= np.all(pts >= p, axis=1)
        hits += int(covered.sum())
        done += size
    frac = hits / samples
    return volume * frac, volume * np.sqrt(frac * (1.0 - frac) / samples)


# -- IGD+ ------------------------------------------------------------------------


def igd_plus(front, reference) -> float:
    """Mean over reference points of the dominance-aware distance to the nearest front point.

    ``reference`` is a :class:`ReferenceSet` or an array of reference points.
    An empty front yields ``inf``.
    """
    ref = reference.front if isinstance(reference, ReferenceSet) else np.asarray(reference, float)
    ref = np.atleast_2d(ref)
    if ref.size == 0:
        raise DomainError("IGD+ needs a non-empty reference front")
    front = np.asarray(front, dtype=float)
    if front.size == 0:
        return float("inf")
    front = np.atleast_2d(front)
    gaps = np.maximum(front[None, :, :] - ref[:, None, :], 0.0)
    return float(np.mean(np.min(np.sqrt(np.sum(gaps**2, axis=2)), axis=1)))
