"""Random valid disk models by rejection sampling.

Samples a non-crossing set of (odd, even) chords, distributes the leftover
directions as landing rays grouped by a random non-crossing partition per
chord face, and keeps the result only if the full zone decomposition
validates.  The decomposer's index-relation and parity checks make the
rejection correct by construction; no attempt is made at uniformity.
"""

from __future__ import annotations

import numpy as np

from .diskmodel import DiskModel, decompose, faces_of_embedding, CYLINDER
from .errors import DecompositionError
from .farfield import direction_count
from .tracing import SeparatrixGraph


def _sample_chords(rng, D, h):
    odds = [x for x in range(1, D, 2)]
    evens = [x for x in range(0, D, 2)]
    chords = []

    def crosses(a, b):
        a0, a1 = sorted(a)
        return (a0 < min(b) < a1) != (a0 < max(b) < a1)

    for _ in range(40 * max(h, 1)):
        if len(chords) == h:
            break
        k = odds[rng.integers(len(odds))]
        j = evens[rng.integers(len(evens))]
        cand = (k, j)
        if any(crosses(cand, c) for c in chords):
            continue
        chords.append(cand)
        odds.remove(k)
        evens.remove(j)
    return chords if len(chords) == h else None


def _nc_partition(rng, n, p_extend=0.45):
    """Random non-crossing partition of range(n); blocks of index lists."""
    def rec(indices):
        if not indices:
            return []
        block = [indices[0]]
        rest = indices[1:]
        blocks = []
        while rest and rng.random() < p_extend:
            pick = int(rng.integers(len(rest)))
            block.append(rest[pick])
            blocks.extend(rec(rest[:pick]))
            rest = rest[pick + 1:]
        blocks.extend(rec(rest))
        return [block] + blocks

    return rec(list(range(n)))


def _face_ray_orders(D, chords):
    """Ray directions of each chord face, in cyclic boundary order."""
    faces = faces_of_embedding(D, chords, [])
    chord_dirs = {x for c in chords for x in c}
    orders = []
    for f in faces:
        pts = []
        for dart in f:
            if dart[0] == "arc":
                head = (dart[1] + 1) % D
                if head not in chord_dirs:
                    pts.append(head)
        orders.append(pts)
    return orders


def random_disk_model(rng, degree, h=None, max_tries=300) -> DiskModel:
    """One random valid disk model of the given degree.

    ``h`` fixes the homoclinic count; by default it is drawn uniformly from
    0..d-1.  Raises DecompositionError when ``max_tries`` rejections pass
    without a valid model (rare; rates are tested).
    """
    D = direction_count(degree)
    for _ in range(max_tries):
        hh = int(rng.integers(0, degree)) if h is None else h
        chords = _sample_chords(rng, D, hh)
        if chords is None:
            continue
        try:
            ray_orders = _face_ray_orders(D, chords)
        except DecompositionError:
            continue
        landing = {}
        next_eq = 0
        for rays in ray_orders:
            for block in _nc_partition(rng, len(rays)):
                for idx in block:
                    landing[rays[idx]] = next_eq
                next_eq += 1
        graph = SeparatrixGraph(
            degree,
            tuple(sorted((k, j, 1.0) for k, j in chords)),
            dict(sorted(landing.items())),
        )
        try:
            return decompose(graph)
        except DecompositionError:
            continue
    raise DecompositionError(f"no valid model found in {max_tries} tries (d={degree}, h={h})")


def sample_models(seed, count, degrees=(2, 3, 4, 5, 6, 7), h_max=None):
    """Deterministic stream of random valid models."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = int(degrees[rng.integers(len(degrees))])
        h = None
        if h_max is not None:
            h = int(rng.integers(0, min(d - 1, h_max) + 1))
        try:
            out.append(random_disk_model(rng, d, h=h))
        except DecompositionError:
            continue
    return out
