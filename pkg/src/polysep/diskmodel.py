"""Disk model: zones, boundary index relations, transversals, and counts.

The separatrix graph embeds in the closed disk: boundary points 0..2d-3 on
the circle (direction ell at angle ell*pi/(d-1)), homoclinics as chords,
landing separatrices as rays to interior equilibrium vertices, and the 2d-2
circle arcs (the ends e_ell).  The zones of the vector field are exactly the
interior faces of this embedding, and the face traversal is purely
combinatorial: the face lying left of a flow-oriented chord dart is the zone
having that homoclinic on its lower boundary (in rectifying coordinates),
and symmetrically for the anti-flow dart.

Boundary sequences are stored left to right in rectifying coordinates, so
consecutive labels obey k_{i+1} = j_i + 1 on a lower run and
k_{i+1} = j_i - 1 on an upper run, mod 2(d-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DecompositionError
from .farfield import direction_count
from .polynomial import CENTER, MULTIPLE, SINK, SOURCE, EquilibriumPoint
from .tracing import SeparatrixGraph

CYLINDER = "cylinder"
SEPAL = "sepal"
STRIP = "strip"


@dataclass(frozen=True)
class Equilibrium:
    """Model-level equilibrium record; location/residue only for numeric models."""

    multiplicity: int
    kind: str
    location: complex | None = None
    residue: complex | None = None

    @staticmethod
    def from_point(e: EquilibriumPoint) -> "Equilibrium":
        return Equilibrium(e.multiplicity, e.kind, e.location, e.residue)


@dataclass(frozen=True)
class Run:
    """One boundary side of a zone, read left to right.

    ``side`` is "lower" when the zone lies above the run, "upper" when below.
    Cyclic runs (cylinder boundaries) have no landing ends.
    """

    side: str
    cyclic: bool
    homoclinics: tuple[tuple[int, int], ...]
    opening: int | None = None  # even landing direction starting the run
    closing: int | None = None  # odd landing direction closing the run

    def elements(self):
        out = []
        if self.opening is not None:
            out.append(("land", self.opening))
        out.extend(("hom",) + h for h in self.homoclinics)
        if self.closing is not None:
            out.append(("land", self.closing))
        return out


@dataclass(frozen=True)
class Zone:
    """A cylinder (center zone), sepal (half-plane), or strip.

    ``equilibria``: (center,) for a cylinder, (multiple point,) for a sepal,
    (alpha, omega) for a strip.  A cylinder's center is -1 until assigned.
    """

    kind: str
    runs: tuple[Run, ...]
    equilibria: tuple[int, ...]

    @property
    def orientation(self) -> str:
        # ccw center zones have their homoclinics on the zone's lower boundary
        return "ccw" if self.runs[0].side == "lower" else "cw"

    @property
    def side(self) -> str:
        # a sepal is an upper half-plane iff its run is the zone's lower boundary
        return "upper" if self.runs[0].side == "lower" else "lower"

    @property
    def alpha_eq(self) -> int:
        return self.equilibria[0]

    @property
    def omega_eq(self) -> int:
        return self.equilibria[-1]

    @property
    def lower(self) -> Run:
        return next(r for r in self.runs if r.side == "lower")

    @property
    def upper(self) -> Run:
        return next(r for r in self.runs if r.side == "upper")


@dataclass(frozen=True)
class DistinguishedTransversal:
    """Canonical strip transversal T_{k,j} joining end e_k to end e_j.

    e_k is the right-most end on the strip's lower boundary and e_j the
    left-most end on its upper boundary.
    """

    k: int
    j: int
    zone_index: int


@dataclass(frozen=True)
class Counts:
    s: int
    h: int
    mstar: int
    N: int

    @property
    def dim(self) -> int:
        return 2 * self.s + self.h

    @property
    def codim(self) -> int:
        return 2 * self.mstar + self.h


@dataclass(frozen=True)
class DiskModel:
    """Labelled separatrix graph plus its zone decomposition."""

    degree: int
    homoclinics: tuple[tuple[int, int], ...]
    landing: dict[int, int]
    equilibria: tuple[Equilibrium, ...]
    zones: tuple[Zone, ...]
    transversals: tuple[DistinguishedTransversal, ...]
    counts: Counts
    above: dict[tuple[int, int], int]       # homoclinic -> zone index above it
    below: dict[tuple[int, int], int]
    component: dict[int, int]               # zone index -> chord-face component id
    taus: dict[tuple[int, int], float] = field(default_factory=dict, compare=False)
    graph: SeparatrixGraph | None = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return self.counts.dim

    @property
    def codim(self) -> int:
        return self.counts.codim

    def zone_of_side(self, hom: tuple[int, int], side: str) -> Zone:
        idx = self.above[hom] if side == "above" else self.below[hom]
        return self.zones[idx]

    def cylinder_centers(self) -> dict[tuple, int]:
        out = {}
        for z in self.zones:
            if z.kind == CYLINDER:
                out[z.runs[0].homoclinics] = z.equilibria[0]
        return out

    def key(self):
        """Labelled-model equality key (fixed equilibrium indexing)."""
        return (
            self.degree,
            self.homoclinics,
            tuple(sorted(self.landing.items())),
            tuple((e.multiplicity, e.kind) for e in self.equilibria),
            tuple(sorted((z.runs[0].homoclinics, z.equilibria[0])
                         for z in self.zones if z.kind == CYLINDER)),
        )


# ---------------------------------------------------------------------------
# planar embedding and face traversal
# ---------------------------------------------------------------------------

def _reverse(dart):
    return dart[:-1] + (1 - dart[-1],)


def _head(dart, D):
    tag = dart[0]
    if tag == "arc":
        _, a, o = dart
        return ("b", (a + 1) % D) if o == 0 else ("b", a)
    if tag == "hom":
        _, k, j, o = dart
        return ("b", j) if o == 0 else ("b", k)
    _, ell, eq, o = dart
    return ("q", eq) if o == 0 else ("b", ell)


def faces_of_embedding(D: int, chords, rays):
    """Interior faces (as dart cycles) of the disk embedding.

    ``chords``: (k, j) homoclinics; ``rays``: (ell, eq_index) landing
    separatrices.  Chord darts with orientation 0 run k -> j (flow), ray
    darts with orientation 0 run boundary -> equilibrium.  The face left of
    each dart is traced; the outer face (reversed arcs only) is dropped.
    """
    rotations: dict[tuple, list] = {}
    interior_edge = {}
    for k, j in chords:
        if k in interior_edge or j in interior_edge:
            raise DecompositionError(f"direction used twice by chords near ({k},{j})")
        interior_edge[k] = ("hom", k, j, 0)
        interior_edge[j] = ("hom", k, j, 1)
    for ell, eq in rays:
        if ell in interior_edge:
            raise DecompositionError(f"direction {ell} used by both a chord and a ray")
        interior_edge[ell] = ("ray", ell, eq, 0)

    for b in range(D):
        rot = [("arc", b, 0)]
        if b in interior_edge:
            rot.append(interior_edge[b])
        rot.append(("arc", (b - 1) % D, 1))
        rotations[("b", b)] = rot
    eq_rays: dict[int, list[int]] = {}
    for ell, eq in rays:
        eq_rays.setdefault(eq, []).append(ell)
    for eq, ells in eq_rays.items():
        rotations[("q", eq)] = [("ray", ell, eq, 1) for ell in sorted(ells)]

    pos = {}
    for node, rot in rotations.items():
        for i, dart in enumerate(rot):
            pos[dart] = (node, i)

    def next_dart(dart):
        rev = _reverse(dart)
        node, i = pos[rev]
        rot = rotations[node]
        return rot[(i - 1) % len(rot)]

    seen = set()
    faces = []
    for start in pos:
        if start in seen:
            continue
        cycle = []
        d = start
        while True:
            if d in seen:
                raise DecompositionError("face traversal revisited a dart (broken embedding)")
            seen.add(d)
            cycle.append(d)
            d = next_dart(d)
            if d == start:
                break
        faces.append(cycle)

    interior = []
    outer = None
    for f in faces:
        if all(d[0] == "arc" and d[-1] == 1 for d in f):
            if outer is not None:
                raise DecompositionError("embedding produced two outer faces")
            outer = f
        else:
            if any(d[0] == "arc" and d[-1] == 1 for d in f):
                raise DecompositionError("a face mixes interior and outer arcs (crossing chords?)")
            interior.append(f)
    if outer is None or len(outer) != D:
        raise DecompositionError("outer face malformed; chords or rays are inconsistent")
    return interior


# ---------------------------------------------------------------------------
# zone classification
# ---------------------------------------------------------------------------

def _flow_aligned(dart) -> bool:
    tag = dart[0]
    if tag == "hom":
        return dart[-1] == 0
    if tag == "ray":
        ell = dart[1]
        return dart[-1] == (0 if ell % 2 == 1 else 1)
    raise ValueError(dart)


def _run_from_darts(darts, D) -> Run:
    """Validate one boundary side between two equilibrium visits."""
    seps = [d for d in darts if d[0] != "arc"]
    if not seps or seps[0][0] != "ray" or seps[-1][0] != "ray":
        raise DecompositionError("zone boundary side does not start and end with landing rays")
    if any(d[0] != "hom" for d in seps[1:-1]):
        raise DecompositionError("landing ray in the middle of a boundary side")
    aligned = [_flow_aligned(d) for d in seps]
    if all(aligned):
        side = "lower"
    elif not any(aligned):
        side = "upper"
        seps = seps[::-1]
    else:
        raise DecompositionError("mixed flow orientation along one boundary side")
    opening = seps[0][1]
    closing = seps[-1][1]
    homs = tuple((d[1], d[2]) for d in seps[1:-1])
    if opening % 2 != 0 or closing % 2 != 1:
        raise DecompositionError(f"boundary side has wrong end parities ({opening},{closing})")
    delta = 1 if side == "lower" else -1
    prev_j = opening
    for k, j in homs + ((closing, None),):
        if k != (prev_j + delta) % D:
            raise DecompositionError(
                f"index relation violated on {side} boundary: {k} != {prev_j}{delta:+d} mod {D}"
            )
        prev_j = j
    return Run(side, False, homs, opening, closing)


def _canonical_cycle(homs):
    i = min(range(len(homs)), key=lambda t: homs[t][0])
    return homs[i:] + homs[:i]


def _cylinder_from_face(face, D) -> Zone:
    seps = [d for d in face if d[0] == "hom"]
    if len(seps) * 2 != len(face):
        raise DecompositionError("cylinder face boundary must alternate chords and arcs")
    aligned = [_flow_aligned(d) for d in seps]
    if all(aligned):
        side = "lower"
    elif not any(aligned):
        side = "upper"
        seps = seps[::-1]
    else:
        raise DecompositionError("center zone boundary mixes orientations")
    homs = tuple((d[1], d[2]) for d in seps)
    delta = 1 if side == "lower" else -1
    for idx in range(len(homs)):
        j = homs[idx][1]
        k_next = homs[(idx + 1) % len(homs)][0]
        if k_next != (j + delta) % D:
            raise DecompositionError(
                f"cyclic index relation violated: {k_next} != {j}{delta:+d} mod {D}"
            )
    return Zone(CYLINDER, (Run(side, True, _canonical_cycle(homs)),), (-1,))


def _zone_from_face(face, D) -> tuple[Zone, list[int]]:
    """Classify one interior face; returns the zone and the eq visits."""
    visit_positions = [i for i, d in enumerate(face) if _head(d, D)[0] == "q"]
    if not visit_positions:
        return _cylinder_from_face(face, D), []
    visits = [_head(face[i], D)[1] for i in visit_positions]
    n = len(face)
    runs = []
    for v, start in enumerate(visit_positions):
        end = visit_positions[(v + 1) % len(visit_positions)]
        length = ((end - start - 1) % n) + 1  # a single visit spans the whole cycle
        darts = [face[(start + 1 + t) % n] for t in range(length)]
        runs.append(_run_from_darts(darts, D))
    if len(runs) == 1:
        return Zone(SEPAL, tuple(runs), (visits[0],)), visits
    if len(runs) == 2:
        sides = {r.side for r in runs}
        if sides != {"lower", "upper"}:
            raise DecompositionError("strip needs one lower and one upper boundary side")
        lower = next(r for r in runs if r.side == "lower")
        # walk order: runs[i] goes from equilibrium visits[i] to visits[i+1];
        # for the lower run that start is the alpha point, for the upper the omega
        i_lower = runs.index(lower)
        alpha = visits[i_lower]
        omega = visits[(i_lower + 1) % 2]
        if alpha == omega:
            raise DecompositionError("strip has identical alpha and omega equilibria")
        return Zone(STRIP, (lower, runs[(i_lower + 1) % 2]), (alpha, omega)), visits
    raise DecompositionError(f"face visits {len(runs)} equilibria; zones allow at most 2")


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

def _chords_cross(a, b, D) -> bool:
    a0, a1 = sorted(a)
    return (a0 < min(b) % D < a1) != (a0 < max(b) % D < a1)

def _point_in_region(point, boundary_pts: np.ndarray) -> bool:
    """Even-odd rule for a closed polygonal region in the complex plane."""
    x, y = point.real, point.imag
    px = boundary_pts.real
    py = boundary_pts.imag
    x1, y1 = px, py
    x2, y2 = np.roll(px, -1), np.roll(py, -1)
    cond = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    return bool(np.sum(cond & (xs > x)) % 2)


def _assign_centers(zones, centers, graph, center_map, equilibria):
    """Fill in the center equilibrium of every cylinder zone."""
    cylinders = [i for i, z in enumerate(zones) if z.kind == CYLINDER]
    if len(cylinders) != len(centers):
        raise DecompositionError(
            f"{len(cylinders)} center zones but {len(centers)} center equilibria"
        )
    if not cylinders:
        return zones
    out = list(zones)
    if center_map is not None:
        for i in cylinders:
            key = zones[i].runs[0].homoclinics
            if key not in center_map:
                raise DecompositionError(f"no center assigned for cylinder {key}")
            eq = center_map[key]
            if eq not in centers:
                raise DecompositionError(f"assigned equilibrium {eq} is not a center")
            out[i] = replace(zones[i], equilibria=(eq,))
        return tuple(out)
    if len(cylinders) == 1:
        out[cylinders[0]] = replace(zones[cylinders[0]], equilibria=(centers[0],))
        return tuple(out)
    if graph is None or not graph.traces:
        raise DecompositionError(
            "multiple center zones need traced geometry or an explicit center map"
        )
    r_inf = max(abs(tr.polyline[0]) for tr in graph.traces.values())
    step = np.pi / (graph.degree - 1)
    remaining = set(centers)
    for i in cylinders:
        # boundary polygon in cyclic walk order: chords alternating with arcs
        run = zones[i].runs[0]
        pts = []
        if run.side == "lower":
            for k, j in run.homoclinics:
                pts.append(graph.traces[k].polyline)
                pts.append(r_inf * np.exp(1j * np.linspace(j * step, (j + 1) * step, 8)))
        else:
            for k, j in reversed(run.homoclinics):
                pts.append(graph.traces[k].polyline[::-1])
                pts.append(r_inf * np.exp(1j * np.linspace(k * step, (k + 1) * step, 8)))
        boundary = np.concatenate(pts)
        inside = [c for c in remaining if _point_in_region(equilibria[c].location, boundary)]
        if len(inside) != 1:
            raise DecompositionError(
                f"cylinder {run.homoclinics} contains {len(inside)} centers"
            )
        remaining.discard(inside[0])
        out[i] = replace(zones[i], equilibria=(inside[0],))
    return tuple(out)


def decompose(graph: SeparatrixGraph, equilibria=None, center_map=None) -> DiskModel:
    """Build and validate the disk model of a labelled separatrix graph.

    ``equilibria`` may be EquilibriumPoint instances (numeric pipeline),
    Equilibrium records (combinatorial input), or None to derive multiplicity
    and kind from the zone structure.  ``center_map`` maps a cylinder's
    canonical boundary tuple to its center equilibrium index; it is required
    for combinatorial inputs with more than one center zone.
    """
    d = graph.degree
    D = direction_count(d)
    chords = list(graph.homoclinic_pairs)
    rays = sorted(graph.landing.items())
    used = set()
    for k, j in chords:
        if k % 2 != 1 or j % 2 != 0:
            raise DecompositionError(f"homoclinic ({k},{j}) violates the parity convention")
        used.update((k, j))
    for ell, _ in rays:
        used.add(ell)
    if used != set(range(D)):
        raise DecompositionError("directions are not exactly covered by chords and rays")
    for i, a in enumerate(chords):
        for b in chords[i + 1:]:
            if _chords_cross(a, b, D):
                raise DecompositionError(f"homoclinics {a} and {b} cross in the disk")

    faces = faces_of_embedding(D, chords, rays)
    zones = []
    for f in faces:
        zone, _ = _zone_from_face(f, D)
        zones.append(zone)

    # derive equilibrium structure from the zones
    ray_dirs: dict[int, set[int]] = {}
    for ell, eq in rays:
        ray_dirs.setdefault(eq, set()).add(ell)
    sepal_count: dict[int, int] = {}
    for z in zones:
        if z.kind == SEPAL:
            sepal_count[z.equilibria[0]] = sepal_count.get(z.equilibria[0], 0) + 1

    n_eq = (max(ray_dirs) + 1) if ray_dirs else 0
    if equilibria is not None:
        n_eq = max(n_eq, len(equilibria))
    if center_map is not None:
        n_eq = max(n_eq, max(center_map.values(), default=-1) + 1)
    if equilibria is None and center_map is None:
        # fresh anonymous centers, one per center zone, labelled in face order
        center_map = {}
        for z in zones:
            if z.kind == CYLINDER:
                center_map[z.runs[0].homoclinics] = n_eq
                n_eq += 1

    derived = []
    for i in range(n_eq):
        dirs = ray_dirs.get(i, set())
        sep = sepal_count.get(i, 0)
        if sep % 2 != 0:
            raise DecompositionError(f"equilibrium {i} borders an odd number of sepal zones")
        mult = 1 + sep // 2
        if not dirs:
            kind = CENTER
        elif mult > 1:
            kind = MULTIPLE
        elif all(e % 2 == 1 for e in dirs):
            kind = SINK
        elif all(e % 2 == 0 for e in dirs):
            kind = SOURCE
        else:
            raise DecompositionError(
                f"simple equilibrium {i} receives mixed-parity landing separatrices"
            )
        derived.append((mult, kind))

    if equilibria is None:
        eq_records = tuple(Equilibrium(m, k) for m, k in derived)
    else:
        eq_records = tuple(
            Equilibrium.from_point(e) if isinstance(e, EquilibriumPoint) else e
            for e in equilibria
        )
        if len(eq_records) != len(derived):
            raise DecompositionError(
                f"{len(eq_records)} equilibria supplied but {len(derived)} implied by the graph"
            )
        for i, (m, k) in enumerate(derived):
            if eq_records[i].multiplicity != m:
                raise DecompositionError(
                    f"equilibrium {i}: stated multiplicity {eq_records[i].multiplicity}"
                    f" disagrees with the zone structure ({m})"
                )
            if eq_records[i].kind != k:
                raise DecompositionError(
                    f"equilibrium {i}: stated kind {eq_records[i].kind!r};"
                    f" zone structure implies {k!r}"
                )

    centers = [i for i, e in enumerate(eq_records) if e.kind == CENTER]
    zones = _assign_centers(tuple(zones), centers, graph, center_map, eq_records)

    # homoclinic side maps; every homoclinic borders one lower and one upper run
    above: dict[tuple[int, int], int] = {}
    below: dict[tuple[int, int], int] = {}
    for zi, z in enumerate(zones):
        for run in z.runs:
            target = above if run.side == "lower" else below
            for hom in run.homoclinics:
                if hom in target:
                    raise DecompositionError(f"homoclinic {hom} borders two zones on one side")
                target[hom] = zi
    if set(above) != set(chords) or set(below) != set(chords):
        raise DecompositionError("some homoclinic does not border both an upper and a lower zone")

    # strip validation against equilibrium kinds
    for z in zones:
        if z.kind == STRIP:
            if eq_records[z.alpha_eq].kind not in (SOURCE, MULTIPLE):
                raise DecompositionError("strip alpha equilibrium must be a source or multiple point")
            if eq_records[z.omega_eq].kind not in (SINK, MULTIPLE):
                raise DecompositionError("strip omega equilibrium must be a sink or multiple point")

    N = len(eq_records)
    counts = Counts(
        s=sum(1 for z in zones if z.kind == STRIP),
        h=len(chords),
        mstar=sum(e.multiplicity - 1 for e in eq_records),
        N=N,
    )
    if counts.s + counts.h != N - 1:
        raise DecompositionError(
            f"count identity failed: s + h = {counts.s + counts.h} but N - 1 = {N - 1}"
        )
    if counts.dim + counts.codim != 2 * d - 2:
        raise DecompositionError("dimension + codimension does not equal 2d - 2")
    if sum(e.multiplicity for e in eq_records) != d:
        raise DecompositionError("multiplicities do not sum to the degree")

    transversals = []
    for zi, z in enumerate(zones):
        if z.kind == STRIP:
            transversals.append(DistinguishedTransversal(z.lower.closing, z.upper.opening, zi))

    # components of the disk minus the homoclinics: zones glued along rays
    parent = list(range(len(zones)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    ray_zone: dict[int, list[int]] = {}
    for zi, z in enumerate(zones):
        for run in z.runs:
            for ell in (run.opening, run.closing):
                if ell is not None:
                    ray_zone.setdefault(ell, []).append(zi)
    for ell, zs in ray_zone.items():
        if len(zs) != 2:
            raise DecompositionError(f"landing separatrix {ell} borders {len(zs)} zones")
        parent[find(zs[0])] = find(zs[1])
    component = {zi: find(zi) for zi in range(len(zones))}

    taus = {(k, j): tau for k, j, tau in graph.homoclinics}
    return DiskModel(
        degree=d,
        homoclinics=tuple(sorted(chords)),
        landing=dict(sorted(graph.landing.items())),
        equilibria=eq_records,
        zones=tuple(zones),
        transversals=tuple(transversals),
        counts=counts,
        above=above,
        below=below,
        component=component,
        taus=taus,
        graph=graph,
    )


def transversals(model: DiskModel) -> tuple[DistinguishedTransversal, ...]:
    """Exactly one distinguished transversal per strip."""
    return model.transversals
