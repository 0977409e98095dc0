"""H-chains, H-graphs, union graphs, and rank-1 bifurcation enumeration.

A chained homoclinic breaking is the rank-1 normal form: homoclinics
v_1, ..., v_n break, the shift-paired s_{k_i, j_{i+1}} form, and the two
freed asymptotic directions j_1 and k_n land.  In the H-graph (vertices =
homoclinics, an edge u -> w per boundary run on which u precedes w) such an
event is a directed path of n-1 single-edge admissible paths whose edges
alternate sides, together with a choice of half-plane for Im(tau-tilde) at
the first vertex when n = 1.

Realizability of an event is decided by the partial-sum inequality system
on the imaginary parts of the pseudo-invariants along every formed edge's
boundary run; a numeric witness of that system is attached to each event
and later drives the numerical verification.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linprog

from .diskmodel import CYLINDER, DiskModel, Equilibrium, decompose
from .errors import DecompositionError, SearchExhausted, TheoremViolation
from .farfield import direction_count
from .polynomial import CENTER, SINK, SOURCE
from .tracing import SeparatrixGraph

MARGIN_MIN = 1e-9


@dataclass(frozen=True)
class HChain:
    """Sequence of homoclinics with k_{i+1} = j_i +- 1 mod 2(d-1).

    The itinerary records the sign of each step: +1 when k_{i+1} = j_i + 1
    (the pair sits on a lower boundary, shared zone above), -1 when
    k_{i+1} = j_i - 1 (upper boundary, zone below).
    """

    degree: int
    members: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(set(self.members)) != len(self.members):
            raise ValueError("an H-chain never revisits a homoclinic")
        self.itinerary  # validates steps

    @property
    def itinerary(self) -> tuple[int, ...]:
        D = direction_count(self.degree)
        out = []
        for (k1, j1), (k2, j2) in zip(self.members, self.members[1:]):
            if k2 == (j1 + 1) % D:
                out.append(1)
            elif k2 == (j1 - 1) % D:
                out.append(-1)
            else:
                raise ValueError(f"({k2},{j2}) does not follow ({k1},{j1}) in an H-chain")
        return tuple(out)

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class HEdge:
    """Directed H-graph edge: src precedes dst on one boundary run.

    ``sign`` is +1 when the run is a lower boundary (the shared zone lies
    above both homoclinics) and -1 for an upper boundary.  ``run`` lists the
    run members from src to dst inclusive, left to right.
    """

    src: tuple[int, int]
    dst: tuple[int, int]
    zone_index: int
    sign: int
    run: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class HGraph:
    vertices: tuple[tuple[int, int], ...]
    edges: tuple[HEdge, ...]

    def out_edges(self, v):
        return [e for e in self.edges if e.src == v]

    def has_edge(self, src, dst) -> bool:
        return any(e.src == src and e.dst == dst for e in self.edges)


@dataclass(frozen=True)
class AdmissiblePath:
    """Orientation-respecting H-graph path, one edge per disk component.

    Components here are the connected components of the disk minus the
    homoclinic separatrices; zones on either side of a landing separatrix
    belong to the same component.
    """

    edges: tuple[HEdge, ...]

    @property
    def vertices(self):
        return (self.edges[0].src,) + tuple(e.dst for e in self.edges)

    @property
    def start(self):
        return self.edges[0].src

    @property
    def end(self):
        return self.edges[-1].dst


@dataclass(frozen=True)
class InequalitySystem:
    """Linear system over Im(tau-tilde) variables; every row compares to 0."""

    variables: tuple[tuple[int, int], ...]
    lhs: tuple[tuple[float, ...], ...]
    rel: tuple[str, ...]

    def check(self, y, margin=0.0) -> bool:
        for row, r in zip(self.lhs, self.rel):
            v = float(np.dot(row, y))
            if r == "<" and not v < -margin:
                return False
            if r == ">" and not v > margin:
                return False
            if r == "=" and abs(v) > 1e-12 + margin * 1e-3:
                return False
        return True


@dataclass(frozen=True)
class BifurcationEvent:
    """A chained homoclinic breaking with its feasibility witness.

    ``broken`` is in chain order v_1..v_n; ``formed`` is the shift pairing
    s_{k_i, j_{i+1}}.  ``sign`` is the half-plane of Im(tau-tilde) at v_1.
    ``landing`` maps the freed directions: j_1 lands backward at
    ``landing["j1"]`` and k_n forward at ``landing["kn"]``.
    """

    broken: tuple[tuple[int, int], ...]
    formed: tuple[tuple[int, int], ...]
    sign: int
    landing_j: int
    landing_k: int
    system: InequalitySystem
    witness: tuple[float, ...]
    edge_zones: tuple[int, ...] = ()
    edge_runs: tuple[tuple[tuple[int, int], ...], ...] = ()

    @property
    def rank(self) -> int:
        return len(self.broken) - len(self.formed)

    @property
    def j1_direction(self) -> int:
        return self.broken[0][1]

    @property
    def kn_direction(self) -> int:
        return self.broken[-1][0]

    def key(self):
        return (
            tuple(sorted(self.broken)),
            tuple(sorted(self.formed)),
            (self.j1_direction, self.landing_j, self.kn_direction, self.landing_k),
            self.sign,
        )


# ---------------------------------------------------------------------------
# H-graph construction and chains
# ---------------------------------------------------------------------------

def build_hgraph(model: DiskModel) -> HGraph:
    """All H-graph edges, found by scanning each zone's boundary runs.

    On a linear run the edges follow the left-to-right order; on a cylinder's
    cyclic run every ordered pair gets an edge because a chain can wrap
    around the cylinder.
    """
    edges = []
    for zi, zone in enumerate(model.zones):
        for run in zone.runs:
            homs = run.homoclinics
            sign = 1 if run.side == "lower" else -1
            if run.cyclic and len(homs) >= 2:
                p = len(homs)
                for a in range(p):
                    for step in range(1, p):
                        seg = tuple(homs[(a + t) % p] for t in range(step + 1))
                        edges.append(HEdge(seg[0], seg[-1], zi, sign, seg))
            else:
                for a in range(len(homs)):
                    for b in range(a + 1, len(homs)):
                        seg = tuple(homs[a:b + 1])
                        edges.append(HEdge(seg[0], seg[-1], zi, sign, seg))
    return HGraph(tuple(model.homoclinics), tuple(edges))


def can_form(model: DiskModel, first: tuple[int, int], second: tuple[int, int]) -> HChain | None:
    """Shortest H-chain with ``first`` before ``second``, if one exists.

    Ties are broken lexicographically on the member sequence.  Returns None
    for first == second: re-forming an existing homoclinic is not a
    bifurcation.
    """
    homs = set(model.homoclinics)
    if first not in homs or second not in homs:
        raise ValueError("both arguments must be homoclinics of the model")
    if first == second:
        return None
    D = direction_count(model.degree)
    by_k = {k: (k, j) for k, j in homs}
    queue = [(first,)]
    while queue:
        next_queue = []
        for chain in queue:
            j = chain[-1][1]
            for k_next in sorted({(j + 1) % D, (j - 1) % D}):
                nxt = by_k.get(k_next)
                if nxt is None or nxt in chain:
                    continue
                if nxt == second:
                    return HChain(model.degree, chain + (nxt,))
                next_queue.append(chain + (nxt,))
        queue = next_queue
    return None


def feasibility(chain: HChain):
    """Partial-sum systems for forming s_{k_1, j_n} by breaking the chain.

    For n >= 2 the itinerary fixes one system (prefix sums signed opposite
    to each step, total zero) and one witness; the list has one entry.  For
    n = 1 the closing equality degenerates to the two open half-plane cases
    and both are returned.
    """
    n = len(chain)
    vars_ = chain.members
    if n == 1:
        out = []
        for sign in (1, -1):
            sys_ = InequalitySystem(vars_, ((1.0,),), (">" if sign > 0 else "<",))
            out.append((sys_, (float(sign),)))
        return out
    rows, rels = [], []
    for i in range(1, n):
        row = tuple(1.0 if t < i else 0.0 for t in range(n))
        rows.append(row)
        rels.append("<" if chain.itinerary[i - 1] > 0 else ">")
    rows.append((1.0,) * n)
    rels.append("=")
    system = InequalitySystem(vars_, tuple(rows), tuple(rels))
    # witness from prescribed partial sums S_i = -I_{i+1}, S_n = 0
    S = [0.0]
    for i in range(1, n):
        S.append(-float(chain.itinerary[i - 1]))
    S.append(0.0)
    witness = tuple(S[i + 1] - S[i] for i in range(n))
    if not system.check(witness, margin=MARGIN_MIN):
        raise TheoremViolation("constructed witness fails its own chain system")
    return [(system, witness)]


# ---------------------------------------------------------------------------
# joint feasibility of a union path
# ---------------------------------------------------------------------------

def _joint_system(model: DiskModel, broken, edges):
    """Inequality system for a whole chained breaking.

    Variables are every homoclinic appearing on some formed edge's run
    (broken ones first, pass-through members after, pinned to zero).  Each
    edge contributes its prefix-sum rows and a total-zero row.
    """
    var_list = list(broken)
    for e in edges:
        for h in e.run:
            if h not in var_list:
                var_list.append(h)
    idx = {h: i for i, h in enumerate(var_list)}
    rows, rels = [], []
    for e in edges:
        rel = "<" if e.sign > 0 else ">"
        for plen in range(1, len(e.run)):
            row = [0.0] * len(var_list)
            for h in e.run[:plen]:
                row[idx[h]] = 1.0
            rows.append(tuple(row))
            rels.append(rel)
        row = [0.0] * len(var_list)
        for h in e.run:
            row[idx[h]] = 1.0
        rows.append(tuple(row))
        rels.append("=")
    for h in var_list:
        if h not in broken:
            row = [0.0] * len(var_list)
            row[idx[h]] = 1.0
            rows.append(tuple(row))
            rels.append("=")
    return InequalitySystem(tuple(var_list), tuple(rows), tuple(rels))


def _solve_margin(system: InequalitySystem, guess=None):
    """Witness with maximal margin, or None when the system is infeasible."""
    if guess is not None and system.check(guess, margin=MARGIN_MIN):
        return tuple(guess)
    nv = len(system.variables)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row, rel in zip(system.lhs, system.rel):
        if rel == "<":
            A_ub.append(list(row) + [1.0])
            b_ub.append(0.0)
        elif rel == ">":
            A_ub.append([-c for c in row] + [1.0])
            b_ub.append(0.0)
        else:
            A_eq.append(list(row) + [0.0])
            b_eq.append(0.0)
    c = [0.0] * nv + [-1.0]
    bounds = [(-1.0, 1.0)] * nv + [(0.0, 1.0)]
    res = linprog(c, A_ub=A_ub or None, b_ub=b_ub or None,
                  A_eq=A_eq or None, b_eq=b_eq or None, bounds=bounds,
                  method="highs")
    if not res.success or -res.fun <= MARGIN_MIN:
        return None
    return tuple(float(v) for v in res.x[:nv])


# ---------------------------------------------------------------------------
# rank-1 enumeration
# ---------------------------------------------------------------------------

def _landing_targets(model: DiskModel, broken, sign):
    """Equilibria receiving the freed separatrices s_{j_1} and s_{k_n}.

    With Im(tau-tilde) > 0 at v_1 the backward separatrix s_{j_1} lands at
    the alpha-limit point of the zone above v_1, otherwise below; s_{k_n}
    uses the zone below v_n when Im(tau-tilde) at v_n is positive, otherwise
    above.  The signs alternate along the chain.
    """
    s1 = sign
    sn = sign * (-1) ** (len(broken) - 1)
    zj = model.zone_of_side(broken[0], "above" if s1 > 0 else "below")
    zk = model.zone_of_side(broken[-1], "below" if sn > 0 else "above")
    return zj.alpha_eq, zk.omega_eq


def _event_from_path(model, broken, edges, sign):
    formed = tuple((broken[i][0], broken[i + 1][1]) for i in range(len(broken) - 1))
    lj, lk = _landing_targets(model, broken, sign)
    if edges:
        system = _joint_system(model, broken, edges)
        guess = [0.0] * len(system.variables)
        for i, v in enumerate(broken):
            guess[system.variables.index(v)] = sign * (-1.0) ** i
        witness = _solve_margin(system, guess)
        if witness is None:
            return None
    else:
        system = InequalitySystem((broken[0],), ((1.0,),), (">" if sign > 0 else "<",))
        witness = (float(sign),)
    return BifurcationEvent(
        broken=broken,
        formed=formed,
        sign=sign,
        landing_j=lj,
        landing_k=lk,
        system=system,
        witness=witness,
        edge_zones=tuple(e.zone_index for e in edges),
        edge_runs=tuple(e.run for e in edges),
    )


def enumerate_rank1(model: DiskModel, hgraph: HGraph | None = None) -> list[BifurcationEvent]:
    """All chained homoclinic breakings of the model, deduplicated.

    Single breakings (n = 1) come in both half-plane signs.  Longer chains
    follow alternating-side H-graph paths with distinct vertices; the sign
    at v_1 is then forced opposite to the first edge's side.  Events whose
    joint inequality system is infeasible are not realizable and are
    dropped.
    """
    if hgraph is None:
        hgraph = build_hgraph(model)
    out = {}

    def emit(ev):
        if ev is not None and ev.key() not in out:
            out[ev.key()] = ev

    for v in model.homoclinics:
        for sign in (1, -1):
            emit(_event_from_path(model, (v,), (), sign))

    def extend(vertices, edges):
        last = vertices[-1]
        want = -edges[-1].sign if edges else None
        for e in hgraph.out_edges(last):
            if e.dst in vertices:
                continue
            if want is not None and e.sign != want:
                continue
            vs, es = vertices + (e.dst,), edges + (e,)
            emit(_event_from_path(model, vs, es, -es[0].sign))
            extend(vs, es)

    for v in model.homoclinics:
        extend((v,), ())
    return sorted(out.values(), key=lambda ev: (len(ev.broken), ev.broken, -ev.sign))


# ---------------------------------------------------------------------------
# union graphs
# ---------------------------------------------------------------------------

def validate_union(model: DiskModel, paths) -> tuple[bool, str | None]:
    """Accept or reject a set of admissible paths as a union graph.

    Rejection reasons: "inadmissible-path" (orientation or the one-edge-per-
    component rule), "shared-start", "shared-end", "direction-conflict".  On
    acceptance the union is asserted acyclic (directed and undirected); a
    cycle raises TheoremViolation since the no-cycle property is proved.
    """
    paths = tuple(paths)
    for p in paths:
        if not p.edges:
            return False, "inadmissible-path"
        comps = [model.component[e.zone_index] for e in p.edges]
        if len(set(comps)) != len(comps):
            return False, "inadmissible-path"
        for e1, e2 in zip(p.edges, p.edges[1:]):
            if e1.dst != e2.src:
                return False, "inadmissible-path"
    starts = [p.start for p in paths]
    if len(set(starts)) != len(starts):
        return False, "shared-start"
    ends = [p.end for p in paths]
    if len(set(ends)) != len(ends):
        return False, "shared-end"

    union_edges = {(e.src, e.dst, e.zone_index, e.sign) for p in paths for e in p.edges}
    roles: dict[tuple, dict[int, set]] = {}
    for (src, dst, _, sign) in union_edges:
        # an edge attaches on the "above" side (sign +1) of both endpoints
        roles.setdefault(src, {1: set(), -1: set()})[sign].add("out")
        roles.setdefault(dst, {1: set(), -1: set()})[sign].add("in")
    for v, sides in roles.items():
        up, down = sides[1], sides[-1]
        if len(up) > 1 or len(down) > 1:
            return False, "direction-conflict"
        if up and down and up == down:
            return False, "direction-conflict"

    # accepted: assert the theorem-level no-cycle property
    adj = {}
    for (src, dst, _, _) in union_edges:
        adj.setdefault(src, []).append(dst)
    state = {}

    def dfs(v):
        state[v] = 1
        for w in adj.get(v, ()):
            if state.get(w, 0) == 1:
                raise TheoremViolation("accepted union graph contains a directed cycle")
            if state.get(w, 0) == 0:
                dfs(w)
        state[v] = 2

    for v in list(adj):
        if state.get(v, 0) == 0:
            dfs(v)
    verts = {v for e in union_edges for v in (e[0], e[1])}
    seen = set()
    und = {}
    for (src, dst, _, _) in union_edges:
        und.setdefault(src, []).append(dst)
        und.setdefault(dst, []).append(src)
    ncomp = 0
    for v in verts:
        if v in seen:
            continue
        ncomp += 1
        stack = [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            for w in und.get(u, ()):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    if len(union_edges) != len(verts) - ncomp:
        raise TheoremViolation("accepted union graph contains an undirected cycle")
    return True, None


def admissible_paths(model: DiskModel, hgraph: HGraph | None = None, max_edges: int | None = None):
    """Every admissible path of the H-graph (simple, one edge per component)."""
    if hgraph is None:
        hgraph = build_hgraph(model)
    out = []

    def extend(edges, comps, vertices):
        out.append(AdmissiblePath(tuple(edges)))
        if max_edges is not None and len(edges) >= max_edges:
            return
        for e in hgraph.out_edges(edges[-1].dst):
            c = model.component[e.zone_index]
            if c in comps or e.dst in vertices:
                continue
            extend(edges + [e], comps | {c}, vertices | {e.dst})

    for e in hgraph.edges:
        extend([e], {model.component[e.zone_index]}, {e.src, e.dst})
    return out


# ---------------------------------------------------------------------------
# event application and rank-k decomposition
# ---------------------------------------------------------------------------

def apply_event(model: DiskModel, event: BifurcationEvent) -> DiskModel:
    """Rewrite the model combinatorially and re-run zone decomposition.

    Broken homoclinics disappear, formed ones appear, the freed directions
    j_1 and k_n land at the event's target equilibria (a center target turns
    into a source or sink respectively), and every surviving center is
    re-attached to the cylinder face that inherits its region.
    """
    broken = set(event.broken)
    if not broken <= set(model.homoclinics):
        raise ValueError("event does not belong to this model")
    new_homs = [h for h in model.homoclinics if h not in broken]
    new_taus = {h: model.taus.get(h, 1.0) for h in new_homs}
    for i, f in enumerate(event.formed):
        new_homs.append(f)
        run = event.edge_runs[i]
        new_taus[f] = sum(model.taus.get(h, 1.0) for h in run)

    landing = dict(model.landing)
    for dir_, eq in ((event.j1_direction, event.landing_j), (event.kn_direction, event.landing_k)):
        if dir_ in landing:
            raise ValueError(f"direction {dir_} already lands; malformed event")
        landing[dir_] = eq

    eqs = list(model.equilibria)
    for eq, role in ((event.landing_j, "alpha"), (event.landing_k, "omega")):
        e = eqs[eq]
        if e.kind == CENTER:
            eqs[eq] = replace(e, kind=SOURCE if role == "alpha" else SINK)
        elif role == "alpha" and e.kind == SINK:
            raise DecompositionError("freed backward separatrix cannot land at a sink")
        elif role == "omega" and e.kind == SOURCE:
            raise DecompositionError("freed forward separatrix cannot land at a source")

    graph = SeparatrixGraph(
        model.degree,
        tuple(sorted((k, j, new_taus[(k, j)]) for k, j in new_homs)),
        dict(sorted(landing.items())),
    )

    # centers follow their regions: a new cylinder face either equals an old
    # one or was carved out of the zone a formed edge crossed
    from .diskmodel import faces_of_embedding, _zone_from_face

    D = direction_count(model.degree)
    faces = faces_of_embedding(D, [(k, j) for k, j in new_homs], sorted(landing.items()))
    old_cyl = model.cylinder_centers()
    formed_zone = {f: event.edge_zones[i] for i, f in enumerate(event.formed)}
    retargeted = {event.landing_j, event.landing_k}
    center_map = {}
    for f in faces:
        zone, _ = _zone_from_face(f, D)
        if zone.kind != CYLINDER:
            continue
        key = zone.runs[0].homoclinics
        formed_on = [h for h in key if h in formed_zone]
        if not formed_on:
            if key not in old_cyl:
                raise DecompositionError(f"cannot attach a center to new cylinder {key}")
            eq = old_cyl[key]
        else:
            zones_hit = {formed_zone[h] for h in formed_on}
            if len(zones_hit) != 1:
                raise DecompositionError(f"new cylinder {key} inherits from several zones")
            src_zone = model.zones[zones_hit.pop()]
            if src_zone.kind != CYLINDER:
                raise DecompositionError(f"new cylinder {key} carved from a non-cylinder zone")
            eq = src_zone.equilibria[0]
        if eq in retargeted:
            raise DecompositionError("a retargeted center would still own a cylinder")
        center_map[key] = eq

    new_model = decompose(graph, tuple(eqs), center_map=center_map)
    if new_model.counts.h != model.counts.h - event.rank:
        raise DecompositionError("event application changed h by the wrong amount")
    if new_model.counts.mstar != model.counts.mstar or new_model.counts.N != model.counts.N:
        raise DecompositionError("event application is not multiplicity-preserving")
    if new_model.dim != model.dim + event.rank:
        raise DecompositionError("event application changed the dimension inconsistently")
    return new_model


def decompose_rank_k(model0: DiskModel, target: DiskModel, max_nodes: int = 20000):
    """Breadth-first factorization of a bifurcation into rank-1 events.

    Searches compositions of enumerate_rank1/apply_event from ``model0``
    until the labelled target model is reached; the sequence has length
    h0 - h_target.  Raises SearchExhausted when no factorization is found,
    which falsifies either the reachability claim or the engine.
    """
    if target.counts.mstar != model0.counts.mstar or target.counts.N != model0.counts.N:
        raise ValueError("target is not multiplicity-preserving relative to the start model")
    k = model0.counts.h - target.counts.h
    if k < 1:
        raise ValueError("target must have strictly fewer homoclinics")
    target_key = target.key()
    if model0.key() == target_key:
        return []
    frontier = [(model0, [])]
    visited = {model0.key()}
    expanded = 0
    for _ in range(k):
        next_frontier = []
        for m, path in frontier:
            for ev in enumerate_rank1(m):
                if m.counts.h - ev.rank < target.counts.h:
                    continue
                expanded += 1
                if expanded > max_nodes:
                    raise SearchExhausted("rank decomposition search budget exceeded")
                child = apply_event(m, ev)
                ck = child.key()
                if ck == target_key:
                    return path + [ev]
                if ck in visited:
                    continue
                visited.add(ck)
                next_frontier.append((child, path + [ev]))
        frontier = next_frontier
    raise SearchExhausted(f"no rank-1 factorization of length {k} found")
