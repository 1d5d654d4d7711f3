"""Shift spaces, sliding block codes and the n-to-1 extension pipeline for codes.

Every presentation is reduced to a labeled graph whose bi-infinite label
sequences are the points of the shift. Edge shifts label each edge by its own
id. Forbidden-word shifts use the graph whose edges are the allowed words of a
fixed window, labeled by their first symbol.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import CapReached, FormatError, PreconditionError, UnsupportedPresentation
from .extension import (
    ExtensionResult,
    irreducible_extension_degree_n,
    irreducible_extension_same_degree,
)
from .graph import (
    DirectedMultigraph,
    Edge,
    _scc_indices,
    essentialize,
    graph_from_dict,
    graph_spectral_radius,
    graph_to_dict,
    higher_graph,
    is_essential,
    is_irreducible,
    is_weakly_connected,
    paths,
    spectral_less,
)
from .homomorphism import (
    GraphHomomorphism,
    higher_homomorphism,
    resolving_profile,
)

Word = tuple[str, ...]

PERIOD_CAP = 6
WORD_CAP = 12
N_CAP = 12
RADIUS_CAP = 8


def word_str(word: Sequence[str]) -> str:
    """Render a word: plain concatenation for one-character symbols, else space-separated."""
    if all(len(s) == 1 for s in word):
        return "".join(word)
    return " ".join(word)


def parse_word(text: str, alphabet: Iterable[str]) -> Word:
    if " " in text:
        return tuple(text.split(" "))
    alphabet = set(alphabet)
    if text in alphabet:
        return (text,)
    if all(len(s) == 1 for s in alphabet):
        return tuple(text)
    raise FormatError(f"cannot split word {text!r} into symbols")


# -- presentations -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SubshiftPresentation:
    kind: str                                   # "edge" | "forbidden" | "sofic"
    graph: DirectedMultigraph | None = None
    labels: Mapping[str, str] | None = None
    alphabet: tuple[str, ...] = ()
    forbidden: tuple[Word, ...] = ()
    # sofic only: the labeling is known to be injective on bi-infinite paths
    conjugate_labels: bool = False

    @property
    def window(self) -> int:
        return max([2] + [len(w) for w in self.forbidden])

    @cached_property
    def raw_labeled(self) -> tuple[DirectedMultigraph, dict[str, str]]:
        if self.kind == "edge":
            return self.graph, {e.id: e.id for e in self.graph.edges}
        if self.kind == "sofic":
            return self.graph, dict(self.labels)
        g, words = sft_graph(self.alphabet, self.forbidden, self.window)
        return g, {e: w[0] for e, w in words.items()}

    @cached_property
    def labeled(self) -> tuple[DirectedMultigraph, dict[str, str]]:
        """Essential labeled graph presenting the shift."""
        g, lab = self.raw_labeled
        ess = essentialize(g)
        return ess, {e.id: lab[e.id] for e in ess.edges}

    @property
    def points_are_paths(self) -> bool:
        """Bi-infinite paths of ``labeled`` correspond one-to-one with points."""
        return self.kind in ("edge", "forbidden") or self.conjugate_labels

    @cached_property
    def _word_levels(self) -> list[dict[str, set]]:
        g, _ = self.labeled
        return [{v: {()} for v in g.vertices}]


def edge_shift(g: DirectedMultigraph) -> SubshiftPresentation:
    return SubshiftPresentation("edge", graph=g, alphabet=tuple(e.id for e in g.edges))


def forbidden_shift(alphabet: Sequence[str], forbidden: Iterable) -> SubshiftPresentation:
    alphabet = tuple(str(s) for s in alphabet)
    if len(set(alphabet)) != len(alphabet):
        raise ValueError("alphabet has repeated symbols")
    fw = []
    for w in forbidden:
        word = parse_word(w, alphabet) if isinstance(w, str) else tuple(w)
        if not word:
            raise ValueError("forbidden words must be nonempty")
        bad = [s for s in word if s not in alphabet]
        if bad:
            raise ValueError(f"forbidden word {word_str(word)!r} uses symbols outside the alphabet")
        fw.append(word)
    return SubshiftPresentation("forbidden", alphabet=alphabet, forbidden=tuple(fw))


def sofic_shift(g: DirectedMultigraph, labels: Mapping[str, str],
                alphabet: Sequence[str] | None = None,
                conjugate_labels: bool = False) -> SubshiftPresentation:
    labels = {str(k): str(v) for k, v in labels.items()}
    missing = [e.id for e in g.edges if e.id not in labels]
    if missing:
        raise ValueError(f"edges without labels: {missing}")
    if alphabet is None:
        alphabet = tuple(dict.fromkeys(labels[e.id] for e in g.edges))
    alphabet = tuple(alphabet)
    stray = sorted(set(labels.values()) - set(alphabet))
    if stray:
        raise ValueError(f"labels outside the declared alphabet: {stray}")
    return SubshiftPresentation("sofic", graph=g, labels=labels, alphabet=alphabet,
                                conjugate_labels=conjugate_labels)


def sft_graph(alphabet: Sequence[str], forbidden: Iterable[Word],
              window: int) -> tuple[DirectedMultigraph, dict[str, Word]]:
    """Graph whose edges are the allowed ``window``-words (edge id -> word)."""
    fset = set(forbidden)
    lengths = sorted({len(w) for w in fset})

    def ok(w):
        return not any(len(w) >= n and w[-n:] in fset for n in lengths)

    level = [(s,) for s in alphabet if ok((s,))]
    prev = level
    for _ in range(window - 1):
        prev = level
        level = [w + (s,) for w in level for s in alphabet if ok(w + (s,))]
    vertices = tuple(word_str(w) for w in prev)
    present = set(vertices)
    edges, by_id = [], {}
    for w in level:
        src, dst = word_str(w[:-1]), word_str(w[1:])
        if src in present and dst in present:
            eid = word_str(w)
            edges.append(Edge(eid, src, dst))
            by_id[eid] = w
    return DirectedMultigraph(vertices, tuple(edges)), by_id


def words(x: SubshiftPresentation, n: int) -> frozenset[Word]:
    """``B_n(X)``: label words of length-``n`` paths in the essential presentation."""
    if n < 1:
        raise ValueError("word length must be positive")
    g, lab = x.labeled
    levels = x._word_levels
    while len(levels) <= n:
        frontier = levels[-1]
        nxt: dict[str, set] = {v: set() for v in g.vertices}
        for v, ws in frontier.items():
            if not ws:
                continue
            for e in g.out_edges[v]:
                s = lab[e.id]
                nxt[e.dst].update(w + (s,) for w in ws)
        levels.append(nxt)
    return frozenset().union(*levels[n].values())


def sorted_words(x: SubshiftPresentation, n: int) -> list[Word]:
    order = {s: i for i, s in enumerate(x.alphabet)}
    return sorted(words(x, n), key=lambda w: [order.get(s, len(order)) for s in w])


def symbols(x: SubshiftPresentation) -> list[str]:
    present = {w[0] for w in words(x, 1)}
    return [s for s in x.alphabet if s in present]


def growth_rate(x: SubshiftPresentation) -> float:
    """Spectral radius of a presenting graph; ``entropy`` is its logarithm."""
    if x.kind == "sofic":
        g, lab = x.raw_labeled
        for v in g.vertices:
            seen = set()
            for e in g.out_edges[v]:
                if lab[e.id] in seen:
                    raise UnsupportedPresentation(
                        "entropy of a sofic shift needs a right-resolving presentation")
                seen.add(lab[e.id])
    g, _ = x.raw_labeled
    return graph_spectral_radius(g)


def entropy(x: SubshiftPresentation) -> float:
    """Natural-log topological entropy; ``-inf`` for the empty shift."""
    lam = growth_rate(x)
    return math.log(lam) if lam > 0 else -math.inf


def _cyclic_relation(g: DirectedMultigraph, lab: Mapping[str, str],
                     word: Word) -> dict[str, dict[str, int]]:
    """Path counts: ``T[u][v]`` is the number of paths ``u -> v`` labeled ``word``."""
    by_symbol: dict[str, dict[str, list[str]]] = {}
    for e in g.edges:
        by_symbol.setdefault(lab[e.id], {}).setdefault(e.src, []).append(e.dst)
    t = {u: {u: 1} for u in g.vertices}
    for s in word:
        step = by_symbol.get(s, {})
        nt = {}
        for u, row in t.items():
            acc: dict[str, int] = {}
            for v, c in row.items():
                for w in step.get(v, ()):
                    acc[w] = acc.get(w, 0) + c
            if acc:
                nt[u] = acc
        t = nt
    return t


def _recurrent_classes(vertices: list[str], t: Mapping[str, Mapping[str, int]]):
    idx = {v: i for i, v in enumerate(vertices)}
    succ = [[idx[w] for w in t.get(v, {})] for v in vertices]
    comps = _scc_indices(len(vertices), succ)
    rec = [c for c in comps if len(c) > 1 or c[0] in succ[c[0]]]
    return rec, succ


def periodic_points(x: SubshiftPresentation, period: int) -> list[Word]:
    """Points fixed by the ``period``-th shift power, as their length-``period`` blocks."""
    g, lab = x.labeled
    out = []
    for w in sorted_words(x, period):
        rec, _ = _recurrent_classes(list(g.vertices), _cyclic_relation(g, lab, w))
        if rec:
            out.append(w)
    return out


# -- sliding block codes -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SlidingBlockCode:
    domain: SubshiftPresentation
    codomain: SubshiftPresentation
    block_map: Mapping[Word, str]
    memory: int = 0
    anticipation: int = 0

    def __post_init__(self):
        if self.memory < 0 or self.anticipation < 0:
            raise ValueError("memory and anticipation must be nonnegative")
        bm = {tuple(k): str(v) for k, v in self.block_map.items()}
        bad = [k for k in bm if len(k) != self.window]
        if bad:
            raise ValueError(f"block {word_str(bad[0])!r} does not have length {self.window}")
        object.__setattr__(self, "block_map", bm)

    @property
    def window(self) -> int:
        return self.memory + self.anticipation + 1

    def apply_word(self, w: Sequence[str]) -> Word:
        m = self.window
        return tuple(self.block_map[tuple(w[i:i + m])] for i in range(len(w) - m + 1))

    def apply_periodic(self, w: Sequence[str]) -> Word:
        """Image of the periodic point ``...www...`` with ``w[0]`` at coordinate 0."""
        p = len(w)
        out = []
        for i in range(p):
            block = tuple(w[(i + j) % p] for j in range(-self.memory, self.anticipation + 1))
            out.append(self.block_map[block])
        return tuple(out)

    @cached_property
    def _preimage_machine(self):
        if not self.domain.points_are_paths:
            raise UnsupportedPresentation("preimage counting needs a presentation whose "
                                          "paths correspond one-to-one with points")
        g, lab = self.domain.labeled
        if self.window > 1:
            hg = higher_graph(g, self.window)
            k, kpaths = hg.graph, hg.edge_paths
        else:
            k, kpaths = g, {e.id: (e.id,) for e in g.edges}
        image = {}
        for e in k.edges:
            block = tuple(lab[f] for f in kpaths[e.id])
            if block not in self.block_map:
                raise PreconditionError("total block map",
                                        f"block map undefined on {word_str(block)!r}")
            image[e.id] = self.block_map[block]
        return k, image


def count_preimages(code: SlidingBlockCode, y: Sequence[str]) -> float:
    """Number of points mapped to the periodic point ``...yyy...`` (``inf`` if infinite)."""
    k, image = code._preimage_machine
    t = _cyclic_relation(k, image, tuple(y))
    verts = list(k.vertices)
    rec, succ = _recurrent_classes(verts, t)
    rec_of = {}
    for c_i, comp in enumerate(rec):
        for v in comp:
            rec_of[v] = c_i
    total = 0
    for c_i, comp in enumerate(rec):
        members = set(comp)
        for v in comp:
            row = t[verts[v]]
            inside = sum(c for w, c in row.items() if k.vertex_index[w] in members)
            if inside != 1:
                return math.inf
        # a walk leaving this cycle and reaching another one gives infinitely many lifts
        seen, stack = set(comp), list(comp)
        while stack:
            v = stack.pop()
            for w in succ[v]:
                if w in rec_of and rec_of[w] != c_i:
                    return math.inf
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        total += len(comp)
    return total


def code_from_homomorphism(phi: GraphHomomorphism) -> SlidingBlockCode:
    return SlidingBlockCode(edge_shift(phi.domain), edge_shift(phi.codomain),
                            {(e.id,): phi.edge_map[e.id] for e in phi.domain.edges})


def validate_code(code: SlidingBlockCode, word_cap: int = WORD_CAP) -> list[tuple[str, bool, str]]:
    """Bounded checks: totality on ``B_M`` and admissibility of images up to ``word_cap``."""
    checks = []
    missing = [w for w in words(code.domain, code.window) if w not in code.block_map]
    checks.append(("block map total on B_M(domain)", not missing,
                   f"missing {word_str(missing[0])!r}" if missing else
                   f"{len(code.block_map)} blocks"))
    bad = None
    for n in range(1, word_cap + 1):
        allowed = words(code.codomain, n)
        for w in words(code.domain, n + code.window - 1):
            try:
                img = code.apply_word(w)
            except KeyError:
                continue
            if img not in allowed:
                bad = (w, img)
                break
        if bad:
            break
    checks.append((f"images admissible (image words up to length {word_cap})", bad is None,
                   "" if bad is None else
                   f"{word_str(bad[0])!r} maps to inadmissible {word_str(bad[1])!r}"))
    return checks


# -- one-block recoding ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OneBlockRecoding:
    code: SlidingBlockCode                # 1-block code on edge_shift(graph)
    graph: DirectedMultigraph
    edge_words: Mapping[str, Word]        # edge at time i <-> domain word starting at i - offset
    offset: int

    @cached_property
    def edge_of_word(self) -> dict[Word, str]:
        return {w: e for e, w in self.edge_words.items()}

    def edge_symbol(self, edge: str) -> str:
        """Domain symbol at the coordinate an edge stands for."""
        return self.edge_words[edge][self.offset]

    def encode(self, w: Sequence[str]) -> Word:
        """Image of a periodic domain point under the recoding conjugacy."""
        p, n = len(w), len(next(iter(self.edge_words.values()), ()))
        return tuple(self.edge_of_word[tuple(w[(i - self.offset + j) % p] for j in range(n))]
                     for i in range(p))


def recode_one_block(code: SlidingBlockCode) -> OneBlockRecoding:
    dom = code.domain
    m = code.memory
    if dom.kind == "edge":
        if code.window == 1:
            return OneBlockRecoding(code, dom.graph, {e.id: (e.id,) for e in dom.graph.edges}, 0)
        hg = higher_graph(dom.graph, code.window)
        k, ew = hg.graph, dict(hg.edge_paths)
    elif dom.kind == "forbidden":
        k, ew = sft_graph(dom.alphabet, dom.forbidden, max(dom.window, code.window))
    else:
        raise UnsupportedPresentation("one-block recoding needs a domain of finite type")
    k = essentialize(k)
    ew = {e.id: ew[e.id] for e in k.edges}
    bm = {}
    for e in k.edges:
        block = ew[e.id][: code.window]
        if block not in code.block_map:
            raise PreconditionError("total block map", f"block map undefined on {word_str(block)!r}")
        bm[(e.id,)] = code.block_map[block]
    return OneBlockRecoding(SlidingBlockCode(edge_shift(k), code.codomain, bm), k, ew, m)


def verify_recoding(rec: OneBlockRecoding, original: SlidingBlockCode,
                    period_cap: int = PERIOD_CAP) -> tuple[bool, int]:
    """Compare the recoded code with the original on periodic points; (ok, points checked)."""
    count = 0
    for p in range(1, period_cap + 1):
        for w in periodic_points(original.domain, p):
            count += 1
            if rec.code.apply_periodic(rec.encode(w)) != original.apply_periodic(w):
                return False, count
    return True, count


# -- closing ------------------------------------------------------------------------

@dataclass(frozen=True)
class EventuallyPeriodicPoint:
    """The point ``...LLL T RRR...`` with the transient ``T`` starting at coordinate 0."""

    left_cycle: Word
    transient: Word
    right_cycle: Word

    def window(self, start: int, stop: int) -> Word:
        out = []
        t = len(self.transient)
        for i in range(start, stop):
            if i < 0:
                c = self.left_cycle
                out.append(c[i % len(c)])
            elif i < t:
                out.append(self.transient[i])
            else:
                c = self.right_cycle
                out.append(c[(i - t) % len(c)])
        return tuple(out)

    def as_dict(self) -> dict:
        return {"left_cycle": list(self.left_cycle), "transient": list(self.transient),
                "right_cycle": list(self.right_cycle)}


@dataclass(frozen=True)
class ClosingProfile:
    right_closing: bool
    left_closing: bool
    witnesses: Mapping[str, tuple[EventuallyPeriodicPoint, EventuallyPeriodicPoint]] = \
        field(default_factory=dict)

    @property
    def bi_closing(self) -> bool:
        return self.right_closing and self.left_closing

    def as_dict(self) -> dict:
        return {"right_closing": self.right_closing, "left_closing": self.left_closing,
                "bi_closing": self.bi_closing,
                "witnesses": {k: [p.as_dict() for p in v] for k, v in self.witnesses.items()}}


def _reverse(g: DirectedMultigraph) -> DirectedMultigraph:
    return DirectedMultigraph(g.vertices, tuple(Edge(e.id, e.dst, e.src) for e in g.edges))


def _forward_divergence(k: DirectedMultigraph, psi: Mapping[str, str]):
    """Two distinct edges from one vertex with equal images and a common infinite future.

    Returns the data of the first such divergence or ``None``.
    """
    pair_succ: dict[tuple[str, str], list[tuple[str, str, tuple[str, str]]]] = {}
    for u in k.vertices:
        for v in k.vertices:
            lst = []
            for e in k.out_edges[u]:
                for f in k.out_edges[v]:
                    if psi[e.id] == psi[f.id]:
                        lst.append((e.id, f.id, (e.dst, f.dst)))
            pair_succ[(u, v)] = lst
    alive = set(pair_succ)
    changed = True
    while changed:
        changed = False
        for p in list(alive):
            if not any(t in alive for _, _, t in pair_succ[p]):
                alive.discard(p)
                changed = True
    for u in k.vertices:
        out = k.out_edges[u]
        for i, e in enumerate(out):
            for f in out[i + 1:]:
                if psi[e.id] == psi[f.id] and (e.dst, f.dst) in alive:
                    return u, e.id, f.id, (e.dst, f.dst), pair_succ, alive
    return None


def _past_of(k: DirectedMultigraph, u: str) -> tuple[Word, Word]:
    """(cycle, path from the cycle to ``u``) following first in-edges backwards."""
    seen = {u: 0}
    trail = []                      # in-edges, from u backwards
    v = u
    while True:
        e = k.in_edges[v][0]
        trail.append(e.id)
        v = e.src
        if v in seen:
            start = seen[v]
            cycle = tuple(reversed(trail[start:]))
            transient = tuple(reversed(trail[:start]))
            return cycle, transient
        seen[v] = len(trail)


def _closing_witness(k, psi, found) -> tuple[EventuallyPeriodicPoint, EventuallyPeriodicPoint]:
    u, e, f, start, pair_succ, alive = found
    cycle, lead = _past_of(k, u)
    seen = {start: 0}
    steps = []
    p = start
    while True:
        a, b, q = next(s for s in pair_succ[p] if s[2] in alive)
        steps.append((a, b))
        p = q
        if p in seen:
            break
        seen[p] = len(steps)
    cut = seen[p]
    x = EventuallyPeriodicPoint(cycle, lead + (e,) + tuple(s[0] for s in steps[:cut]),
                                tuple(s[0] for s in steps[cut:]))
    y = EventuallyPeriodicPoint(cycle, lead + (f,) + tuple(s[1] for s in steps[:cut]),
                                tuple(s[1] for s in steps[cut:]))
    return x, y


def _mirror(p: EventuallyPeriodicPoint) -> EventuallyPeriodicPoint:
    return EventuallyPeriodicPoint(tuple(reversed(p.right_cycle)), tuple(reversed(p.transient)),
                                   tuple(reversed(p.left_cycle)))


def closing_profile(code: SlidingBlockCode) -> ClosingProfile:
    """Decide right/left closing with the pair graph of the one-block recoding.

    Witness points are written in domain symbols.
    """
    rec = recode_one_block(code)
    k = rec.graph
    psi = {e.id: rec.code.block_map[(e.id,)] for e in k.edges}
    sym = rec.edge_symbol

    def to_domain(p: EventuallyPeriodicPoint) -> EventuallyPeriodicPoint:
        return EventuallyPeriodicPoint(tuple(map(sym, p.left_cycle)),
                                       tuple(map(sym, p.transient)),
                                       tuple(map(sym, p.right_cycle)))

    witnesses = {}
    right = _forward_divergence(k, psi)
    if right is not None:
        x, y = _closing_witness(k, psi, right)
        witnesses["right_closing"] = (to_domain(x), to_domain(y))
    rk = _reverse(k)
    left = _forward_divergence(rk, psi)
    if left is not None:
        x, y = _closing_witness(rk, psi, left)
        witnesses["left_closing"] = (to_domain(_mirror(x)), to_domain(_mirror(y)))
    return ClosingProfile(right is None, left is None, witnesses)


# -- degree ------------------------------------------------------------------------

@dataclass(frozen=True)
class PointDegree:
    status: str                            # "ok" | "indeterminate"
    degree: int | None                     # max number of preimages of a point
    n: int | None                          # block length at which the vertex degree equals it
    vertex_degrees: tuple[int, ...]        # vertex degree of Phi^[1], Phi^[2], ...
    periodic_max: int                      # largest preimage count seen on periodic points
    period_cap: int

    def as_dict(self) -> dict:
        return {"status": self.status, "d": self.degree, "N": self.n,
                "vertex_degrees": list(self.vertex_degrees),
                "periodic_max": self.periodic_max, "period_cap": self.period_cap}


def higher_vertex_degrees(phi: GraphHomomorphism, n_cap: int) -> list[int]:
    """Vertex degrees of ``Phi^[N]`` for ``N = 1..n_cap`` for a right-resolving ``phi``.

    The fiber over a codomain path is the set of endpoints of its lifts.
    """
    g, h = phi.domain, phi.codomain
    step = {(e.src, phi.edge_map[e.id]): e.dst for e in g.edges}
    states = set()
    for big_i in h.vertices:
        fib = frozenset(phi.fiber(big_i))
        if fib:
            states.add((big_i, fib))
    out = []
    for _ in range(n_cap):
        out.append(max((len(s) for _, s in states), default=0))
        nxt = set()
        for big_i, s in states:
            for b in h.out_edges[big_i]:
                t = frozenset(step[(u, b.id)] for u in s if (u, b.id) in step)
                if t:
                    nxt.add((b.dst, t))
        states = nxt
    return out


def point_degree(phi: GraphHomomorphism, period_cap: int = PERIOD_CAP,
                 n_cap: int = N_CAP) -> PointDegree:
    if not resolving_profile(phi).bi_resolving:
        raise PreconditionError("bi-resolving", "the homomorphism is not bi-resolving")
    if not (is_essential(phi.domain) and is_essential(phi.codomain)):
        raise PreconditionError("essential", "G and H must be essential (essentialize first)")
    code = code_from_homomorphism(phi)
    hshift = code.codomain
    best = 0
    for p in range(1, period_cap + 1):
        for y in periodic_points(hshift, p):
            best = max(best, count_preimages(code, y))
    degrees = higher_vertex_degrees(phi, n_cap)
    for n, (a, b) in enumerate(zip(degrees, degrees[1:]), start=1):
        if b > a:
            raise AssertionError(f"vertex degree grew from N={n} to N={n + 1}")
    for n, vd in enumerate(degrees, start=1):
        if vd == best:
            return PointDegree("ok", vd, n, tuple(degrees[:n]), int(best), period_cap)
    return PointDegree("indeterminate", None, None, tuple(degrees), int(best), period_cap)


# -- conjugacy extension ---------------------------------------------------------------

def words_contained(small: SubshiftPresentation, big: SubshiftPresentation) -> bool:
    """Whether every word of ``small`` is a word of ``big`` (subset construction)."""
    gs, ls = small.labeled
    gb, lb = big.labeled
    step: dict[tuple[str, str], set] = {}
    for e in gb.edges:
        step.setdefault((e.src, lb[e.id]), set()).add(e.dst)
    everything = frozenset(gb.vertices)
    start = [(u, everything) for u in gs.vertices]
    seen = set(start)
    stack = list(start)
    while stack:
        u, s = stack.pop()
        for e in gs.out_edges[u]:
            t = frozenset(w for v in s for w in step.get((v, ls[e.id]), ()))
            if not t:
                return False
            if (e.dst, t) not in seen:
                seen.add((e.dst, t))
                stack.append((e.dst, t))
    return True


def inverse_radius(code: SlidingBlockCode, cap: int = RADIUS_CAP) -> int:
    """Smallest ``R`` such that image windows of length ``2R+1`` fix the center symbol."""
    if code.window != 1:
        raise PreconditionError("1-block", "the code must be a 1-block code")
    for r in range(cap + 1):
        if _inverse_table(code, r) is not None:
            return r
    raise CapReached(f"no inverse window up to radius {cap}; the code may not be injective")


def _inverse_table(code: SlidingBlockCode, r: int) -> dict[Word, str] | None:
    table: dict[Word, str] = {}
    for w in words(code.domain, 2 * r + 1):
        key = code.apply_word(w)
        if table.setdefault(key, w[r]) != w[r]:
            return None
    return table


@dataclass(frozen=True, eq=False)
class ConjugacyExtension:
    small: SubshiftPresentation
    big: SubshiftPresentation
    phi: SlidingBlockCode
    radius: int
    ybar: SubshiftPresentation
    phibar: SlidingBlockCode
    inverse: SlidingBlockCode
    composite_symbols: tuple[str, ...]


def conjugacy_extension(small: SubshiftPresentation, big: SubshiftPresentation,
                        phi: SlidingBlockCode, radius: int | None = None,
                        radius_cap: int = RADIUS_CAP) -> ConjugacyExtension:
    """Extend a 1-block conjugacy ``small -> Y`` to a conjugacy of ``big`` onto ``Ybar``.

    Windows of ``big`` that occur in ``small`` keep the image of their center
    symbol; every other window becomes the bracketed symbol ``[w]``.
    """
    if phi.window != 1:
        raise PreconditionError("1-block", "the code must be a 1-block code")
    if not big.points_are_paths:
        raise UnsupportedPresentation("the larger shift needs a presentation whose paths "
                                      "correspond one-to-one with points")
    if not words_contained(small, big):
        raise PreconditionError("X inside Xbar", "some word of X is not a word of Xbar")
    if radius is None:
        radius = inverse_radius(phi, radius_cap)
    elif _inverse_table(phi, radius) is None:
        raise PreconditionError("inverse window",
                                f"the inverse code does not have memory and anticipation {radius}")
    span = 2 * radius + 1
    small_words = words(small, span)
    y_symbols = {phi.block_map[(s,)] for s in symbols(small)}

    def name(w: Word) -> str:
        if w in small_words:
            return phi.block_map[(w[radius],)]
        return f"[{word_str(w)}]"

    blocks = {w: name(w) for w in sorted_words(big, span)}
    composite = tuple(dict.fromkeys(s for w, s in blocks.items() if w not in small_words))
    clash = y_symbols.intersection(composite)
    if clash:
        raise PreconditionError("symbol renaming", f"composite symbols clash with Y: {sorted(clash)}")

    p, lab = big.labeled
    if span > 1:
        hg = higher_graph(p, span)
        k, kpaths = hg.graph, hg.edge_paths
    else:
        k, kpaths = p, {e.id: (e.id,) for e in p.edges}
    klabels = {e.id: blocks[tuple(lab[f] for f in kpaths[e.id])] for e in k.edges}
    alphabet = tuple(dict.fromkeys([s for s in phi.codomain.alphabet if s in y_symbols]
                                   + sorted(y_symbols - set(phi.codomain.alphabet))
                                   + list(composite)))
    ybar = sofic_shift(k, klabels, alphabet, conjugate_labels=True)
    phibar = SlidingBlockCode(big, ybar, blocks, radius, radius)

    # inverse: windows of Ybar labels around a K-edge fix the big-shift symbol at its center
    center = {e.id: lab[kpaths[e.id][radius]] for e in k.edges}
    for r in range(radius_cap + 1):
        table: dict[Word, str] = {}
        ok = True
        for path in paths(k, 2 * r + 1):
            key = tuple(klabels[e] for e in path)
            if table.setdefault(key, center[path[r]]) != center[path[r]]:
                ok = False
                break
        if ok:
            inverse = SlidingBlockCode(ybar, big, table, r, r)
            return ConjugacyExtension(small, big, phi, radius, ybar, phibar, inverse, composite)
    raise CapReached(f"no inverse window for the extended conjugacy up to radius {radius_cap}")


def verify_conjugacy_extension(ce: ConjugacyExtension, period_cap: int = PERIOD_CAP,
                               word_cap: int = WORD_CAP) -> list[tuple[str, bool, str]]:
    checks = []
    r = ce.radius
    bad = None
    for n in range(2 * r + 1, min(word_cap, 2 * r + 4) + 1):
        for w in words(ce.small, n):
            if ce.phibar.apply_word(w) != ce.phi.apply_word(w[r:n - r]):
                bad = w
                break
        if bad:
            break
    checks.append(("extension agrees with phi on words of X", bad is None,
                   "" if bad is None else word_str(bad)))
    seen: dict[Word, Word] = {}
    collision = inverse_fail = None
    for p in range(1, period_cap + 1):
        for x in periodic_points(ce.big, p):
            img = ce.phibar.apply_periodic(x)
            if img in seen and collision is None:
                collision = (seen[img], x)
            seen.setdefault(img, x)
            if ce.inverse.apply_periodic(img) != x and inverse_fail is None:
                inverse_fail = x
    checks.append((f"injective on periodic points up to period {period_cap}", collision is None,
                   "" if collision is None else f"{word_str(collision[0])} / {word_str(collision[1])}"))
    checks.append(("inverse recovers periodic points", inverse_fail is None,
                   "" if inverse_fail is None else word_str(inverse_fail)))
    return checks


# -- Markov approximation ---------------------------------------------------------------

def markov_approximation(x: SubshiftPresentation, k: int) -> SubshiftPresentation:
    """The shift over ``B_1(X)`` forbidding exactly the ``k``-words that do not occur in ``X``."""
    if k < 1:
        raise ValueError("k must be positive")
    alphabet = symbols(x)
    allowed = words(x, k)
    forbidden = [w for w in itertools.product(alphabet, repeat=k) if w not in allowed]
    return forbidden_shift(alphabet, forbidden)


def markov_nesting(x: SubshiftPresentation, k: int,
                   max_len: int | None = None) -> list[tuple[str, bool, str]]:
    xk = markov_approximation(x, k)
    top = 2 * k if max_len is None else max_len
    checks = []
    for j in range(1, top + 1):
        extra = words(x, j) - words(xk, j)
        checks.append((f"B_{j}(X) inside B_{j}(X_{k})", not extra,
                       "" if not extra else word_str(sorted(extra)[0])))
    checks.append((f"B_{k}(X_{k}) = B_{k}(X)", words(xk, k) == words(x, k), ""))
    return checks


# -- the extension pipeline ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BiclosingExtension:
    n: int
    degree: PointDegree
    part: int
    source_code: SlidingBlockCode          # phi: X -> X_H
    higher: GraphHomomorphism              # Phi^[N]
    extension: ExtensionResult             # on the higher graph
    conjugacy: ConjugacyExtension          # edge shift of the extended graph onto X~
    x_tilde: SubshiftPresentation
    code: SlidingBlockCode                 # phi~: X~ -> X_H
    checks: tuple[tuple[str, bool, str], ...] = ()

    @property
    def ok(self) -> bool:
        return all(c[1] for c in self.checks)


def extend_biclosing_code(phi: GraphHomomorphism, n: int, *,
                          source_code: SlidingBlockCode | None = None,
                          edge_symbol: Mapping[str, str] | None = None,
                          period_cap: int = PERIOD_CAP, n_cap: int = N_CAP,
                          radius_cap: int = RADIUS_CAP, verify: bool = True) -> BiclosingExtension:
    """Exactly ``n``-to-1 onto extension of the code presented by ``phi``.

    By default the code is the 1-block code of ``phi`` on ``X_G``. ``source_code``
    and ``edge_symbol`` describe another shift ``X`` conjugate to ``X_G``: the
    code on ``X`` and the symbol of ``X`` each edge of ``G`` stands for.
    """
    g, h = phi.domain, phi.codomain
    if not is_irreducible(h):
        raise PreconditionError("H irreducible")
    if not (is_essential(g) and is_essential(h)):
        raise PreconditionError("essential", "G and H must be essential")
    if not resolving_profile(phi).bi_resolving:
        raise PreconditionError("bi-resolving", "the homomorphism is not bi-resolving")
    if source_code is None:
        source_code = code_from_homomorphism(phi)
        edge_symbol = {e.id: e.id for e in g.edges}
    elif edge_symbol is None:
        raise ValueError("edge_symbol is required together with source_code")
    pd = point_degree(phi, period_cap, n_cap)
    if pd.status != "ok":
        raise CapReached(f"point degree indeterminate up to N = {n_cap}")
    d, big_n = pd.degree, pd.n
    if n < d:
        raise PreconditionError("n >= d", f"n = {n} is below the degree d = {d}")
    phi1 = higher_homomorphism(phi, big_n)
    if n == d:
        if not is_weakly_connected(g):
            raise PreconditionError("weakly connected",
                                    "weakly connected (indecomposable) hypothesis fails")
        part, ext = 1, irreducible_extension_same_degree(phi1)
    else:
        if not spectral_less(graph_spectral_radius(g), graph_spectral_radius(h)):
            raise PreconditionError("Perron", "lambda_H > lambda_G hypothesis fails")
        part, ext = 2, irreducible_extension_degree_n(phi1, n)

    if big_n > 1:
        first = {e: p[0] for e, p in higher_graph(g, big_n).edge_paths.items()}
        first_h = {e: p[0] for e, p in higher_graph(h, big_n).edge_paths.items()}
    else:
        first = {e.id: e.id for e in g.edges}
        first_h = {b.id: b.id for b in h.edges}
    g1 = phi1.domain
    small, big = edge_shift(g1), edge_shift(ext.extended_graph)
    to_x = SlidingBlockCode(small, source_code.domain,
                            {(e.id,): edge_symbol[first[e.id]] for e in g1.edges})
    ce = conjugacy_extension(small, big, to_x, radius_cap=radius_cap)
    # phi~ = (first codomain edge) o Phi~_1 o (inverse of the extended conjugacy)
    inv = ce.inverse
    emap = ext.extension.edge_map
    blocks = {w: first_h[emap[e]] for w, e in inv.block_map.items()}
    code = SlidingBlockCode(ce.ybar, edge_shift(h), blocks, inv.memory, inv.anticipation)
    result = BiclosingExtension(n, pd, part, source_code, phi1, ext, ce, ce.ybar, code)
    if verify:
        checks = verify_biclosing_extension(result, period_cap)
        result = BiclosingExtension(n, pd, part, source_code, phi1, ext, ce, ce.ybar, code,
                                    tuple(checks))
        failed = [c for c in checks if not c[1]]
        if failed:
            raise AssertionError(f"extension failed verification: {failed}")
    return result


def verify_biclosing_extension(result: BiclosingExtension,
                               period_cap: int = PERIOD_CAP) -> list[tuple[str, bool, str]]:
    code, n = result.code, result.n
    checks = []
    bad, total = None, 0
    for p in range(1, period_cap + 1):
        for y in periodic_points(code.codomain, p):
            total += 1
            c = count_preimages(code, y)
            if c != n and bad is None:
                bad = (y, c)
    checks.append((f"exactly {n} preimages on periodic points of X_H up to period {period_cap}",
                   bad is None, f"{total} points" if bad is None else
                   f"{word_str(bad[0])} has {bad[1]} preimages"))
    src = result.source_code
    bad, total = None, 0
    for p in range(1, period_cap + 1):
        for x in periodic_points(src.domain, p):
            total += 1
            try:
                same = code.apply_periodic(x) == src.apply_periodic(x)
            except KeyError:
                same = False
            if not same and bad is None:
                bad = x
    checks.append((f"extends phi on periodic points of X up to period {period_cap}", bad is None,
                   f"{total} points" if bad is None else word_str(bad)))
    k, _ = result.x_tilde.labeled
    checks.append(("presentation of X~ irreducible", is_irreducible(k),
                   f"{len(k.vertices)} vertices, {len(k.edges)} edges"))
    return checks


@dataclass(frozen=True, eq=False)
class ApproximationExtension:
    k: int
    approximation: SubshiftPresentation
    code: SlidingBlockCode
    homomorphism: GraphHomomorphism
    result: BiclosingExtension
    obstructions: tuple[tuple[int, str], ...]


def _presenting_homomorphism(rec: OneBlockRecoding,
                             h: DirectedMultigraph) -> GraphHomomorphism | str:
    k = rec.graph
    psi = {e.id: rec.code.block_map[(e.id,)] for e in k.edges}
    unknown = sorted({b for b in psi.values() if b not in h.edge_by_id})
    if unknown:
        return f"image symbols {unknown} are not edges of H"
    vmap = {}
    for v in k.vertices:
        starts = {h.edge_by_id[psi[f.id]].src for f in k.out_edges[v]}
        ends = {h.edge_by_id[psi[e.id]].dst for e in k.in_edges[v]}
        if len(starts | ends) != 1:
            return "phi_k(X_k) is not contained in Y"
        vmap[v] = starts.pop()
    return GraphHomomorphism(k, h, vmap, psi)


def approximate_and_extend(x: SubshiftPresentation, code: SlidingBlockCode, n: int, *,
                           k_cap: int = 12, period_cap: int = PERIOD_CAP,
                           n_cap: int = N_CAP, radius_cap: int = RADIUS_CAP) -> ApproximationExtension:
    """Run the extension pipeline on the first suitable Markov approximation of ``x``."""
    if code.codomain.kind != "edge":
        raise PreconditionError("edge shift codomain", "the code must map into an edge shift")
    h = code.codomain.graph
    missing = [w for w in sorted_words(x, code.window) if w not in code.block_map]
    if missing:
        raise PreconditionError("total block map",
                                f"block map undefined on {word_str(missing[0])!r}")
    if not spectral_less(growth_rate(x), graph_spectral_radius(h)):
        raise PreconditionError("entropy", "h(X) < h(Y) hypothesis fails")
    if x.kind in ("edge", "forbidden"):
        cp = closing_profile(SlidingBlockCode(x, code.codomain, code.block_map,
                                              code.memory, code.anticipation))
        if not cp.bi_closing:
            raise PreconditionError("bi-closing", "the code is not bi-closing")
    lam_y = graph_spectral_radius(h)
    obstructions = []
    for k in range(code.window + 1, k_cap + 1):
        if x.kind in ("edge", "forbidden") and k >= x.window:
            # exact for a shift of finite type; keep its own presentation so that
            # a presenting bi-resolving homomorphism survives the recoding
            xk = x
        else:
            xk = markov_approximation(x, k)
        code_k = SlidingBlockCode(xk, code.codomain, code.block_map, code.memory, code.anticipation)
        try:
            rec = recode_one_block(code_k)
        except PreconditionError as exc:
            obstructions.append((k, str(exc)))
            continue
        hom = _presenting_homomorphism(rec, h)
        if isinstance(hom, str):
            obstructions.append((k, hom))
            continue
        if not spectral_less(graph_spectral_radius(rec.graph), lam_y):
            obstructions.append((k, "h(X_k) < h(Y) fails"))
            continue
        if not closing_profile(code_k).bi_closing:
            obstructions.append((k, "phi_k is not bi-closing"))
            continue
        if not resolving_profile(hom).bi_resolving:
            obstructions.append((k, "phi_k is bi-closing but not presented by a bi-resolving "
                                    "homomorphism; the closing-to-resolving recoding is out of scope"))
            continue
        symbol = {e: rec.edge_symbol(e) for e in rec.edge_words}
        try:
            result = extend_biclosing_code(hom, n, source_code=code_k, edge_symbol=symbol,
                                           period_cap=period_cap, n_cap=n_cap,
                                           radius_cap=radius_cap)
        except (PreconditionError, CapReached) as exc:
            obstructions.append((k, str(exc)))
            continue
        return ApproximationExtension(k, xk, code_k, hom, result, tuple(obstructions))
    raise CapReached(f"no admissible k up to {k_cap}", obstructions)


# -- JSON ---------------------------------------------------------------------------

def subshift_to_dict(x: SubshiftPresentation) -> dict:
    if x.kind == "edge":
        return {"kind": "edge", "graph": graph_to_dict(x.graph)}
    if x.kind == "forbidden":
        return {"kind": "forbidden", "alphabet": list(x.alphabet),
                "forbidden": [word_str(w) for w in x.forbidden]}
    doc = {"kind": "sofic", "graph": graph_to_dict(x.graph),
           "labels": {e.id: x.labels[e.id] for e in x.graph.edges},
           "alphabet": list(x.alphabet)}
    if x.conjugate_labels:
        doc["conjugate_labels"] = True
    return doc


def subshift_from_dict(doc: Mapping) -> SubshiftPresentation:
    try:
        kind = doc["kind"]
        if kind == "edge":
            return edge_shift(graph_from_dict(doc["graph"]))
        if kind == "forbidden":
            return forbidden_shift(doc["alphabet"], doc["forbidden"])
        if kind == "sofic":
            return sofic_shift(graph_from_dict(doc["graph"]), doc["labels"], doc.get("alphabet"),
                               bool(doc.get("conjugate_labels", False)))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed subshift document: {exc}") from exc
    raise FormatError(f"unknown subshift kind {kind!r}")


def code_to_dict(code: SlidingBlockCode) -> dict:
    blocks = {word_str(w): s for w, s in code.block_map.items()}
    return {"domain": subshift_to_dict(code.domain), "codomain": subshift_to_dict(code.codomain),
            "memory": code.memory, "anticipation": code.anticipation,
            "blocks": dict(sorted(blocks.items()))}


def code_from_dict(doc: Mapping, domain: SubshiftPresentation | None = None,
                   codomain: SubshiftPresentation | None = None) -> SlidingBlockCode:
    try:
        dom = domain if domain is not None else subshift_from_dict(doc["domain"])
        cod = codomain if codomain is not None else subshift_from_dict(doc["codomain"])
        m, a = int(doc["memory"]), int(doc["anticipation"])
        blocks = {parse_word(k, dom.alphabet): v for k, v in doc["blocks"].items()}
        return SlidingBlockCode(dom, cod, blocks, m, a)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"malformed code document: {exc}") from exc
