"""Finite Kripke frames, their combinatorics and morphisms, plus named frame families.

Worlds are the integers 0..size-1 and sets of worlds are int bitmasks.
"""

from dataclasses import dataclass, field
import itertools
import json


def bits(mask):
    """Indices of the set bits of mask, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(worlds):
    m = 0
    for w in worlds:
        m |= 1 << w
    return m


class FiniteFrame:
    def __init__(self, size, relation, labels=None):
        self.size = size
        self.relation = frozenset((int(a), int(b)) for a, b in relation)
        for a, b in self.relation:
            if not (0 <= a < size and 0 <= b < size):
                raise ValueError(f"pair ({a},{b}) outside carrier of size {size}")
        self.labels = dict(labels) if labels else {}
        succ = [0] * size
        pred = [0] * size
        for a, b in self.relation:
            succ[a] |= 1 << b
            pred[b] |= 1 << a
        self.succ = tuple(succ)
        self.pred = tuple(pred)

    @property
    def full(self):
        return (1 << self.size) - 1

    def __eq__(self, other):
        return (isinstance(other, FiniteFrame) and self.size == other.size
                and self.relation == other.relation)

    def __hash__(self):
        return hash((self.size, self.relation))

    def __repr__(self):
        return f"FiniteFrame({self.size}, {sorted(self.relation)})"

    def label(self, w):
        return self.labels.get(w, str(w))

    def image(self, mask):
        """R(A): worlds seen from some member of A."""
        out = 0
        for w in bits(mask):
            out |= self.succ[w]
        return out

    def preimage(self, mask):
        """R^-1(A): worlds that see some member of A (the diamond / closure)."""
        out = 0
        for w in bits(mask):
            out |= self.pred[w]
        return out

    def box(self, mask):
        return self.full & ~self.preimage(self.full & ~mask)

    def is_upset(self, mask):
        return self.image(mask) | mask == mask

    def sees(self, a, b):
        return bool(self.succ[a] >> b & 1)


@dataclass
class S4Report:
    ok: bool
    violation: str = None
    pair: tuple = None


def check_s4(frame):
    """Reflexivity then transitivity; reports the first missing pair."""
    for w in range(frame.size):
        if not frame.sees(w, w):
            return S4Report(False, f"({w},{w}) missing", (w, w))
    for a in range(frame.size):
        for b in bits(frame.succ[a]):
            missing = frame.succ[b] & ~frame.succ[a]
            if missing:
                c = bits(missing)[0]
                return S4Report(False, f"({a},{c}) missing", (a, c))
    return S4Report(True)


def require_s4(frame):
    report = check_s4(frame)
    if not report.ok:
        raise ValueError(f"not an S4 frame: {report.violation}")


@dataclass(frozen=True)
class Cluster:
    members: int
    maximal: bool

    @property
    def worlds(self):
        return bits(self.members)


def clusters(frame):
    """Mutual-reachability classes ordered by least member, with maximality flags."""
    require_s4(frame)
    out = []
    covered = 0
    for w in range(frame.size):
        if covered >> w & 1:
            continue
        members = frame.succ[w] & frame.pred[w]
        covered |= members
        out.append(Cluster(members, frame.succ[w] == members))
    return out


def maximal_clusters(frame):
    return [c for c in clusters(frame) if c.maximal]


def roots(frame):
    return [w for w in range(frame.size) if frame.succ[w] == frame.full]


def generated_subframe(frame, w):
    """The subframe on R(w) and its inclusion map (list: new index -> old index)."""
    inclusion = bits(frame.succ[w])
    return induced_subframe(frame, inclusion), inclusion


def induced_subframe(frame, worlds):
    index = {old: new for new, old in enumerate(worlds)}
    rel = [(index[a], index[b]) for a, b in frame.relation if a in index and b in index]
    labels = {index[w]: frame.labels[w] for w in worlds if w in frame.labels}
    return FiniteFrame(len(worlds), rel, labels)


def disjoint_union(frames):
    """Tagged sum; returns the frame and one injection list per summand."""
    rel = []
    labels = {}
    injections = []
    offset = 0
    for k, f in enumerate(frames):
        injections.append(list(range(offset, offset + f.size)))
        rel.extend((a + offset, b + offset) for a, b in f.relation)
        for w in range(f.size):
            labels[w + offset] = f"{k}:{f.label(w)}"
        offset += f.size
    return FiniteFrame(offset, rel, labels), injections


def is_path_connected(frame):
    """Connected as an undirected graph."""
    if frame.size == 0:
        return True
    reached = 1
    frontier = 1
    while frontier:
        new = 0
        for w in bits(frontier):
            new |= frame.succ[w] | frame.pred[w]
        frontier = new & ~reached
        reached |= new
    return reached == frame.full


@dataclass
class FrameMap:
    source: FiniteFrame
    target: FiniteFrame
    assignment: tuple

    def __post_init__(self):
        self.assignment = tuple(self.assignment)
        if len(self.assignment) != self.source.size:
            raise ValueError("frame map must be total on the source")
        if any(not 0 <= v < self.target.size for v in self.assignment):
            raise ValueError("frame map leaves the target carrier")

    def preimage(self, mask):
        return mask_of(w for w, v in enumerate(self.assignment) if mask >> v & 1)

    def image(self, mask):
        return mask_of(self.assignment[w] for w in bits(mask))

    def is_onto(self):
        return set(self.assignment) == set(range(self.target.size))


@dataclass
class MorphismReport:
    ok: bool
    condition: str = None
    witness: tuple = None


def check_p_morphism(fmap):
    """Forth: wRw' gives f(w) S f(w'). Back: f(w) S v gives some w' with wRw', f(w')=v."""
    f = fmap.assignment
    src, tgt = fmap.source, fmap.target
    for a, b in sorted(src.relation):
        if not tgt.sees(f[a], f[b]):
            return MorphismReport(False, "forth", (a, b))
    for w in range(src.size):
        reached = fmap.image(src.succ[w])
        missing = tgt.succ[f[w]] & ~reached
        if missing:
            return MorphismReport(False, "back", (w, bits(missing)[0]))
    return MorphismReport(True)


def quotient(frame, partition):
    """Quotient by a partition (classes ordered by least member) with the image relation."""
    classes = sorted((sorted(c) for c in partition), key=lambda c: c[0])
    owner = {}
    for k, c in enumerate(classes):
        for w in c:
            if w in owner:
                raise ValueError(f"world {w} occurs in two classes")
            owner[w] = k
    if set(owner) != set(range(frame.size)):
        raise ValueError("partition must cover the carrier")
    rel = {(owner[a], owner[b]) for a, b in frame.relation}
    labels = {k: "{" + ",".join(frame.label(w) for w in c) + "}" for k, c in enumerate(classes)}
    target = FiniteFrame(len(classes), rel, labels)
    return target, FrameMap(frame, target, [owner[w] for w in range(frame.size)])


# ----------------------------------------------------------------- families

def make_cluster(n):
    if n < 1:
        raise ValueError("a cluster needs at least one world")
    rel = [(a, b) for a in range(n) for b in range(n)]
    return FiniteFrame(n, rel, {i: f"w{i}" for i in range(n)})


FORK_ROOT = 0
FORK_TOP = 1


def make_fork(n):
    """Root 0, isolated maximal point 1, and an n-cluster on 2..n+1 above the root."""
    if n < 1:
        raise ValueError("a fork needs a cluster of at least one world")
    cluster = range(2, n + 2)
    rel = [(0, 0), (1, 1), (0, 1)]
    rel += [(0, w) for w in cluster]
    rel += [(a, b) for a in cluster for b in cluster]
    labels = {0: "r", 1: "m"}
    labels.update({w: f"w{w - 2}" for w in cluster})
    return FiniteFrame(n + 2, rel, labels)


def fork_cluster(n):
    return list(range(2, n + 2))


def make_chain(n):
    rel = [(a, b) for a in range(n) for b in range(a, n)]
    return FiniteFrame(n, rel)


def make_discrete(n):
    return FiniteFrame(n, [(a, a) for a in range(n)])


def reflexive_transitive_closure(size, pairs):
    succ = [1 << w for w in range(size)]
    for a, b in pairs:
        succ[a] |= 1 << b
    changed = True
    while changed:
        changed = False
        for a in range(size):
            reach = succ[a]
            for b in bits(succ[a]):
                reach |= succ[b]
            if reach != succ[a]:
                succ[a] = reach
                changed = True
    return FiniteFrame(size, [(a, b) for a in range(size) for b in bits(succ[a])])


@dataclass
class TruncatedTree:
    """Sequences over range(branching) of length <= depth, ordered by extension."""
    branching: int
    depth: int
    nodes: list
    index: dict
    frame: FiniteFrame
    limit: frozenset = field(default_factory=frozenset)

    def upset(self, node):
        return [n for n in self.nodes if n[:len(node)] == node]

    def upset_mask(self, node):
        return self.frame.succ[self.index[node]]

    def children(self, node):
        if len(node) >= self.depth:
            return []
        return [node + (k,) for k in range(self.branching)]

    def left(self, node):
        return node + (0,)

    def right(self, node):
        return node + (1,)

    def scott_basis(self):
        """Principal upsets of nodes strictly above the truncation depth."""
        return [self.upset_mask(n) for n in self.nodes if len(n) < self.depth]


def comb_root(n):
    """a_n: n zeros followed by a one."""
    return (0,) * n + (1,)


def truncated_tree(branching, depth, with_limits=False):
    if branching < 1 or depth < 0:
        raise ValueError("need branching >= 1 and depth >= 0")
    nodes = [()]
    for length in range(1, depth + 1):
        nodes.extend(itertools.product(range(branching), repeat=length))
    index = {n: i for i, n in enumerate(nodes)}
    rel = []
    for n in nodes:
        for k in range(len(n) + 1):
            rel.append((index[n[:k]], index[n]))
    labels = {i: "".join(map(str, n)) or "root" for i, n in enumerate(nodes)}
    limit = frozenset(n for n in nodes if len(n) == depth) if with_limits else frozenset()
    return TruncatedTree(branching, depth, nodes, index, FiniteFrame(len(nodes), rel, labels), limit)


# ------------------------------------------------------------- enumeration

def all_preorders(n):
    """Every reflexive transitive relation on range(n), as frames."""
    off_diagonal = [(a, b) for a in range(n) for b in range(n) if a != b]
    seen = set()
    for choice in itertools.product((0, 1), repeat=len(off_diagonal)):
        pairs = [p for p, c in zip(off_diagonal, choice) if c]
        frame = FiniteFrame(n, pairs + [(a, a) for a in range(n)])
        if check_s4(frame).ok and frame.relation not in seen:
            seen.add(frame.relation)
            yield frame


def canonical_form(frame):
    """Lexicographically least relation over all relabellings (small frames only)."""
    best = None
    for perm in itertools.permutations(range(frame.size)):
        rel = tuple(sorted((perm[a], perm[b]) for a, b in frame.relation))
        if best is None or rel < best:
            best = rel
    return frame.size, best


def preorders_up_to_iso(max_size):
    out = []
    for n in range(1, max_size + 1):
        seen = set()
        for frame in all_preorders(n):
            key = canonical_form(frame)
            if key not in seen:
                seen.add(key)
                out.append(frame)
    return out


def is_antisymmetric(frame):
    return all(a == b or not frame.sees(b, a) for a, b in frame.relation)


# ------------------------------------------------------------------ export

def frame_to_json(frame):
    data = {"worlds": frame.size, "relation": [list(p) for p in sorted(frame.relation)]}
    if frame.labels:
        data["labels"] = {str(k): v for k, v in sorted(frame.labels.items())}
    return data


def frame_from_json(data):
    if isinstance(data, str):
        data = json.loads(data)
    labels = {int(k): v for k, v in data.get("labels", {}).items()}
    return FiniteFrame(int(data["worlds"]), [tuple(p) for p in data["relation"]], labels)


def frame_to_dot(frame, name="frame"):
    """Hasse-style DOT output; clusters of S4 frames are drawn as boxes."""
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    s4 = check_s4(frame).ok
    groups = clusters(frame) if s4 else [Cluster(1 << w, False) for w in range(frame.size)]
    owner = {}
    for k, c in enumerate(groups):
        for w in c.worlds:
            owner[w] = k
        if len(c.worlds) > 1:
            lines.append(f"  subgraph cluster_{k} {{")
            lines.append('    style=rounded; label="";')
            for w in c.worlds:
                lines.append(f'    n{w} [label="{frame.label(w)}"];')
            lines.append("  }")
        else:
            w = c.worlds[0]
            lines.append(f'  n{w} [label="{frame.label(w)}"];')
    for a, b in sorted(frame.relation):
        if a == b or (s4 and owner[a] == owner[b]):
            continue
        if s4:
            # skip edges implied by transitivity
            between = frame.succ[a] & frame.pred[b] & ~(1 << a) & ~(1 << b)
            if any(owner[c] not in (owner[a], owner[b]) for c in bits(between)):
                continue
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines)
