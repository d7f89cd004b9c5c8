"""Finite-truncation versions of the tree, interval, selection and gluing constructions."""

from dataclasses import dataclass, field
from fractions import Fraction
import itertools

from .algebra import evaluate, field_generate, boolean_closure, SetField, validates
from .formula import Diamond, Box, subformulas, letters
from .frames import (FiniteFrame, FrameMap, bits, mask_of, check_s4, require_s4, clusters,
                     roots, truncated_tree, induced_subframe, quotient, check_p_morphism,
                     make_cluster, make_fork, fork_cluster, FORK_TOP, is_path_connected)
from .genspace import (GeneralStructure, GluingSpec, glue, alexandroff_topology,
                       quotient_topology, check_interior_map)


@dataclass
class LabeledMap:
    source: object
    target: object
    labels: dict

    def to_json(self):
        name = lambda n: "".join(map(str, n)) if isinstance(n, tuple) else str(n)
        nodes = [name(n) for n in self.source.nodes]
        value = lambda v: name(v) if isinstance(v, tuple) else v
        return {"nodes": nodes, "labels": {name(n): value(v) for n, v in self.labels.items()}}


class EnumerationFamily:
    """For each world w a sequence listing R(w); theta_w(n) cycles through it."""

    def __init__(self, sequences):
        self.sequences = {w: tuple(seq) for w, seq in sequences.items()}

    @classmethod
    def cyclic(cls, frame):
        return cls({w: bits(frame.succ[w]) for w in range(frame.size)})

    def __call__(self, w, n):
        seq = self.sequences[w]
        return seq[n % len(seq)]

    def period(self, w):
        return len(self.sequences[w])

    def check(self, frame):
        for w in range(frame.size):
            seq = self.sequences.get(w)
            if seq is None:
                raise ValueError(f"no enumeration for world {w}")
            if set(seq) != set(bits(frame.succ[w])) or len(seq) != len(set(seq)):
                raise ValueError(f"enumeration of {w} must list R({w}) once each")


def comb_labels(nodes, root_label, theta):
    """Comb scheme: left children copy the label; the right child of c.0^n gets
    theta(L(c), n) where c is the nearest ancestor that is the root or ends in 1."""
    labels = {(): root_label}
    for node in nodes:
        if not node:
            continue
        parent = node[:-1]
        if node[-1] == 0:
            labels[node] = labels[parent]
            continue
        n = 0
        comb = parent
        while comb and comb[-1] == 0:
            comb = comb[:-1]
            n += 1
        labels[node] = theta(labels[comb], n)
    return labels


def tcomb_labeling(frame, depth, theta=None, root=None):
    """Label the binary tree truncated at depth by worlds of a rooted S4 frame."""
    require_s4(frame)
    frame_roots = roots(frame)
    if not frame_roots:
        raise ValueError("t-comb labeling needs a rooted frame")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if root is None:
        root = frame_roots[0]
    elif root not in frame_roots:
        raise ValueError(f"{root} is not a root")
    theta = theta or EnumerationFamily.cyclic(frame)
    if isinstance(theta, EnumerationFamily):
        theta.check(frame)
    tree = truncated_tree(2, depth)
    return LabeledMap(tree, frame, comb_labels(tree.nodes, root, theta))


@dataclass
class CombReport:
    ok: bool
    margin: int
    image: frozenset
    forth_violation: tuple = None
    back_violation: tuple = None


def verify_comb_pmorphism(labeled, frame):
    """Forth on every edge; back for nodes of length at most depth - |W| - 1."""
    tree = labeled.source
    labels = labeled.labels
    margin = tree.depth - frame.size - 1
    forth = None
    for node in tree.nodes:
        for child in tree.children(node):
            if not frame.sees(labels[node], labels[child]):
                forth = (node, child)
                break
        if forth:
            break
    # labels realised inside each subtree, bottom up
    below = {}
    for node in reversed(tree.nodes):
        m = 1 << labels[node]
        for child in tree.children(node):
            m |= below[child]
        below[node] = m
    back = None
    for node in tree.nodes:
        if len(node) > margin:
            continue
        missing = frame.succ[labels[node]] & ~below[node]
        if missing:
            back = (node, bits(missing)[0])
            break
    image = frozenset(labels.values())
    return CombReport(forth is None and back is None, margin, image, forth, back)


# ------------------------------------------------------ Cantor space to L_b

def cantor_to_Lalpha(branching, depth, children_first=False):
    """Label truncated L_2 (depth-d nodes are limit proxies) by nodes of T_b.

    theta_c cycles through c and its children (c first unless children_first).
    Limit proxies get the supremum of the labels of their prefixes.
    """
    if branching < 1 or depth < 2:
        raise ValueError("need branching >= 1 and depth >= 2")
    source = truncated_tree(2, depth, with_limits=True)

    def theta(c, n):
        options = [c + (k,) for k in range(branching)]
        options = options + [c] if children_first else [c] + options
        return options[n % len(options)]

    labels = comb_labels(source.nodes, (), theta)
    for node in source.limit:
        chain = [labels[node[:k]] for k in range(len(node) + 1)]
        for lower, upper in zip(chain, chain[1:]):
            if upper[:len(lower)] != lower:
                raise AssertionError(f"prefix labels of {node} do not form a chain")
        labels[node] = max(chain, key=len)
    target_depth = max(len(v) for v in labels.values())
    target = truncated_tree(branching, target_depth)
    return LabeledMap(source, target, labels)


@dataclass
class CantorReport:
    ok: bool
    checked: int
    violation: tuple = None


def verify_cantor_claim(labeled):
    """f(up a) = up f(a) within the truncation, for len(a) <= d - b - 1.

    The inclusion f(up a) <= up f(a) is checked outright. For the reverse, every
    node of up f(a) at most h levels above f(a) must be hit, where
    h = (d - len(a)) // (b + 1) is the number of full theta periods left.
    """
    source, target = labeled.source, labeled.target
    b, d = target.branching, source.depth
    period = b + 1
    labels = labeled.labels
    checked = 0
    for node in source.nodes:
        if len(node) > d - b - 1:
            continue
        checked += 1
        fa = labels[node]
        hit = {labels[n] for n in source.upset(node)}
        for v in hit:
            if v[:len(fa)] != fa:
                return CantorReport(False, checked, ("outside", node, v))
        h = (d - len(node)) // period
        for extra in range(h + 1):
            for tail in itertools.product(range(b), repeat=extra):
                if fa + tail not in hit:
                    return CantorReport(False, checked, ("missed", node, fa + tail))
    return CantorReport(True, checked)


# ------------------------------------------------------ interval construction

@dataclass(frozen=True)
class Interval:
    left: Fraction
    right: Fraction
    label: tuple
    stage: int
    index: int
    parent: int = None

    @property
    def length(self):
        return self.right - self.left

    def contains(self, x):
        return self.left < x < self.right


def removed_middle_thirds(left, length, stages):
    """(i, j, a, b): U_{i,j} = (a, b) is the middle third of C_{i,j}, j = 1..2^i."""
    out = []
    for i in range(stages + 1):
        piece = length / 3 ** i
        for j in range(1, 2 ** i + 1):
            offset = Fraction(0)
            path = j - 1
            for k in range(i):
                digit = path >> (i - 1 - k) & 1
                offset += 2 * digit * length / 3 ** (k + 1)
            start = left + offset
            out.append((i, j, start + piece / 3, start + 2 * piece / 3))
    return out


def cantor_stage_intervals(left, length, stage):
    """The 2^stage closed intervals C_{stage, j} of the middle-thirds construction."""
    piece = length / 3 ** stage
    out = []
    for j in range(2 ** stage):
        offset = sum((2 * (j >> (stage - 1 - k) & 1) * length / 3 ** (k + 1)
                      for k in range(stage)), Fraction(0))
        out.append((left + offset, left + offset + piece))
    return out


@dataclass
class IntervalConstruction:
    depth: int
    stages: int
    levels: list

    def parent_interval(self, level, item):
        if level == 0:
            return Fraction(0), Fraction(1)
        p = self.levels[level - 1][item.parent]
        return p.left, p.right

    def cantor_stage(self, n):
        """For C_n: pairs (host, closed intervals approximating the Cantor set of the host)."""
        hosts = [(Fraction(0), Fraction(1))] if n == 0 else \
            [(u.left, u.right) for u in self.levels[n - 1]]
        return [((a, b), cantor_stage_intervals(a, b - a, self.stages + 1)) for a, b in hosts]

    def to_json(self):
        fmt = lambda q: f"{q.numerator}/{q.denominator}"
        return {
            "depth": self.depth,
            "stages": self.stages,
            "levels": [[{"left": fmt(u.left), "right": fmt(u.right),
                         "label": "".join(map(str, u.label)), "i": u.stage, "j": u.index,
                         "parent": u.parent} for u in level] for level in self.levels],
        }


def interval_construction(depth, stages=2):
    """Levels U_0..U_depth of removed open intervals with their tree labels.

    Inside every host interval only the removals U_{i,j} with i <= stages are
    kept (deeper ones are left implicit in the surviving closed pieces).
    """
    if depth < 0 or stages < 1:
        raise ValueError("need depth >= 0 and stages >= 1")
    hosts = [(Fraction(0), Fraction(1), (), None)]
    levels = []
    for _ in range(depth + 1):
        level = []
        for host_index, (a, b, label, _) in enumerate(hosts):
            for i, j, lo, hi in removed_middle_thirds(a, b - a, stages):
                step = (0,) if j % 2 == 0 else (1,)
                level.append(Interval(lo, hi, label + step, i, j,
                                      None if not levels else host_index))
        levels.append(level)
        hosts = [(u.left, u.right, u.label, None) for u in level]
    return IntervalConstruction(depth, stages, levels)


def locate_middle_third(t):
    """For t in (0,1) or [0,1]: (i, j, path bits) of the removed middle third
    containing t, or None when t lies in the Cantor set (orbit of t repeats)."""
    third, two_thirds = Fraction(1, 3), Fraction(2, 3)
    seen = set()
    path = []
    while True:
        if third < t < two_thirds:
            j = 1
            for bit in path:
                j = 2 * (j - 1) + bit + 1
            return len(path), j, path
        if t in seen:
            return None
        seen.add(t)
        if t <= third:
            path.append(0)
            t = 3 * t
        else:
            path.append(1)
            t = 3 * t - 2


def label_of_point(x, steps):
    """The label chain L_0(x), L_1(x), ... for at most `steps` steps past the root."""
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0, 1]")
    chain = [()]
    left, length = Fraction(0), Fraction(1)
    while len(chain) <= steps:
        found = locate_middle_third((x - left) / length)
        if found is None:
            break
        i, j, path = found
        for bit in path:
            length /= 3
            left += 2 * bit * length
        left, length = left + length / 3, length / 3
        chain.append(chain[-1] + ((0,) if j % 2 == 0 else (1,)))
    return chain


@dataclass
class IntervalReport:
    ok: bool
    children_ok: bool
    coverage_ok: bool
    disjoint_ok: bool
    lengths_ok: bool
    max_lengths: dict
    problems: list = field(default_factory=list)


def verify_interval_lemmas(construction):
    problems = []
    levels = construction.levels
    # children of each host split by parity of j
    children_ok = True
    for k in range(len(levels) - 1):
        by_host = {}
        for u in levels[k + 1]:
            by_host.setdefault(u.parent, []).append(u)
        for idx, host in enumerate(levels[k]):
            kids = by_host.get(idx, [])
            for u in kids:
                want = host.label + ((0,) if u.index % 2 == 0 else (1,))
                if u.label != want or not (host.left <= u.left and u.right <= host.right):
                    children_ok = False
                    problems.append(("child", k, idx, u))
            if {u.label for u in kids} != {host.label + (0,), host.label + (1,)}:
                children_ok = False
                problems.append(("children", k, idx))
    coverage_ok = True
    for k in range(min(construction.depth, len(levels))):
        present = {u.label for u in levels[k]}
        for seq in itertools.product((0, 1), repeat=k + 1):
            if seq not in present:
                coverage_ok = False
                problems.append(("coverage", k, seq))
    disjoint_ok = True
    max_lengths = {}
    for k, level in enumerate(levels):
        ordered = sorted(level, key=lambda u: u.left)
        for u, v in zip(ordered, ordered[1:]):
            if u.right > v.left:
                disjoint_ok = False
                problems.append(("overlap", k, u, v))
        max_lengths[k] = max(u.length for u in level)
        if max_lengths[k] != Fraction(1, 3 ** (k + 1)):
            disjoint_ok = False
            problems.append(("max length", k, max_lengths[k]))
    lengths_ok = True
    keep = Fraction(2, 3) ** (construction.stages + 1)
    for k, level in enumerate(levels):
        sums = {}
        for u in level:
            sums[u.parent] = sums.get(u.parent, Fraction(0)) + u.length
        for host, total in sums.items():
            a, b = (Fraction(0), Fraction(1)) if k == 0 else \
                (levels[k - 1][host].left, levels[k - 1][host].right)
            if total != (b - a) * (1 - keep):
                lengths_ok = False
                problems.append(("length sum", k, host, total))
    ok = children_ok and coverage_ok and disjoint_ok and lengths_ok
    return IntervalReport(ok, children_ok, coverage_ok, disjoint_ok, lengths_ok, max_lengths, problems)


# ------------------------------------------------------------ CGFP selection

class SelectionError(ValueError):
    pass


@dataclass
class SelectionResult:
    kept_worlds: list
    frame: FiniteFrame
    restricted_field: SetField
    valuation: dict
    world: int
    witness_log: dict
    truth_lemma: bool
    refuted: bool
    enlarged: bool


def cgfp_select(structure, phi, valuation, world, seed=()):
    """Keep world and seed, then one witness per true <>-subformula (and per false
    []-subformula) at every kept world, until nothing new is needed."""
    frame = structure.frame() if hasattr(structure, "frame") else structure
    algebra = structure.field
    for name, value in valuation.items():
        if value not in algebra.members:
            raise SelectionError(f"value of {name} is not in the field")
    subs = subformulas(phi)
    values = {psi: evaluate(psi, valuation, algebra) for psi in subs}
    if values[phi] >> world & 1:
        raise SelectionError(f"formula is not refuted at world {world}")
    kept = []
    queue = []
    for w in [world] + [s for s in seed if s != world]:
        if w not in kept:
            kept.append(w)
            queue.append(w)
    log = {}
    while queue:
        v = queue.pop(0)
        for psi in subs:
            if isinstance(psi, Diamond) and values[psi] >> v & 1:
                candidates = frame.succ[v] & values[psi.arg]
            elif isinstance(psi, Box) and not values[psi] >> v & 1:
                candidates = frame.succ[v] & ~values[psi.arg]
            else:
                continue
            if any(u in kept for u in bits(candidates)):
                u = next(u for u in kept if candidates >> u & 1)
            else:
                u = bits(candidates)[0]
                kept.append(u)
                queue.append(u)
            log[(v, psi)] = u
    order = sorted(kept)
    index = {w: i for i, w in enumerate(order)}
    sub = induced_subframe(frame, order)

    def restrict(mask):
        return mask_of(index[w] for w in order if mask >> w & 1)

    mu = {name: restrict(valuation[name]) for name in letters(phi)}
    full_sub = SetField(sub.size, range(1 << sub.size), sub.preimage, check=False)
    truth = all(restrict(values[psi]) == evaluate(psi, mu, full_sub) for psi in subs)
    gens = [evaluate(psi, mu, full_sub) for psi in subs]
    restricted = field_generate(sub.size, sub.preimage, gens, check_axioms=False)
    enlarged = len(restricted.members) > len(boolean_closure(sub.size, gens))
    refuted = not evaluate(phi, mu, restricted) >> index[world] & 1
    return SelectionResult(order, sub, restricted, mu, index[world], log, truth, refuted, enlarged)


# ----------------------------------------------------------- cluster collapse

@dataclass
class CollapseResult:
    frame: FiniteFrame
    projection: FrameMap
    valuation: dict
    pmorphism_ok: bool
    preserved: bool


def cluster_collapse(cluster, phi, valuation):
    """Identify worlds of a cluster that agree on every subformula of phi."""
    full = cluster.full
    if any(cluster.succ[w] != full for w in range(cluster.size)):
        raise ValueError("cluster collapse expects a single cluster")
    algebra = SetField(cluster.size, range(1 << cluster.size), cluster.preimage, check=False)
    subs = subformulas(phi)
    values = [evaluate(psi, valuation, algebra) for psi in subs]
    classes = {}
    for w in range(cluster.size):
        classes.setdefault(tuple(v >> w & 1 for v in values), []).append(w)
    target, projection = quotient(cluster, list(classes.values()))
    mu = {name: projection.image(valuation[name]) for name in letters(phi)}
    small = SetField(target.size, range(1 << target.size), target.preimage, check=False)
    preserved = all(projection.preimage(evaluate(psi, mu, small)) == v
                    for psi, v in zip(subs, values))
    return CollapseResult(target, projection, mu, check_p_morphism(projection).ok, preserved)


# --------------------------------------------------- quotient by cluster fibers

def complete_leaves(labeled, frame):
    """Put above each leaf of the truncation a copy of the subframe generated by its
    label (the leaf itself plays its label). The labeling then becomes an exact
    p-morphism of finite frames; the added points stand in for limit points."""
    tree = labeled.source
    n = len(tree.nodes)
    rel = set(tree.frame.relation)
    labels = [labeled.labels[node] for node in tree.nodes]
    for node in tree.nodes:
        if len(node) != tree.depth:
            continue
        leaf = tree.index[node]
        w = labels[leaf]
        copy = {w: leaf}
        for v in bits(frame.succ[w]):
            if v != w:
                copy[v] = n
                labels.append(v)
                n += 1
        ancestors = [tree.index[node[:k]] for k in range(len(node))]
        for v, cv in copy.items():
            for u in bits(frame.succ[v]):
                rel.add((cv, copy[u]))
            for a in ancestors:
                rel.add((a, cv))
    source = FiniteFrame(n, rel)
    return source, labels


@dataclass
class FiberQuotient:
    structure: GeneralStructure
    rho: list
    source: FiniteFrame
    source_labels: list
    interior_ok: bool
    embedding_ok: bool


def quotient_by_cluster_fibers(labeled, frame, cluster):
    """Collapse each fiber over a world of the maximal cluster to a single point."""
    cluster = sorted(cluster)
    members = mask_of(cluster)
    if not any(c.members == members and c.maximal for c in clusters(frame)):
        raise ValueError("the given worlds do not form a maximal cluster")
    source, labels = complete_leaves(labeled, frame)
    groups = []
    singles = []
    for w in cluster:
        fiber = [x for x, v in enumerate(labels) if v == w]
        if fiber:
            groups.append(fiber)
    in_group = set(x for g in groups for x in g)
    singles = [[x] for x in range(source.size) if x not in in_group]
    classes = sorted(groups + singles, key=lambda c: c[0])
    src_top = alexandroff_topology(source)
    topo, rho = quotient_topology(src_top, classes)
    interior_ok = check_interior_map(rho, src_top, topo).ok
    # F+ into the quotient: A -> rho(f^-1(A))
    fmap = FrameMap(source, frame, labels)
    class_mask = [mask_of(c) for c in classes]

    def rho_image(mask):
        return mask_of({rho[x] for x in bits(mask)})

    images = {}
    embedding_ok = check_p_morphism(fmap).ok
    for a in range(1 << frame.size):
        pre = fmap.preimage(a)
        img = rho_image(pre)
        saturated = 0
        for k in bits(img):
            saturated |= class_mask[k]
        if saturated != pre:
            embedding_ok = False
        images[a] = img
    full = frame.full
    if len(set(images.values())) != len(images):
        embedding_ok = False
    for a in range(1 << frame.size):
        if images[full & ~a] != topo.full & ~images[a]:
            embedding_ok = False
        if topo.closure(images[a]) != images[frame.preimage(a)]:
            embedding_ok = False
    structure = GeneralStructure(topo, set(images.values()), check=False)
    return FiberQuotient(structure, rho, source, labels, interior_ok, embedding_ok)


# --------------------------------------------------------------- pipeline

@dataclass
class RefutationFrame:
    frame: FiniteFrame
    cluster: list
    formula: object = None
    valuation: dict = None
    world: int = None
    alpha: int = None


@dataclass
class PipelineResult:
    structure: GeneralStructure
    embeddings: list
    hubs: list
    shared_top: int

    def transported_valuation(self, i, valuation):
        emb = self.embeddings[i]
        return {p: mask_of(emb[w] for w in bits(m)) for p, m in valuation.items()}


def pipeline_not_s42(refuters):
    """Glue each G_n to the fork F_{alpha_n} along its cluster, then glue the results
    at the forks' isolated maximal points."""
    hubs = []
    g_into_h = []
    tops = []
    for item in refuters:
        g = item.frame
        require_s4(g)
        if not roots(g):
            raise ValueError("each refutation frame must be rooted")
        cluster = sorted(item.cluster)
        alpha = len(cluster)
        if item.alpha is not None and item.alpha != alpha:
            raise ValueError(f"cluster-size mismatch: cluster has {alpha} worlds, fork expects {item.alpha}")
        if not any(c.members == mask_of(cluster) and c.maximal for c in clusters(g)):
            raise ValueError("designated worlds are not a maximal cluster")
        fork = make_fork(alpha)
        spec = GluingSpec([GeneralStructure(g), GeneralStructure(fork)],
                          GeneralStructure(make_cluster(alpha)), [cluster, fork_cluster(alpha)])
        h = glue(spec)
        hubs.append(h)
        g_into_h.append(h.rho[:g.size])
        tops.append(h.rho[g.size + FORK_TOP])
    point = GeneralStructure(make_cluster(1))
    spec = GluingSpec([h.structure for h in hubs], point, [[t] for t in tops])
    final = glue(spec)
    offsets = []
    total = 0
    for h in hubs:
        offsets.append(total)
        total += h.structure.carrier_size
    embeddings = [[final.rho[off + x] for x in emb] for off, emb in zip(offsets, g_into_h)]
    shared_top = final.rho[offsets[0] + tops[0]] if hubs else None
    return PipelineResult(final.structure, embeddings, hubs, shared_top)


S4_AXIOMS = ("<><>p -> <>p", "p -> <>p", "<>(p | q) <-> (<>p | <>q)", "<>F <-> F")


@dataclass
class PipelineReport:
    ok: bool
    connected: bool
    refutations: list
    axioms: dict


def verify_pipeline(result, refuters, axioms=S4_AXIOMS, cap=None):
    from .formula import parse
    frame = result.structure.frame()
    connected = is_path_connected(frame)
    refutations = []
    for i, item in enumerate(refuters):
        if item.formula is None:
            refutations.append(None)
            continue
        mu = result.transported_valuation(i, item.valuation)
        value = evaluate(item.formula, mu, result.structure.field)
        refutations.append(not value >> result.embeddings[i][item.world] & 1)
    axiom_results = {text: validates(result.structure, parse(text), cap).valid for text in axioms}
    ok = connected and all(r is not False for r in refutations) and all(axiom_results.values())
    return PipelineReport(ok, connected, refutations, axiom_results)


# -------------------------------------------------------------- rational line

@dataclass
class QPoint:
    position: Fraction
    label: int
    born: int
    half_width: Fraction
    parent: int = None
    flank: list = field(default_factory=list)


@dataclass
class QStage:
    frame: FiniteFrame
    stages: int
    points: list

    def ordered(self):
        return sorted(self.points, key=lambda p: p.position)

    def coverage(self, i):
        """Labels carried by the flanking points of point i."""
        return frozenset(self.points[j].label for j in self.points[i].flank)


def q_stage(frame, stages, theta=None):
    """Stage-k approximation of the triangle construction over the rationals.

    A point at x with half-width h gains, at each later stage n = 1, 2, ..., a
    left and a right point at x -+ 3h/2^(n+1) (half-width h/2^(n+1)), both
    labelled theta(label, n-1).
    """
    require_s4(frame)
    frame_roots = roots(frame)
    if not frame_roots:
        raise ValueError("the rational-line construction needs a rooted frame")
    if stages < 1:
        raise ValueError("need at least one stage")
    theta = theta or EnumerationFamily.cyclic(frame)
    points = [QPoint(Fraction(1, 2), frame_roots[0], 0, Fraction(1, 2))]
    for s in range(1, stages + 1):
        for i in range(len(points)):
            p = points[i]
            if p.born >= s:
                continue
            n = len(p.flank) // 2 + 1
            label = theta(p.label, n - 1)
            h = p.half_width
            offset = 3 * h / 2 ** (n + 1)
            for sign in (-1, 1):
                points.append(QPoint(p.position + sign * offset, label, s, h / 2 ** (n + 1), i))
                p.flank.append(len(points) - 1)
    return QStage(frame, stages, points)


@dataclass
class QReport:
    ok: bool
    forth_ok: bool
    distinct: bool
    fiber_counts_ok: bool


def verify_q_stage(stage):
    frame = stage.frame
    forth_ok = all(frame.sees(p.label, stage.points[j].label) for p in stage.points for j in p.flank)
    positions = [p.position for p in stage.points]
    distinct = len(set(positions)) == len(positions)
    fiber_ok = True
    for p in stage.points:
        successors = bits(frame.succ[p.label])
        per_side = len(p.flank) // 2
        for v in successors:
            hits = sum(1 for j in p.flank if stage.points[j].label == v)
            if hits < 2 * (per_side // len(successors)):
                fiber_ok = False
    return QReport(forth_ok and distinct and fiber_ok, forth_ok, distinct, fiber_ok)
