"""Finite topologies and general structures (a frame or a space plus a field of sets)."""

from dataclasses import dataclass
import itertools
import json

from .algebra import SetField, powerset_field, field_generate
from .frames import FiniteFrame, bits, mask_of, require_s4, check_s4


class FiniteTopology:
    """A finite topology, stored through the least open neighbourhood of each point."""

    def __init__(self, carrier_size, opens):
        self.carrier_size = carrier_size
        opens = frozenset(opens)
        full = (1 << carrier_size) - 1
        if 0 not in opens or full not in opens:
            raise ValueError("opens must contain the empty set and the carrier")
        for a, b in itertools.combinations(opens, 2):
            if a | b not in opens:
                raise ValueError(f"opens not closed under union: {a}, {b}")
            if a & b not in opens:
                raise ValueError(f"opens not closed under intersection: {a}, {b}")
        self._opens = opens
        self.neighborhoods = tuple(self._least_neighborhood(x) for x in range(carrier_size))

    def _least_neighborhood(self, x):
        out = self.full
        for u in self._opens:
            if u >> x & 1:
                out &= u
        return out

    @classmethod
    def from_neighborhoods(cls, n, neighborhoods):
        """Alexandroff topology with the given least neighbourhoods (must be coherent)."""
        self = cls.__new__(cls)
        self.carrier_size = n
        self.neighborhoods = tuple(neighborhoods)
        for x, nb in enumerate(self.neighborhoods):
            if not nb >> x & 1:
                raise ValueError(f"neighbourhood of {x} must contain {x}")
            for y in bits(nb):
                if self.neighborhoods[y] & ~nb:
                    raise ValueError(f"neighbourhood of {y} must lie inside that of {x}")
        self._opens = None
        return self

    @property
    def full(self):
        return (1 << self.carrier_size) - 1

    @property
    def opens(self):
        if self._opens is None:
            self._opens = frozenset(unions_of(self.full, self.neighborhoods))
        return self._opens

    def is_open(self, mask):
        return all(self.neighborhoods[x] & ~mask == 0 for x in bits(mask))

    def interior(self, mask):
        return mask_of(x for x in range(self.carrier_size) if self.neighborhoods[x] & ~mask == 0)

    def closure(self, mask):
        return mask_of(x for x in range(self.carrier_size) if self.neighborhoods[x] & mask)

    def __eq__(self, other):
        return (isinstance(other, FiniteTopology) and self.carrier_size == other.carrier_size
                and self.neighborhoods == other.neighborhoods)

    def __hash__(self):
        return hash((self.carrier_size, self.neighborhoods))

    def __repr__(self):
        return f"FiniteTopology({self.carrier_size}, opens={sorted(self.opens)})"


def unions_of(full, generators):
    """All unions of subfamilies of generators (including the empty union)."""
    out = {0}
    for g in set(generators):
        out |= {u | g for u in out}
    return out


def topology_from_basis(n, basis):
    """Topology generated by a family of sets (used as a subbasis)."""
    full = (1 << n) - 1
    nbhd = []
    for x in range(n):
        nb = full
        for b in basis:
            if b >> x & 1:
                nb &= b
        nbhd.append(nb)
    return FiniteTopology.from_neighborhoods(n, nbhd)


def discrete_topology(n):
    return FiniteTopology.from_neighborhoods(n, [1 << x for x in range(n)])


def indiscrete_topology(n):
    return FiniteTopology.from_neighborhoods(n, [(1 << n) - 1] * n)


def sierpinski():
    """Points 0 and 1 with opens {}, {1}, {0,1}."""
    return FiniteTopology(2, [0, 0b10, 0b11])


def specialization_order(space):
    """x R y iff x is in the closure of {y}, i.e. y lies in every open around x."""
    rel = [(x, y) for x in range(space.carrier_size) for y in bits(space.neighborhoods[x])]
    return FiniteFrame(space.carrier_size, rel)


def alexandroff_topology(frame):
    """Opens are the R-upsets; R(w) is the least neighbourhood of w."""
    require_s4(frame)
    return FiniteTopology.from_neighborhoods(frame.size, frame.succ)


# --------------------------------------------------------- general structures

class GeneralStructure:
    """A frame or a topology together with a field closed under its closure operator."""

    def __init__(self, base, members=None, check=True):
        self.base = base
        n = base.size if isinstance(base, FiniteFrame) else base.carrier_size
        closure = base.preimage if isinstance(base, FiniteFrame) else base.closure
        if members is None:
            self.field = powerset_field(n, closure)
        else:
            self.field = SetField(n, members, closure, check=check)

    @property
    def is_frame(self):
        return isinstance(self.base, FiniteFrame)

    @property
    def carrier_size(self):
        return self.field.carrier_size

    @property
    def full(self):
        return self.field.full

    def topology(self):
        if self.is_frame:
            return alexandroff_topology(self.base)
        return self.base

    def frame(self):
        if self.is_frame:
            return self.base
        return specialization_order(self.base)

    def closure(self, mask):
        return self.field.closure(mask)

    def __repr__(self):
        kind = "frame" if self.is_frame else "space"
        return f"GeneralStructure({kind}, n={self.carrier_size}, |field|={len(self.field)})"


def general_frame(frame, members=None):
    return GeneralStructure(frame, members)


def general_space(space, members=None):
    return GeneralStructure(space, members)


def generated_structure(base, generators):
    n = base.size if isinstance(base, FiniteFrame) else base.carrier_size
    closure = base.preimage if isinstance(base, FiniteFrame) else base.closure
    field = field_generate(n, closure, generators, check_axioms=False)
    return GeneralStructure(base, field.members, check=False)


@dataclass
class DescriptiveReport:
    differentiated: bool
    compact: str
    tight: bool
    witness: tuple = None

    @property
    def descriptive(self):
        return self.differentiated and self.tight and self.compact in ("vacuous", "yes")


def is_differentiated(structure):
    atoms = structure.field.atoms()
    return all(a & (a - 1) == 0 for a in atoms)


def finite_intersection_check(structure):
    """Any subfamily of field members and their complements with the finite
    intersection property has nonempty total intersection; on a finite carrier the
    family is finite, so the total intersection is one of its finite intersections.
    The maximal such families are the ultrafilters of atoms, checked here."""
    field = structure.field
    for atom in field.atoms():
        meet = field.full
        for a in field.members:
            if a & atom:
                meet &= a
        if meet == 0:
            return "fails"
    return "vacuous"


def tightness_witness(structure):
    """None if tight, otherwise a witness of failure."""
    field = structure.field
    if field.is_powerset():
        return None
    if structure.is_frame:
        frame = structure.base
        for w in range(frame.size):
            for v in range(frame.size):
                if frame.sees(w, v):
                    continue
                if not any(a >> v & 1 and not frame.preimage(a) >> w & 1 for a in field.members):
                    return ("separation", w, v)
        return None
    space = structure.base
    field_opens = [a for a in field.members if space.is_open(a)]
    for x in range(space.carrier_size):
        # the least neighbourhood must be a union of open field members inside it
        nb = space.neighborhoods[x]
        if not any(a >> x & 1 and a & ~nb == 0 for a in field_opens):
            return ("basis", x, nb)
    return None


def check_descriptive(structure):
    witness = tightness_witness(structure)
    return DescriptiveReport(is_differentiated(structure), finite_intersection_check(structure),
                             witness is None, witness)


class NotTightError(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"structure is not tight: {witness}")


def to_frame(structure):
    """General space to general frame: keep the field, use the specialization order."""
    if structure.is_frame:
        raise ValueError("expected a general space")
    witness = tightness_witness(structure)
    if witness:
        raise NotTightError(witness)
    return GeneralStructure(specialization_order(structure.base), structure.field.members)


def to_space(structure):
    """General frame to general space: topology generated by the field's R-upsets."""
    if not structure.is_frame:
        raise ValueError("expected a general frame")
    require_s4(structure.base)
    witness = tightness_witness(structure)
    if witness:
        raise NotTightError(witness)
    frame = structure.base
    basis = [a for a in structure.field.members if frame.is_upset(a)]
    space = topology_from_basis(frame.size, basis)
    return GeneralStructure(space, structure.field.members)


def closure_agreement_failure(space_structure):
    """First field member A with c(A) != R_tau^-1(A), or None."""
    frame = specialization_order(space_structure.base)
    for a in space_structure.field.sorted_members():
        if space_structure.base.closure(a) != frame.preimage(a):
            return a
    return None


# ------------------------------------------------------------ interior maps

@dataclass
class InteriorReport:
    ok: bool
    condition: str = None
    witness: object = None


def _parts(x):
    """(topology, field or None) for a topology, frame or general structure."""
    if isinstance(x, GeneralStructure):
        return x.topology(), x.field
    if isinstance(x, FiniteFrame):
        return alexandroff_topology(x), None
    return x, None


def check_interior_map(mapping, source, target):
    """Continuity, openness and (for general structures) pullback of field members."""
    mapping = list(mapping)
    src, src_field = _parts(source)
    tgt, tgt_field = _parts(target)
    if len(mapping) != src.carrier_size:
        return InteriorReport(False, "total", len(mapping))

    def pre(mask):
        return mask_of(x for x, y in enumerate(mapping) if mask >> y & 1)

    def img(mask):
        return mask_of(mapping[x] for x in bits(mask))

    # preimages of least neighbourhoods suffice for continuity
    for y in range(tgt.carrier_size):
        u = tgt.neighborhoods[y]
        if not src.is_open(pre(u)):
            return InteriorReport(False, "continuity", u)
    for x in range(src.carrier_size):
        u = src.neighborhoods[x]
        if not tgt.is_open(img(u)):
            return InteriorReport(False, "openness", u)
    if tgt_field is not None and src_field is not None:
        for a in tgt_field.sorted_members():
            if pre(a) not in src_field.members:
                return InteriorReport(False, "field", a)
    return InteriorReport(True)


# ---------------------------------------------------------- sums and gluing

def _as_space_structure(x):
    if isinstance(x, GeneralStructure):
        return x
    if isinstance(x, FiniteFrame):
        return GeneralStructure(x)
    return GeneralStructure(x)


def space_sum(structures):
    """Topological sum; A is in the field iff each trace A & X_i is in the i-th field."""
    structures = [_as_space_structure(s) for s in structures]
    offsets = []
    n = 0
    for s in structures:
        offsets.append(n)
        n += s.carrier_size
    injections = [list(range(o, o + s.carrier_size)) for o, s in zip(offsets, structures)]
    if structures and all(s.is_frame for s in structures):
        rel = []
        for o, s in zip(offsets, structures):
            rel += [(a + o, b + o) for a, b in s.base.relation]
        base = FiniteFrame(n, rel)
    else:
        nbhd = []
        for o, s in zip(offsets, structures):
            nbhd += [nb << o for nb in s.topology().neighborhoods]
        base = FiniteTopology.from_neighborhoods(n, nbhd)
    members = [0]
    for o, s in zip(offsets, structures):
        members = [m | (a << o) for m in members for a in s.field.members]
    return GeneralStructure(base, members, check=False), injections


@dataclass
class GluingSpec:
    parts: list
    shared: object
    embeddings: list


class GluingError(ValueError):
    pass


def _subspace_opens(topology, mask):
    return {u for u in topology.opens if u & ~mask == 0}


def validate_gluing(spec):
    parts = [_as_space_structure(p) for p in spec.parts]
    shared = _as_space_structure(spec.shared)
    if len(spec.embeddings) != len(parts):
        raise GluingError("one embedding per part is required")
    y_top = shared.topology()
    y_opens = y_top.opens
    for i, (part, emb) in enumerate(zip(parts, spec.embeddings)):
        if len(emb) != shared.carrier_size:
            raise GluingError(f"embedding {i} is not total on the shared space")
        if len(set(emb)) != len(emb):
            raise GluingError(f"embedding {i} identifies points of part {i} with each other (self-gluing)")
        if any(not 0 <= x < part.carrier_size for x in emb):
            raise GluingError(f"embedding {i} leaves part {i}")
        topo = part.topology()
        image = mask_of(emb)
        if not topo.is_open(image):
            raise GluingError(f"embedding-not-open: image of embedding {i} is not open in part {i}")

        def push(mask, emb=emb):
            return mask_of(emb[y] for y in bits(mask))

        if {push(u) for u in y_opens} != _subspace_opens(topo, image):
            raise GluingError(f"not-homeomorphism: embedding {i} does not match the opens")
        traces = {a & image for a in part.field.members}
        if {push(a) for a in shared.field.members} != traces:
            raise GluingError(f"not-homeomorphism: embedding {i} does not match the fields")
    return parts, shared


@dataclass
class Quotient:
    structure: GeneralStructure
    rho: list
    classes: list


def quotient_classes(n, pairs):
    """Equivalence classes generated by pairs, ordered by least member."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for x in range(n):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values(), key=lambda c: c[0])


def quotient_topology(topology, classes):
    """Quotient topology of a finite space: least saturated open around each class."""
    n = topology.carrier_size
    rho = [0] * n
    for k, c in enumerate(classes):
        for x in c:
            rho[x] = k
    class_mask = [mask_of(c) for c in classes]

    def saturate(mask):
        out = 0
        for k in {rho[x] for x in bits(mask)}:
            out |= class_mask[k]
        return out

    nbhd = []
    for c in class_mask:
        s = c
        while True:
            grown = saturate(_upset(topology, s))
            if grown == s:
                break
            s = grown
        nbhd.append(mask_of({rho[x] for x in bits(s)}))
    return FiniteTopology.from_neighborhoods(len(classes), nbhd), rho


def _upset(topology, mask):
    out = mask
    for x in bits(mask):
        out |= topology.neighborhoods[x]
    return out


def glue(spec):
    """Glue the parts along the shared structure; returns a Quotient with rho."""
    parts, shared = validate_gluing(spec)
    total, injections = space_sum(parts)
    pairs = []
    for y in range(shared.carrier_size):
        first = injections[0][spec.embeddings[0][y]]
        for inj, emb in zip(injections[1:], spec.embeddings[1:]):
            pairs.append((first, inj[emb[y]]))
    classes = quotient_classes(total.carrier_size, pairs)
    topo, rho = quotient_topology(total.topology(), classes)
    members = glued_field(total, parts, injections, rho, len(classes))
    if all(p.is_frame for p in parts):
        base = specialization_order(topo)
        base.labels = {k: "/".join(_tag(injections, x) for x in c) for k, c in enumerate(classes)}
    else:
        base = topo
    return Quotient(GeneralStructure(base, members, check=False), rho, classes)


def _tag(injections, x):
    for i, inj in enumerate(injections):
        if x in inj:
            return f"{i}.{x - inj[0]}"
    return str(x)


def glued_field(total, parts, injections, rho, size):
    """{A : rho^-1(A) & X_i is in the i-th field for every i}."""
    if all(p.field.is_powerset() for p in parts):
        return range(1 << size)
    if size > 20:
        raise GluingError("glued field enumeration is limited to 20 points")
    out = []
    for a in range(1 << size):
        pre = mask_of(x for x, k in enumerate(rho) if a >> k & 1)
        if pre in total.field.members:
            out.append(a)
    return out


def self_glue_identity(structure):
    """Gluing a single part along itself through the identity."""
    structure = _as_space_structure(structure)
    n = structure.carrier_size
    return GluingSpec([structure], structure, [list(range(n))])


# ------------------------------------------------------------------ export

def structure_to_json(structure):
    topo = structure.topology()
    data = {"carrier": structure.carrier_size, "opens": sorted(topo.opens),
            "field": structure.field.sorted_members()}
    if structure.is_frame:
        data["relation"] = [list(p) for p in sorted(structure.base.relation)]
    return data


def structure_from_json(data):
    if isinstance(data, str):
        data = json.loads(data)
    if "worlds" in data:
        from .frames import frame_from_json
        return GeneralStructure(frame_from_json(data), data.get("field"))
    n = int(data["carrier"])
    if "relation" in data:
        base = FiniteFrame(n, [tuple(p) for p in data["relation"]])
    else:
        base = FiniteTopology(n, [int(u) for u in data["opens"]])
    return GeneralStructure(base, data.get("field"))


def specialization_dot(structure, name="space"):
    from .frames import frame_to_dot
    return frame_to_dot(structure.frame(), name)
