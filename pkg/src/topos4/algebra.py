"""Finite closure algebras presented as fields of sets with a closure operator."""

from dataclasses import dataclass
import itertools
import os

from .formula import (Letter, Top, Bottom, Not, And, Or, Implies, Iff, Diamond, Box,
                      letters, is_modal, subformulas, children)
from .frames import FiniteFrame, bits

DEFAULT_CAP = 4


def popcount(mask):
    return bin(mask).count("1")


class ClosureAxiomError(ValueError):
    def __init__(self, axiom, witness):
        self.axiom = axiom
        self.witness = witness
        super().__init__(f"closure axiom {axiom} fails at {witness}")


class CapExceeded(RuntimeError):
    pass


def check_closure_axioms(n, closure):
    """Return (axiom, witness) for the first failure on the powerset, or None.

    Additivity is tested as c(A) = union of c({x}) for x in A, which together
    with c(empty) = empty is equivalent to binary additivity on a finite carrier.
    """
    if closure(0) != 0:
        return ("c0=0", (0,))
    points = [closure(1 << x) for x in range(n)]
    for a in range(1 << n):
        ca = closure(a)
        if ca & a != a:
            return ("A<=cA", (a,))
        joined = 0
        for x in bits(a):
            joined |= points[x]
        if joined != ca:
            # locate a concrete failing pair for the report
            for b in range(1 << n):
                if closure(a | b) != ca | closure(b):
                    return ("c(AuB)=cAucB", (a, b))
            return ("c(AuB)=cAucB", (a,))
        if closure(ca) != ca:
            return ("ccA=cA", (a,))
    return None


def table_closure(table):
    """Closure operator backed by a dict; unknown sets are closed pointwise."""
    def closure(mask):
        if mask in table:
            return table[mask]
        out = 0
        for x in bits(mask):
            out |= table[1 << x]
        return out
    return closure


class SetField:
    """A family of subsets of range(carrier_size) closed under -, & and closure."""

    def __init__(self, carrier_size, members, closure, check=True):
        self.carrier_size = carrier_size
        self.members = frozenset(members)
        self._closure = closure
        self._closed = {}
        if check:
            problem = self.violation()
            if problem:
                raise ValueError(problem)

    @property
    def full(self):
        return (1 << self.carrier_size) - 1

    def closure(self, mask):
        out = self._closed.get(mask)
        if out is None:
            out = self._closed[mask] = self._closure(mask)
        return out

    def violation(self):
        full = self.full
        if 0 not in self.members or full not in self.members:
            return "field must contain the empty set and the carrier"
        for a in self.members:
            if full & ~a not in self.members:
                return f"not closed under complement at {a}"
            if self.closure(a) not in self.members:
                return f"not closed under closure at {a}"
        # closure under intersection reduces to atoms forming a partition
        atoms = self.atoms()
        if len(self.members) != 1 << len(atoms):
            return "not closed under intersection"
        return None

    def atoms(self):
        """Minimal nonempty members, assuming a Boolean algebra of sets."""
        out = []
        covered = 0
        for x in range(self.carrier_size):
            if covered >> x & 1:
                continue
            atom = self.full
            for a in self.members:
                if a >> x & 1:
                    atom &= a
            out.append(atom)
            covered |= atom
        return out

    def interior(self, mask):
        return self.full & ~self.closure(self.full & ~mask)

    def __eq__(self, other):
        return (isinstance(other, SetField) and self.carrier_size == other.carrier_size
                and self.members == other.members)

    def __hash__(self):
        return hash((self.carrier_size, self.members))

    def __len__(self):
        return len(self.members)

    def sorted_members(self):
        return sorted(self.members)

    def is_powerset(self):
        return len(self.members) == 1 << self.carrier_size

    def table(self):
        return {a: self.closure(a) for a in self.sorted_members()}


def powerset_field(n, closure):
    return SetField(n, range(1 << n), closure, check=False)


def boolean_closure(n, generators):
    """All unions of atoms of the partition induced by the generators."""
    full = (1 << n) - 1
    atoms = [full] if n else []
    for g in generators:
        refined = []
        for a in atoms:
            for part in (a & g, a & ~g):
                if part:
                    refined.append(part)
        atoms = refined
    members = [0]
    for atom in atoms:
        members += [m | atom for m in members]
    return set(members)


def field_generate(n, closure, generators, check_axioms=True):
    """Smallest field containing the generators, closed under - , & and closure."""
    if check_axioms:
        failure = check_closure_axioms(n, closure)
        if failure:
            raise ClosureAxiomError(*failure)
    gens = set(generators)
    while True:
        members = boolean_closure(n, gens)
        new = {closure(a) for a in members} - members
        if not new:
            return SetField(n, members, closure, check=False)
        gens |= new


# -------------------------------------------------------------- evaluation

class EvaluationError(ValueError):
    pass


OPCODES = {Letter: 0, Top: 1, Bottom: 2, Not: 3, And: 4, Or: 5, Implies: 6, Iff: 7,
           Diamond: 8, Box: 9}


def compile_formula(phi):
    """Post-order program for phi with shared subformulas computed once.

    Each step is (opcode, left index, right index, letter name).
    """
    position = {}
    program = []
    for psi in subformulas(phi):
        op = OPCODES.get(type(psi))
        if op is None:
            raise EvaluationError(f"unknown node {psi!r}")
        parts = [position[c] for c in children(psi)] + [None, None]
        name = psi.name if op == 0 else None
        position[psi] = len(program)
        program.append((op, parts[0], parts[1], name))
    return program


def run_program(program, valuation, algebra):
    full = algebra.full
    closure = algebra.closure
    vals = []
    push = vals.append
    for op, a, b, name in program:
        if op == 0:
            if name not in valuation:
                raise EvaluationError(f"letter {name} is not assigned")
            push(valuation[name])
        elif op == 1:
            push(full)
        elif op == 2:
            push(0)
        elif op == 3:
            push(full & ~vals[a])
        elif op == 4:
            push(vals[a] & vals[b])
        elif op == 5:
            push(vals[a] | vals[b])
        elif op == 6:
            push((full & ~vals[a]) | vals[b])
        elif op == 7:
            push(full & ~(vals[a] ^ vals[b]))
        elif op == 8:
            push(closure(vals[a]))
        else:
            push(full & ~closure(full & ~vals[a]))
    return vals[-1]


def evaluate(phi, valuation, algebra):
    """Value of phi as a subset; <> is closure and [] is interior."""
    return run_program(compile_formula(phi), valuation, algebra)


@dataclass
class ValidityReport:
    valid: bool
    valuation: dict = None
    world: int = None

    def __bool__(self):
        return self.valid


def letter_cap(cap=None):
    if cap is not None:
        return cap
    env = os.environ.get("TOPOS4_CAP")
    return int(env) if env else DEFAULT_CAP


def as_field(structure):
    return getattr(structure, "field", structure)


def submasks(mask):
    sub = mask
    out = [0]
    while sub:
        out.append(sub)
        sub = (sub - 1) & mask
    return sorted(out)


def _validates_locally(frame, algebra, phi, names):
    """On a Kripke frame with all subsets admissible, truth at w only depends on
    the values inside R(w), so each world is checked against valuations there."""
    program = compile_formula(phi)
    for w in range(frame.size):
        local = submasks(frame.succ[w])
        for values in itertools.product(local, repeat=len(names)):
            valuation = dict(zip(names, values))
            if not run_program(program, valuation, algebra) >> w & 1:
                return ValidityReport(False, valuation, w)
    return ValidityReport(True)


def validates(structure, phi, cap=None):
    """Exhaustive search over field members for the letters of phi."""
    algebra = as_field(structure)
    names = letters(phi)
    if len(names) > letter_cap(cap):
        raise CapExceeded(f"{len(names)} letters exceed the cap of {letter_cap(cap)}")
    frame = getattr(structure, "base", None)
    if isinstance(frame, FiniteFrame) and algebra.is_powerset():
        k = len(names)
        local_cost = sum(1 << (popcount(s) * k) for s in frame.succ)
        if local_cost < len(algebra.members) ** k:
            return _validates_locally(frame, algebra, phi, names)
    full = algebra.full
    members = algebra.sorted_members()
    program = compile_formula(phi)
    for values in itertools.product(members, repeat=len(names)):
        valuation = dict(zip(names, values))
        value = run_program(program, valuation, algebra)
        if value != full:
            return ValidityReport(False, valuation, bits(full & ~value)[0])
    return ValidityReport(True)


def clopens(algebra):
    return [a for a in algebra.sorted_members() if algebra.closure(a) == a and algebra.interior(a) == a]


def is_connected(algebra):
    """Only the empty set and the carrier are clopen."""
    return all(a in (0, algebra.full) for a in clopens(algebra))


def is_well_connected(algebra):
    """c(a) & c(b) = 0 forces a = 0 or b = 0."""
    members = [a for a in algebra.sorted_members() if a]
    closed = {a: algebra.closure(a) for a in members}
    for a, b in itertools.combinations_with_replacement(members, 2):
        if closed[a] & closed[b] == 0:
            return False
    return True


# ---------------------------------------------------------------- Heyting

class ResiduationError(ValueError):
    pass


class HeytingAlgebra:
    """Open elements of a closure algebra, with a -> b = interior(-a | b)."""

    def __init__(self, algebra, check=True):
        self.algebra = algebra
        self.elements = [a for a in algebra.sorted_members() if algebra.interior(a) == a]
        self.full = algebra.full
        if check:
            witness = self.residuation_failure()
            if witness:
                raise ResiduationError(f"a & x <= b iff x <= a -> b fails at {witness}")

    def implies(self, a, b):
        return self.algebra.interior((self.full & ~a) | b)

    def residuation_failure(self):
        elems = self.elements
        opens = set(elems)
        for a in elems:
            for b in elems:
                imp = self.implies(a, b)
                if imp not in opens:
                    return (a, b)
                for x in elems:
                    if (a & x & ~b == 0) != (x & ~imp == 0):
                        return (a, x, b)
        return None


def open_elements(algebra, check=True):
    return HeytingAlgebra(algebra, check)


def heyting_evaluate(phi, valuation, heyting):
    if is_modal(phi):
        raise EvaluationError("intuitionistic evaluation expects no modal operators")
    full = heyting.full

    def ev(f):
        if isinstance(f, Letter):
            if f.name not in valuation:
                raise EvaluationError(f"letter {f.name} is not assigned")
            return valuation[f.name]
        if isinstance(f, Top):
            return full
        if isinstance(f, Bottom):
            return 0
        if isinstance(f, Not):
            return heyting.implies(ev(f.arg), 0)
        if isinstance(f, And):
            return ev(f.left) & ev(f.right)
        if isinstance(f, Or):
            return ev(f.left) | ev(f.right)
        if isinstance(f, Implies):
            return heyting.implies(ev(f.left), ev(f.right))
        if isinstance(f, Iff):
            a, b = ev(f.left), ev(f.right)
            return heyting.implies(a, b) & heyting.implies(b, a)
        raise EvaluationError(f"unknown node {f!r}")

    return ev(phi)


def heyting_validates(heyting, phi, cap=None):
    names = letters(phi)
    if len(names) > letter_cap(cap):
        raise CapExceeded(f"{len(names)} letters exceed the cap of {letter_cap(cap)}")
    for values in itertools.product(heyting.elements, repeat=len(names)):
        valuation = dict(zip(names, values))
        value = heyting_evaluate(phi, valuation, heyting)
        if value != heyting.full:
            return ValidityReport(False, valuation, bits(heyting.full & ~value)[0])
    return ValidityReport(True)


# ------------------------------------------------------------------ export

def field_to_json(algebra):
    return {
        "carrier": algebra.carrier_size,
        "members": algebra.sorted_members(),
        "closure": [[a, algebra.closure(a)] for a in algebra.sorted_members()],
    }


def field_from_json(data):
    n = int(data["carrier"])
    table = {int(a): int(c) for a, c in data["closure"]}
    return SetField(n, [int(m) for m in data["members"]], table_closure(table))
