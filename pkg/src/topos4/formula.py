"""Propositional modal formulas: AST, parser, printer and syntactic utilities."""

from dataclasses import dataclass
import re


class Formula:
    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, repr=False)
class Letter(Formula):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True, repr=False)
class Top(Formula):
    def __repr__(self):
        return "T"


@dataclass(frozen=True, repr=False)
class Bottom(Formula):
    def __repr__(self):
        return "F"


@dataclass(frozen=True, repr=False)
class Not(Formula):
    arg: Formula

    def __repr__(self):
        return f"Not({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Diamond(Formula):
    arg: Formula

    def __repr__(self):
        return f"Diamond({self.arg!r})"


@dataclass(frozen=True, repr=False)
class Box(Formula):
    arg: Formula

    def __repr__(self):
        return f"Box({self.arg!r})"


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"And({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Or({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Implies({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Iff(Formula):
    left: Formula
    right: Formula

    def __repr__(self):
        return f"Iff({self.left!r}, {self.right!r})"


UNARY = (Not, Diamond, Box)
BINARY = (And, Or, Implies, Iff)
MODAL = (Diamond, Box)

LETTER_RE = re.compile(r"[a-z][a-z0-9_]*")


def children(phi):
    if isinstance(phi, UNARY):
        return (phi.arg,)
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    return ()


def rebuild(phi, parts):
    """Same connective as phi, applied to new immediate subformulas."""
    if isinstance(phi, UNARY):
        return type(phi)(parts[0])
    if isinstance(phi, BINARY):
        return type(phi)(parts[0], parts[1])
    return phi


# ---------------------------------------------------------------- parsing

class FormulaSyntaxError(ValueError):
    def __init__(self, offset, expected, text):
        self.offset = offset
        self.expected = frozenset(expected)
        self.text = text
        shown = ", ".join(sorted(self.expected))
        super().__init__(f"syntax error at offset {offset}: expected one of {shown}")


# longest operators first so that "<->" wins over "<>"
TOKEN_RE = re.compile(r"\s*(<->|->|<>|\[\]|[~&|()]|[a-z][a-z0-9_]*|T|F)")

ATOM_START = {"letter", "T", "F", "(", "~", "[]", "<>"}


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = TOKEN_RE.match(text, pos)
        if m is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError(start, ATOM_START | {"->", "<->", "&", "|", ")"}, text)
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    tokens.append(("$", len(text)))
    return tokens


class Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def fail(self, expected):
        raise FormulaSyntaxError(self.peek()[1], expected, self.text)

    def parse(self):
        phi = self.iff()
        if self.peek()[0] != "$":
            self.fail({"->", "<->", "&", "|", "end of input"})
        return phi

    def iff(self):
        left = self.implication()
        while self.peek()[0] == "<->":
            self.advance()
            left = Iff(left, self.implication())
        return left

    def implication(self):
        left = self.disjunction()
        if self.peek()[0] == "->":
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek()[0] == "|":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.prefix()
        while self.peek()[0] == "&":
            self.advance()
            left = And(left, self.prefix())
        return left

    def prefix(self):
        tok = self.peek()[0]
        if tok == "~":
            self.advance()
            return Not(self.prefix())
        if tok == "[]":
            self.advance()
            return Box(self.prefix())
        if tok == "<>":
            self.advance()
            return Diamond(self.prefix())
        return self.atom()

    def atom(self):
        tok, _ = self.peek()
        if tok == "T":
            self.advance()
            return Top()
        if tok == "F":
            self.advance()
            return Bottom()
        if tok == "(":
            self.advance()
            phi = self.iff()
            if self.peek()[0] != ")":
                self.fail({")", "->", "<->", "&", "|"})
            self.advance()
            return phi
        if LETTER_RE.fullmatch(tok):
            self.advance()
            return Letter(tok)
        self.fail(ATOM_START)


def parse(text):
    """Parse ASCII syntax: ~ [] <> prefix, then & | -> <-> (-> is right associative)."""
    return Parser(text).parse()


# --------------------------------------------------------------- printing

PRECEDENCE = {Iff: 1, Implies: 2, Or: 3, And: 4}
SYMBOL = {Iff: "<->", Implies: "->", Or: "|", And: "&"}
PREFIX = {Not: "~", Box: "[]", Diamond: "<>"}


def to_text(phi):
    if isinstance(phi, Letter):
        return phi.name
    if isinstance(phi, Top):
        return "T"
    if isinstance(phi, Bottom):
        return "F"
    if isinstance(phi, UNARY):
        inner = to_text(phi.arg)
        if isinstance(phi.arg, BINARY):
            inner = f"({inner})"
        return PREFIX[type(phi)] + inner
    op = type(phi)
    level = PRECEDENCE[op]
    left, right = to_text(phi.left), to_text(phi.right)
    left_level = PRECEDENCE.get(type(phi.left), 9)
    right_level = PRECEDENCE.get(type(phi.right), 9)
    if op is Implies:
        # right associative
        if left_level <= level:
            left = f"({left})"
        if right_level < level:
            right = f"({right})"
    else:
        if left_level < level:
            left = f"({left})"
        if right_level <= level:
            right = f"({right})"
    return f"{left} {SYMBOL[op]} {right}"


# -------------------------------------------------------------- utilities

def size(phi):
    return 1 + sum(size(c) for c in children(phi))


def letters(phi):
    """Letter names in order of first occurrence."""
    seen = {}
    order = []

    def visit(f):
        if isinstance(f, Letter):
            if f.name not in seen:
                seen[f.name] = True
                order.append(f.name)
        for c in children(f):
            visit(c)

    visit(phi)
    return order


def is_modal(phi):
    if isinstance(phi, MODAL):
        return True
    return any(is_modal(c) for c in children(phi))


def subformulas(phi):
    """All subformulas of phi, post-order, without repetitions."""
    seen = set()
    out = []

    def visit(f):
        for c in children(f):
            visit(c)
        if f not in seen:
            seen.add(f)
            out.append(f)

    visit(phi)
    return out


def substitute(phi, mapping):
    """Simultaneous substitution of formulas for letters."""
    if isinstance(phi, Letter):
        return mapping.get(phi.name, phi)
    parts = children(phi)
    if not parts:
        return phi
    return rebuild(phi, [substitute(c, mapping) for c in parts])


def desugar(phi):
    """Rewrite ~a as a -> F and a <-> b as (a -> b) & (b -> a)."""
    parts = [desugar(c) for c in children(phi)]
    if isinstance(phi, Not):
        return Implies(parts[0], Bottom())
    if isinstance(phi, Iff):
        a, b = parts
        return And(Implies(a, b), Implies(b, a))
    return rebuild(phi, parts) if parts else phi


@dataclass(frozen=True)
class LetterMap:
    """Maps (original letter, formula index) to the fresh letter used for it."""
    entries: dict

    def forward(self, index):
        return {name: Letter(new) for (name, i), new in self.entries.items() if i == index}

    def inverse(self, index):
        return {new: Letter(name) for (name, i), new in self.entries.items() if i == index}


def fresh_names(avoid):
    k = 0
    while True:
        name = f"x{k}"
        k += 1
        if name not in avoid:
            yield name


def revariablize(formulas):
    """Rename letters so that distinct formulas share none; returns (renamed, LetterMap)."""
    avoid = set()
    for phi in formulas:
        avoid.update(letters(phi))
    names = fresh_names(avoid)
    entries = {}
    for index, phi in enumerate(formulas):
        for name in letters(phi):
            entries[(name, index)] = next(names)
    lmap = LetterMap(entries)
    renamed = [substitute(phi, lmap.forward(i)) for i, phi in enumerate(formulas)]
    return renamed, lmap


def godel_translate(phi):
    """Box every subformula of an intuitionistic formula (after desugaring ~ and <->)."""
    if is_modal(phi):
        raise ValueError("Goedel translation expects a formula without [] or <>")
    return _box_all(desugar(phi))


def _box_all(phi):
    parts = children(phi)
    if not parts:
        return Box(phi)
    return Box(rebuild(phi, [_box_all(c) for c in parts]))


def box_count(phi):
    here = 1 if isinstance(phi, Box) else 0
    return here + sum(box_count(c) for c in children(phi))
