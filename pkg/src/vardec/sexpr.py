"""Problem files, result emission and certificate serialization.

One small s-expression grammar covers everything: problem files are a
sequence of declarations, results and certificates are tagged lists.

::

    file      := decl+
    decl      := (vars NAME+) | (partition (block+)) | (formula EXPR)
               | (lambda-proof (l0 SET) (l1 SET) (l0p SET) (l1p SET))
    block     := (NAME+)
    EXPR      := true | false | (not EXPR) | (and EXPR+) | (or EXPR+)
               | (=> EXPR EXPR) | (<=> EXPR EXPR)
               | (REL TERM TERM) | (distinct TERM TERM)
    REL       := < | <= | = | >= | > | !=
    TERM      := NAME | NUMBER | (+ TERM+) | (- TERM TERM*) | (* TERM TERM)
    NUMBER    := integer, a/b rational, or decimal literal
    SET       := (set EXPR*)          ; atoms only

Non-strict and negated comparisons are desugared while parsing, so the
resulting syntax tree only ever holds the three primitive relations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .certificates import LambdaProof
from .formula import (
    EQ,
    GT,
    LT,
    And,
    Atom,
    FalseFormula,
    Formula,
    LinearPredicate,
    Model,
    Not,
    Or,
    Partition,
    PredicateSet,
    TrueFormula,
    atom,
    atom_ge,
    atom_le,
    atom_ne,
    conj,
    disj,
    iff,
    implies,
    negate,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class ProblemFile:
    variables: tuple[str, ...]
    partition: Partition
    formula: Formula
    proof: LambdaProof | None = None


# -- reader -----------------------------------------------------------------


def _tokenize(text: str) -> Iterator[tuple[str, int, int]]:
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, line, col
            col += 1
            i += 1
        else:
            start = i
            startcol = col
            while i < len(text) and not text[i].isspace() and text[i] not in "();":
                i += 1
                col += 1
            yield text[start:i], line, startcol
    yield "", line, col


def _read_all(text: str) -> list:
    tokens = list(_tokenize(text))
    pos = 0

    def read():
        nonlocal pos
        tok, line, col = tokens[pos]
        if tok == "":
            raise ParseError("unexpected end of input", line, col)
        pos += 1
        if tok == "(":
            items = []
            while tokens[pos][0] != ")":
                if tokens[pos][0] == "":
                    raise ParseError("missing ')'", tokens[pos][1], tokens[pos][2])
                items.append(read())
            pos += 1
            return items
        if tok == ")":
            raise ParseError("unexpected ')'", line, col)
        return (tok, line, col)

    out = []
    while tokens[pos][0] != "":
        out.append(read())
    return out


def _sym(node) -> str:
    if not isinstance(node, tuple):
        raise ParseError("expected a symbol, found a list")
    return node[0]


def _number(token: str) -> Fraction | None:
    try:
        return Fraction(token)
    except ValueError:
        return None


# -- terms and formulas -----------------------------------------------------


class _Term:
    """A linear term during parsing: variable coefficients plus a constant."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs=None, const=Fraction(0)):
        self.coeffs = dict(coeffs or {})
        self.const = const

    def add(self, other: "_Term", sign: int = 1) -> "_Term":
        out = _Term(self.coeffs, self.const + sign * other.const)
        for v, c in other.coeffs.items():
            out.coeffs[v] = out.coeffs.get(v, Fraction(0)) + sign * c
        return out

    def scale(self, factor: Fraction) -> "_Term":
        return _Term(
            {v: c * factor for v, c in self.coeffs.items()}, self.const * factor
        )


def _parse_term(node, variables: set[str]) -> _Term:
    if isinstance(node, tuple):
        tok, line, col = node
        num = _number(tok)
        if num is not None:
            return _Term(const=num)
        if tok not in variables:
            raise ParseError(f"unknown variable {tok!r}", line, col)
        return _Term({tok: Fraction(1)})
    if not node:
        raise ParseError("empty term")
    head = _sym(node[0])
    args = [_parse_term(a, variables) for a in node[1:]]
    if head == "+":
        out = _Term()
        for a in args:
            out = out.add(a)
        return out
    if head == "-":
        if len(args) == 1:
            return args[0].scale(Fraction(-1))
        out = args[0]
        for a in args[1:]:
            out = out.add(a, sign=-1)
        return out
    if head == "*":
        if len(args) != 2:
            raise ParseError("'*' takes exactly two arguments", *node[0][1:])
        left, right = args
        if not left.coeffs:
            return right.scale(left.const)
        if not right.coeffs:
            return left.scale(right.const)
        raise ParseError("nonlinear term: product of two variables", *node[0][1:])
    raise ParseError(f"unknown term operator {head!r}", *node[0][1:])


_REL_BUILDERS = {
    "<": lambda c, k: atom(c, LT, k),
    ">": lambda c, k: atom(c, GT, k),
    "=": lambda c, k: atom(c, EQ, k),
    "<=": atom_le,
    ">=": atom_ge,
    "!=": atom_ne,
    "distinct": atom_ne,
}


def _parse_formula(node, variables: set[str]) -> Formula:
    if isinstance(node, tuple):
        tok, line, col = node
        if tok == "true":
            return TrueFormula()
        if tok == "false":
            return FalseFormula()
        raise ParseError(f"expected a formula, found {tok!r}", line, col)
    if not node:
        raise ParseError("empty formula")
    head = _sym(node[0])
    if head in _REL_BUILDERS:
        if len(node) != 3:
            raise ParseError(f"{head!r} takes two terms", *node[0][1:])
        lhs = _parse_term(node[1], variables)
        rhs = _parse_term(node[2], variables)
        diff = lhs.add(rhs, sign=-1)
        return _REL_BUILDERS[head](diff.coeffs, -diff.const)
    args = [_parse_formula(a, variables) for a in node[1:]]
    if head == "not":
        if len(args) != 1:
            raise ParseError("'not' takes one argument", *node[0][1:])
        return negate(args[0])
    if head == "and":
        return conj(args)
    if head == "or":
        return disj(args)
    if head == "=>":
        if len(args) != 2:
            raise ParseError("'=>' takes two arguments", *node[0][1:])
        return implies(args[0], args[1])
    if head == "<=>":
        if len(args) != 2:
            raise ParseError("'<=>' takes two arguments", *node[0][1:])
        return iff(args[0], args[1])
    raise ParseError(f"unknown connective {head!r}", *node[0][1:])


def _parse_predicate_set(node, variables: set[str]) -> PredicateSet:
    if isinstance(node, tuple) or not node or _sym(node[0]) != "set":
        raise ParseError("expected (set atom*)")
    preds = []
    for item in node[1:]:
        f = _parse_formula(item, variables)
        if not isinstance(f, Atom):
            raise ParseError("predicate sets may contain primitive atoms only")
        preds.append(f.pred)
    return PredicateSet(preds)


def parse(text: str) -> ProblemFile:
    """Parse a problem file into variables, partition, formula and proof."""
    decls = _read_all(text)
    variables: list[str] = []
    partition: Partition | None = None
    formula: Formula | None = None
    proof: LambdaProof | None = None
    for decl in decls:
        if isinstance(decl, tuple) or not decl:
            raise ParseError("top-level entries must be declarations")
        head = _sym(decl[0])
        if head == "vars":
            variables = [_sym(v) for v in decl[1:]]
            if len(set(variables)) != len(variables):
                raise ParseError("duplicate variable declaration")
        elif head == "partition":
            if len(decl) != 2 or isinstance(decl[1], tuple):
                raise ParseError("expected (partition (block+))")
            blocks = []
            for blk in decl[1]:
                if isinstance(blk, tuple):
                    raise ParseError("partition blocks must be lists")
                blocks.append([_sym(v) for v in blk])
            partition = Partition.of(blocks)
        elif head == "formula":
            if len(decl) != 2:
                raise ParseError("expected (formula EXPR)")
            formula = _parse_formula(decl[1], set(variables))
        elif head == "lambda-proof":
            parts = {}
            for item in decl[1:]:
                if isinstance(item, tuple) or len(item) != 2:
                    raise ParseError("expected (NAME (set ...)) inside lambda-proof")
                parts[_sym(item[0])] = _parse_predicate_set(item[1], set(variables))
            missing = {"l0", "l1", "l0p", "l1p"} - set(parts)
            if missing:
                raise ParseError(f"lambda-proof misses {sorted(missing)}")
            proof = LambdaProof(parts["l0"], parts["l1"], parts["l0p"], parts["l1p"])
        else:
            raise ParseError(f"unknown declaration {head!r}")
    if formula is None:
        raise ParseError("missing (formula ...) declaration")
    if not variables:
        variables = sorted(formula.free_vars())
    if partition is None:
        partition = Partition.singletons(variables or ["x"])
    extra = formula.free_vars() - set(variables)
    if extra:
        raise ParseError(f"formula uses undeclared variables {sorted(extra)}")
    if not formula.free_vars() <= set(partition.universe):
        raise ParseError("partition does not cover the formula's variables")
    return ProblemFile(tuple(variables), partition, formula, proof)


def parse_partition(text: str) -> Partition:
    """Parse a standalone partition literal like ``((x y) (z))``."""
    nodes = _read_all(text)
    if len(nodes) != 1 or isinstance(nodes[0], tuple):
        raise ParseError("expected a single (block+) list")
    blocks = []
    for blk in nodes[0]:
        if isinstance(blk, tuple):
            raise ParseError("partition blocks must be lists")
        blocks.append([_sym(v) for v in blk])
    return Partition.of(blocks)


# -- emitters ---------------------------------------------------------------


def _emit_number(q: Fraction) -> str:
    return str(q) if q.denominator != 1 else str(q.numerator)


def _emit_term(p: LinearPredicate) -> str:
    monomials = []
    for v, c in p.coeffs:
        monomials.append(v if c == 1 else f"(* {_emit_number(c)} {v})")
    if len(monomials) == 1:
        return monomials[0]
    return "(+ " + " ".join(monomials) + ")"


def emit_atom(p: LinearPredicate) -> str:
    return f"({p.rel} {_emit_term(p)} {_emit_number(p.constant)})"


def emit_formula(f: Formula) -> str:
    if isinstance(f, TrueFormula):
        return "true"
    if isinstance(f, FalseFormula):
        return "false"
    if isinstance(f, Atom):
        return emit_atom(f.pred)
    if isinstance(f, Not):
        return f"(not {emit_formula(f.arg)})"
    if isinstance(f, And):
        return "(and " + " ".join(emit_formula(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(emit_formula(a) for a in f.args) + ")"
    raise TypeError(f"cannot emit {type(f).__name__}")


def emit_predicate_set(preds: PredicateSet) -> str:
    return "(set " + " ".join(emit_atom(p) for p in preds) + ")" if len(preds) else "(set)"


def emit_partition(partition: Partition) -> str:
    return "(" + " ".join("(" + " ".join(b) + ")" for b in partition.blocks) + ")"


def emit_model(model: Model) -> str:
    inner = " ".join(f"({v} {_emit_number(q)})" for v, q in sorted(model.items()))
    return f"(model {inner})"


def emit_proof(proof: LambdaProof) -> str:
    return (
        "(lambda-proof"
        f" (l0 {emit_predicate_set(proof.l0)})"
        f" (l1 {emit_predicate_set(proof.l1)})"
        f" (l0p {emit_predicate_set(proof.l0p)})"
        f" (l1p {emit_predicate_set(proof.l1p)})"
        ")"
    )


def emit_problem(
    variables: tuple[str, ...], partition: Partition, formula: Formula
) -> str:
    return (
        f"(vars {' '.join(variables)})\n"
        f"(partition {emit_partition(partition)})\n"
        f"(formula {emit_formula(formula)})\n"
    )


def emit_decide_result(result) -> str:
    """Serialize a decision result; re-parses to equivalent objects."""
    if result.decomposable:
        return f"(decomposable (formula {emit_formula(result.decomposition.formula())}))"
    w = result.witness
    counter = " ".join(
        f"({v} {_emit_number(q)})" for v, q in sorted(w.counter_model.items())
    )
    parts = [
        f"(gamma {emit_predicate_set(w.gamma)})",
        f"(covering {emit_formula(w.covering.formula())})",
        f"(failing-term {emit_predicate_set(w.failing_term)})",
        f"(counter-model {counter})",
        f"(partition {emit_partition(w.partition)})",
    ]
    if w.proof is not None:
        parts.append(emit_proof(w.proof))
    return "(nondecomposable " + " ".join(parts) + ")"


@dataclass(frozen=True)
class ParsedResult:
    """Re-parsed decision result, for round-tripping and re-verification."""

    decomposable: bool
    formula: Formula | None = None
    gamma: PredicateSet | None = None
    covering: Formula | None = None
    failing_term: PredicateSet | None = None
    counter_model: Model | None = None
    partition: Partition | None = None
    proof: LambdaProof | None = None


def parse_result(text: str, variables: Iterator[str] | list[str]) -> ParsedResult:
    nodes = _read_all(text)
    if len(nodes) != 1 or isinstance(nodes[0], tuple):
        raise ParseError("expected one result form")
    node = nodes[0]
    varset = set(variables)
    head = _sym(node[0])
    if head == "decomposable":
        if len(node) != 2 or _sym(node[1][0]) != "formula":
            raise ParseError("expected (decomposable (formula ...))")
        return ParsedResult(True, formula=_parse_formula(node[1][1], varset))
    if head != "nondecomposable":
        raise ParseError(f"unknown result kind {head!r}")
    out = {"decomposable": False}
    for item in node[1:]:
        tag = _sym(item[0])
        if tag == "gamma":
            out["gamma"] = _parse_predicate_set(item[1], varset)
        elif tag == "covering":
            out["covering"] = _parse_formula(item[1], varset)
        elif tag == "failing-term":
            out["failing_term"] = _parse_predicate_set(item[1], varset)
        elif tag == "counter-model":
            model = {}
            for entry in item[1:]:
                v = _sym(entry[0])
                q = _number(_sym(entry[1]))
                if q is None:
                    raise ParseError("bad model value")
                model[v] = q
            out["counter_model"] = model
        elif tag == "partition":
            blocks = [[_sym(v) for v in blk] for blk in item[1]]
            out["partition"] = Partition.of(blocks)
        elif tag == "lambda-proof":
            parts = {}
            for sub in item[1:]:
                parts[_sym(sub[0])] = _parse_predicate_set(sub[1], varset)
            out["proof"] = LambdaProof(
                parts["l0"], parts["l1"], parts["l0p"], parts["l1p"]
            )
        else:
            raise ParseError(f"unknown result field {tag!r}")
    return ParsedResult(**out)
