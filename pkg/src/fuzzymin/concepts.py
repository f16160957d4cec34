"""Concept and role expressions: syntax tree, text grammar, Godel-semantics
evaluator, assertion checking and random sampling.

The evaluator is the package's verification oracle: preservation claims about
a minimization are checked by sampling expressions and comparing their values
at the named individuals.

Grammar (role operators bind ``*`` > ``?`` > ``;`` > ``|``; ``->`` is lowest
and right-associative):

    concept  := implies
    implies  := or_c ['->' implies]
    or_c     := and_c ('or' and_c)*
    and_c    := quant ('and' quant)*
    quant    := ('exists' | 'forall') role '.' quant | atom
    atom     := DEGREE | CONCEPT_NAME | '{' INDIVIDUAL '}' | '(' concept ')'

    role     := union
    union    := comp ('|' comp)*
    comp     := prefix (';' prefix)*
    prefix   := 'inv' prefix | postfix
    postfix  := primary '*'*
    primary  := ROLE_NAME | '(' role ')' | atom '?'
"""

from __future__ import annotations

import operator
import random
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import Degree, FuzzyRelation, FuzzySet, ONE, SCALE, ZERO, biresiduum
from .model import FuzzyInterpretation, Signature, normalize_features


# --------------------------------------------------------------------------
# syntax trees
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RoleName:
    name: str


@dataclass(frozen=True)
class RoleUnion:
    left: "Role"
    right: "Role"


@dataclass(frozen=True)
class RoleCompose:
    left: "Role"
    right: "Role"


@dataclass(frozen=True)
class RoleStar:
    inner: "Role"


@dataclass(frozen=True)
class RoleTest:
    concept: "Concept"


@dataclass(frozen=True)
class RoleInverse:
    inner: "Role"


Role = Union[RoleName, RoleUnion, RoleCompose, RoleStar, RoleTest, RoleInverse]


@dataclass(frozen=True)
class Constant:
    degree: Degree


@dataclass(frozen=True)
class ConceptName:
    name: str


@dataclass(frozen=True)
class Or:
    left: "Concept"
    right: "Concept"


@dataclass(frozen=True)
class And:
    left: "Concept"
    right: "Concept"


@dataclass(frozen=True)
class Implies:
    left: "Concept"
    right: "Concept"


@dataclass(frozen=True)
class Exists:
    role: Role
    body: "Concept"


@dataclass(frozen=True)
class Forall:
    role: Role
    body: "Concept"


@dataclass(frozen=True)
class Nominal:
    name: str


Concept = Union[Constant, ConceptName, Or, And, Implies, Exists, Forall, Nominal]


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


class ConceptParseError(ValueError):
    """Parse failure with the offending position in the input text."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<number>\d+(?:\.\d+)?)"
    r"|(?P<arrow>->)"
    r"|(?P<punct>[(){}.;|*?]))"
)

_KEYWORDS = {"and", "or", "exists", "forall", "inv"}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> List[_Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ConceptParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        if m.lastgroup == "name":
            word = m.group("name")
            kind = word if word in _KEYWORDS else "name"
            out.append(_Token(kind, word, m.start("name")))
        elif m.lastgroup == "number":
            out.append(_Token("number", m.group("number"), m.start("number")))
        elif m.lastgroup == "arrow":
            out.append(_Token("->", "->", m.start("arrow")))
        else:
            p = m.group("punct")
            out.append(_Token(p, p, m.start("punct")))
        pos = m.end()
    out.append(_Token("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, signature: Signature):
        self.tokens = _tokenize(text)
        self.i = 0
        self.sig = signature
        self.features = signature.features

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ConceptParseError(f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.next()

    def fail(self, message: str) -> None:
        raise ConceptParseError(message, self.peek().pos)

    # concepts ---------------------------------------------------------

    def concept(self) -> Concept:
        left = self.or_c()
        if self.peek().kind == "->":
            self.next()
            return Implies(left, self.concept())
        return left

    def or_c(self) -> Concept:
        node = self.and_c()
        while self.peek().kind == "or":
            self.next()
            node = Or(node, self.and_c())
        return node

    def and_c(self) -> Concept:
        node = self.quant()
        while self.peek().kind == "and":
            self.next()
            node = And(node, self.quant())
        return node

    def quant(self) -> Concept:
        tok = self.peek()
        if tok.kind in ("exists", "forall"):
            self.next()
            role = self.role()
            self.expect(".")
            body = self.quant()
            return Exists(role, body) if tok.kind == "exists" else Forall(role, body)
        return self.atom()

    def atom(self) -> Concept:
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            try:
                return Constant(Degree(tok.text))
            except ValueError as exc:
                raise ConceptParseError(str(exc), tok.pos) from None
        if tok.kind == "name":
            if tok.text not in self.sig.concept_names:
                self.fail(f"unknown concept name {tok.text!r}")
            self.next()
            return ConceptName(tok.text)
        if tok.kind == "{":
            self.next()
            name = self.expect("name")
            self.expect("}")
            if "O" not in self.features:
                raise ConceptParseError("nominals require the feature O", name.pos)
            if name.text not in self.sig.individual_names:
                raise ConceptParseError(f"unknown individual name {name.text!r}", name.pos)
            return Nominal(name.text)
        if tok.kind == "(":
            self.next()
            inner = self.concept()
            self.expect(")")
            return inner
        self.fail(f"expected a concept, found {tok.text or 'end of input'!r}")

    # roles --------------------------------------------------------------

    def role(self) -> Role:
        node = self.comp()
        while self.peek().kind == "|":
            self.next()
            node = RoleUnion(node, self.comp())
        return node

    def comp(self) -> Role:
        node = self.prefix()
        while self.peek().kind == ";":
            self.next()
            node = RoleCompose(node, self.prefix())
        return node

    def prefix(self) -> Role:
        tok = self.peek()
        if tok.kind == "inv":
            if "I" not in self.features:
                raise ConceptParseError("inverse roles require the feature I", tok.pos)
            self.next()
            return RoleInverse(self.prefix())
        return self.postfix()

    def postfix(self) -> Role:
        node = self.primary()
        while self.peek().kind == "*":
            self.next()
            node = RoleStar(node)
        return node

    def primary(self) -> Role:
        tok = self.peek()
        if tok.kind == "name" and tok.text in self.sig.role_names:
            self.next()
            return RoleName(tok.text)
        # anything else must be a concept test: atom '?'
        mark = self.i
        try:
            concept = self.atom()
            self.expect("?")
            return RoleTest(concept)
        except ConceptParseError:
            self.i = mark
        if tok.kind == "(":
            self.next()
            inner = self.role()
            self.expect(")")
            return inner
        self.fail(f"expected a role, found {tok.text or 'end of input'!r}")


def parse_concept(text: str, signature: Signature) -> Concept:
    parser = _Parser(text, signature)
    node = parser.concept()
    parser.expect("eof")
    return node


def parse_role(text: str, signature: Signature) -> Role:
    parser = _Parser(text, signature)
    node = parser.role()
    parser.expect("eof")
    return node


# --------------------------------------------------------------------------
# printing
# --------------------------------------------------------------------------

_C_IMPLIES, _C_OR, _C_AND, _C_QUANT, _C_ATOM = range(5)
_R_UNION, _R_COMP, _R_PREFIX, _R_POSTFIX, _R_PRIMARY = range(5)


def _concept_level(node: Concept) -> int:
    if isinstance(node, Implies):
        return _C_IMPLIES
    if isinstance(node, Or):
        return _C_OR
    if isinstance(node, And):
        return _C_AND
    if isinstance(node, (Exists, Forall)):
        return _C_QUANT
    return _C_ATOM


def _role_level(node: Role) -> int:
    if isinstance(node, RoleUnion):
        return _R_UNION
    if isinstance(node, RoleCompose):
        return _R_COMP
    if isinstance(node, RoleInverse):
        return _R_PREFIX
    if isinstance(node, RoleStar):
        return _R_POSTFIX
    return _R_PRIMARY


def concept_to_text(node: Concept) -> str:
    return _print_concept(node, _C_IMPLIES)


def role_to_text(node: Role) -> str:
    return _print_role(node, _R_UNION)


def _print_concept(node: Concept, required: int) -> str:
    if isinstance(node, Constant):
        text = str(node.degree)
    elif isinstance(node, ConceptName):
        text = node.name
    elif isinstance(node, Nominal):
        text = "{" + node.name + "}"
    elif isinstance(node, Implies):
        text = f"{_print_concept(node.left, _C_OR)} -> {_print_concept(node.right, _C_IMPLIES)}"
    elif isinstance(node, Or):
        text = f"{_print_concept(node.left, _C_OR)} or {_print_concept(node.right, _C_AND)}"
    elif isinstance(node, And):
        text = f"{_print_concept(node.left, _C_AND)} and {_print_concept(node.right, _C_QUANT)}"
    elif isinstance(node, Exists):
        text = f"exists {_print_role(node.role, _R_UNION)} . {_print_concept(node.body, _C_QUANT)}"
    elif isinstance(node, Forall):
        text = f"forall {_print_role(node.role, _R_UNION)} . {_print_concept(node.body, _C_QUANT)}"
    else:
        raise TypeError(f"not a concept node: {node!r}")
    if _concept_level(node) < required:
        return f"({text})"
    return text


def _print_role(node: Role, required: int) -> str:
    if isinstance(node, RoleName):
        text = node.name
    elif isinstance(node, RoleUnion):
        text = f"{_print_role(node.left, _R_UNION)} | {_print_role(node.right, _R_COMP)}"
    elif isinstance(node, RoleCompose):
        text = f"{_print_role(node.left, _R_COMP)} ; {_print_role(node.right, _R_PREFIX)}"
    elif isinstance(node, RoleInverse):
        text = f"inv {_print_role(node.inner, _R_PREFIX)}"
    elif isinstance(node, RoleStar):
        text = f"{_print_role(node.inner, _R_POSTFIX)}*"
    elif isinstance(node, RoleTest):
        text = f"{_print_concept(node.concept, _C_ATOM)}?"
    else:
        raise TypeError(f"not a role node: {node!r}")
    if _role_level(node) < required:
        return f"({text})"
    return text


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def _maxmin_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if n <= 128:
        return np.minimum(a[:, :, None], b[None, :, :]).max(axis=1)
    out = np.empty_like(a)
    step = max(1, (1 << 22) // max(1, n * n)) or 1
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        out[lo:hi] = np.minimum(a[lo:hi, :, None], b[None, :, :]).max(axis=1)
    return out


def _concept_vector(fset: FuzzySet, n: int) -> np.ndarray:
    vec = np.zeros(n, dtype=np.int64)
    for k, d in fset.items():
        vec[k] = d.scaled
    return vec


def _role_matrix(rel: FuzzyRelation, n: int) -> np.ndarray:
    mat = np.zeros((n, n), dtype=np.int64)
    for (i, j), d in rel.items():
        mat[i, j] = d.scaled
    return mat


def _eval_role_arr(node: Role, interp: FuzzyInterpretation, cache: Dict) -> np.ndarray:
    key = ("role", node)
    got = cache.get(key)
    if got is not None:
        return got
    n = interp.n
    if isinstance(node, RoleName):
        out = _role_matrix(interp.role_relation(node.name), n)
    elif isinstance(node, RoleUnion):
        out = np.maximum(_eval_role_arr(node.left, interp, cache), _eval_role_arr(node.right, interp, cache))
    elif isinstance(node, RoleCompose):
        out = _maxmin_product(_eval_role_arr(node.left, interp, cache), _eval_role_arr(node.right, interp, cache))
    elif isinstance(node, RoleStar):
        m = _eval_role_arr(node.inner, interp, cache)
        out = m.copy()
        idx = np.arange(n)
        out[idx, idx] = SCALE  # zero-length paths
        while True:
            squared = np.maximum(out, _maxmin_product(out, out))
            if np.array_equal(squared, out):
                break
            out = squared
    elif isinstance(node, RoleTest):
        vec = _eval_concept_arr(node.concept, interp, cache)
        out = np.zeros((n, n), dtype=np.int64)
        out[np.arange(n), np.arange(n)] = vec
    elif isinstance(node, RoleInverse):
        out = _eval_role_arr(node.inner, interp, cache).T.copy()
    else:
        raise TypeError(f"not a role node: {node!r}")
    cache[key] = out
    return out


def _eval_concept_arr(node: Concept, interp: FuzzyInterpretation, cache: Dict) -> np.ndarray:
    key = ("concept", node)
    got = cache.get(key)
    if got is not None:
        return got
    n = interp.n
    if isinstance(node, Constant):
        out = np.full(n, node.degree.scaled, dtype=np.int64)
    elif isinstance(node, ConceptName):
        out = _concept_vector(interp.concept_set(node.name), n)
    elif isinstance(node, Nominal):
        out = np.zeros(n, dtype=np.int64)
        out[interp.individual_element(node.name)] = SCALE
    elif isinstance(node, Or):
        out = np.maximum(_eval_concept_arr(node.left, interp, cache), _eval_concept_arr(node.right, interp, cache))
    elif isinstance(node, And):
        out = np.minimum(_eval_concept_arr(node.left, interp, cache), _eval_concept_arr(node.right, interp, cache))
    elif isinstance(node, Implies):
        a = _eval_concept_arr(node.left, interp, cache)
        b = _eval_concept_arr(node.right, interp, cache)
        out = np.where(a <= b, np.int64(SCALE), b)
    elif isinstance(node, Exists):
        r = _eval_role_arr(node.role, interp, cache)
        c = _eval_concept_arr(node.body, interp, cache)
        out = np.minimum(r, c[None, :]).max(axis=1) if n else np.zeros(0, dtype=np.int64)
    elif isinstance(node, Forall):
        r = _eval_role_arr(node.role, interp, cache)
        c = _eval_concept_arr(node.body, interp, cache)
        residuated = np.where(r <= c[None, :], np.int64(SCALE), np.broadcast_to(c[None, :], r.shape))
        out = residuated.min(axis=1) if n else np.zeros(0, dtype=np.int64)
    else:
        raise TypeError(f"not a concept node: {node!r}")
    cache[key] = out
    return out


def eval_role(node: Role, interp: FuzzyInterpretation) -> FuzzyRelation:
    mat = _eval_role_arr(node, interp, {})
    entries = {}
    for i, j in zip(*np.nonzero(mat)):
        entries[int(i), int(j)] = Degree.from_scaled(int(mat[i, j]))
    return FuzzyRelation(interp.n, interp.n, entries)


def eval_concept(node: Concept, interp: FuzzyInterpretation) -> FuzzySet:
    vec = _eval_concept_arr(node, interp, {})
    entries = {int(i): Degree.from_scaled(int(vec[i])) for i in np.flatnonzero(vec)}
    return FuzzySet(interp.n, entries)


# --------------------------------------------------------------------------
# assertions
# --------------------------------------------------------------------------

_COMPARATORS: Dict[str, Callable[[Degree, Degree], bool]] = {
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
}


@dataclass(frozen=True)
class ConceptAssertion:
    concept: Concept
    individual: str
    relation: str
    degree: Degree


@dataclass(frozen=True)
class RoleAssertion:
    role: Role
    subject: str
    target: str
    relation: str
    degree: Degree


@dataclass(frozen=True)
class SameIndividual:
    left: str
    right: str


@dataclass(frozen=True)
class DistinctIndividual:
    left: str
    right: str


FuzzyAssertion = Union[ConceptAssertion, RoleAssertion, SameIndividual, DistinctIndividual]


def check_assertion(interp: FuzzyInterpretation, assertion: FuzzyAssertion) -> bool:
    if isinstance(assertion, ConceptAssertion):
        cmp = _COMPARATORS[assertion.relation]
        vec = _eval_concept_arr(assertion.concept, interp, {})
        value = Degree.from_scaled(int(vec[interp.individual_element(assertion.individual)]))
        return cmp(value, assertion.degree)
    if isinstance(assertion, RoleAssertion):
        cmp = _COMPARATORS[assertion.relation]
        mat = _eval_role_arr(assertion.role, interp, {})
        value = Degree.from_scaled(
            int(mat[interp.individual_element(assertion.subject), interp.individual_element(assertion.target)])
        )
        return cmp(value, assertion.degree)
    if isinstance(assertion, SameIndividual):
        return interp.individual_element(assertion.left) == interp.individual_element(assertion.right)
    if isinstance(assertion, DistinctIndividual):
        return interp.individual_element(assertion.left) != interp.individual_element(assertion.right)
    raise TypeError(f"not an assertion: {assertion!r}")


def check_abox(interp: FuzzyInterpretation, assertions: Iterable[FuzzyAssertion]) -> bool:
    return all(check_assertion(interp, psi) for psi in assertions)


# --------------------------------------------------------------------------
# random sampling and preservation reports
# --------------------------------------------------------------------------

L0_FRAGMENT = "L0"
FULL_FRAGMENT = "full"

_DEFAULT_POOL = (Degree(0), Degree("0.5"), Degree(1))


def random_concept(
    signature: Signature,
    features: Iterable[str] | None,
    fragment: str,
    depth: int,
    rng: Union[int, random.Random],
    degree_pool: Sequence[Degree] = _DEFAULT_POOL,
) -> Concept:
    """Sample a concept of the requested fragment with height at most depth.

    Deterministic for a fixed integer seed.  Constants are drawn from
    ``degree_pool``; callers that verify preservation pass the degrees of the
    interpretation under test plus {0, 0.5, 1}.
    """
    if fragment not in (L0_FRAGMENT, FULL_FRAGMENT):
        raise ValueError(f"unknown fragment {fragment!r}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    fs = normalize_features(features)
    r = rng if isinstance(rng, random.Random) else random.Random(rng)
    pool = tuple(degree_pool) or _DEFAULT_POOL

    def leaf() -> Concept:
        options = ["constant"]
        if signature.concept_names:
            options.extend(["name", "name"])  # favour names over constants
        if "O" in fs:
            options.append("nominal")
        pick = r.choice(options)
        if pick == "name":
            return ConceptName(r.choice(signature.concept_names))
        if pick == "nominal":
            return Nominal(r.choice(signature.individual_names))
        return Constant(r.choice(pool))

    def basic_role() -> Role:
        node: Role = RoleName(r.choice(signature.role_names))
        if "I" in fs and r.random() < 0.5:
            node = RoleInverse(node)
        return node

    def sample_role(budget: int) -> Role:
        if fragment == L0_FRAGMENT or budget <= 0 or r.random() < 0.4:
            return basic_role()
        pick = r.choice(["union", "compose", "star", "test", "basic"])
        if pick == "union":
            return RoleUnion(sample_role(budget - 1), sample_role(budget - 1))
        if pick == "compose":
            return RoleCompose(sample_role(budget - 1), sample_role(budget - 1))
        if pick == "star":
            return RoleStar(sample_role(budget - 1))
        if pick == "test":
            return RoleTest(sample(budget - 1))
        return basic_role()

    def sample(budget: int) -> Concept:
        if budget <= 0 or r.random() < 0.25:
            return leaf()
        ops = ["and", "implies"]
        if fragment == FULL_FRAGMENT:
            ops.extend(["or"])
        if signature.role_names:
            ops.append("exists")
            if fragment == FULL_FRAGMENT:
                ops.append("forall")
        pick = r.choice(ops)
        if pick == "and":
            return And(sample(budget - 1), sample(budget - 1))
        if pick == "or":
            return Or(sample(budget - 1), sample(budget - 1))
        if pick == "implies":
            return Implies(sample(budget - 1), sample(budget - 1))
        if pick == "exists":
            return Exists(sample_role(budget - 1), sample(budget - 1))
        return Forall(sample_role(budget - 1), sample(budget - 1))

    return sample(depth)


@dataclass(frozen=True)
class PreservationCounterexample:
    concept_text: str
    individual: str
    left: Degree
    right: Degree
    agreement: Degree


@dataclass
class PreservationReport:
    samples: int
    depth: int
    gamma: Degree
    min_agreement: Degree
    counterexamples: List[PreservationCounterexample] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.counterexamples


def interpretation_degree_pool(*interps: FuzzyInterpretation) -> Tuple[Degree, ...]:
    pool = {Degree(0), Degree("0.5"), Degree(1)}
    for interp in interps:
        for fset in interp.concepts.values():
            pool.update(d for _, d in fset.items())
        for rel in interp.roles.values():
            pool.update(d for _, d in rel.items())
    return tuple(sorted(pool))


def preservation_report(
    interp1: FuzzyInterpretation,
    interp2: FuzzyInterpretation,
    features: Iterable[str] | None,
    gamma: Degree,
    samples: int,
    depth: int,
    seed: int,
) -> PreservationReport:
    """Sample full-language concepts and compare their values at every named
    individual; any agreement degree below gamma is a counterexample."""
    if not interp1.signature.same_names(interp2.signature):
        raise ValueError("interpretations use different signatures")
    if not isinstance(gamma, Degree):
        gamma = Degree(gamma)
    rng = random.Random(seed)
    pool = interpretation_degree_pool(interp1, interp2)
    sig = interp1.signature
    report = PreservationReport(samples=samples, depth=depth, gamma=gamma, min_agreement=ONE)
    for _ in range(samples):
        concept = random_concept(sig, features, FULL_FRAGMENT, depth, rng, pool)
        v1 = _eval_concept_arr(concept, interp1, {})
        v2 = _eval_concept_arr(concept, interp2, {})
        for a in sig.individual_names:
            left = Degree.from_scaled(int(v1[interp1.individual_element(a)]))
            right = Degree.from_scaled(int(v2[interp2.individual_element(a)]))
            agreement = biresiduum(left, right)
            if agreement < report.min_agreement:
                report.min_agreement = agreement
            if agreement < gamma:
                report.counterexamples.append(
                    PreservationCounterexample(concept_to_text(concept), a, left, right, agreement)
                )
    return report
