"""Formula syntax: AST, sugar expansions, parser and canonical printer.

Truth values live in [0,1] with 0 playing the role of "true".  The core
propositional connectives are negation (1-x), halving (x/2) and truncated
subtraction (max(0, x-y)); everything else (min, max, truncated addition,
absolute difference, the constant 1 and the dyadic constants 2^-n) is sugar
that expands into the core at construction/parse time.

The first-order layer shares the connective nodes and adds predicate
applications, terms and the inf/sup quantifiers, with a signature carrying a
Lipschitz constant per argument slot (modulus of continuity delta(eps) =
eps/lambda).

Grammar (leading keywords make it LL(1); binary operators always take
parentheses):

    formula  := "0" | "1" | ident | "neg" formula | "half" formula
              | "(" formula op formula ")" | "2^-" nat
              | "|" formula "-" formula "|"
    op       := "-" | "/\\" | "\\/" | "(+)"
    lformula := formula-clauses | "inf" ident "." lformula
              | "sup" ident "." lformula | ident "(" termlist ")"
    term     := ident | ident "(" termlist ")"

Identifiers are [a-zA-Z_][a-zA-Z0-9_]*; `neg half inf sup` are reserved.
The printer emits only core nodes, fully parenthesized, and
parse(print(f)) == f.
"""

from dataclasses import dataclass

from .rationals import rat

METRIC_SYMBOL = "d"
KEYWORDS = frozenset(["neg", "half", "inf", "sup"])


class ParseError(ValueError):
    def __init__(self, message, position):
        super().__init__("%s (at offset %d)" % (message, position))
        self.position = position


# --- AST ------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Const0:
    pass


@dataclass(frozen=True, slots=True)
class Atom:
    name: str


@dataclass(frozen=True, slots=True)
class Neg:
    body: object


@dataclass(frozen=True, slots=True)
class Half:
    body: object


@dataclass(frozen=True, slots=True)
class Monus:
    left: object
    right: object


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Apply:
    func: str
    args: tuple


@dataclass(frozen=True, slots=True)
class Pred:
    name: str
    args: tuple


@dataclass(frozen=True, slots=True)
class Inf:
    var: str
    body: object


@dataclass(frozen=True, slots=True)
class Sup:
    var: str
    body: object


# --- sugar ------------------------------------------------------------------

def conj(a, b):
    """Pointwise minimum: a /\\ b expands to a - (a - b)."""
    return Monus(a, Monus(a, b))


def disj(a, b):
    """Pointwise maximum, by De Morgan from conj."""
    return Neg(conj(Neg(a), Neg(b)))


def abs_diff(a, b):
    """|a - b| = (a - b) \\/ (b - a)."""
    return disj(Monus(a, b), Monus(b, a))


def truncated_add(a, b):
    """min(1, a + b): a (+) b expands to neg (neg a - b)."""
    return Neg(Monus(Neg(a), b))


def one():
    """The constant 1 = neg (0 - 0)."""
    return Neg(Monus(Const0(), Const0()))


def dyadic(n):
    """The constant 2^-n (n halvings of 1)."""
    if n < 0:
        raise ValueError("dyadic exponent must be >= 0")
    f = one()
    for _ in range(n):
        f = Half(f)
    return f


def monus_chain(psi, n, phi):
    """psi - n*phi: subtract phi from psi n times, left-nested."""
    if n < 0:
        raise ValueError("repeat count must be >= 0")
    f = psi
    for _ in range(n):
        f = Monus(f, phi)
    return f


def times_chain(m, phi):
    """m*phi with truncated addition: phi (+) ... (+) phi, left-nested.

    m = 0 gives the constant 0.
    """
    if m < 0:
        raise ValueError("repeat count must be >= 0")
    if m == 0:
        return Const0()
    f = phi
    for _ in range(m - 1):
        f = truncated_add(f, phi)
    return f


# --- structural helpers -------------------------------------------------------

def subformulas(formula):
    """All distinct subformulas, children before parents."""
    seen = {}
    order = []

    def walk(f):
        if f in seen:
            return
        if isinstance(f, (Neg, Half, Inf, Sup)):
            walk(f.body)
        elif isinstance(f, Monus):
            walk(f.left)
            walk(f.right)
        seen[f] = True
        order.append(f)

    walk(formula)
    return order


def atom_names(formula):
    """Sorted names of the propositional atoms occurring in the formula."""
    return sorted({f.name for f in subformulas(formula) if isinstance(f, Atom)})


def monus_count(formula):
    """Number of distinct truncated-subtraction subformulas.

    This is the branching measure for the decision procedures: each distinct
    Monus node contributes at most one zero/positive split.
    """
    return sum(1 for f in subformulas(formula) if isinstance(f, Monus))


def is_propositional(formula):
    return all(
        isinstance(f, (Const0, Atom, Neg, Half, Monus)) for f in subformulas(formula)
    )


def substitute(formula, mapping):
    """The propositional formula with each named atom replaced by a formula.

    Atoms not in the mapping stay; replacement is simultaneous (replacements
    are not rewritten again).
    """
    memo = {}

    def walk(f):
        got = memo.get(f)
        if got is not None:
            return got
        if isinstance(f, Atom):
            out = mapping.get(f.name, f)
        elif isinstance(f, Neg):
            out = Neg(walk(f.body))
        elif isinstance(f, Half):
            out = Half(walk(f.body))
        elif isinstance(f, Monus):
            out = Monus(walk(f.left), walk(f.right))
        elif isinstance(f, Const0):
            out = f
        else:
            raise TypeError("not a propositional formula: %r" % (f,))
        memo[f] = out
        return out

    return walk(formula)


def free_variables(formula):
    """Free term variables of a first-order formula."""

    def term_vars(t):
        if isinstance(t, Var):
            return {t.name}
        out = set()
        for a in t.args:
            out |= term_vars(a)
        return out

    def walk(f, bound):
        if isinstance(f, Pred):
            out = set()
            for t in f.args:
                out |= term_vars(t) - bound
            return out
        if isinstance(f, (Inf, Sup)):
            return walk(f.body, bound | {f.var})
        if isinstance(f, (Neg, Half)):
            return walk(f.body, bound)
        if isinstance(f, Monus):
            return walk(f.left, bound) | walk(f.right, bound)
        return set()

    return walk(formula, set())


# --- signatures ----------------------------------------------------------------

class Signature:
    """Function and predicate symbols with per-argument Lipschitz constants.

    The binary metric symbol `d` is always present (Lipschitz constant 1 in
    each slot) and may not be redeclared.  A symbol's modulus of continuity in
    slot i is delta(eps) = eps / lambda_i.
    """

    def __init__(self, functions=None, predicates=None):
        self.functions = {}
        self.predicates = {}
        for table, decls in ((self.functions, functions), (self.predicates, predicates)):
            for name, lips in (decls or {}).items():
                if name == METRIC_SYMBOL:
                    raise ValueError("symbol name %r is reserved for the metric" % name)
                if name in KEYWORDS or not _is_identifier(name):
                    raise ValueError("bad symbol name %r" % name)
                if name in self.functions or name in self.predicates:
                    raise ValueError("duplicate symbol %r" % name)
                lam = [rat(x) for x in lips]
                if any(l < 0 for l in lam):
                    raise ValueError("Lipschitz constants must be >= 0 (%s)" % name)
                table[name] = lam

    def __eq__(self, other):
        return (
            isinstance(other, Signature)
            and self.functions == other.functions
            and self.predicates == other.predicates
        )

    def pred_arity(self, name):
        if name == METRIC_SYMBOL:
            return 2
        return len(self.predicates[name])

    def func_arity(self, name):
        return len(self.functions[name])

    def validate_formula(self, formula):
        """Check arities and that every symbol is declared; raise ValueError."""
        for f in subformulas(formula):
            if isinstance(f, Pred):
                if f.name == METRIC_SYMBOL:
                    if len(f.args) != 2:
                        raise ValueError("metric %r takes 2 arguments" % f.name)
                elif f.name not in self.predicates:
                    raise ValueError("undeclared predicate %r" % f.name)
                elif len(f.args) != len(self.predicates[f.name]):
                    raise ValueError("arity mismatch for predicate %r" % f.name)
                for t in f.args:
                    self._validate_term(t)

    def _validate_term(self, t):
        if isinstance(t, Var):
            return
        if t.func not in self.functions:
            raise ValueError("undeclared function %r" % t.func)
        if len(t.args) != len(self.functions[t.func]):
            raise ValueError("arity mismatch for function %r" % t.func)
        for a in t.args:
            self._validate_term(a)


def _is_identifier(s):
    if not s or not (s[0].isalpha() or s[0] == "_"):
        return False
    return all(c.isalnum() or c == "_" for c in s)


# --- tokenizer ----------------------------------------------------------------

_T_LPAREN, _T_RPAREN, _T_BAR, _T_MINUS, _T_AND, _T_OR, _T_PLUS = range(7)
_T_ZERO, _T_ONE, _T_DYADIC, _T_IDENT, _T_DOT, _T_COMMA, _T_END = range(7, 14)


def _tokenize(text):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if text.startswith("(+)", i):
            toks.append((_T_PLUS, None, i))
            i += 3
        elif c == "(":
            toks.append((_T_LPAREN, None, i))
            i += 1
        elif c == ")":
            toks.append((_T_RPAREN, None, i))
            i += 1
        elif c == "|":
            toks.append((_T_BAR, None, i))
            i += 1
        elif c == "-":
            toks.append((_T_MINUS, None, i))
            i += 1
        elif text.startswith("/\\", i):
            toks.append((_T_AND, None, i))
            i += 2
        elif text.startswith("\\/", i):
            toks.append((_T_OR, None, i))
            i += 2
        elif text.startswith("2^-", i):
            j = i + 3
            if j >= n or not text[j].isdigit():
                raise ParseError("expected digits after '2^-'", j)
            k = j
            while k < n and text[k].isdigit():
                k += 1
            toks.append((_T_DYADIC, int(text[j:k]), i))
            i = k
        elif c == "0":
            toks.append((_T_ZERO, None, i))
            i += 1
        elif c == "1":
            toks.append((_T_ONE, None, i))
            i += 1
        elif c == ".":
            toks.append((_T_DOT, None, i))
            i += 1
        elif c == ",":
            toks.append((_T_COMMA, None, i))
            i += 1
        elif c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append((_T_IDENT, text[i:j], i))
            i = j
        else:
            raise ParseError("unexpected character %r" % c, i)
    toks.append((_T_END, None, n))
    return toks


class _Parser:
    def __init__(self, text, first_order):
        self.toks = _tokenize(text)
        self.pos = 0
        self.first_order = first_order

    def peek(self):
        return self.toks[self.pos]

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, what):
        t = self.next()
        if t[0] != kind:
            raise ParseError("expected %s" % what, t[2])
        return t

    def formula(self):
        kind, value, at = self.next()
        if kind == _T_ZERO:
            return Const0()
        if kind == _T_ONE:
            return one()
        if kind == _T_DYADIC:
            return dyadic(value)
        if kind == _T_IDENT:
            if value == "neg":
                return Neg(self.formula())
            if value == "half":
                return Half(self.formula())
            if value in ("inf", "sup"):
                if not self.first_order:
                    raise ParseError("quantifier %r not allowed here" % value, at)
                vtok = self.expect(_T_IDENT, "a variable name")
                if vtok[1] in KEYWORDS:
                    raise ParseError("reserved word %r cannot be a variable" % vtok[1], vtok[2])
                self.expect(_T_DOT, "'.'")
                body = self.formula()
                return (Inf if value == "inf" else Sup)(vtok[1], body)
            if self.first_order:
                self.expect(_T_LPAREN, "'(' (predicates take arguments here)")
                args = self.termlist()
                return Pred(value, tuple(args))
            return Atom(value)
        if kind == _T_LPAREN:
            left = self.formula()
            op, _, opat = self.next()
            right = self.formula()
            self.expect(_T_RPAREN, "')'")
            if op == _T_MINUS:
                return Monus(left, right)
            if op == _T_AND:
                return conj(left, right)
            if op == _T_OR:
                return disj(left, right)
            if op == _T_PLUS:
                return truncated_add(left, right)
            raise ParseError("expected a binary operator", opat)
        if kind == _T_BAR:
            left = self.formula()
            self.expect(_T_MINUS, "'-'")
            right = self.formula()
            self.expect(_T_BAR, "closing '|'")
            return abs_diff(left, right)
        raise ParseError("expected a formula", at)

    def termlist(self):
        """Arguments up to and including the closing paren."""
        args = []
        if self.peek()[0] == _T_RPAREN:
            self.next()
            return args
        while True:
            args.append(self.term())
            kind, _, at = self.next()
            if kind == _T_RPAREN:
                return args
            if kind != _T_COMMA:
                raise ParseError("expected ',' or ')'", at)

    def term(self):
        tok = self.expect(_T_IDENT, "a term")
        if tok[1] in KEYWORDS:
            raise ParseError("reserved word %r cannot start a term" % tok[1], tok[2])
        if self.peek()[0] == _T_LPAREN:
            self.next()
            return Apply(tok[1], tuple(self.termlist()))
        return Var(tok[1])

    def finish(self, node):
        t = self.peek()
        if t[0] != _T_END:
            raise ParseError("trailing input", t[2])
        return node


def parse_formula(text):
    """Parse a propositional formula (atoms are bare identifiers)."""
    p = _Parser(text, first_order=False)
    return p.finish(p.formula())


def parse_lformula(text):
    """Parse a first-order formula (identifiers must be applied predicates)."""
    p = _Parser(text, first_order=True)
    return p.finish(p.formula())


# --- printer --------------------------------------------------------------------

def print_formula(formula):
    """Canonical fully parenthesized core form; inverse of the parser."""
    if isinstance(formula, Const0):
        return "0"
    if isinstance(formula, Atom):
        return formula.name
    if isinstance(formula, Neg):
        return "neg " + print_formula(formula.body)
    if isinstance(formula, Half):
        return "half " + print_formula(formula.body)
    if isinstance(formula, Monus):
        return "(%s - %s)" % (print_formula(formula.left), print_formula(formula.right))
    if isinstance(formula, Pred):
        return "%s(%s)" % (formula.name, ", ".join(print_term(t) for t in formula.args))
    if isinstance(formula, Inf):
        return "inf %s. %s" % (formula.var, print_formula(formula.body))
    if isinstance(formula, Sup):
        return "sup %s. %s" % (formula.var, print_formula(formula.body))
    raise TypeError("not a formula: %r" % (formula,))


def print_term(t):
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Apply):
        return "%s(%s)" % (t.func, ", ".join(print_term(a) for a in t.args))
    raise TypeError("not a term: %r" % (t,))
