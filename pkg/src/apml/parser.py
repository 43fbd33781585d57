"""Lexer and recursive-descent parser for the textual pattern language.

``parse_model`` never raises on bad input: it returns a best-effort partial
model together with span-carrying diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import Diagnostic, SourceSpan, ERROR, WARNING
from . import model as m

KEYWORDS = frozenset([
    "Pattern", "ShortName", "DTSpec", "DT", "Sort", "Predicate", "Operation",
    "CTypes", "CType", "InputPorts", "InputPort", "OutputPorts", "OutputPort",
    "Connections", "Contracts", "Contract", "Type", "var", "triggers",
    "guarantees", "duration", "proof", "at", "have", "from", "with", "using",
])

_PUNCT = {
    "{": "LBRACE", "}": "RBRACE", "(": "LPAREN", ")": "RPAREN",
    "[": "LBRACK", "]": "RBRACK", ",": "COMMA", ":": "COLON",
    ".": "DOT", "=": "EQ",
}


@dataclass(frozen=True)
class Token:
    kind: str          # ID, NAT, punctuation kind, AND, OR, ARROW, EOF
    text: str
    span: SourceSpan


def tokenize(text, filename="<input>"):
    tokens = []
    diags = []
    line, col, i = 1, 1, 0
    n = len(text)

    def span(l0, c0, l1, c1):
        return SourceSpan(filename, l0, c0, l1, c1)

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        l0, c0 = line, col
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                diags.append(Diagnostic(ERROR, "UNTERMINATED_COMMENT",
                                        "unterminated block comment",
                                        span(l0, c0, l0, c0)))
                break
            chunk = text[i:end + 2]
            nl = chunk.count("\n")
            if nl:
                line += nl
                col = len(chunk) - chunk.rfind("\n")
            else:
                col += len(chunk)
            i = end + 2
            continue
        if text.startswith("/\\", i):
            tokens.append(Token("AND", "/\\", span(l0, c0, l0, c0 + 2)))
            i += 2
            col += 2
            continue
        if text.startswith("\\/", i):
            tokens.append(Token("OR", "\\/", span(l0, c0, l0, c0 + 2)))
            i += 2
            col += 2
            continue
        if text.startswith("=>", i):
            tokens.append(Token("ARROW", "=>", span(l0, c0, l0, c0 + 2)))
            i += 2
            col += 2
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token("NAT", text[i:j], span(l0, c0, l0, c0 + j - i)))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ID", text[i:j], span(l0, c0, l0, c0 + j - i)))
            col += j - i
            i = j
            continue
        if c in _PUNCT:
            tokens.append(Token(_PUNCT[c], c, span(l0, c0, l0, c0 + 1)))
            i += 1
            col += 1
            continue
        diags.append(Diagnostic(ERROR, "LEX_ERROR",
                                "unexpected character %r" % c,
                                span(l0, c0, l0, c0 + 1)))
        i += 1
        col += 1
    tokens.append(Token("EOF", "", span(line, col, line, col)))
    return tokens, diags


class _ParseError(Exception):
    pass


class Parser:
    def __init__(self, tokens, diags):
        self.tokens = tokens
        self.pos = 0
        self.diags = diags
        # resolution state
        self.datatypes = []
        self.signature = m.Signature([])
        self.component_types = []

    # -- token plumbing ----------------------------------------------------

    @property
    def tok(self):
        return self.tokens[self.pos]

    def peek(self, k=1):
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self):
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at(self, kind, text=None):
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def at_kw(self, word):
        return self.at("ID", word)

    def accept(self, kind, text=None):
        if self.at(kind, text):
            return self.advance()
        return None

    def error(self, message, span=None):
        self.diags.append(Diagnostic(ERROR, "UNEXPECTED_TOKEN", message,
                                     span or self.tok.span))

    def expect(self, kind, what, text=None):
        t = self.accept(kind, text)
        if t is None:
            self.error("expected %s, got %r" % (what, self.tok.text or "<eof>"))
            raise _ParseError()
        return t

    def expect_kw(self, word):
        return self.expect("ID", "'%s'" % word, word)

    def skip_balanced(self, until_kinds):
        """Panic-mode recovery: skip to a follow token at bracket depth 0."""
        depth = 0
        while not self.at("EOF"):
            k = self.tok.kind
            if depth == 0 and k in until_kinds:
                return
            if k in ("LBRACE", "LPAREN", "LBRACK"):
                depth += 1
            elif k in ("RBRACE", "RPAREN", "RBRACK"):
                if depth == 0:
                    return
                depth -= 1
            self.advance()

    def ident(self, what="identifier"):
        t = self.tok
        if t.kind == "ID" and t.text not in KEYWORDS:
            return self.advance()
        self.error("expected %s, got %r" % (what, t.text or "<eof>"))
        raise _ParseError()

    def nat(self):
        t = self.expect("NAT", "number")
        return int(t.text)

    def comma_list(self, parse_item, closers):
        """Comma-separated items with per-item recovery."""
        items = []
        while not self.at("EOF") and self.tok.kind not in closers:
            try:
                item = parse_item()
                if item is not None:
                    items.append(item)
            except _ParseError:
                self.skip_balanced(("COMMA",) + closers)
            if not self.accept("COMMA"):
                break
        return items

    # -- model -------------------------------------------------------------

    def parse_model(self):
        if self.at("EOF"):
            self.diags.append(Diagnostic(ERROR, "EXPECTED_PATTERN",
                                         "empty input: expected a Pattern",
                                         self.tok.span))
            return m.EMPTY_MODEL
        if not self.at("ID", "Pattern"):
            self.diags.append(Diagnostic(ERROR, "EXPECTED_PATTERN",
                                         "input does not start with a Pattern",
                                         self.tok.span))
            return m.EMPTY_MODEL
        self.advance()
        name = short = ""
        connections = []
        arch_contracts = []
        try:
            name = self.ident("pattern name").text
            self.expect_kw("ShortName")
            short = self.ident("short name").text
            self.expect("LBRACE", "'{'")
            if self.at_kw("DTSpec"):
                self.parse_dtspec()
                self.signature = m.Signature(self.datatypes)
            if self.at_kw("CTypes"):
                self.parse_ctypes()
            if self.at_kw("Connections"):
                self.advance()
                self.expect("LBRACE", "'{'")
                connections = self.comma_list(self.parse_connection,
                                              ("RBRACE",))
                self.expect("RBRACE", "'}'")
            if self.at_kw("Contracts"):
                self.advance()
                self.expect("LBRACE", "'{'")
                arch_contracts = self.comma_list(self.parse_arch_contract,
                                                 ("RBRACE",))
                self.expect("RBRACE", "'}'")
            self.expect("RBRACE", "'}'")
            if not self.at("EOF"):
                self.error("trailing input after pattern")
        except _ParseError:
            self.skip_balanced(())
        return m.Model(name=name, short_name=short,
                       datatypes=tuple(self.datatypes),
                       component_types=tuple(self.component_types),
                       connections=tuple(connections),
                       contracts=tuple(arch_contracts))

    # -- data types ----------------------------------------------------------

    def parse_dtspec(self):
        self.expect_kw("DTSpec")
        self.expect("LBRACE", "'{'")
        dts = self.comma_list(self.parse_dt, ("RBRACE",))
        self.expect("RBRACE", "'}'")
        self.datatypes.extend(dts)

    def parse_dt(self):
        start = self.expect_kw("DT")
        name = self.ident("data type name").text
        self.expect("LPAREN", "'('")
        sort = None
        predicates = []
        operations = []
        while not self.at("RPAREN") and not self.at("EOF"):
            if self.at_kw("Sort"):
                self.advance()
                sort = self.ident("sort name").text
            elif self.at_kw("Predicate"):
                self.advance()
                predicates.extend(self.parse_symbol_decls(name, with_result=False))
            elif self.at_kw("Operation"):
                self.advance()
                operations.extend(self.parse_symbol_decls(name, with_result=True))
            else:
                self.error("expected Sort, Predicate or Operation")
                raise _ParseError()
        self.expect("RPAREN", "')'")
        return m.DataType(name=name, sort=sort, predicates=tuple(predicates),
                          operations=tuple(operations), span=start.span)

    def parse_symbol_decls(self, dt_name, with_result):
        """`name: S1, S2 => R, name2: ...` - a comma both separates argument
        sorts and successive declarations; an `ID :` lookahead starts a new
        declaration."""
        decls = []
        while True:
            sym = self.ident("symbol name").text
            self.expect("COLON", "':'")
            args = [self.parse_sort_ref(dt_name)]
            while self.at("COMMA") and not self._next_is_decl_or_end():
                self.advance()
                args.append(self.parse_sort_ref(dt_name))
            if with_result:
                self.expect("ARROW", "'=>'")
                result = self.parse_sort_ref(dt_name)
                decls.append((sym, tuple(args), result))
            else:
                decls.append((sym, tuple(args)))
            # a comma followed by `ID :` continues the declaration list
            if (self.at("COMMA") and self.peek().kind == "ID"
                    and self.peek(2).kind == "COLON"):
                self.advance()
                continue
            break
        return decls

    def _next_is_decl_or_end(self):
        # after a comma inside an argument-sort list: `ID :` means a new
        # symbol declaration rather than a further argument sort
        return self.peek().kind == "ID" and self.peek(2).kind == "COLON"

    def parse_sort_ref(self, dt_name):
        first = self.ident("sort name").text
        if self.accept("DOT"):
            second = self.ident("sort name").text
            return "%s.%s" % (first, second)
        return "%s.%s" % (dt_name, first)

    # -- component types -----------------------------------------------------

    def parse_ctypes(self):
        self.expect_kw("CTypes")
        self.expect("LBRACE", "'{'")
        cts = self.comma_list(self.parse_ctype, ("RBRACE",))
        self.expect("RBRACE", "'}'")
        self.component_types.extend(cts)

    def parse_ctype(self):
        start = self.expect_kw("CType")
        name = self.ident("component type name").text
        self.expect("LBRACE", "'{'")
        inputs, outputs, contracts = [], [], []
        if self.at_kw("InputPorts"):
            self.advance()
            self.expect("LBRACE", "'{'")
            inputs = self.comma_list(
                lambda: self.parse_port(name, m.INPUT), ("RBRACE",))
            self.expect("RBRACE", "'}'")
        if self.at_kw("OutputPorts"):
            self.advance()
            self.expect("LBRACE", "'{'")
            outputs = self.comma_list(
                lambda: self.parse_port(name, m.OUTPUT), ("RBRACE",))
            self.expect("RBRACE", "'}'")
        ct = m.ComponentType(name=name, inputs=tuple(inputs),
                             outputs=tuple(outputs), contracts=(),
                             span=start.span)
        if self.at_kw("Contracts"):
            self.advance()
            self.expect("LBRACE", "'{'")
            contracts = self.comma_list(
                lambda: self.parse_contract(ct), ("RBRACE",))
            self.expect("RBRACE", "'}'")
        self.expect("RBRACE", "'}'")
        return m.ComponentType(name=name, inputs=tuple(inputs),
                               outputs=tuple(outputs),
                               contracts=tuple(contracts), span=start.span)

    def parse_port(self, owner, direction):
        kw = "InputPort" if direction == m.INPUT else "OutputPort"
        self.expect_kw(kw)
        pname = self.ident("port name").text
        self.expect("LPAREN", "'('")
        self.expect_kw("Type")
        self.expect("COLON", "':'")
        sort = self.parse_qualified_sort()
        self.expect("RPAREN", "')'")
        return m.Port(name=pname, owner=owner, direction=direction, sort=sort)

    def parse_qualified_sort(self):
        first = self.ident("sort reference").text
        self.expect("DOT", "'.'")
        second = self.ident("sort name").text
        sort = "%s.%s" % (first, second)
        if sort not in self.signature.sorts:
            self.diags.append(Diagnostic(ERROR, "UNDECLARED_SORT",
                                         "undeclared sort '%s'" % sort,
                                         self.tokens[self.pos - 1].span))
        return sort

    # -- contracts -----------------------------------------------------------

    def parse_contract(self, ctype, arch=False):
        start = self.expect_kw("Contract")
        name = self.ident("contract name").text
        self.expect("LBRACE", "'{'")
        variables = []
        while self.at_kw("var"):
            self.advance()
            vname = self.ident("variable name").text
            self.expect("COLON", "':'")
            vsort = self.parse_qualified_sort()
            variables.append((vname, vsort))
            self.accept("COMMA")
        scope = _Scope(self, ctype, dict(variables))
        triggers = []
        if self.at_kw("triggers"):
            self.advance()
            self.expect("LBRACE", "'{'")
            triggers = self.comma_list(
                lambda: self.parse_trigger(scope), ("RBRACE",))
            self.expect("RBRACE", "'}'")
        self.expect_kw("guarantees")
        self.expect("LBRACE", "'{'")
        guarantee = self.parse_predicate(scope)
        self.expect("RBRACE", "'}'")
        self.expect_kw("duration")
        duration = self.nat()
        proof = None
        if arch and self.at_kw("proof"):
            proof = self.parse_proof(scope, triggers)
        self.expect("RBRACE", "'}'")
        owner = ctype.name if ctype else ""
        if arch:
            return m.ArchitectureContract(
                name=name, owner=owner, variables=tuple(variables),
                triggers=tuple(triggers), guarantee=guarantee,
                duration=duration, proof=proof, span=start.span)
        return m.Contract(name=name, owner=owner, variables=tuple(variables),
                          triggers=tuple(triggers), guarantee=guarantee,
                          duration=duration, span=start.span)

    def parse_arch_contract(self):
        return self.parse_contract(None, arch=True)

    def parse_trigger(self, scope):
        label_tok = self.ident("trigger label")
        self.expect("COLON", "':'")
        pred = self.parse_predicate(scope)
        time = 0
        if self.at_kw("at"):
            self.advance()
            time = self.nat()
        return m.Trigger(label=label_tok.text, predicate=pred, time=time,
                         span=label_tok.span)

    # -- proofs ----------------------------------------------------------------

    def parse_proof(self, scope, triggers):
        self.expect_kw("proof")
        self.expect("LBRACE", "'{'")
        trigger_labels = {t.label: i for i, t in enumerate(triggers)}
        steps = []
        step_labels = {}

        def parse_step():
            label_tok = self.ident("step label")
            self.expect("COLON", "':'")
            self.expect_kw("at")
            time = self.nat()
            self.expect_kw("have")
            state = self.parse_predicate(scope)
            refs = []
            if self.at_kw("from"):
                self.advance()
                self.expect("LBRACK", "'['")
                refs = self.comma_list(
                    lambda: self.parse_ref_set(trigger_labels, step_labels),
                    ("RBRACK",))
                self.expect("RBRACK", "']'")
            self.expect_kw("using")
            rationale = self.parse_qualified_name("contract reference")
            step = m.ProofStep(label=label_tok.text, time=time, state=state,
                               rationale=rationale,
                               refs=tuple(tuple(r) for r in refs),
                               span=label_tok.span)
            step_labels[step.label] = len(steps)
            steps.append(step)
            return step

        self.comma_list(parse_step, ("RBRACE",))
        self.expect("RBRACE", "'}'")
        return tuple(steps)

    def parse_ref_set(self, trigger_labels, step_labels):
        if self.accept("LBRACE"):
            refs = self.comma_list(
                lambda: self.parse_ref(trigger_labels, step_labels),
                ("RBRACE",))
            self.expect("RBRACE", "'}'")
            return [r for r in refs if r is not None]
        r = self.parse_ref(trigger_labels, step_labels)
        return [r] if r is not None else []

    def parse_ref(self, trigger_labels, step_labels):
        label_tok = self.ident("trigger or step label")
        label = label_tok.text
        connections = []
        has_with = False
        if self.at_kw("with"):
            has_with = True
            self.advance()
            self.expect("LBRACK", "'['")
            connections = self.comma_list(self.parse_connection, ("RBRACK",))
            self.expect("RBRACK", "']'")
        if label in step_labels:
            return m.StepRef(index=step_labels[label],
                             connections=tuple(connections), label=label)
        if label in trigger_labels:
            if has_with:
                self.error("'with' is only allowed on step references",
                           label_tok.span)
            return m.TriggerRef(index=trigger_labels[label], label=label)
        self.diags.append(Diagnostic(ERROR, "UNKNOWN_LABEL",
                                     "unknown trigger or step label '%s'"
                                     % label, label_tok.span))
        return None

    def parse_connection(self):
        self.expect("LPAREN", "'('")
        p_in = self.parse_port_ref()
        self.expect("COMMA", "','")
        p_out = self.parse_port_ref()
        self.expect("RPAREN", "')'")
        if p_in is None or p_out is None:
            return None
        return (p_in, p_out)

    def parse_port_ref(self):
        tok = self.ident("qualified port")
        self.expect("DOT", "'.'")
        pname = self.ident("port name").text
        ct = next((c for c in self.component_types if c.name == tok.text),
                  None)
        port = None
        if ct is not None:
            port = next((p for p in ct.ports if p.name == pname), None)
        if port is None:
            self.diags.append(Diagnostic(ERROR, "UNDECLARED_PORT",
                                         "unknown port '%s.%s'"
                                         % (tok.text, pname), tok.span))
        return port

    def parse_qualified_name(self, what):
        first = self.ident(what).text
        self.expect("DOT", "'.'")
        second = self.ident(what).text
        return "%s.%s" % (first, second)

    # -- predicates and terms ----------------------------------------------

    def parse_predicate(self, scope):
        lhs = self.parse_conjunction(scope)
        while self.accept("OR"):
            rhs = self.parse_conjunction(scope)
            lhs = m.Or(lhs, rhs)
        return lhs

    def parse_conjunction(self, scope):
        lhs = self.parse_atom(scope)
        while self.accept("AND"):
            rhs = self.parse_atom(scope)
            lhs = m.And(lhs, rhs)
        return lhs

    def parse_atom(self, scope):
        if self.accept("LPAREN"):
            p = self.parse_predicate(scope)
            self.expect("RPAREN", "')'")
            return p
        if self.accept("LBRACK"):
            lhs = self.parse_term(scope)
            self.expect("EQ", "'='")
            rhs = self.parse_term(scope)
            self.expect("RBRACK", "']'")
            return m.Eq(lhs, rhs)
        # predicate-symbol application: DT.pred[args]
        tok = self.ident("predicate")
        self.expect("DOT", "'.'")
        sym = self.ident("predicate name").text
        qualified = "%s.%s" % (tok.text, sym)
        self.expect("LBRACK", "'['")
        args = self.comma_list(lambda: self.parse_term(scope), ("RBRACK",))
        self.expect("RBRACK", "']'")
        if qualified not in self.signature.predicate_symbols:
            self.diags.append(Diagnostic(
                ERROR, "UNDECLARED_SYMBOL",
                "'%s' is not a declared predicate" % qualified, tok.span))
        return m.Atom(qualified, tuple(args))

    def parse_term(self, scope):
        tok = self.ident("term")
        if self.at("DOT"):
            self.advance()
            second = self.ident("name").text
            qualified = "%s.%s" % (tok.text, second)
            if self.accept("LBRACK"):
                args = self.comma_list(lambda: self.parse_term(scope),
                                       ("RBRACK",))
                self.expect("RBRACK", "']'")
                if qualified not in self.signature.operation_symbols:
                    self.diags.append(Diagnostic(
                        ERROR, "UNDECLARED_SYMBOL",
                        "'%s' is not a declared operation" % qualified,
                        tok.span))
                return m.App(qualified, tuple(args))
            port = scope.resolve_qualified_port(tok.text, second)
            if port is not None:
                return m.PortRef(port)
            self.diags.append(Diagnostic(ERROR, "UNDECLARED_PORT",
                                         "unknown port '%s'" % qualified,
                                         tok.span))
            return m.Var(qualified, "?")
        return scope.resolve(tok, self)


class _Scope:
    """Resolution context for terms inside one contract."""

    def __init__(self, parser, ctype, variables):
        self.parser = parser
        self.ctype = ctype               # None for architecture contracts
        self.variables = variables       # name -> sort

    def resolve(self, tok, parser):
        name = tok.text
        if name in self.variables:
            return m.Var(name, self.variables[name])
        if self.ctype is not None:
            port = next((p for p in self.ctype.ports if p.name == name), None)
            if port is not None:
                return m.PortRef(port)
        parser.diags.append(Diagnostic(
            ERROR, "UNDECLARED_VARIABLE",
            "unknown variable or port '%s'" % name, tok.span))
        return m.Var(name, "?")

    def resolve_qualified_port(self, owner, pname):
        # the enclosing component is not yet registered while its own
        # contracts are being parsed
        if self.ctype is not None and self.ctype.name == owner:
            ct = self.ctype
        else:
            ct = next((c for c in self.parser.component_types
                       if c.name == owner), None)
        if ct is None:
            return None
        return next((p for p in ct.ports if p.name == pname), None)


def parse_model(text, filename="<input>"):
    """Parse source text into a (Model, diagnostics) pair."""
    tokens, diags = tokenize(text, filename)
    parser = Parser(tokens, diags)
    model = parser.parse_model()
    return model, diags
