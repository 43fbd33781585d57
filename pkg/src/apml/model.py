"""Domain model: signatures, ports, component types, contracts and proofs.

All types are immutable after construction and safe to share; validation is
pure and returns diagnostics instead of raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .diagnostics import (Diagnostic, SourceSpan, ERROR, WARNING)

NO_SPAN = SourceSpan()


# ---------------------------------------------------------------------------
# Signature

@dataclass(frozen=True)
class DataType:
    """One DT block: an optional sort plus predicate/operation symbols.

    Sorts and symbols are namespaced by the DT name; the qualified form
    ``DT.name`` is the canonical identifier used everywhere else.
    """

    name: str
    sort: Optional[str] = None           # unqualified sort name, if declared
    predicates: tuple = ()               # (name, (arg_sort, ...)) pairs
    operations: tuple = ()               # (name, (arg_sorts...), result_sort)
    span: SourceSpan = field(default=NO_SPAN, compare=False)


class Signature:
    """Lookup view over the DT declarations of a model."""

    def __init__(self, datatypes):
        self.sorts = set()
        self.predicate_symbols = {}      # qualified name -> arg sort tuple
        self.operation_symbols = {}      # qualified name -> (args, result)
        for dt in datatypes:
            if dt.sort is not None:
                self.sorts.add("%s.%s" % (dt.name, dt.sort))
            for name, args in dt.predicates:
                self.predicate_symbols["%s.%s" % (dt.name, name)] = args
            for name, args, result in dt.operations:
                self.operation_symbols["%s.%s" % (dt.name, name)] = (args, result)


# ---------------------------------------------------------------------------
# Ports and terms

INPUT = "input"
OUTPUT = "output"


@dataclass(frozen=True)
class Port:
    name: str
    owner: str
    direction: str
    sort: str                            # qualified sort name

    @property
    def qualified(self):
        return "%s.%s" % (self.owner, self.name)

    def __str__(self):
        return self.qualified


@dataclass(frozen=True)
class Var:
    name: str
    sort: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class PortRef:
    port: Port

    def __str__(self):
        return self.port.qualified


@dataclass(frozen=True)
class App:
    op: str                              # qualified operation name
    args: tuple

    def __str__(self):
        return "%s[%s]" % (self.op, ", ".join(str(a) for a in self.args))


Term = Union[Var, PortRef, App]


# ---------------------------------------------------------------------------
# Predicates

@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term

    def __str__(self):
        return "[%s = %s]" % (self.lhs, self.rhs)


@dataclass(frozen=True)
class Atom:
    pred: str                            # qualified predicate name
    args: tuple

    def __str__(self):
        return "%s[%s]" % (self.pred, ", ".join(str(a) for a in self.args))


@dataclass(frozen=True)
class And:
    lhs: "Predicate"
    rhs: "Predicate"

    def __str__(self):
        return "%s /\\ %s" % (self.lhs, self.rhs)


@dataclass(frozen=True)
class Or:
    lhs: "Predicate"
    rhs: "Predicate"

    def __str__(self):
        return "(%s) \\/ (%s)" % (self.lhs, self.rhs)


Predicate = Union[Eq, Atom, And, Or]


def conjuncts(p):
    if isinstance(p, And):
        return conjuncts(p.lhs) + conjuncts(p.rhs)
    return [p]


def conjoin(preds):
    out = None
    for p in preds:
        out = p if out is None else And(out, p)
    return out


def terms_of(p):
    """All top-level terms occurring in a predicate."""
    if isinstance(p, Eq):
        return [p.lhs, p.rhs]
    if isinstance(p, Atom):
        return list(p.args)
    return terms_of(p.lhs) + terms_of(p.rhs)


def ports_of(p):
    out = set()

    def walk_term(t):
        if isinstance(t, PortRef):
            out.add(t.port)
        elif isinstance(t, App):
            for a in t.args:
                walk_term(a)

    for t in terms_of(p):
        walk_term(t)
    return out


def free_variables(p):
    """Names of the contract variables occurring in a predicate."""
    out = set()

    def walk_term(t):
        if isinstance(t, Var):
            out.add(t.name)
        elif isinstance(t, App):
            for a in t.args:
                walk_term(a)

    for t in terms_of(p):
        walk_term(t)
    return out


def substitute(p, subst):
    """Replace variables by terms throughout a predicate or term."""
    def on_term(t):
        if isinstance(t, Var):
            return subst.get(t.name, t)
        if isinstance(t, App):
            return App(t.op, tuple(on_term(a) for a in t.args))
        return t

    if isinstance(p, (Var, PortRef, App)):
        return on_term(p)
    if isinstance(p, Eq):
        return Eq(on_term(p.lhs), on_term(p.rhs))
    if isinstance(p, Atom):
        return Atom(p.pred, tuple(on_term(a) for a in p.args))
    if isinstance(p, And):
        return And(substitute(p.lhs, subst), substitute(p.rhs, subst))
    return Or(substitute(p.lhs, subst), substitute(p.rhs, subst))


def rename_variables(p, mapping):
    return substitute(p, {old: Var(new, sort)
                          for old, (new, sort) in mapping.items()})


# ---------------------------------------------------------------------------
# Contracts

@dataclass(frozen=True)
class Trigger:
    label: str
    predicate: Predicate
    time: int
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class Contract:
    name: str
    owner: str                           # component type name, "" for arch
    variables: tuple                     # ordered (name, sort) pairs
    triggers: tuple                      # of Trigger
    guarantee: Predicate
    duration: int
    span: SourceSpan = field(default=NO_SPAN, compare=False)

    @property
    def qualified(self):
        return "%s.%s" % (self.owner, self.name) if self.owner else self.name

    def variable_sort(self, name):
        for n, s in self.variables:
            if n == name:
                return s
        return None


# ---------------------------------------------------------------------------
# Proofs

@dataclass(frozen=True)
class TriggerRef:
    index: int
    label: str = field(default="", compare=False)


@dataclass(frozen=True)
class StepRef:
    index: int
    connections: tuple                   # of (input Port, output Port)
    label: str = field(default="", compare=False)


Reference = Union[TriggerRef, StepRef]


@dataclass(frozen=True)
class ProofStep:
    label: str
    time: int
    state: Predicate
    rationale: str                       # qualified CType.contract name
    refs: tuple                          # of tuple[Reference, ...] (a set each)
    span: SourceSpan = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ArchitectureContract(Contract):
    proof: Optional[tuple] = None        # of ProofStep


# ---------------------------------------------------------------------------
# Components, architectures, model

@dataclass(frozen=True)
class ComponentType:
    name: str
    inputs: tuple                        # of Port
    outputs: tuple                       # of Port
    contracts: tuple                     # of Contract
    span: SourceSpan = field(default=NO_SPAN, compare=False)

    @property
    def ports(self):
        return self.inputs + self.outputs

    def contract(self, name):
        for c in self.contracts:
            if c.name == name:
                return c
        return None


@dataclass(frozen=True)
class Model:
    name: str
    short_name: str
    datatypes: tuple = ()                # of DataType
    component_types: tuple = ()          # of ComponentType
    connections: tuple = ()              # of (input Port, output Port)
    contracts: tuple = ()                # of ArchitectureContract

    @property
    def signature(self):
        return Signature(self.datatypes)

    def component(self, name):
        for ct in self.component_types:
            if ct.name == name:
                return ct
        return None

    def find_contract(self, qualified):
        owner, _, name = qualified.rpartition(".")
        ct = self.component(owner)
        return ct.contract(name) if ct else None

    def connection_map(self):
        """input port -> output port (first declaration wins on conflict)."""
        out = {}
        for p_in, p_out in self.connections:
            out.setdefault(p_in, p_out)
        return out

    def all_ports(self):
        return [p for ct in self.component_types for p in ct.ports]


EMPTY_MODEL = Model(name="", short_name="")


def architecture_interface(model):
    """Disconnected ports: (interface inputs, interface outputs)."""
    conn = model.connection_map()
    connected_out = set(conn.values())
    inputs = {p for ct in model.component_types for p in ct.inputs
              if p not in conn}
    outputs = {p for ct in model.component_types for p in ct.outputs
               if p not in connected_out}
    return inputs, outputs


# ---------------------------------------------------------------------------
# Structural validation

def term_sort(term, signature):
    """Result sort of a term, or None if not inferable."""
    if isinstance(term, Var):
        return term.sort
    if isinstance(term, PortRef):
        return term.port.sort
    op = signature.operation_symbols.get(term.op)
    return op[1] if op else None


def _check_term(term, signature, out, span):
    if isinstance(term, App):
        op = signature.operation_symbols.get(term.op)
        if op is None:
            out.append(Diagnostic(ERROR, "UNDECLARED_SYMBOL",
                                  "unknown operation '%s'" % term.op, span))
        else:
            args, _ = op
            if len(args) != len(term.args):
                out.append(Diagnostic(
                    ERROR, "SORT_MISMATCH",
                    "operation '%s' expects %d arguments, got %d"
                    % (term.op, len(args), len(term.args)), span))
            else:
                for expected, arg in zip(args, term.args):
                    got = term_sort(arg, signature)
                    if got is not None and got != expected:
                        out.append(Diagnostic(
                            ERROR, "SORT_MISMATCH",
                            "argument of '%s' has sort %s, expected %s"
                            % (term.op, got, expected), span))
        for a in term.args:
            _check_term(a, signature, out, span)


def check_predicate_sorts(pred, signature, out, span=NO_SPAN):
    if isinstance(pred, (And, Or)):
        check_predicate_sorts(pred.lhs, signature, out, span)
        check_predicate_sorts(pred.rhs, signature, out, span)
        return
    if isinstance(pred, Eq):
        _check_term(pred.lhs, signature, out, span)
        _check_term(pred.rhs, signature, out, span)
        ls = term_sort(pred.lhs, signature)
        rs = term_sort(pred.rhs, signature)
        if ls is not None and rs is not None and ls != rs:
            out.append(Diagnostic(
                ERROR, "SORT_MISMATCH",
                "equality between sorts %s and %s" % (ls, rs), span))
        return
    # Atom
    sig = signature.predicate_symbols.get(pred.pred)
    if sig is None:
        out.append(Diagnostic(ERROR, "UNDECLARED_SYMBOL",
                              "unknown predicate '%s'" % pred.pred, span))
    else:
        if len(sig) != len(pred.args):
            out.append(Diagnostic(
                ERROR, "SORT_MISMATCH",
                "predicate '%s' expects %d arguments, got %d"
                % (pred.pred, len(sig), len(pred.args)), span))
        else:
            for expected, arg in zip(sig, pred.args):
                got = term_sort(arg, signature)
                if got is not None and got != expected:
                    out.append(Diagnostic(
                        ERROR, "SORT_MISMATCH",
                        "argument of '%s' has sort %s, expected %s"
                        % (pred.pred, got, expected), span))
    for a in pred.args:
        _check_term(a, signature, out, span)


def _check_contract_shape(contract, out):
    span = contract.span
    trig = contract.triggers
    if trig:
        if trig[0].time != 0:
            out.append(Diagnostic(
                ERROR, "CONTRACT_FIRST_TRIGGER_TIME",
                "first trigger of '%s' must be at time 0, got %d"
                % (contract.qualified, trig[0].time), span))
        for a, b in zip(trig, trig[1:]):
            if b.time < a.time:
                out.append(Diagnostic(
                    ERROR, "CONTRACT_TRIGGER_ORDER",
                    "triggers of '%s' not ordered by time (%d after %d)"
                    % (contract.qualified, b.time, a.time), span))
        if contract.duration <= max(t.time for t in trig):
            out.append(Diagnostic(
                ERROR, "CONTRACT_DURATION_POSITIVE",
                "duration %d of '%s' must exceed last trigger time %d"
                % (contract.duration, contract.qualified,
                   max(t.time for t in trig)), span))
    elif contract.duration <= 0:
        out.append(Diagnostic(
            ERROR, "CONTRACT_DURATION_POSITIVE",
            "trigger-less contract '%s' needs duration > 0"
            % contract.qualified, span))


def _check_scopes(contract, inputs, outputs, signature, out):
    for t in contract.triggers:
        bad = ports_of(t.predicate) - inputs
        for p in sorted(bad, key=lambda q: q.qualified):
            out.append(Diagnostic(
                ERROR, "TRIGGER_SCOPE",
                "trigger '%s' of '%s' references non-input port %s"
                % (t.label, contract.qualified, p.qualified), t.span))
        check_predicate_sorts(t.predicate, signature, out, t.span)
    bad = ports_of(contract.guarantee) - outputs
    for p in sorted(bad, key=lambda q: q.qualified):
        out.append(Diagnostic(
            ERROR, "GUARANTEE_SCOPE",
            "guarantee of '%s' references non-output port %s"
            % (contract.qualified, p.qualified), contract.span))
    check_predicate_sorts(contract.guarantee, signature, out, contract.span)


def validate_structure(model):
    """Every type invariant as data; empty list iff the model is well formed."""
    out = []
    signature = model.signature

    seen_dt = set()
    for dt in model.datatypes:
        if dt.name in seen_dt:
            out.append(Diagnostic(WARNING, "DUPLICATE_DT",
                                  "duplicate DT '%s' (last wins)" % dt.name,
                                  dt.span))
        seen_dt.add(dt.name)

    seen_ct = set()
    for ct in model.component_types:
        if ct.name in seen_ct:
            out.append(Diagnostic(ERROR, "DUPLICATE_NAME",
                                  "duplicate component type '%s'" % ct.name,
                                  ct.span))
        seen_ct.add(ct.name)
        in_names = {p.name for p in ct.inputs}
        for p in ct.outputs:
            if p.name in in_names:
                out.append(Diagnostic(
                    ERROR, "PORT_DIRECTION_CONFLICT",
                    "port '%s' of '%s' declared both input and output"
                    % (p.name, ct.name), ct.span))
        names = [p.name for p in ct.ports]
        for n in sorted({n for n in names if names.count(n) > 1}):
            out.append(Diagnostic(ERROR, "DUPLICATE_NAME",
                                  "duplicate port '%s' in '%s'" % (n, ct.name),
                                  ct.span))
        for p in ct.ports:
            if p.sort not in signature.sorts:
                out.append(Diagnostic(
                    ERROR, "UNDECLARED_SORT",
                    "port %s has undeclared sort %s" % (p.qualified, p.sort),
                    ct.span))
        cnames = [c.name for c in ct.contracts]
        for n in sorted({n for n in cnames if cnames.count(n) > 1}):
            out.append(Diagnostic(ERROR, "DUPLICATE_NAME",
                                  "duplicate contract '%s' in '%s'"
                                  % (n, ct.name), ct.span))
        inputs, outputs = set(ct.inputs), set(ct.outputs)
        for c in ct.contracts:
            _check_contract_shape(c, out)
            _check_scopes(c, inputs, outputs, signature, out)

    all_ports = set(model.all_ports())
    seen_inputs = set()
    for p_in, p_out in model.connections:
        if p_in.direction != INPUT:
            out.append(Diagnostic(ERROR, "CONNECTION_NOT_INPUT",
                                  "connection source %s is not an input port"
                                  % p_in.qualified))
        if p_out.direction != OUTPUT:
            out.append(Diagnostic(ERROR, "CONNECTION_NOT_OUTPUT",
                                  "connection target %s is not an output port"
                                  % p_out.qualified))
        if p_in not in all_ports or p_out not in all_ports:
            out.append(Diagnostic(ERROR, "UNDECLARED_PORT",
                                  "connection (%s, %s) references unknown port"
                                  % (p_in.qualified, p_out.qualified)))
        if p_in in seen_inputs:
            out.append(Diagnostic(ERROR, "CONNECTION_DUPLICATE_INPUT",
                                  "input %s connected more than once"
                                  % p_in.qualified))
        seen_inputs.add(p_in)
        if p_in.sort != p_out.sort:
            out.append(Diagnostic(
                ERROR, "CONNECTION_SORT_MISMATCH",
                "connected ports %s : %s and %s : %s differ in sort"
                % (p_in.qualified, p_in.sort, p_out.qualified, p_out.sort)))

    if_inputs, if_outputs = architecture_interface(model)
    anames = [c.name for c in model.contracts]
    for n in sorted({n for n in anames if anames.count(n) > 1}):
        out.append(Diagnostic(ERROR, "DUPLICATE_NAME",
                              "duplicate architecture contract '%s'" % n))
    for c in model.contracts:
        _check_contract_shape(c, out)
        for t in c.triggers:
            for p in sorted(ports_of(t.predicate) - if_inputs,
                            key=lambda q: q.qualified):
                rule = ("ARCH_PORT_CONNECTED" if p in all_ports
                        else "UNDECLARED_PORT")
                out.append(Diagnostic(
                    ERROR, rule,
                    "trigger '%s' of '%s' references %s, which is not an "
                    "interface input" % (t.label, c.name, p.qualified),
                    t.span))
            check_predicate_sorts(t.predicate, signature, out, t.span)
        for p in sorted(ports_of(c.guarantee) - if_outputs,
                        key=lambda q: q.qualified):
            rule = ("ARCH_PORT_CONNECTED" if p in all_ports
                    else "UNDECLARED_PORT")
            out.append(Diagnostic(
                ERROR, rule,
                "guarantee of '%s' references %s, which is not an interface "
                "output" % (c.name, p.qualified), c.span))
        check_predicate_sorts(c.guarantee, signature, out, c.span)

    return out
