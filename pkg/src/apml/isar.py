"""Emission of Isabelle theory files from checked models.

A model becomes one theory: type declarations for unmapped sorts, a locale
fixing one time-indexed function per port with one assumption per component
contract and per connection, and one theorem per architecture contract whose
Isar proof replays the architecture proof step by step.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import model as m
from . import checker

SORT_MAP = {
    "NAT": "nat",
    "INT": "int",
    "BOOLEAN": "bool",
    "STRING": "string",
}

# operations rendered as Isabelle infix operators
INFIX_OPS = {
    "add": "+",
    "sub": "-",
}


class UnmappedSymbol(Exception):
    """Raised in strict mode for symbols without a built-in Isabelle image."""


@dataclass
class EmitConfig:
    comments: bool = True            # traceability comments per proof step
    legacy_connection_names: bool = False
    strict_symbols: bool = False


def _camel_parts(word):
    return re.findall(r"[A-Za-z][a-z]*|[0-9]+", word)


def abbreviate(name):
    """Initials of the camel/underscore parts, digit runs kept whole."""
    out = []
    for word in name.split("_"):
        for part in _camel_parts(word):
            out.append(part if part.isdigit() else part[0].lower())
    return "".join(out)


def _sanitize(name):
    clean = re.sub(r"[^A-Za-z0-9_']", "_", name)
    if not clean or not clean[0].isalpha():
        clean = "v" + clean
    return clean


def port_names(model):
    """Deterministic port parameter names, unique across the model.

    Components first get the abbreviated prefix; any component involved in a
    name collision falls back to its full sanitized name as prefix.
    """
    prefix = {ct.name: abbreviate(ct.name) for ct in model.component_types}
    while True:
        names = {}
        collided = set()
        for ct in model.component_types:
            for p in ct.ports:
                pname = _sanitize(prefix[ct.name] + p.name)
                if pname in names:
                    collided.add(ct.name)
                    collided.add(names[pname].owner)
                names[pname] = p
        if not collided:
            break
        progressed = False
        for ct_name in collided:
            full = _sanitize(ct_name).lower() + "_"
            if prefix[ct_name] != full:
                prefix[ct_name] = full
                progressed = True
        if not progressed:
            break
    return {p.qualified: name for name, p in
            {_sanitize(prefix[ct.name] + p.name): p
             for ct in model.component_types for p in ct.ports}.items()}


def sort_name(sort):
    """Isabelle type for a qualified sort; unmapped sorts keep their name."""
    base = sort.rpartition(".")[2]
    return SORT_MAP.get(base, _sanitize(base))


def unmapped_sorts(model):
    out = []
    for ct in model.component_types:
        for p in ct.ports:
            base = p.sort.rpartition(".")[2]
            if base not in SORT_MAP and _sanitize(base) not in out:
                out.append(_sanitize(base))
    return out


def _symbols_used(model):
    """(predicate symbols, operation symbols) referenced anywhere, in order."""
    preds, ops = [], []

    def walk_term(t):
        if isinstance(t, m.App):
            if t.op not in ops:
                ops.append(t.op)
            for a in t.args:
                walk_term(a)

    def walk(p):
        if isinstance(p, (m.And, m.Or)):
            walk(p.lhs)
            walk(p.rhs)
            return
        if isinstance(p, m.Atom) and p.pred not in preds:
            preds.append(p.pred)
        for t in m.terms_of(p):
            walk_term(t)

    def walk_contract(c):
        for t in c.triggers:
            walk(t.predicate)
        walk(c.guarantee)
        for s in (getattr(c, "proof", None) or ()):
            walk(s.state)

    for ct in model.component_types:
        for c in ct.contracts:
            walk_contract(c)
    for c in model.contracts:
        walk_contract(c)
    return preds, ops


def symbol_params(model, config):
    """Locale parameter name and type for every non-built-in symbol."""
    signature = model.signature
    preds, ops = _symbols_used(model)
    params = {}                      # qualified symbol -> (name, type)

    def short(qualified):
        return qualified.rpartition(".")[2]

    used = set()
    for q in preds + ops:
        base = short(q)
        if base in INFIX_OPS and q in ops:
            continue
        if config.strict_symbols:
            raise UnmappedSymbol(q)
        name = _sanitize(base)
        if name in used:
            name = _sanitize(q.replace(".", "_"))
        used.add(name)
        if q in preds:
            args = signature.predicate_symbols.get(q, ())
            ty = " \\<Rightarrow> ".join([sort_name(s) for s in args]
                                        + ["bool"])
        else:
            args, result = signature.operation_symbols.get(q, ((), None))
            sorts = [sort_name(s) for s in args]
            sorts.append(sort_name(result) if result else "'a")
            ty = " \\<Rightarrow> ".join(sorts)
        params[q] = (name, ty)
    return params


# ---------------------------------------------------------------------------
# Predicate rendering

class Renderer:
    def __init__(self, model, config=None):
        self.model = model
        self.config = config or EmitConfig()
        self.ports = port_names(model)
        self.params = symbol_params(model, self.config)

    def term(self, t, time, atomic=False):
        if isinstance(t, m.Var):
            return _sanitize(t.name)
        if isinstance(t, m.PortRef):
            q = self.ports[t.port.qualified]
            s = "%s n" % q if time == 0 else "%s (n+%d)" % (q, time)
            return "(%s)" % s if atomic else s
        base = t.op.rpartition(".")[2]
        if base in INFIX_OPS:
            s = (" %s " % INFIX_OPS[base]).join(
                self.term(a, time, atomic=isinstance(a, m.App))
                for a in t.args)
            return "(%s)" % s if atomic else s
        name = self.params[t.op][0]
        s = " ".join([name] + [self.term(a, time, atomic=True)
                               for a in t.args])
        return "(%s)" % s if atomic else s

    def _leaf(self, p, time):
        if isinstance(p, m.Eq):
            return "%s = %s" % (self.term(p.lhs, time),
                                self.term(p.rhs, time))
        name = self.params[p.pred][0]
        return " ".join([name] + [self.term(a, time, atomic=True)
                                  for a in p.args])

    def predicate(self, p, time, outer=True):
        """Conclusion-style rendering: conjunction with \\<and>."""
        if isinstance(p, m.And):
            s = " \\<and> ".join(self.predicate(c, time, outer=False)
                                 for c in m.conjuncts(p))
            return s if outer else "(%s)" % s
        if isinstance(p, m.Or):
            s = " \\<or> ".join(
                self.predicate(d, time, outer=False)
                for d in _disjuncts(p))
            return "(%s)" % s
        return self._leaf(p, time)

    def premises(self, p, time):
        """Premise-style rendering: top-level conjuncts become a list."""
        return [self.predicate(c, time) for c in m.conjuncts(p)]


def _disjuncts(p):
    if isinstance(p, m.Or):
        return _disjuncts(p.lhs) + _disjuncts(p.rhs)
    return [p]


# ---------------------------------------------------------------------------
# Locale

def _assumption_names(model):
    """Contract assumption names, full component name prefix on collision."""
    counts = {}
    for ct in model.component_types:
        for c in ct.contracts:
            counts[c.name] = counts.get(c.name, 0) + 1
    out = {}
    for ct in model.component_types:
        for c in ct.contracts:
            name = c.name if counts[c.name] == 1 else \
                _sanitize("%s_%s" % (ct.name, c.name))
            out[c.qualified] = _sanitize(name)
    return out


def contract_assumption(renderer, contract):
    vars_ = " ".join(_sanitize(n) for n, _ in contract.variables)
    binder = "\\<And>n%s. " % ((" " + vars_) if vars_ else "")
    concl = renderer.predicate(contract.guarantee, contract.duration)
    if not contract.triggers:
        return '"%s%s"' % (binder, concl)
    prems = []
    for t in contract.triggers:
        prems.extend(renderer.premises(t.predicate, t.time))
    return '"%s\\<lbrakk>%s\\<rbrakk> \\<Longrightarrow> %s"' % (
        binder, "; ".join(prems), concl)


def connection_name(renderer, p_in, p_out, legacy=False):
    a = renderer.ports[p_in.qualified]
    b = renderer.ports[p_out.qualified]
    return "%s_%s" % ((b, a) if legacy else (a, b))


def emit_locale(model, renderer=None, config=None):
    config = config or EmitConfig()
    r = renderer or Renderer(model, config)
    lines = ["locale %s =" % _sanitize(model.short_name or model.name)]
    lines.append("  fixes")
    first = True
    for ct in model.component_types:
        if config.comments:
            lines.append("    (* %s *)" % ct.name)
        decls = []
        for p in ct.ports:
            decls.append('%s::"nat \\<Rightarrow> %s"'
                         % (r.ports[p.qualified], sort_name(p.sort)))
        prefix = "    " if first else "    and "
        lines.append(prefix + " and ".join(decls))
        first = False
    for q, (name, ty) in r.params.items():
        lines.append('    and %s::"%s"' % (name, ty))
    names = _assumption_names(model)
    assumes = []
    for ct in model.component_types:
        for c in ct.contracts:
            assumes.append((names[c.qualified],
                            contract_assumption(r, c)))
    for p_in, p_out in model.connections:
        a = r.ports[p_in.qualified]
        b = r.ports[p_out.qualified]
        assumes.append(("%s_%s" % (a, b),
                        '"\\<And>n. %s n = %s n"' % (a, b)))
        if config.legacy_connection_names:
            assumes.append(("%s_%s" % (b, a),
                            '"\\<And>n. %s n = %s n"' % (a, b)))
    if assumes:
        lines.append("  assumes " + "%s: %s" % assumes[0])
        for name, text in assumes[1:]:
            lines.append("      and %s: %s" % (name, text))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Theorems and proofs

def emit_theorem(model, contract, renderer, name=None):
    r = renderer
    vars_ = " ".join(_sanitize(n) for n, _ in contract.variables)
    lines = ["theorem %s:" % _sanitize(name or contract.name)]
    fixes = "n" + ((" " + vars_) if vars_ else "")
    lines.append("  fixes %s" % fixes)
    for j, t in enumerate(contract.triggers):
        lines.append('  assumes a%d: "%s"'
                     % (j, r.predicate(t.predicate, t.time)))
    lines.append('  shows "%s"'
                 % r.predicate(contract.guarantee, contract.duration))
    return "\n".join(lines)


def emit_isar_proof(model, contract, renderer, config=None, verdict=None):
    """Isar proof text replaying the architecture proof.

    ``verdict`` supplies the per-step variable instantiations; it is computed
    when not given.
    """
    config = config or EmitConfig()
    r = renderer
    if verdict is None:
        verdict = checker.check_proof(model, contract)
    steps = contract.proof or ()
    names = _assumption_names(model)
    lines = ["proof -"]
    for i, step in enumerate(steps):
        rationale = model.find_contract(step.rationale)
        inst = (verdict.steps[i].instantiation
                if i < len(verdict.steps) else None) or {}
        if config.comments:
            lines.append("  (* step %d *)" % i)
        state = r.predicate(step.state, step.time)
        if not step.refs:
            lines.append('  have s%d: "%s" by simp' % (i, state))
            continue
        for j, ref_set in enumerate(step.refs):
            time = checker.reference_time(ref_set[0], contract, steps)
            facts = []
            for ref in ref_set:
                facts.append(("a%d" if isinstance(ref, m.TriggerRef)
                              else "s%d") % ref.index)
            trigger = (rationale.triggers[j].predicate
                       if rationale and j < len(rationale.triggers) else None)
            goal = (r.predicate(m.substitute(trigger, inst), time)
                    if trigger is not None else state)
            conn_names = []
            for ref in ref_set:
                for p_in, p_out in getattr(ref, "connections", ()):
                    conn_names.append(connection_name(r, p_in, p_out))
                    if config.legacy_connection_names:
                        conn_names.append(
                            connection_name(r, p_in, p_out, legacy=True))
            using = (" using %s" % " ".join(conn_names)) if conn_names else ""
            prefix = "  moreover " if j > 0 else "  "
            lines.append('%sfrom %s have "%s"%s by simp'
                         % (prefix, " ".join(facts), goal, using))
        closer = "hence" if len(step.refs) == 1 else "ultimately have"
        rname = names.get(step.rationale,
                          _sanitize(step.rationale.replace(".", "_")))
        lines.append('  %s s%d: "%s" using %s by blast'
                     % (closer, i, state, rname))
    lines.append("  thus ?thesis by auto")
    lines.append("qed")
    return "\n".join(lines)


def emit_theory(model, config=None, verdicts=None):
    """Complete theory file for a model."""
    config = config or EmitConfig()
    r = Renderer(model, config)
    theory = _sanitize(model.short_name or model.name)
    out = ["theory %s" % theory, "  imports Main", "begin", ""]
    for s in unmapped_sorts(model):
        out.append("typedecl %s" % s)
    if unmapped_sorts(model):
        out.append("")
    out.append(emit_locale(model, r, config))
    out.append("begin")
    out.append("")
    if verdicts is None:
        verdicts = checker.check_model(model)
    seen = {}
    for idx, contract in enumerate(model.contracts):
        name = _sanitize(contract.name)
        seen[name] = seen.get(name, 0) + 1
        if seen[name] > 1:
            name = "%s_%d" % (name, seen[name])
        out.append(emit_theorem(model, contract, r, name))
        if contract.proof is None:
            out.append("  oops")
        else:
            out.append(emit_isar_proof(model, contract, r, config,
                                       verdicts[idx]))
        out.append("")
    out.append("end")
    out.append("")
    out.append("end")
    return "\n".join(out) + "\n"
