"""Checks architecture proofs against the proof calculus.

A proof step applies one component contract (its rationale) at a shifted time
base.  Each reference set feeds one trigger position of the rationale:

* C1  references point at architecture triggers or earlier steps only
* C2  all entries of one reference set agree in time, and set j sits at the
      base time (the time of set 0) plus the trigger's offset
* C3  the referenced facts, together with the referenced connection
      equalities, entail the instantiated trigger predicate
* C4  the step's time is the base time plus the rationale's duration
* C5  the instantiated guarantee entails the step's state

A step whose rationale has no triggers must carry no references; its base
time is the step time minus the rationale duration.  After the last step the
proof must reach the architecture guarantee (FINAL_STATE) exactly at the
architecture duration (FINAL_TIME).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import model as m
from . import entailment as e

OK = "ok"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"
NO_PROOF = "no-proof"

# closed set of finding codes
CONDITIONS = frozenset([
    "UNKNOWN_RATIONALE", "REF_ARITY", "EMPTY_REFSET", "UNKNOWN_CONNECTION",
    "STATE_SCOPE", "C1", "C2", "C3", "C4", "C5",
    "FINAL_STATE", "FINAL_TIME",
])


@dataclass(frozen=True)
class Finding:
    condition: str
    status: str                      # VIOLATED or INCONCLUSIVE
    message: str
    step: int = -1                   # -1 for proof-level findings

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError("unknown condition %r" % self.condition)


@dataclass(frozen=True)
class StepVerdict:
    index: int
    label: str
    status: str
    findings: tuple = ()
    warnings: tuple = ()             # informational, e.g. ambiguous matches
    # chosen instantiation of the rationale's variables (original names),
    # None when no match was established
    instantiation: dict = field(default=None, compare=False)


@dataclass(frozen=True)
class ProofVerdict:
    contract: str
    status: str
    steps: tuple = ()
    findings: tuple = ()             # proof-level (final state/time)

    @property
    def all_findings(self):
        return tuple(f for s in self.steps for f in s.findings) + self.findings


def _combine(statuses):
    if VIOLATED in statuses:
        return VIOLATED
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return OK


def reference_time(ref, contract, steps):
    if isinstance(ref, m.TriggerRef):
        return contract.triggers[ref.index].time
    return steps[ref.index].time


def _ref_name(ref):
    return ref.label or ("t%d" % ref.index if isinstance(ref, m.TriggerRef)
                         else "s%d" % ref.index)


def _rename_rationale(rationale, index):
    """Fresh names for the rationale's variables, per step."""
    return {name: ("%s@%d" % (name, index), sort)
            for name, sort in rationale.variables}


def _reference_facts(ref_set, contract, steps, connections):
    """Facts contributed by one reference set, plus any unknown connections."""
    facts, unknown = [], []
    for ref in ref_set:
        if isinstance(ref, m.TriggerRef):
            facts.append(contract.triggers[ref.index].predicate)
        else:
            facts.append(steps[ref.index].state)
            for p_in, p_out in ref.connections:
                if (p_in, p_out) not in connections:
                    unknown.append((p_in, p_out))
                facts.append(m.Eq(m.PortRef(p_in), m.PortRef(p_out)))
    return facts, unknown


def check_step(model, contract, steps, index, budget=e.DEFAULT_BUDGET):
    step = steps[index]
    findings = []
    warnings = []
    signature = model.signature
    connections = set(model.connections)

    rationale = model.find_contract(step.rationale)
    if rationale is None:
        findings.append(Finding("UNKNOWN_RATIONALE", VIOLATED,
                                "step %d applies unknown contract '%s'"
                                % (index, step.rationale), index))
        return StepVerdict(index, step.label, VIOLATED, tuple(findings))

    owner = model.component(rationale.owner)
    state_ports = m.ports_of(step.state)
    bad = sorted(state_ports - set(owner.outputs), key=lambda p: p.qualified)
    if bad:
        findings.append(Finding(
            "STATE_SCOPE", VIOLATED,
            "step %d state references %s, not an output of %s"
            % (index, ", ".join(p.qualified for p in bad), rationale.owner),
            index))

    # C1: the parser only resolves architecture triggers and earlier steps,
    # so re-check defensively on the resolved indices
    for ref_set in step.refs:
        for ref in ref_set:
            ok = (ref.index < len(contract.triggers)
                  if isinstance(ref, m.TriggerRef) else ref.index < index)
            if not ok:
                findings.append(Finding(
                    "C1", VIOLATED,
                    "step %d references %s, which is not an architecture "
                    "trigger or an earlier step" % (index, _ref_name(ref)),
                    index))

    for set_no, ref_set in enumerate(step.refs):
        if not ref_set:
            findings.append(Finding("EMPTY_REFSET", VIOLATED,
                                    "step %d reference set %d is empty"
                                    % (index, set_no), index))
    if any(f.status == VIOLATED for f in findings):
        return StepVerdict(index, step.label, VIOLATED, tuple(findings))

    n_trig = len(rationale.triggers)
    if len(step.refs) != n_trig:
        findings.append(Finding(
            "REF_ARITY", VIOLATED,
            "step %d has %d reference sets but rationale '%s' has %d "
            "trigger(s)" % (index, len(step.refs), rationale.qualified,
                            n_trig), index))
        return StepVerdict(index, step.label, VIOLATED, tuple(findings))

    renaming = _rename_rationale(rationale, index)
    variables = {new: sort for new, sort in renaming.values()}

    if n_trig == 0:
        # trigger-less rationale: base time is implied by the step time
        if step.time < rationale.duration:
            findings.append(Finding(
                "C4", VIOLATED,
                "step %d at time %d cannot apply '%s' (duration %d) with a "
                "non-negative base time" % (index, step.time,
                                            rationale.qualified,
                                            rationale.duration), index))
            return StepVerdict(index, step.label, VIOLATED, tuple(findings))
        sigmas = [{}]
    else:
        # C2: time agreement inside each set and against the trigger offsets
        times = []
        for set_no, ref_set in enumerate(step.refs):
            ts = sorted({reference_time(r, contract, steps) for r in ref_set})
            if len(ts) > 1:
                findings.append(Finding(
                    "C2", VIOLATED,
                    "step %d reference set %d mixes times %s"
                    % (index, set_no, ", ".join(map(str, ts))), index))
            times.append(ts[0])
        if not findings:
            base = times[0]
            for j, t in enumerate(times):
                expected = base + rationale.triggers[j].time
                if t != expected:
                    findings.append(Finding(
                        "C2", VIOLATED,
                        "step %d reference set %d is at time %d, expected "
                        "%d (base %d + trigger offset %d)"
                        % (index, j, t, expected, base,
                           rationale.triggers[j].time), index))
        if findings:
            return StepVerdict(index, step.label, VIOLATED, tuple(findings))

        # C3: each reference set must entail its trigger, under one shared
        # variable instantiation
        sigmas = [{}]
        for j, ref_set in enumerate(step.refs):
            facts, unknown = _reference_facts(ref_set, contract, steps,
                                              connections)
            for p_in, p_out in unknown:
                findings.append(Finding(
                    "UNKNOWN_CONNECTION", VIOLATED,
                    "step %d uses connection (%s, %s), which the "
                    "architecture does not declare"
                    % (index, p_in.qualified, p_out.qualified), index))
            if any(f.status == VIOLATED for f in findings):
                return StepVerdict(index, step.label, VIOLATED,
                                   tuple(findings))
            goal = m.rename_variables(rationale.triggers[j].predicate,
                                      renaming)
            extended = []
            for sigma in sigmas:
                found = e.match_trigger([goal], facts, variables, signature,
                                        sigma=sigma, budget=budget)
                if found is None:
                    findings.append(Finding(
                        "C3", INCONCLUSIVE,
                        "step %d trigger %d: case split exceeds the budget"
                        % (index, j), index))
                    return StepVerdict(index, step.label, INCONCLUSIVE,
                                       tuple(findings))
                extended.extend(s for s in found if s not in extended)
            sigmas = extended
            if not sigmas:
                findings.append(Finding(
                    "C3", VIOLATED,
                    "step %d: reference set %d does not entail trigger "
                    "'%s' of '%s'" % (index, j,
                                      rationale.triggers[j].label,
                                      rationale.qualified), index))
                return StepVerdict(index, step.label, VIOLATED,
                                   tuple(findings))

        # C4: the step's time is the base plus the rationale's duration
        base = times[0]
        if step.time != base + rationale.duration:
            findings.append(Finding(
                "C4", VIOLATED,
                "step %d is at time %d, expected %d (base %d + duration %d)"
                % (index, step.time, base + rationale.duration, base,
                   rationale.duration), index))
            return StepVerdict(index, step.label, VIOLATED, tuple(findings))

    if len(sigmas) > 1:
        warnings.append("step %d: %d variable instantiations match; trying "
                        "each in order" % (index, len(sigmas)))

    def compose(sigma):
        return {orig: sigma.get(new, m.Var(orig, sort))
                for orig, (new, sort) in renaming.items()}

    # C5: some matching instantiation's guarantee must entail the state
    guarantee = m.rename_variables(rationale.guarantee, renaming)
    last = None
    for sigma in sigmas:
        res = e.entails([m.substitute(guarantee, sigma)], step.state, budget)
        if res.status == e.HOLDS:
            return StepVerdict(index, step.label, OK, tuple(findings),
                               tuple(warnings), compose(sigma))
        last = res
    if last is not None and last.status == e.INCONCLUSIVE:
        findings.append(Finding("C5", INCONCLUSIVE,
                                "step %d: %s" % (index, last.reason), index))
    else:
        findings.append(Finding(
            "C5", VIOLATED,
            "step %d: guarantee of '%s' does not entail the step state"
            % (index, rationale.qualified), index))
    status = _combine([f.status for f in findings])
    return StepVerdict(index, step.label, status, tuple(findings),
                       tuple(warnings),
                       compose(sigmas[0]) if sigmas else None)


def check_proof(model, contract, budget=e.DEFAULT_BUDGET):
    """Verdict for one architecture contract's proof."""
    if contract.proof is None:
        return ProofVerdict(contract.name, NO_PROOF)
    steps = contract.proof
    verdicts = [check_step(model, contract, steps, i, budget)
                for i in range(len(steps))]
    findings = []
    if not steps:
        findings.append(Finding("FINAL_STATE", VIOLATED,
                                "proof of '%s' has no steps" % contract.name))
    else:
        last = steps[-1]
        res = e.entails([last.state], contract.guarantee, budget)
        if res.status == e.FAILS:
            findings.append(Finding(
                "FINAL_STATE", VIOLATED,
                "last state of '%s' does not entail the guarantee"
                % contract.name))
        elif res.status == e.INCONCLUSIVE:
            findings.append(Finding("FINAL_STATE", INCONCLUSIVE, res.reason))
        if last.time != contract.duration:
            findings.append(Finding(
                "FINAL_TIME", VIOLATED,
                "last step of '%s' is at time %d, expected duration %d"
                % (contract.name, last.time, contract.duration)))
    status = _combine([v.status for v in verdicts]
                      + [f.status for f in findings])
    return ProofVerdict(contract.name, status, tuple(verdicts),
                        tuple(findings))


def check_model(model, budget=e.DEFAULT_BUDGET):
    """Proof verdicts for every architecture contract, declaration order."""
    return [check_proof(model, c, budget) for c in model.contracts]


# ---------------------------------------------------------------------------
# Reports

def report_lines(verdicts, diagnostics=()):
    out = []
    for d in diagnostics:
        out.append(str(d))
    for v in verdicts:
        out.append("contract %s: %s" % (v.contract, v.status))
        for s in v.steps:
            out.append("  step %d (%s): %s" % (s.index, s.label, s.status))
            for f in s.findings:
                out.append("    %s %s: %s" % (f.condition, f.status,
                                              f.message))
            for w in s.warnings:
                out.append("    note: %s" % w)
        for f in v.findings:
            out.append("  %s %s: %s" % (f.condition, f.status, f.message))
    return out


def report_text(verdicts, diagnostics=()):
    return "\n".join(report_lines(verdicts, diagnostics)) + "\n"


def overall_status(verdicts, diagnostics=()):
    from .diagnostics import errors
    statuses = [v.status for v in verdicts if v.status != NO_PROOF]
    if errors(diagnostics):
        statuses.append(VIOLATED)
    return _combine(statuses)
