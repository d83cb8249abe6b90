"""Derivation graphs and the independent proof checker."""

from __future__ import annotations

import json
from dataclasses import dataclass

from clausekit.logic import FACTOR, INPUT, RESOLVE, Clause, Origin, factor, format_literal, is_variant, resolve


class DerivationError(ValueError):
    pass


class StepMismatch(DerivationError):
    def __init__(self, clause_id, detail=""):
        super().__init__(f"inference step for clause {clause_id} does not check: {detail}".rstrip(": "))
        self.clause_id = clause_id


class MissingParent(DerivationError):
    def __init__(self, clause_id, parent_id):
        super().__init__(f"clause {clause_id} refers to missing parent {parent_id}")
        self.clause_id = clause_id
        self.parent_id = parent_id


class CycleError(DerivationError):
    def __init__(self, clause_id):
        super().__init__(f"derivation cycle through clause {clause_id}")
        self.clause_id = clause_id


class DerivationGraph:
    """All clauses of one or more saturation runs, keyed by id.

    Edges run from an inferred clause to its ordered parents (its
    ``origin.parents``).  ``empty_id`` names the refutation, if any.
    """

    def __init__(self, clauses=()):
        self.nodes = {}
        self.empty_id = None
        self._next_id = 0
        for c in clauses:
            self.add(c)

    @classmethod
    def from_problem(cls, problem):
        return cls(problem.clauses)

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, cid):
        return cid in self.nodes

    def __getitem__(self, cid):
        return self.nodes[cid]

    def add(self, clause):
        """Insert a clause that already carries an id."""
        if clause.id is None:
            raise ValueError("clause has no id")
        self.nodes[clause.id] = clause
        self._next_id = max(self._next_id, clause.id + 1)
        if clause.is_empty and self.empty_id is None:
            self.empty_id = clause.id
        return clause

    def new(self, clause):
        """Assign the next free id to an inferred clause and insert it."""
        stored = clause.with_id(self._next_id)
        return self.add(stored)

    def parents(self, cid):
        return self.nodes[cid].origin.parents

    def ancestors(self, cid):
        """Ancestor closure of ``cid`` including itself."""
        seen = set()
        stack = [cid]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            if x not in self.nodes:
                continue
            stack.extend(self.nodes[x].origin.parents)
        return seen

    @property
    def proof_ids(self):
        if self.empty_id is None:
            return set()
        return self.ancestors(self.empty_id)

    def subgraph(self, ids):
        g = DerivationGraph(self.nodes[i] for i in sorted(ids))
        if self.empty_id in ids:
            g.empty_id = self.empty_id
        return g

    def proof(self):
        """The ancestor closure of the empty clause as its own graph."""
        return self.subgraph(self.proof_ids)

    # -- JSON lines -----------------------------------------------------------

    def to_records(self):
        for cid in sorted(self.nodes):
            c = self.nodes[cid]
            rec = {
                "id": cid,
                "literals": [format_literal(lit) for lit in c.literals],
                "rule": c.origin.rule,
                "parents": list(c.origin.parents),
                "positions": list(c.origin.positions),
            }
            if c.origin.rule == INPUT:
                rec["role"] = c.origin.role
                rec["name"] = c.origin.name
            yield rec

    def dump(self, fh):
        for rec in self.to_records():
            fh.write(json.dumps(rec) + "\n")

    def save(self, path):
        with open(path, "w") as fh:
            self.dump(fh)

    @classmethod
    def from_records(cls, records):
        from clausekit.tptp import parse_clause

        g = cls()
        for rec in records:
            text = " | ".join(rec["literals"]) if rec["literals"] else "$false"
            lits = parse_clause(text).literals
            origin = Origin(
                rec["rule"],
                tuple(rec.get("parents", ())),
                tuple(rec.get("positions", ())),
                rec.get("role"),
                rec.get("name"),
            )
            # stored literal order is already normalized; keep it so positions stay valid
            g.add(Clause(lits, rec["id"], origin, normalized=True))
        return g

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_records(json.loads(line) for line in fh if line.strip())


@dataclass
class VerifiedProof:
    empty_id: int
    proof_ids: set
    checked_steps: int


def _recompute(clause, nodes):
    o = clause.origin
    try:
        if o.rule == RESOLVE:
            a, b = o.parents
            i, j = o.positions
            return resolve(nodes[a], nodes[b], i, j)
        if o.rule == FACTOR:
            (a,) = o.parents
            i, j = o.positions
            return factor(nodes[a], i, j)
    except (ValueError, IndexError) as exc:
        raise StepMismatch(clause.id, str(exc)) from None
    raise StepMismatch(clause.id, f"unknown rule {o.rule!r}")


def verify_derivation(d, inputs=None, proof_only=False):
    """Re-execute recorded inference steps and return the verified proof.

    Every inferred clause (or only the refutation's ancestors when
    ``proof_only``) must be a variant of the conclusion recomputed from its
    recorded parents and literal positions.  When ``inputs`` is given, input
    leaves must be variants of clauses in it.
    """
    empty_id = d.empty_id
    if empty_id is None:
        empty_id = next((cid for cid in sorted(d.nodes) if d.nodes[cid].is_empty), None)
    if empty_id is None:
        raise DerivationError("derivation contains no empty clause")

    targets = sorted(d.ancestors(empty_id)) if proof_only else sorted(d.nodes)

    # cycle and dangling-parent check over the checked region
    state = {}
    for root in targets:
        if state.get(root) == 2:
            continue
        stack = [(root, False)]
        while stack:
            cid, done = stack.pop()
            if done:
                state[cid] = 2
                continue
            if state.get(cid) == 2:
                continue
            if state.get(cid) == 1:
                raise CycleError(cid)
            state[cid] = 1
            stack.append((cid, True))
            for p in d.nodes[cid].origin.parents:
                if p not in d.nodes:
                    raise MissingParent(cid, p)
                if state.get(p) == 1:
                    raise CycleError(p)
                if state.get(p) != 2:
                    stack.append((p, False))

    allowed = list(inputs) if inputs is not None else None
    steps = 0
    for cid in targets:
        c = d.nodes[cid]
        if c.origin.rule == INPUT:
            if allowed is not None and not any(is_variant(c, a) for a in allowed):
                raise StepMismatch(cid, "input clause not in the problem")
            continue
        if not c.origin.parents:
            raise StepMismatch(cid, "inferred clause without parents")
        recomputed = _recompute(c, d.nodes)
        if recomputed is None or not is_variant(recomputed, c):
            raise StepMismatch(cid, f"recorded {c} but recomputed {recomputed}")
        steps += 1
    return VerifiedProof(empty_id, d.ancestors(empty_id), steps)
