"""Discrete dynamic Bayesian network: specification, exact forward filtering,
Dirichlet count updates, and a brute-force trajectory-enumeration oracle.

Model shape
-----------
A network has hidden and observed variables over finite domains. Hidden
variables are ``static`` (drawn once at slice 0, then carried unchanged) or
``temporal`` (redrawn each slice from a CPT conditioned on same-slice parents
and previous-slice parents). Observed variables are per-slice emissions with
hidden same-slice parents only. In CPT parent lists, a previous-slice parent
is written ``name@prev``; a bare name is a same-slice parent.

Slice 0 is the product of the per-variable priors. Each ``filter_step`` then
advances one slice: predict through the transition CPTs, weight by the
observation CPTs for whatever evidence the slice carries (evidence may be
partial or empty), and renormalize. Evidence that has zero probability under
the predicted belief is dropped for that slice and the returned state is
flagged ``evidence_ignored`` rather than failing the session.

All belief arithmetic runs in log space; distributions are renormalized in
linear space on the way out.
"""
from __future__ import annotations

import itertools
import math
import weakref
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np
import yaml
from scipy.special import logsumexp

from .errors import (
    CaseError,
    EvidenceError,
    InvalidSpec,
    NetworkFormatError,
    QueryError,
    SpaceTooLarge,
)

HIDDEN = "hidden"
OBSERVED = "observed"
STATIC = "static"
TEMPORAL = "temporal"

PREV_SUFFIX = "@prev"

ROW_SUM_TOL = 1e-9       # CPT and prior rows
DIST_SUM_TOL = 1e-12     # emitted distributions

ENUMERATION_LIMIT = 1_000_000  # max hidden-trajectory assignments for the oracle


# ---------------------------------------------------------------------------
# Specification types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple[str, ...]
    kind: str       # hidden | observed
    dynamics: str   # static | temporal


@dataclass(frozen=True, eq=False)
class Cpt:
    variable: str
    parents: tuple[str, ...]
    rows: Mapping[tuple[str, ...], Mapping[str, float]]

    def row(self, parent_values: tuple[str, ...]) -> Mapping[str, float]:
        return self.rows[parent_values]


@dataclass(frozen=True, eq=False)
class NetworkSpec:
    variables: tuple[Variable, ...]
    intra_edges: tuple[tuple[str, str], ...]
    inter_edges: tuple[tuple[str, str], ...]
    cpts: Mapping[str, Cpt]
    priors: Mapping[str, Mapping[str, float]]

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def hidden(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if v.kind == HIDDEN)

    @property
    def observed(self) -> tuple[Variable, ...]:
        return tuple(v for v in self.variables if v.kind == OBSERVED)

    def parents_of(self, name: str) -> tuple[str, ...]:
        """CPT parent labels for ``name``: inter parents first (tagged
        ``@prev``), then intra parents, both in edge-list order."""
        inter = tuple(p + PREV_SUFFIX for p, c in self.inter_edges if c == name)
        intra = tuple(p for p, c in self.intra_edges if c == name)
        return inter + intra


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    detail: str = ""

    def __str__(self) -> str:
        msg = f"{self.code}: {self.subject}"
        return f"{msg} ({self.detail})" if self.detail else msg


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _check_distribution(dist: Mapping[str, float], domain: tuple[str, ...],
                        subject: str, out: list[Violation]) -> None:
    if set(dist) != set(domain):
        out.append(Violation("domain_mismatch", subject,
                             f"keys {sorted(dist)} != domain {sorted(domain)}"))
        return
    if any(p < 0 for p in dist.values()):
        out.append(Violation("negative_probability", subject))
        return
    total = math.fsum(dist.values())
    if abs(total - 1.0) > ROW_SUM_TOL:
        out.append(Violation("unnormalized_row", subject, f"sums to {total!r}"))


def _intra_cycle(names: list[str], edges: Iterable[tuple[str, str]]) -> bool:
    adjacency: dict[str, list[str]] = {n: [] for n in names}
    for p, c in edges:
        if p in adjacency and c in adjacency:
            adjacency[p].append(c)
    seen: dict[str, int] = {}  # 1 = in progress, 2 = done

    def visit(node: str) -> bool:
        state = seen.get(node)
        if state == 1:
            return True
        if state == 2:
            return False
        seen[node] = 1
        if any(visit(child) for child in adjacency[node]):
            return True
        seen[node] = 2
        return False

    return any(visit(n) for n in names)


def validate_network(spec: NetworkSpec) -> list[Violation]:
    """Check every structural invariant; an empty list means the spec is ok."""
    out: list[Violation] = []
    names = [v.name for v in spec.variables]
    if len(set(names)) != len(names):
        out.append(Violation("duplicate_variable", "variables"))
        return out
    by_name = {v.name: v for v in spec.variables}

    for v in spec.variables:
        if not v.domain:
            out.append(Violation("empty_domain", v.name))
        if len(set(v.domain)) != len(v.domain):
            out.append(Violation("duplicate_domain_value", v.name))
        if v.kind not in (HIDDEN, OBSERVED):
            out.append(Violation("bad_kind", v.name, v.kind))
        if v.dynamics not in (STATIC, TEMPORAL):
            out.append(Violation("bad_dynamics", v.name, v.dynamics))
        if v.kind == OBSERVED and v.dynamics != TEMPORAL:
            out.append(Violation("bad_dynamics", v.name,
                                 "observed variables are per-slice emissions"))

    for p, c in list(spec.intra_edges) + list(spec.inter_edges):
        for end in (p, c):
            if end not in by_name:
                out.append(Violation("unknown_variable", end, f"edge {p}->{c}"))
    if out:
        return out

    if _intra_cycle(names, spec.intra_edges):
        out.append(Violation("cycle", "intra_edges"))

    for p, c in spec.intra_edges:
        if by_name[p].kind == OBSERVED:
            out.append(Violation("observed_parent", p, f"edge {p}->{c}"))
        if by_name[c].kind == HIDDEN and by_name[c].dynamics == STATIC:
            out.append(Violation("static_with_parents", c, f"edge {p}->{c}"))
    for p, c in spec.inter_edges:
        if by_name[p].kind != HIDDEN:
            out.append(Violation("observed_parent", p, f"inter edge {p}->{c}"))
        child = by_name[c]
        if child.kind != HIDDEN or child.dynamics != TEMPORAL:
            out.append(Violation("bad_inter_child", c,
                                 "inter-slice edges may only feed temporal hidden variables"))

    for v in spec.hidden:
        prior = spec.priors.get(v.name)
        if prior is None:
            out.append(Violation("missing_prior", v.name))
        else:
            _check_distribution(prior, v.domain, f"prior of {v.name}", out)
    for name in spec.priors:
        if name not in by_name or by_name[name].kind != HIDDEN:
            out.append(Violation("extra_prior", name))

    needs_cpt = [v for v in spec.variables
                 if v.kind == OBSERVED or (v.kind == HIDDEN and v.dynamics == TEMPORAL)]
    for v in needs_cpt:
        cpt = spec.cpts.get(v.name)
        if cpt is None:
            out.append(Violation("missing_cpt", v.name))
            continue
        expected = spec.parents_of(v.name)
        if tuple(sorted(cpt.parents)) != tuple(sorted(expected)):
            out.append(Violation("cpt_parent_mismatch", v.name,
                                 f"cpt parents {cpt.parents} vs edges {expected}"))
            continue
        parent_domains = []
        ok = True
        for label in cpt.parents:
            base = label[:-len(PREV_SUFFIX)] if label.endswith(PREV_SUFFIX) else label
            if base not in by_name:
                out.append(Violation("unknown_parent", v.name, label))
                ok = False
                break
            parent_domains.append(by_name[base].domain)
        if not ok:
            continue
        expected_rows = set(itertools.product(*parent_domains))
        got_rows = set(cpt.rows)
        for missing in sorted(expected_rows - got_rows):
            out.append(Violation("missing_cpt_row", v.name, str(missing)))
        for extra in sorted(got_rows - expected_rows):
            out.append(Violation("extra_cpt_row", v.name, str(extra)))
        for key in sorted(expected_rows & got_rows):
            _check_distribution(cpt.rows[key], v.domain,
                                f"cpt of {v.name} row {key}", out)
    for name in spec.cpts:
        if name not in by_name:
            out.append(Violation("unknown_variable", name, "cpt"))
        elif by_name[name].kind == HIDDEN and by_name[name].dynamics == STATIC:
            out.append(Violation("static_with_cpt", name,
                                 "static variables are fixed by their prior"))
    return out


def require_valid(spec: NetworkSpec) -> None:
    violations = validate_network(spec)
    if violations:
        raise InvalidSpec(violations)


# ---------------------------------------------------------------------------
# Compiled form (cached per spec instance)
# ---------------------------------------------------------------------------

class _Compiled:
    """Index maps plus dense log transition/observation tables."""

    def __init__(self, spec: NetworkSpec):
        require_valid(spec)
        self.spec = spec
        self.hidden_names = tuple(v.name for v in spec.hidden)
        self.domains = tuple(v.domain for v in spec.hidden)
        self.shapes = tuple(len(d) for d in self.domains)
        self.n_states = int(np.prod(self.shapes)) if self.shapes else 1
        self.value_index = {
            v.name: {value: i for i, value in enumerate(v.domain)}
            for v in spec.variables
        }
        self.states: list[tuple[str, ...]] = [
            assignment for assignment in itertools.product(*self.domains)
        ]
        self._state_maps = [dict(zip(self.hidden_names, s)) for s in self.states]

        with np.errstate(divide="ignore"):
            self.log_prior = np.log(np.array([
                math.prod(spec.priors[n][m[n]] for n in self.hidden_names)
                for m in self._state_maps
            ]))
            self.log_trans = np.log(self._transition_matrix())
            self.log_obs = {
                v.name: np.log(self._observation_matrix(v))
                for v in spec.observed
            }

    def _row_values(self, cpt: Cpt, prev: Mapping[str, str],
                    cur: Mapping[str, str]) -> tuple[str, ...]:
        key = []
        for label in cpt.parents:
            if label.endswith(PREV_SUFFIX):
                key.append(prev[label[:-len(PREV_SUFFIX)]])
            else:
                key.append(cur[label])
        return tuple(key)

    def _transition_matrix(self) -> np.ndarray:
        spec = self.spec
        temporal = [v for v in spec.hidden if v.dynamics == TEMPORAL]
        static = [v.name for v in spec.hidden if v.dynamics == STATIC]
        trans = np.zeros((self.n_states, self.n_states))
        for i, prev in enumerate(self._state_maps):
            for j, cur in enumerate(self._state_maps):
                if any(prev[s] != cur[s] for s in static):
                    continue
                p = 1.0
                for v in temporal:
                    cpt = spec.cpts[v.name]
                    p *= cpt.row(self._row_values(cpt, prev, cur))[cur[v.name]]
                trans[i, j] = p
        return trans

    def _observation_matrix(self, variable: Variable) -> np.ndarray:
        cpt = self.spec.cpts[variable.name]
        out = np.zeros((self.n_states, len(variable.domain)))
        for j, cur in enumerate(self._state_maps):
            row = cpt.row(self._row_values(cpt, {}, cur))
            for k, value in enumerate(variable.domain):
                out[j, k] = row[value]
        return out

    def state_axis(self, name: str) -> int:
        return self.hidden_names.index(name)


_compiled_cache: "weakref.WeakKeyDictionary[NetworkSpec, _Compiled]" = \
    weakref.WeakKeyDictionary()


def _compiled(spec: NetworkSpec) -> _Compiled:
    found = _compiled_cache.get(spec)
    if found is None:
        found = _Compiled(spec)
        _compiled_cache[spec] = found
    return found


# ---------------------------------------------------------------------------
# Belief states and filtering
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BeliefState:
    """Posterior over the joint of hidden variables at one slice."""

    slice_index: int
    hidden_names: tuple[str, ...]
    domains: tuple[tuple[str, ...], ...]
    log_joint: np.ndarray  # flat, normalized so that logsumexp == 0
    evidence_ignored: bool = False

    def joint_belief(self) -> np.ndarray:
        """Linear-space joint, renormalized; sums to 1 within 1e-12."""
        p = np.exp(self.log_joint - logsumexp(self.log_joint))
        return p / p.sum()

    def as_dict(self) -> dict[tuple[str, ...], float]:
        flat = self.joint_belief()
        return {assignment: float(flat[i])
                for i, assignment in enumerate(itertools.product(*self.domains))}

    def argmax(self) -> dict[str, str]:
        flat = self.joint_belief()
        best = list(itertools.product(*self.domains))[int(np.argmax(flat))]
        return dict(zip(self.hidden_names, best))


def init_belief(spec: NetworkSpec) -> BeliefState:
    """Slice-0 belief: the product of the hidden-variable priors."""
    c = _compiled(spec)
    log_joint = c.log_prior - logsumexp(c.log_prior)
    return BeliefState(0, c.hidden_names, c.domains, log_joint)


def _check_evidence(c: _Compiled, evidence: Mapping[str, str]) -> None:
    observed = {v.name: v for v in c.spec.observed}
    for name, value in evidence.items():
        v = observed.get(name)
        if v is None:
            raise EvidenceError(f"{name!r} is not an observed variable")
        if value not in v.domain:
            raise EvidenceError(f"{value!r} not in domain of {name!r}")


def _check_clamps(c: _Compiled, clamps: Mapping[str, str]) -> None:
    hidden = {v.name: v for v in c.spec.hidden}
    for name, value in clamps.items():
        v = hidden.get(name)
        if v is None:
            raise EvidenceError(f"{name!r} is not a hidden variable")
        if value not in v.domain:
            raise EvidenceError(f"{value!r} not in domain of {name!r}")


def _log_evidence_weights(c: _Compiled, evidence: Mapping[str, str]) -> np.ndarray:
    weights = np.zeros(c.n_states)
    for name, value in evidence.items():
        weights = weights + c.log_obs[name][:, c.value_index[name][value]]
    return weights


def _log_clamp_weights(c: _Compiled, clamps: Mapping[str, str]) -> np.ndarray:
    weights = np.zeros(c.n_states)
    for name, value in clamps.items():
        axis = c.state_axis(name)
        mask = np.array([s[axis] == value for s in c.states])
        weights = weights + np.where(mask, 0.0, -np.inf)
    return weights


def filter_step(belief: BeliefState, evidence: Mapping[str, str],
                spec: NetworkSpec,
                clamps: Mapping[str, str] | None = None) -> BeliefState:
    """One exact forward step: predict, condition, renormalize.

    ``clamps`` are hard assignments of hidden variables (declared profile
    facts); they are applied alongside the evidence. Zero-probability
    evidence is dropped for the slice (``evidence_ignored`` on the result);
    if the clamps themselves are unreachable they are dropped too.
    """
    c = _compiled(spec)
    _check_evidence(c, evidence)
    if clamps:
        _check_clamps(c, clamps)
    if belief.hidden_names != c.hidden_names:
        raise EvidenceError("belief does not belong to this network spec")

    log_pred = logsumexp(belief.log_joint[:, None] + c.log_trans, axis=0)
    log_clamp = _log_clamp_weights(c, clamps) if clamps else 0.0
    log_w = _log_evidence_weights(c, evidence) if evidence else 0.0

    ignored = False
    log_post = log_pred + log_clamp + log_w
    z = logsumexp(log_post)
    if z == -np.inf and evidence:
        ignored = True
        log_post = log_pred + log_clamp
        z = logsumexp(log_post)
    if z == -np.inf:
        # Clamps unreachable from the predicted belief; keep the prediction.
        ignored = True
        log_post = log_pred
        z = logsumexp(log_post)
    return BeliefState(belief.slice_index + 1, c.hidden_names, c.domains,
                       log_post - z, evidence_ignored=ignored)


def clamp_belief(belief: BeliefState, clamps: Mapping[str, str],
                 spec: NetworkSpec) -> BeliefState:
    """Condition the current slice on hard hidden-variable assignments."""
    c = _compiled(spec)
    _check_clamps(c, clamps)
    log_post = belief.log_joint + _log_clamp_weights(c, clamps)
    z = logsumexp(log_post)
    if z == -np.inf:
        return replace(belief, evidence_ignored=True)
    return replace(belief, log_joint=log_post - z)


def query_posterior(belief: BeliefState, variable_name: str) -> dict[str, float]:
    """Marginal of one hidden variable; a valid distribution over its domain."""
    if variable_name not in belief.hidden_names:
        raise QueryError(f"{variable_name!r} is not a hidden variable of this belief")
    axis = belief.hidden_names.index(variable_name)
    joint = belief.joint_belief().reshape([len(d) for d in belief.domains])
    other_axes = tuple(i for i in range(joint.ndim) if i != axis)
    marginal = joint.sum(axis=other_axes) if other_axes else joint
    marginal = marginal / marginal.sum()
    return {value: float(marginal[i])
            for i, value in enumerate(belief.domains[axis])}


# ---------------------------------------------------------------------------
# Brute-force oracle: explicit summation over hidden trajectories
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnumerationResult:
    hidden_names: tuple[str, ...]
    posterior: Mapping[tuple[str, ...], float]
    ignored_slices: tuple[int, ...] = ()

    @property
    def degenerate(self) -> bool:
        return bool(self.ignored_slices)

    def marginal(self, variable_name: str) -> dict[str, float]:
        if variable_name not in self.hidden_names:
            raise QueryError(f"{variable_name!r} is not a hidden variable")
        axis = self.hidden_names.index(variable_name)
        out: dict[str, float] = {}
        for assignment, p in self.posterior.items():
            out[assignment[axis]] = out.get(assignment[axis], 0.0) + p
        return out


def enumerate_joint(spec: NetworkSpec,
                    evidence_sequence: Sequence[Mapping[str, str]]) -> EnumerationResult:
    """Posterior over hidden variables at the final slice, by summing the
    probability of every hidden trajectory in plain Python arithmetic.

    This is the reference semantics for ``filter_step``; it shares the CPTs
    with the filter but none of its machinery. Trajectories number
    ``|H| ** (len(evidence_sequence) + 1)`` and are capped at
    ``ENUMERATION_LIMIT``.
    """
    require_valid(spec)
    hidden = spec.hidden
    hidden_names = tuple(v.name for v in hidden)
    states = [dict(zip(hidden_names, combo))
              for combo in itertools.product(*(v.domain for v in hidden))]
    n = len(states)
    horizon = len(evidence_sequence)
    if n ** (horizon + 1) > ENUMERATION_LIMIT:
        raise SpaceTooLarge(
            f"{n} joint states over {horizon + 1} slices exceeds "
            f"{ENUMERATION_LIMIT} trajectory assignments")

    for evidence in evidence_sequence:
        observed = {v.name: v for v in spec.observed}
        for name, value in evidence.items():
            if name not in observed:
                raise EvidenceError(f"{name!r} is not an observed variable")
            if value not in observed[name].domain:
                raise EvidenceError(f"{value!r} not in domain of {name!r}")

    temporal = [v for v in hidden if v.dynamics == TEMPORAL]
    static = [v.name for v in hidden if v.dynamics == STATIC]

    def parent_key(cpt: Cpt, prev: Mapping[str, str], cur: Mapping[str, str]):
        return tuple(
            prev[label[:-len(PREV_SUFFIX)]] if label.endswith(PREV_SUFFIX)
            else cur[label]
            for label in cpt.parents
        )

    trans: list[list[float]] = []
    for prev in states:
        row = []
        for cur in states:
            if any(prev[s] != cur[s] for s in static):
                row.append(0.0)
                continue
            p = 1.0
            for v in temporal:
                cpt = spec.cpts[v.name]
                p *= cpt.row(parent_key(cpt, prev, cur))[cur[v.name]]
            row.append(p)
        trans.append(row)

    # probs[code] is the probability of one trajectory prefix; the prefix is
    # decoded from the code in base n with the latest slice least significant.
    probs: list[float] = [
        math.prod(spec.priors[name][state[name]] for name in hidden_names)
        for state in states
    ]
    ignored: list[int] = []
    for t, evidence in enumerate(evidence_sequence, start=1):
        weights = []
        for cur in states:
            w = 1.0
            for name, value in evidence.items():
                cpt = spec.cpts[name]
                w *= cpt.row(parent_key(cpt, {}, cur))[value]
            weights.append(w)

        extended = [0.0] * (len(probs) * n)
        for code, p in enumerate(probs):
            if p == 0.0:
                continue
            row = trans[code % n]
            base = code * n
            for j in range(n):
                extended[base + j] = p * row[j]
        weighted = [p * weights[k % n] for k, p in enumerate(extended)]
        if math.fsum(weighted) == 0.0:
            ignored.append(t)
            probs = extended
        else:
            probs = weighted

    posterior = [0.0] * n
    for code, p in enumerate(probs):
        posterior[code % n] += p
    total = math.fsum(posterior)
    if total <= 0.0:
        raise InvalidSpec([Violation("degenerate_prior", "priors",
                                     "no trajectory has positive probability")])
    return EnumerationResult(
        hidden_names=hidden_names,
        posterior={tuple(state[name] for name in hidden_names): p / total
                   for state, p in zip(states, posterior)},
        ignored_slices=tuple(ignored),
    )


# ---------------------------------------------------------------------------
# Dirichlet count tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CountTable:
    """Per-CPT-row pseudo-counts over the child domain (Dirichlet parameters)."""

    domains: Mapping[str, tuple[str, ...]]
    parents: Mapping[str, tuple[str, ...]]
    parent_domains: Mapping[str, tuple[tuple[str, ...], ...]]
    counts: Mapping[str, Mapping[tuple[str, ...], tuple[float, ...]]]

    @classmethod
    def from_spec(cls, spec: NetworkSpec, pseudo_count: float = 1.0) -> "CountTable":
        if pseudo_count <= 0:
            raise CaseError("pseudo_count must be > 0")
        require_valid(spec)
        by_name = {v.name: v for v in spec.variables}
        domains: dict[str, tuple[str, ...]] = {}
        parents: dict[str, tuple[str, ...]] = {}
        parent_domains: dict[str, tuple[tuple[str, ...], ...]] = {}
        counts: dict[str, dict[tuple[str, ...], tuple[float, ...]]] = {}
        for name, cpt in spec.cpts.items():
            var = by_name[name]
            domains[name] = var.domain
            parents[name] = cpt.parents
            parent_domains[name] = tuple(
                by_name[label[:-len(PREV_SUFFIX)] if label.endswith(PREV_SUFFIX)
                        else label].domain
                for label in cpt.parents
            )
            counts[name] = {
                key: (pseudo_count,) * len(var.domain)
                for key in itertools.product(*parent_domains[name])
            }
        return cls(domains, parents, parent_domains, counts)

    def row_distribution(self, variable: str, parent_values: tuple[str, ...]) -> dict[str, float]:
        """Dirichlet posterior mean of one CPT row (normalized counts)."""
        row = self.counts[variable][parent_values]
        total = math.fsum(row)
        return {value: count / total
                for value, count in zip(self.domains[variable], row)}

    def to_cpts(self) -> dict[str, Cpt]:
        return {
            name: Cpt(
                variable=name,
                parents=self.parents[name],
                rows={key: self.row_distribution(name, key)
                      for key in self.counts[name]},
            )
            for name in self.counts
        }


def update_parameters(counts: CountTable,
                      completed_case: Sequence[Mapping[str, str]]) -> CountTable:
    """Return a new table with one increment per (variable, parent-combination)
    realized in the case.

    ``completed_case`` holds one assignment map per slice, oldest first. A
    variable contributes at a slice when its own value and all its parent
    values resolve there (previous-slice parents need slice t-1, so variables
    with ``@prev`` parents never contribute at slice 0). Values outside a
    domain raise ``CaseError``.
    """
    new_counts = {name: dict(rows) for name, rows in counts.counts.items()}
    for t, assignment in enumerate(completed_case):
        for name, value in assignment.items():
            if name in counts.domains and value not in counts.domains[name]:
                raise CaseError(f"slice {t}: {value!r} not in domain of {name!r}")
        for name, rows in new_counts.items():
            value = assignment.get(name)
            if value is None:
                continue
            key: list[str] = []
            resolvable = True
            for label in counts.parents[name]:
                if label.endswith(PREV_SUFFIX):
                    if t == 0:
                        resolvable = False
                        break
                    parent_value = completed_case[t - 1].get(label[:-len(PREV_SUFFIX)])
                else:
                    parent_value = assignment.get(label)
                if parent_value is None:
                    resolvable = False
                    break
                key.append(parent_value)
            if not resolvable:
                continue
            row_key = tuple(key)
            if row_key not in rows:
                raise CaseError(f"slice {t}: parent values {row_key!r} invalid for {name!r}")
            value_pos = counts.domains[name].index(value)
            row = list(rows[row_key])
            row[value_pos] += 1.0
            rows[row_key] = tuple(row)
    return CountTable(counts.domains, counts.parents, counts.parent_domains,
                      new_counts)


def with_updated_cpts(spec: NetworkSpec, counts: CountTable) -> NetworkSpec:
    """A copy of ``spec`` whose CPT rows are the count-table posterior means."""
    new_cpts = dict(spec.cpts)
    new_cpts.update(counts.to_cpts())
    return NetworkSpec(spec.variables, spec.intra_edges, spec.inter_edges,
                       new_cpts, spec.priors)


# ---------------------------------------------------------------------------
# Network file format (YAML; schema documented in docs/formats.md)
# ---------------------------------------------------------------------------

def _as_str_pairs(raw, what: str) -> tuple[tuple[str, str], ...]:
    out = []
    for item in raw or ():
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise NetworkFormatError(f"{what} entries must be [parent, child] pairs")
        out.append((str(item[0]), str(item[1])))
    return tuple(out)


def load_network(path) -> NetworkSpec:
    """Parse a network-spec file. Structural problems raise
    ``NetworkFormatError``; semantic problems are left to ``validate_network``.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise NetworkFormatError("network spec must be a mapping")
    try:
        variables = tuple(
            Variable(
                name=str(v["name"]),
                domain=tuple(str(x) for x in v["domain"]),
                kind=str(v["kind"]),
                dynamics=str(v["dynamics"]),
            )
            for v in raw.get("variables", ())
        )
        cpts = {}
        for name, body in (raw.get("cpts") or {}).items():
            rows = {}
            for entry in body.get("rows", ()):
                given = entry.get("given") or {}
                parents = tuple(str(p) for p in body.get("parents", ()))
                key = tuple(str(given[p]) for p in parents)
                rows[key] = {str(k): float(p) for k, p in entry["dist"].items()}
            cpts[str(name)] = Cpt(variable=str(name),
                                  parents=tuple(str(p) for p in body.get("parents", ())),
                                  rows=rows)
        priors = {
            str(name): {str(k): float(p) for k, p in dist.items()}
            for name, dist in (raw.get("priors") or {}).items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkFormatError(f"malformed network spec: {exc!r}") from None
    return NetworkSpec(
        variables=variables,
        intra_edges=_as_str_pairs(raw.get("intra_edges"), "intra_edges"),
        inter_edges=_as_str_pairs(raw.get("inter_edges"), "inter_edges"),
        cpts=cpts,
        priors=priors,
    )


def dump_network(spec: NetworkSpec, path) -> None:
    doc = {
        "variables": [
            {"name": v.name, "domain": list(v.domain), "kind": v.kind,
             "dynamics": v.dynamics}
            for v in spec.variables
        ],
        "intra_edges": [list(e) for e in spec.intra_edges],
        "inter_edges": [list(e) for e in spec.inter_edges],
        "priors": {name: dict(dist) for name, dist in spec.priors.items()},
        "cpts": {
            name: {
                "parents": list(cpt.parents),
                "rows": [
                    {"given": dict(zip(cpt.parents, key)),
                     "dist": dict(dist)}
                    for key, dist in cpt.rows.items()
                ],
            }
            for name, cpt in spec.cpts.items()
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)
