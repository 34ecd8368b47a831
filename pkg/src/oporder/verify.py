"""Numerical verification campaigns over chain-hypothesis instances.

Universal quantifiers ("for every p >= 1", "for every s > 1") are tested on
finite grids with geometric escalation and are always labelled as samples,
never as proofs.  Each unit of work is a pure function of (instance,
parameter sample); per-instance randomness derives deterministically from
(master seed, instance index), so reports are reproducible bit for bit in
their mathematical columns.
"""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import chains, dsl
from .chains import Direction, Family
from .spectral import (
    TOL_REL,
    HermitianMatrix,
    NearSingularError,
    Relation,
    SpectralError,
    Verdict,
    classify_margins,
    congruence,
    directional_margins,
    identity,
    loewner_compare,
    matrix_power,
    matrix_to_json,
    operator_norm,
    pd_gate,
    positivity_margin,
)

# Slack used by suite-level expectations (necessity, reduction chain);
# looser than the verdict tolerance so rounding never flips a true claim.
SUITE_TOL_REL = 1e-7

GRID_POINT_CAP = 10_000


def _rng(*seed_parts) -> np.random.Generator:
    return np.random.default_rng(list(int(s) for s in seed_parts))


@dataclass(frozen=True, eq=False)
class OperatorTuple:
    """k strictly positive matrices of one dimension, with their
    positivity margins (smallest eigenvalues) exposed as delta data."""

    matrices: tuple[HermitianMatrix, ...]

    def __post_init__(self):
        mats = tuple(self.matrices)
        object.__setattr__(self, "matrices", mats)
        if len(mats) < 2:
            raise ValueError(f"need at least 2 matrices, got {len(mats)}")
        dims = {m.dim for m in mats}
        if len(dims) != 1:
            raise ValueError(f"matrices disagree on dimension: {sorted(dims)}")
        for i, m in enumerate(mats):
            margin = positivity_margin(m)
            if margin <= pd_gate(m):
                raise NearSingularError(margin, pd_gate(m))

    @property
    def k(self) -> int:
        return len(self.matrices)

    @property
    def dim(self) -> int:
        return self.matrices[0].dim

    @property
    def margins(self) -> tuple[float, ...]:
        return tuple(positivity_margin(m) for m in self.matrices)

    @property
    def deltas(self) -> tuple[float, ...]:
        """Reciprocal positivity margins: A_i >= (1/delta_i) I."""
        return tuple(1.0 / m for m in self.margins)

    def to_json(self) -> list[dict]:
        return [matrix_to_json(m) for m in self.matrices]


def scalar_tuple(values) -> OperatorTuple:
    """1x1 tuple from plain scalars; handy for hand-checkable fixtures."""
    return OperatorTuple(tuple(HermitianMatrix(np.array([[float(v)]])) for v in values))


def _random_factor(rng: np.random.Generator, dim: int, field_kind: str) -> np.ndarray:
    g = rng.standard_normal((dim, dim))
    if field_kind == "complex":
        g = (g + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    return g


def _random_spd(rng, dim, field_kind="real", ridge=0.1) -> HermitianMatrix:
    g = _random_factor(rng, dim, field_kind)
    a = g.conj().T @ g + ridge * np.eye(dim)
    return HermitianMatrix(0.5 * (a + a.conj().T))


def gen_ordered_tuple(
    k: int,
    dim: int,
    seed,
    gap: float = 0.0,
    field_kind: str = "real",
    increment_scale: float = 1.0,
    max_norm: float | None = None,
) -> OperatorTuple:
    """Ordered witness tuple: A_1 = G'G + 0.1 I, then A_(i+1) = A_i +
    H_i'H_i + gap*I, so consecutive comparisons are GE by construction.

    increment_scale = 0 forces H_i = 0 (a degenerate, still ordered chain);
    max_norm rescales the whole tuple, which preserves the order.
    """
    if k < 2 or dim < 1:
        raise ValueError(f"need k >= 2 and dim >= 1, got k={k}, dim={dim}")
    rng = _rng(seed) if isinstance(seed, int) else np.random.default_rng(seed)
    g = _random_factor(rng, dim, field_kind)
    current = g.conj().T @ g + 0.1 * np.eye(dim)
    mats = [current]
    for _ in range(k - 1):
        h = increment_scale * _random_factor(rng, dim, field_kind)
        current = current + h.conj().T @ h + gap * np.eye(dim)
        mats.append(current)
    if max_norm is not None:
        top = float(np.linalg.eigvalsh(mats[-1])[-1])
        scale = max_norm / top
        mats = [m * scale for m in mats]
    return OperatorTuple(tuple(HermitianMatrix(0.5 * (m + m.conj().T)) for m in mats))


def gen_unordered_tuple(
    k: int,
    dim: int,
    seed,
    field_kind: str = "real",
    max_attempts: int = 200,
    tol_rel: float = TOL_REL,
) -> OperatorTuple:
    """Strictly positive tuple with at least one adjacent pair that is not
    GE; regenerates until such a violation exists."""
    rng = _rng(seed) if isinstance(seed, int) else np.random.default_rng(seed)
    for _ in range(max_attempts):
        tup = OperatorTuple(tuple(_random_spd(rng, dim, field_kind) for _ in range(k)))
        if any(not v.ge for v in check_conclusion(tup, tol_rel=tol_rel)):
            return tup
    raise RuntimeError(
        f"no adjacent-order violation found in {max_attempts} attempts "
        f"(k={k}, dim={dim})"
    )


def gen_contractive_tuple(
    k: int,
    dim: int,
    seed,
    band: tuple[float, float] = (0.80, 0.97),
    wobble: float = 0.01,
    field_kind: str = "real",
) -> OperatorTuple:
    """Ordered tuple with every spectrum inside (0, 1): A_i = c_i I +
    wobble * S_i with ascending c_i and unit-norm PSD perturbations.

    Requires wobble < gap/2 so the order survives the perturbation.  The
    reduction-chain checks are only pointwise valid in this contractive
    regime; generic ordered tuples break them at large p.
    """
    lo, hi = band
    if not 0.0 < lo < hi <= 1.0 - wobble:
        raise ValueError(f"band {band} with wobble {wobble} must sit inside (0, 1)")
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    centers = np.linspace(lo, hi, k)
    gap = centers[1] - centers[0]
    if not wobble < gap / 2:
        raise ValueError(f"wobble {wobble} must be below half the center gap {gap:.4f}")
    rng = _rng(seed) if isinstance(seed, int) else np.random.default_rng(seed)
    mats = []
    for c in centers:
        s = _random_spd(rng, dim, field_kind, ridge=0.0).entries
        s = s / max(float(np.linalg.eigvalsh(s)[-1]), 1e-12)
        m = c * np.eye(dim) + wobble * s
        mats.append(HermitianMatrix(0.5 * (m + m.conj().T)))
    return OperatorTuple(tuple(mats))


def gen_suite_tuple(k: int, dim: int, seed, field_kind: str = "real") -> OperatorTuple:
    """Ordered tuple conditioned for campaigns over deep p-grids.

    Nested intermediates see their condition number raised to roughly the
    product of the sampled exponents, so the spectral band tightens with k
    to keep every intermediate above the strict-positivity gate (the gate
    errors instead of clamping, by design).
    """
    if k <= 3:
        return gen_contractive_tuple(k, dim, seed, band=(0.45, 0.97),
                                     wobble=0.01, field_kind=field_kind)
    return gen_contractive_tuple(k, dim, seed, band=(0.95, 0.992),
                                 wobble=0.002, field_kind=field_kind)


@dataclass(frozen=True)
class PGrid:
    """Finite ascending sample of the exponent range [1, inf); escalate()
    appends the next geometric point until the cap."""

    values: tuple[float, ...] = (1.0, 1.5, 2.0, 4.0, 8.0)
    growth: float = 2.0
    cap: float = 64.0

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals or any(v < 1.0 for v in vals):
            raise ValueError(f"grid values must be >= 1, got {vals}")
        if list(vals) != sorted(vals):
            raise ValueError(f"grid values must ascend, got {vals}")
        if self.growth <= 1.0:
            raise ValueError(f"growth must exceed 1, got {self.growth}")

    def escalate(self) -> "PGrid | None":
        nxt = self.values[-1] * self.growth
        if nxt > self.cap:
            return None
        return PGrid(self.values + (nxt,), self.growth, self.cap)

    def vectors(self, m: int, rng: np.random.Generator | None = None,
                point_cap: int = GRID_POINT_CAP) -> list[tuple[float, ...]]:
        """Cartesian power of the grid, Latin-hypercube subsampled once the
        full product exceeds point_cap."""
        total = len(self.values) ** m
        if total <= point_cap:
            return list(itertools.product(self.values, repeat=m))
        if rng is None:
            raise ValueError("subsampling a large grid product needs an rng")
        cols = []
        for _ in range(m):
            strata = (rng.permutation(point_cap) + rng.random(point_cap)) / point_cap
            idx = np.minimum((strata * len(self.values)).astype(int),
                             len(self.values) - 1)
            cols.append(np.asarray(self.values)[idx])
        return [tuple(float(c[i]) for c in cols) for i in range(point_cap)]


@dataclass(frozen=True)
class WeightPolicy:
    """How hypothesis weights are chosen: a fixed vector, or the necessity
    formula recomputed from each sampled p-vector (all members equal)."""

    kind: str
    values: tuple[float, ...] | None = None

    @staticmethod
    def fixed(values) -> "WeightPolicy":
        return WeightPolicy("fixed", tuple(float(v) for v in values))

    @staticmethod
    def necessity() -> "WeightPolicy":
        return WeightPolicy("necessity")

    @staticmethod
    def parse(text: str) -> "WeightPolicy":
        if text == "necessity":
            return WeightPolicy.necessity()
        if text.startswith("fixed:"):
            return WeightPolicy.fixed(float(v) for v in text[6:].split(","))
        raise ValueError(f"unknown weight policy {text!r}")

    def describe(self) -> str:
        if self.kind == "fixed":
            return "fixed:" + ",".join(repr(v) for v in self.values)
        return self.kind

    def weights(self, t, p, r: float, count: int) -> tuple[float, ...]:
        if self.kind == "fixed":
            if len(self.values) != count:
                raise ValueError(
                    f"fixed policy carries {len(self.values)} weights, need {count}"
                )
            return self.values
        w = chains.necessity_weight_from(t, p, r)
        return (w,) * count


@dataclass(frozen=True)
class ParamTemplate:
    """The per-instance scalars that stay fixed while p is sampled."""

    t: tuple[float, ...]
    r: float

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        object.__setattr__(self, "r", float(self.r))
        if not self.t:
            raise ValueError("need at least one t value")
        if any(not 0.0 <= v <= 1.0 for v in self.t):
            raise ValueError(f"every t must lie in [0, 1], got {self.t}")
        if not self.r > self.t[-1]:
            raise ValueError(f"r must exceed t_n = {self.t[-1]}, got {self.r}")

    @property
    def n(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class CampaignRow:
    instance_id: str
    k: int
    dim: int
    family: str
    member: int
    p_vector: tuple[float, ...]
    w: float
    relation: str
    margin: float
    verdict: str
    seconds: float
    scale: float = 1.0
    error: str | None = None

    @property
    def satisfied(self) -> bool:
        """Verdict meets the expected relation at verdict tolerance."""
        if self.error is not None:
            return False
        if self.relation == Direction.GE.value:
            return self.verdict in (Relation.GE.value, Relation.EQ.value)
        return self.verdict in (Relation.LE.value, Relation.EQ.value)

    def holds_within(self, tol_rel: float = SUITE_TOL_REL) -> bool:
        """Margin test at suite slack, the criterion campaigns assert."""
        return self.error is None and self.margin >= -tol_rel * self.scale


_CSV_COLUMNS = ("instance_id", "k", "dim", "family", "member", "p_vector",
                "w", "relation", "margin", "verdict", "seconds")


@dataclass
class CampaignReport:
    rows: list[CampaignRow]
    config: dict
    master_seed: int

    @property
    def pass_count(self) -> int:
        return sum(1 for r in self.rows if r.satisfied)

    @property
    def fail_count(self) -> int:
        return len(self.rows) - self.pass_count

    @property
    def worst_margin(self) -> float:
        finite = [r.margin for r in self.rows if r.error is None]
        return min(finite) if finite else float("nan")

    def violations(self, tol_rel: float = SUITE_TOL_REL) -> list[CampaignRow]:
        return [r for r in self.rows if not r.holds_within(tol_rel)]

    def summary(self) -> dict:
        return {
            "rows": len(self.rows),
            "pass": self.pass_count,
            "fail": self.fail_count,
            "worst_margin": self.worst_margin,
        }

    def csv_text(self) -> str:
        lines = [",".join(_CSV_COLUMNS)]
        for r in self.rows:
            lines.append(",".join([
                r.instance_id, str(r.k), str(r.dim), r.family, str(r.member),
                ";".join(repr(v) for v in r.p_vector), repr(r.w), r.relation,
                repr(r.margin), r.verdict, f"{r.seconds:.6f}",
            ]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        """CSV report plus a <path>.json sidecar carrying the full config
        and master seed needed to reproduce every row."""
        path = Path(path)
        path.write_text(self.csv_text())
        sidecar = {
            "config": self.config,
            "master_seed": self.master_seed,
            "summary": self.summary(),
        }
        Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def merge_reports(reports, config: dict, master_seed: int) -> CampaignReport:
    rows: list[CampaignRow] = []
    for rep in reports:
        rows.extend(rep.rows)
    return CampaignReport(rows=rows, config=config, master_seed=master_seed)


def _tuple_environment(tup: OperatorTuple) -> dict[int, HermitianMatrix]:
    return {i + 1: m for i, m in enumerate(tup.matrices)}


def _scalar_bindings(template: ParamTemplate, p_vec, w_vals) -> dict[str, float]:
    bindings = {"r": template.r}
    for i, tv in enumerate(template.t, 1):
        bindings[f"t{i}"] = tv
    for i, pv in enumerate(p_vec, 1):
        bindings[f"p{i}"] = float(pv)
    for i, wv in enumerate(w_vals, 1):
        bindings[f"w{i}"] = float(wv)
    return bindings


def check_hypotheses(
    tup: OperatorTuple,
    template: ParamTemplate,
    grid: PGrid,
    policy: WeightPolicy,
    *,
    tol_rel: float = TOL_REL,
    instance_id: str = "0",
    master_seed: int = 0,
    instance_index: int = 0,
    members: tuple[tuple[Family, int], ...] | None = None,
    stop_on_violation: bool = False,
    suite_tol_rel: float = SUITE_TOL_REL,
) -> CampaignReport:
    """Evaluate every hypothesis member at every sampled p-vector.

    Rows record the verdict of the expected relation together with its
    directional margin; evaluation errors are recorded per row and never
    abort the campaign.
    """
    k = tup.k
    n = k // 2
    if template.n != n:
        raise ValueError(f"template has {template.n} t-values, tuple needs {n}")
    params0 = chains.placeholder_params(k, t=template.t, r=template.r)
    chain_list = chains.hypothesis_set(params0)
    if members is not None:
        wanted = set(members)
        chain_list = [c for c in chain_list if (c.family, c.member) in wanted]
    matrices = _tuple_environment(tup)
    lhs_cache: dict[int, HermitianMatrix] = {}
    rexp = template.r - template.t[-1]
    sample_rng = _rng(master_seed, instance_index, 1)
    p_vectors = grid.vectors(2 * n, rng=sample_rng)
    rows: list[CampaignRow] = []
    for chain in chain_list:
        outer = chain.lhs.index
        if outer not in lhs_cache:
            lhs_cache[outer] = matrix_power(tup.matrices[outer - 1], rexp)
        lhs_val = lhs_cache[outer]
        for p_vec in p_vectors:
            start = time.perf_counter()
            try:
                w_vals = policy.weights(template.t, p_vec, template.r, count=k - 1)
                env = dsl.Environment(
                    scalars=_scalar_bindings(template, p_vec, w_vals),
                    matrices=matrices,
                )
                rhs_val = dsl.evaluate(chain.rhs, env)
                ge_m, le_m = directional_margins(lhs_val, rhs_val)
                margin = ge_m if chain.direction is Direction.GE else le_m
                scale = max(1.0, operator_norm(lhs_val), operator_norm(rhs_val))
                verdict = classify_margins(ge_m, le_m, tol_rel * scale)
                row = CampaignRow(
                    instance_id=instance_id, k=k, dim=tup.dim,
                    family=chain.family.value, member=chain.member,
                    p_vector=tuple(p_vec),
                    w=w_vals[chains.weight_index(chain.family, chain.member, n) - 1],
                    relation=chain.direction.value, margin=margin,
                    verdict=verdict.value,
                    seconds=time.perf_counter() - start, scale=scale,
                )
            except (SpectralError, dsl.EvaluationError) as exc:
                row = CampaignRow(
                    instance_id=instance_id, k=k, dim=tup.dim,
                    family=chain.family.value, member=chain.member,
                    p_vector=tuple(p_vec), w=float("nan"),
                    relation=chain.direction.value, margin=float("nan"),
                    verdict="ERROR", seconds=time.perf_counter() - start,
                    scale=1.0, error=str(exc),
                )
            rows.append(row)
            # error rows are indeterminate, not violations; keep scanning
            if stop_on_violation and row.error is None \
                    and not row.holds_within(suite_tol_rel):
                return CampaignReport(rows, {"stopped_early": True}, master_seed)
    return CampaignReport(rows, {}, master_seed)


def check_conclusion(tup: OperatorTuple, tol_rel: float = TOL_REL) -> list[Verdict]:
    """Adjacent comparisons A_(i+1) vs A_i for i = 1 .. k-1."""
    return [
        loewner_compare(tup.matrices[i + 1], tup.matrices[i], tol_rel=tol_rel)
        for i in range(tup.k - 1)
    ]


@dataclass(frozen=True)
class AlphaRow:
    alpha: float
    verdict: str
    margin: float
    scale: float
    error: str | None = None


@dataclass
class MonotonePowerReport:
    """Per-exponent outcome of pushing an ordered pair through powers."""

    precondition_ok: bool
    rows: list[AlphaRow]

    def all_hold(self, tol_rel: float = 1e-8) -> bool:
        return self.precondition_ok and all(
            r.error is None
            and r.verdict in (Relation.GE.value, Relation.EQ.value)
            and r.margin >= -tol_rel * r.scale
            for r in self.rows
        )


def probe_loewner_heinz(
    p: HermitianMatrix,
    q: HermitianMatrix,
    alphas=(0.0, 0.25, 0.5, 0.75, 1.0),
    tol_rel: float = TOL_REL,
) -> MonotonePowerReport:
    """Check P^a vs Q^a over the exponents; pairs must satisfy P >= Q >= 0
    first, otherwise the probe is skipped with precondition_ok False.

    Exponents inside [0, 1] are expected to stay GE; exponents beyond 1 are
    allowed to break, which is what the fixed witness pair demonstrates.
    """
    base = loewner_compare(p, q, tol_rel=tol_rel)
    q_psd = positivity_margin(q) >= -tol_rel * max(1.0, operator_norm(q))
    if not (base.ge and q_psd):
        return MonotonePowerReport(precondition_ok=False, rows=[])
    rows: list[AlphaRow] = []
    for alpha in alphas:
        try:
            pa = matrix_power(p, alpha)
            qa = matrix_power(q, alpha)
            ge_m, _ = directional_margins(pa, qa)
            scale = max(1.0, operator_norm(pa), operator_norm(qa))
            verdict = loewner_compare(pa, qa, tol_rel=tol_rel)
            rows.append(AlphaRow(float(alpha), verdict.relation.value, ge_m, scale))
        except SpectralError as exc:
            rows.append(AlphaRow(float(alpha), "ERROR", float("nan"), 1.0, str(exc)))
    return MonotonePowerReport(precondition_ok=True, rows=rows)


@dataclass(frozen=True)
class SRow:
    s: float
    verdict: str
    margin: float


@dataclass
class ContractionProbeReport:
    rows: list[SRow]
    hypothesis_holds: bool
    conclusion: Verdict                 # Q vs I, expected LE
    implication_status: str             # confirmed | hypothesis_fails | violation_witness
    cross_check_required: bool
    cross_check_ok: bool | None
    failure_s: float | None


def probe_contraction_criterion(
    p: HermitianMatrix,
    q: HermitianMatrix,
    r: float,
    delta: float,
    w: float,
    s_values=(1.5, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0),
    *,
    growth: float = 2.0,
    s_cap: float = 1e6,
    tol_rel: float = TOL_REL,
) -> ContractionProbeReport:
    """Probe the implication: P^(r+delta) >= (P^(r/2) Q^s P^(r/2))^w for
    every s > 1 forces Q <= I.

    The hypothesis is sampled on the s grid.  When Q has an eigenvalue
    above 1 + 1e-6 the hypothesis must eventually fail because Q^s grows
    geometrically, so the grid is escalated past its end until a failing s
    is found (or s_cap is hit, which is reported as a cross-check failure).
    w = 0 makes the hypothesis vacuous and is rejected.
    """
    if not (r > 0 and r + delta > 0):
        raise ValueError(f"need r > 0 and r + delta > 0, got r={r}, delta={delta}")
    if not 0.0 < w <= 1.0:
        raise ValueError(f"w must lie in (0, 1], got {w}")
    if any(s <= 1.0 for s in s_values):
        raise ValueError(f"every s must exceed 1, got {tuple(s_values)}")
    for m in (p, q):
        if positivity_margin(m) <= pd_gate(m):
            raise NearSingularError(positivity_margin(m), pd_gate(m))
    lhs = matrix_power(p, r + delta)
    p_half = matrix_power(p, r / 2.0)

    def hyp_margin(s: float) -> tuple[str, float]:
        rhs = matrix_power(congruence(p_half, matrix_power(q, s)), w)
        ge_m, le_m = directional_margins(lhs, rhs)
        scale = max(1.0, operator_norm(lhs), operator_norm(rhs))
        verdict = classify_margins(ge_m, le_m, tol_rel * scale)
        return verdict.value, ge_m

    rows = []
    failure_s = None
    for s in s_values:
        verdict, margin = hyp_margin(float(s))
        rows.append(SRow(float(s), verdict, margin))
        if failure_s is None and verdict not in (Relation.GE.value, Relation.EQ.value):
            failure_s = float(s)
    hypothesis_holds = failure_s is None
    conclusion = loewner_compare(q, identity(q.dim), tol_rel=tol_rel)

    needs_cross = operator_norm(q) > 1.0 + 1e-6 and positivity_margin(q) > 0
    cross_ok: bool | None = None
    if needs_cross and failure_s is None:
        s = float(s_values[-1]) * growth
        while s <= s_cap:
            verdict, margin = hyp_margin(s)
            rows.append(SRow(s, verdict, margin))
            if verdict not in (Relation.GE.value, Relation.EQ.value):
                failure_s = s
                break
            s *= growth
        cross_ok = failure_s is not None
    elif needs_cross:
        cross_ok = True

    if not hypothesis_holds:
        status = "hypothesis_fails"
    elif conclusion.le:
        status = "confirmed"
    else:
        status = "violation_witness"
    return ContractionProbeReport(
        rows=rows,
        hypothesis_holds=hypothesis_holds,
        conclusion=conclusion,
        implication_status=status,
        cross_check_required=needs_cross,
        cross_check_ok=cross_ok,
        failure_s=failure_s,
    )


def _layer_tvalue(t: tuple[float, ...], layer: int) -> float:
    i = (layer + 1) // 2 if layer % 2 else layer // 2
    return t[i - 1]


def reduction_bound_matrix(tup: OperatorTuple, t, p, n: int) -> HermitianMatrix:
    """Peeled upper bound for the innermost sandwich: outer layers of the
    first ascending member reappear with flipped exponent signs and
    reciprocal bracket powers around the A_2n core.  Degenerates to the
    identity when n = 1."""
    mats = tup.matrices
    t = tuple(float(v) for v in t)
    p = tuple(float(v) for v in p)
    if n == 1:
        return identity(tup.dim)
    core = matrix_power(mats[2 * n - 1], t[n - 1] / p[2 * n - 2])
    for layer in range(2 * n - 2, 1, -1):
        idx = layer + 1
        tv = _layer_tvalue(t, layer)
        sign = 1.0 if layer % 2 else -1.0  # flipped relative to the hypothesis word
        x = matrix_power(mats[idx - 1], sign * tv / 2.0)
        core = matrix_power(congruence(x, core), 1.0 / p[layer - 1])
    return core


def reduction_scalar_interior(tup: OperatorTuple, t, p, n: int) -> float:
    """Scalar interior of the coarsest bound: norm factors for the layers
    that flip positive, reciprocal-margin factors for those that flip
    negative, folded with the same reciprocal powers; independent of p_2.
    Equals 1 when n = 1."""
    t = tuple(float(v) for v in t)
    p = tuple(float(v) for v in p)
    if n == 1:
        return 1.0
    mats = tup.matrices
    s = operator_norm(mats[2 * n - 1]) ** (t[n - 1] / p[2 * n - 2])
    for layer in range(2 * n - 2, 1, -1):
        idx = layer + 1
        tv = _layer_tvalue(t, layer)
        if layer % 2:
            s *= operator_norm(mats[idx - 1]) ** tv
        else:
            s *= (1.0 / positivity_margin(mats[idx - 1])) ** tv
        if layer > 2:
            s = s ** (1.0 / p[layer - 1])
    return s


@dataclass(frozen=True)
class ReductionRow:
    p_vector: tuple[float, ...]
    margin_core: float      # I - W
    scale_core: float
    margin_peel: float      # peeled bound - base sandwich
    scale_peel: float
    margin_scalar: float    # c*I - base sandwich
    scale_scalar: float
    c_total: float
    error: str | None = None

    def holds(self, tol_rel: float = SUITE_TOL_REL) -> tuple[bool, bool, bool]:
        if self.error is not None:
            return (False, False, False)
        return (
            self.margin_core >= -tol_rel * self.scale_core,
            self.margin_peel >= -tol_rel * self.scale_peel,
            self.margin_scalar >= -tol_rel * self.scale_scalar,
        )


@dataclass
class ReductionReport:
    instance_id: str
    premise_pass: bool
    rows: list[ReductionRow]
    red_flags: list[str]

    def all_hold(self, tol_rel: float = SUITE_TOL_REL) -> bool:
        return self.premise_pass and not self.red_flags and all(
            all(r.holds(tol_rel)) for r in self.rows
        )


def check_reduction_chain(
    tup: OperatorTuple,
    template: ParamTemplate,
    grid: PGrid,
    *,
    policy: WeightPolicy | None = None,
    tol_rel: float = TOL_REL,
    suite_tol_rel: float = SUITE_TOL_REL,
    master_seed: int = 0,
    instance_index: int = 0,
    instance_id: str = "0",
) -> ReductionReport:
    """Replicate the three-step reduction behind the order proof on one
    instance, per p-sample:

    (a) the bracketed core W of the first ascending member stays below I;
    (b) the innermost sandwich stays below its peeled matrix bound;
    (c) the same sandwich stays below the scalar bound c * I, where c is
        the interior raised to 1/p_2.

    Implications run (a) => (b) => (c) pointwise, so any sample where (a)
    holds but (b) or (c) fails is flagged as a tolerance or schedule bug.
    The premise is that the instance passes the first ascending member on
    the grid, checked with the supplied weight policy.
    """
    if policy is None:
        policy = WeightPolicy.necessity()
    k = tup.k
    n = k // 2
    if template.n != n:
        raise ValueError(f"template has {template.n} t-values, tuple needs {n}")
    premise = check_hypotheses(
        tup, template, grid, policy,
        tol_rel=tol_rel, master_seed=master_seed, instance_index=instance_index,
        instance_id=instance_id, members=((Family.ASCENDING, 1),),
    )
    premise_pass = all(r.holds_within(suite_tol_rel) for r in premise.rows)

    params0 = chains.placeholder_params(k, t=template.t, r=template.r)
    w_word = chains.hypothesis_core(chains.build_chain(Family.ASCENDING, 1, params0))
    matrices = _tuple_environment(tup)
    ident = identity(tup.dim)
    sample_rng = _rng(master_seed, instance_index, 2)
    rows: list[ReductionRow] = []
    red_flags: list[str] = []
    for p_vec in grid.vectors(2 * n, rng=sample_rng):
        try:
            env = dsl.Environment(
                scalars=_scalar_bindings(template, p_vec, (0.5,) * (k - 1)),
                matrices=matrices,
            )
            w_val = dsl.evaluate(w_word, env)
            margin_core, _ = directional_margins(ident, w_val)
            scale_core = max(1.0, operator_norm(w_val))

            x2 = matrix_power(tup.matrices[1], -template.t[0] / 2.0)
            base = congruence(x2, matrix_power(tup.matrices[0], float(p_vec[0])))
            bound = reduction_bound_matrix(tup, template.t, p_vec, n)
            margin_peel, _ = directional_margins(bound, base)
            scale_peel = max(1.0, operator_norm(bound), operator_norm(base))

            interior = reduction_scalar_interior(tup, template.t, p_vec, n)
            c_total = interior ** (1.0 / float(p_vec[1]))
            c_matrix = HermitianMatrix(c_total * np.eye(tup.dim))
            margin_scalar, _ = directional_margins(c_matrix, base)
            scale_scalar = max(1.0, c_total, operator_norm(base))
            row = ReductionRow(
                p_vector=tuple(float(v) for v in p_vec),
                margin_core=margin_core, scale_core=scale_core,
                margin_peel=margin_peel, scale_peel=scale_peel,
                margin_scalar=margin_scalar, scale_scalar=scale_scalar,
                c_total=c_total,
            )
        except (SpectralError, dsl.EvaluationError) as exc:
            row = ReductionRow(
                p_vector=tuple(float(v) for v in p_vec),
                margin_core=float("nan"), scale_core=1.0,
                margin_peel=float("nan"), scale_peel=1.0,
                margin_scalar=float("nan"), scale_scalar=1.0,
                c_total=float("nan"), error=str(exc),
            )
        rows.append(row)
        holds_core, holds_peel, holds_scalar = row.holds(suite_tol_rel)
        if premise_pass and holds_core and not (holds_peel and holds_scalar):
            red_flags.append(
                f"instance {instance_id} p={row.p_vector}: core bound holds but "
                f"peel={row.margin_peel:.3e} scalar={row.margin_scalar:.3e}"
            )
    return ReductionReport(instance_id, premise_pass, rows, red_flags)


@dataclass
class LimitReport:
    c: float
    p2_values: tuple[float, ...]
    sequence: tuple[float, ...]
    monotone_nonincreasing: bool
    final_gap: float                    # sequence[-1] - 1
    lambda_max_core: float              # top eigenvalue of A2^(-1/2) A1 A2^(-1/2)
    inferred_bound: float               # min of the sequence
    bound_consistent: bool              # lambda_max <= inferred bound (+tol)
    order_consistent: bool              # declared: A2 >= A1 plausible
    conclusion: Verdict                 # direct A2 vs A1 comparison


def limit_probe(
    a1: HermitianMatrix,
    a2: HermitianMatrix,
    c: float | None = None,
    p2_values=(1.0, 10.0, 100.0, 1000.0, 10000.0),
    tol_rel: float = TOL_REL,
) -> LimitReport:
    """Demonstrate the closing limit argument on a pair: with the first
    exponents pinned to 1, a p2-independent interior c bounds the core
    A2^(-1/2) A1 A2^(-1/2) by c^(1/p2), and letting p2 grow drives the
    bound to 1, i.e. to A2 >= A1.

    c defaults to max(1, lambda_max(core)), the sharpest constant for which
    the bound family is valid on the sampled points.  The declaration
    threshold 1 + 1e-6 matches the probe's resolution, not a proof.
    """
    inv_half = matrix_power(a2, -0.5)
    core = congruence(inv_half, a1)
    lam = float(core.decomposition().eigenvalues[-1])
    if c is None:
        c = max(1.0, lam)
    c = float(c)
    if c < 0:
        raise ValueError(f"bound constant must be nonnegative, got {c}")
    p2s = tuple(float(v) for v in p2_values)
    seq = tuple(c ** (1.0 / v) for v in p2s)
    monotone = all(seq[i + 1] <= seq[i] + 1e-12 * max(1.0, seq[i]) for i in range(len(seq) - 1))
    inferred = min(seq)
    scale = max(1.0, lam)
    bound_ok = lam <= inferred + tol_rel * scale
    consistent = inferred <= 1.0 + 1e-6 or lam <= 1.0 + 1e-6
    return LimitReport(
        c=c, p2_values=p2s, sequence=seq,
        monotone_nonincreasing=monotone,
        final_gap=seq[-1] - 1.0,
        lambda_max_core=lam,
        inferred_bound=inferred,
        bound_consistent=bound_ok,
        order_consistent=consistent,
        conclusion=loewner_compare(a2, a1, tol_rel=tol_rel),
    )


@dataclass(frozen=True)
class SearchConfig:
    budget: int = 200
    k: int = 3
    dims: tuple[int, ...] = (2, 3, 4)
    master_seed: int = 0
    grid: PGrid = PGrid()
    policy: WeightPolicy | None = None   # None: fresh random fixed weights per instance
    t_range: tuple[float, float] = (0.05, 0.95)
    r_gap: tuple[float, float] = (0.1, 2.0)
    w_range: tuple[float, float] = (0.2, 0.95)
    field_kind: str = "real"
    suite_tol_rel: float = SUITE_TOL_REL

    def to_json(self) -> dict:
        return {
            "budget": self.budget, "k": self.k, "dims": list(self.dims),
            "master_seed": self.master_seed,
            "grid": list(self.grid.values),
            "grid_growth": self.grid.growth, "grid_cap": self.grid.cap,
            "policy": self.policy.describe() if self.policy else "fixed-random",
            "t_range": list(self.t_range), "r_gap": list(self.r_gap),
            "w_range": list(self.w_range), "field": self.field_kind,
            "suite_tol_rel": self.suite_tol_rel,
        }


@dataclass
class SearchReport:
    findings: list[dict]
    stats: dict
    config: dict
    master_seed: int

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "master_seed": self.master_seed,
            "findings": self.findings,
            "stats": self.stats,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def implied_core_violation(
    tup: OperatorTuple, template: ParamTemplate, grid: PGrid,
    master_seed: int = 0, instance_index: int = 0,
    suite_tol_rel: float = SUITE_TOL_REL,
) -> dict | None:
    """Check the bracketed core of every member against the identity, at
    the instance's own t values and with every t pinned to 1.

    Under a fixed weight vector the hypothesis family can only hold for
    every exponent if ascending cores stay below I and descending cores
    above I; and the closing limit step of the order derivation evaluates
    the family at t = 1.  A violated core therefore certifies that an
    escalated or t-shifted sample would expose a hypothesis failure even
    when the capped grid did not.
    """
    k = tup.k
    n = k // 2
    matrices = _tuple_environment(tup)
    ident = identity(tup.dim)
    rng = _rng(master_seed, instance_index, 3)
    p_vectors = grid.vectors(2 * n, rng=rng)
    t_variants = [template.t]
    ones = (1.0,) * n
    if template.t != ones:
        t_variants.append(ones)
    for t_vec in t_variants:
        var_template = ParamTemplate(t=t_vec, r=float(t_vec[-1]) + 1.0)
        params0 = chains.placeholder_params(k, t=t_vec, r=var_template.r)
        for chain in chains.hypothesis_set(params0):
            word = chains.hypothesis_core(chain)
            for p_vec in p_vectors:
                env = dsl.Environment(
                    scalars=_scalar_bindings(var_template, p_vec, (0.5,) * (k - 1)),
                    matrices=matrices,
                )
                try:
                    w_val = dsl.evaluate(word, env)
                except (SpectralError, dsl.EvaluationError):
                    continue
                if chain.direction is Direction.GE:
                    margin, _ = directional_margins(ident, w_val)
                else:
                    margin, _ = directional_margins(w_val, ident)
                scale = max(1.0, operator_norm(w_val))
                if margin < -suite_tol_rel * scale:
                    return {
                        "family": chain.family.value,
                        "member": chain.member,
                        "t": list(t_vec),
                        "p_vector": list(p_vec),
                        "core_margin": margin,
                    }
    return None


def search_counterexample(config: SearchConfig) -> SearchReport:
    """Randomized hunt for instances whose sampled hypotheses all pass yet
    whose conclusion fails.

    Passing every sampled grid point never certifies the universal
    hypothesis, so candidates are additionally screened through the core
    check above before being emitted; everything else lands in statistics.
    """
    findings: list[dict] = []
    counters = {
        "instances": 0,
        "hypothesis_failed": 0,
        "hypothesis_failed_after_escalation": 0,
        "evaluation_error": 0,
        "implied_hypothesis_failure": 0,
        "conclusion_held": 0,
        "emitted": 0,
    }
    worst_margins: list[float] = []
    n = config.k // 2
    for idx in range(config.budget):
        counters["instances"] += 1
        rng = _rng(config.master_seed, idx)
        dim = int(rng.choice(np.asarray(config.dims)))
        tup = gen_unordered_tuple(
            config.k, dim, [config.master_seed, idx, 10], field_kind=config.field_kind
        )
        t = tuple(rng.uniform(*config.t_range) for _ in range(n))
        r = t[-1] + rng.uniform(*config.r_gap)
        template = ParamTemplate(t=t, r=r)
        policy = config.policy or WeightPolicy.fixed(
            rng.uniform(*config.w_range) for _ in range(config.k - 1)
        )
        grid = config.grid
        escalations = 0
        violation_row = None
        saw_error = False
        while True:
            report = check_hypotheses(
                tup, template, grid, policy,
                master_seed=config.master_seed, instance_index=idx,
                instance_id=str(idx), stop_on_violation=True,
                suite_tol_rel=config.suite_tol_rel,
            )
            genuine = [
                r for r in report.rows
                if r.error is None and not r.holds_within(config.suite_tol_rel)
            ]
            if genuine:
                violation_row = genuine[0]
                break
            if any(r.error is not None for r in report.rows):
                # ill-conditioned beyond the pd gate: indeterminate instance
                saw_error = True
                break
            nxt = grid.escalate()
            if nxt is None:
                break
            grid = nxt
            escalations += 1
        if violation_row is not None:
            key = "hypothesis_failed_after_escalation" if escalations else "hypothesis_failed"
            counters[key] += 1
            worst_margins.append(violation_row.margin)
            continue
        if saw_error:
            counters["evaluation_error"] += 1
            continue
        conclusion = check_conclusion(tup)
        if all(v.ge for v in conclusion):
            counters["conclusion_held"] += 1
            continue
        implied = implied_core_violation(
            tup, template, grid,
            master_seed=config.master_seed, instance_index=idx,
            suite_tol_rel=config.suite_tol_rel,
        )
        if implied is not None:
            counters["implied_hypothesis_failure"] += 1
            continue
        counters["emitted"] += 1
        findings.append({
            "instance_index": idx,
            "k": config.k,
            "dim": dim,
            "t": list(t),
            "r": r,
            "weights": list(policy.values) if policy.values else policy.describe(),
            "grid": list(grid.values),
            "conclusion_margins": [v.margin for v in conclusion],
            "matrices": tup.to_json(),
        })
    hist_counts, hist_edges = np.histogram(
        np.asarray(worst_margins) if worst_margins else np.zeros(0),
        bins=np.linspace(-3.0, 0.5, 36),
    )
    stats = {
        "counters": counters,
        "margin_histogram": {
            "edges": [float(e) for e in hist_edges],
            "counts": [int(c) for c in hist_counts],
        },
        "worst_margin": min(worst_margins) if worst_margins else None,
    }
    return SearchReport(
        findings=findings, stats=stats,
        config=config.to_json(), master_seed=config.master_seed,
    )
