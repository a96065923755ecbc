"""Valuation-ring analysis over lexicographic exponent groups.

Every convex cut of the exponent group names a coarsening of the exponent
valuation on the power-series field: an element sits in the coarsened ring
exactly when its leading exponent, read above the cut, is zero or positive.
This module turns cuts into valuation descriptors, enumerates the definable
family (the labeled image of the (p, n) cut map), checks the three-way
equivalence behind the "definable with real closed residue field" test, and
runs the differential suites that pin the formula layer against plain ring
membership.

The differential runs are deliberately two-track: membership comes from
`ring_member` (a lexicographic sign test on the exponent), truth comes from
`eval_decidable` on the built formulas (pattern decisions through the root
oracle and the quotient-exponent tables). The two never share a code path
past the cut construction itself, so a bug in either side shows up as a
mismatch instead of cancelling out.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .convex import (
    ConvexCut,
    chain_cuts,
    cut_labels,
    cut_name,
    g_pn,
    has_tower,
    is_dp_minimal,
    labels_at,
    max_divisible,
    max_p_divisible,
    non_definability_certificate,
    np_map,
    suffix_divisible_primes,
    thm_condition_prime,
    top_cut,
    validate_cut,
)
from .errors import NonEffectiveError, ShapeError
from .formulas import (
    And,
    Forall,
    Or,
    build_phi_p,
    build_phi_pn,
    choose_params,
    eval_decidable,
    eval_sampled,
    match_phi_p,
    match_phi_pn,
)
from .groups import LexWord, elem_cmp, print_group, zero_element
from .hahn import (
    HahnSeries,
    const_series,
    monomial,
    print_series,
    sample_series,
    series_neg,
    v_of,
    zero_series,
)
from .primes import INF


# ---------------------------------------------------------------------------
# descriptors and membership


@dataclass(frozen=True)
class ValuationDescriptor:
    """A coarsening of the exponent valuation, named by its convex cut.

    cut = Bottom is the exponent valuation itself; cut = Top is the trivial
    valuation (ring = everything). label carries the (p, n) tag when the
    descriptor came out of the classification map, None otherwise.
    """

    group: LexWord
    cut: ConvexCut
    label: tuple[int, int] | None = None

    def __post_init__(self):
        validate_cut(self.group, self.cut)

    def name(self) -> str:
        return cut_name(self.group, self.cut)

    def is_trivial(self) -> bool:
        return self.cut == top_cut(self.group)


def ring_member(V: ValuationDescriptor, a: HahnSeries) -> bool:
    """Is `a` in the valuation ring of the coarsening?

    Zero belongs to every ring. Otherwise membership reads the leading
    exponent above the cut: coordinates of the quotient prefix all zero
    (the exponent fell into the convex subgroup) or lexicographically
    positive. Cuts inside a schematic tower have no concrete elements to
    test against.
    """
    if a.is_zero():
        return True
    if V.cut.inner is not None:
        raise NonEffectiveError("ring membership at a cut inside a schematic tower")
    G = V.group
    v = v_of(a)
    zero = zero_element(G)
    masked = tuple(v[:V.cut.seg]) + tuple(zero[V.cut.seg:])
    return elem_cmp(G, masked, zero) >= 0


def is_residue_real_closed(G: LexWord, c: ConvexCut) -> bool:
    """The residue field of the coarsening at c is real closed exactly when
    the convex subgroup below c is divisible (all primes)."""
    return suffix_divisible_primes(G, c).is_all()


def v0_descriptor(G: LexWord) -> ValuationDescriptor:
    """Coarsest coarsening with real closed residue field."""
    return ValuationDescriptor(G, max_divisible(G))


def v_p_descriptor(G: LexWord, p: int) -> ValuationDescriptor:
    """Coarsening at the maximal p-divisible convex subgroup."""
    return ValuationDescriptor(G, max_p_divisible(G, p), (p, 0))


def v_pn_descriptor(G: LexWord, p: int, n: int) -> ValuationDescriptor:
    """Level-n member of the definable family at p; level 0 is v_p."""
    return ValuationDescriptor(G, g_pn(G, p, n), (p, n))


# ---------------------------------------------------------------------------
# the definable family


def enumerate_definable(
    G: LexWord, display_primes: tuple[int, ...] = (2, 3, 5, 7), inner_limit: int = 4
):
    """Labeled cuts of the materialized chain, deepest first.

    Returns a list of (cut, label_entries) pairs; label_entries are the
    closed-form (prime-set, level-range) families from cut_labels, so
    primes beyond the display list are covered symbolically. Tower chains
    are cut off at inner_limit, mirroring chain_cuts.
    """
    out = []
    for c in reversed(chain_cuts(G, inner_limit=inner_limit)):
        entries = cut_labels(G, c)
        if entries:
            out.append((c, entries))
    return out


def verify_thm_defblRCF(G: LexWord) -> dict:
    """Three-way equivalence report for "some definable coarsening has a
    real closed residue field".

    cond1: an enumerated definable cut carries the residue flag.
    cond2: the prime condition (some p with p-divisible part not reaching
           the divisible part's closure requirement) is non-empty.
    cond3: the divisible-part cut itself is in the definable image.
    consistent: the three agree, as the equivalence demands.
    """
    image = enumerate_definable(G)
    image_cuts = [c for c, _ in image]
    cond1 = any(is_residue_real_closed(G, c) for c in image_cuts)
    cond2 = not thm_condition_prime(G).is_empty()
    cond3 = max_divisible(G) in image_cuts
    return {
        "cond1": cond1,
        "cond2": cond2,
        "cond3": cond3,
        "consistent": cond1 == cond2 == cond3,
    }


# ---------------------------------------------------------------------------
# differential verification: formulas against ring membership


def boundary_monomials(G: LexWord) -> list[HahnSeries]:
    """Deterministic membership-boundary probes.

    Membership in any coarsened ring flips exactly where the leading
    exponent crosses a cut, so the probe set walks every slot with small
    exponents of both signs (magnitudes 1, 2, 3 and 1/2 where the slot
    admits halves), both coefficient signs, plus constants and zero.
    """
    out: list[HahnSeries] = [
        zero_series(G),
        const_series(G, Fraction(1)),
        const_series(G, Fraction(-1)),
        const_series(G, Fraction(7)),
        const_series(G, Fraction(-7)),
    ]
    nslots = G.n_slots()
    for j in range(nslots):
        for mag in (Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2)):
            for sgn in (1, -1):
                exps = [Fraction(0)] * nslots
                exps[j] = sgn * mag
                try:
                    s = monomial(G, tuple(exps), 1)
                except (ShapeError, ValueError, TypeError):
                    continue  # slot does not admit this exponent
                out.append(s)
                out.append(series_neg(s))
    return out


def _stability_clause(phi_p) -> Forall:
    """The universal ("multiplication preserves the class") clause of a
    built ring formula; extraction is positional, guarded by the matcher."""
    if match_phi_p(phi_p) is None:
        raise ShapeError("not a built ring formula")
    clause = phi_p.left.right.right
    assert isinstance(clause, Forall)
    return clause


def _coset_clauses(phi_pn) -> list[tuple[str, Forall]]:
    """Both universal coset-coverage clauses of a built level-n formula."""
    if match_phi_pn(phi_pn) is None:
        raise ShapeError("not a built level-n formula")
    level = phi_pn.right
    assert isinstance(level, Or) and isinstance(level.left, And)
    b1, b2 = level.left.right, level.right
    assert isinstance(b1, Forall) and isinstance(b2, Forall)
    return [("coset-inside", b1), ("coset-outside", b2)]


def differential_verify(
    G: LexWord,
    p: int,
    n: int,
    samples: int = 200,
    seed: int = 42,
    falsify_budget: int = 25,
) -> dict:
    """Compare the formula layer against ring membership on a sample sweep.

    Every x (boundary probes plus `samples` random series) is judged three
    ways: the ring formula against the level-0 ring, the level-n formula
    against the level-n ring, and — wherever a universal clause decides
    True — a sampled falsification attempt on that clause. Any disagreement
    or successful falsification lands in `mismatches`.

    falsify_budget is the witness-grid size for the stability clause; the
    coset clauses run at min(falsify_budget, 25) since their hypothesis
    shape makes sampled falsification structurally vacuous (kept as a live
    execution path, not as a meaningful search).
    """
    if not G.is_effective():
        raise NonEffectiveError("differential sampling needs an effective group")
    phi_p = build_phi_p(p)
    phi_pn = build_phi_pn(p, n, choose_params(G, p, n))
    vp = v_p_descriptor(G, p)
    vpn = v_pn_descriptor(G, p, n)
    clauses = [("stability", _stability_clause(phi_p), falsify_budget)]
    clauses += [(nm, cl, min(falsify_budget, 25)) for nm, cl in _coset_clauses(phi_pn)]

    xs = boundary_monomials(G)
    xs += [sample_series(G, seed * 6007 + i) for i in range(samples)]

    mismatches: list[dict] = []
    for i, x in enumerate(xs):
        env = {"x": x}
        d_p = eval_decidable(phi_p, env, G)
        r_p = ring_member(vp, x)
        if d_p != r_p:
            mismatches.append(
                {"x": print_series(x), "kind": "phi_p", "decide": d_p, "ring": r_p}
            )
        d_pn = eval_decidable(phi_pn, env, G)
        r_pn = ring_member(vpn, x)
        if d_pn != r_pn:
            mismatches.append(
                {"x": print_series(x), "kind": "phi_pn", "decide": d_pn, "ring": r_pn}
            )
        for label, clause, budget in clauses:
            if not eval_decidable(clause, env, G):
                continue
            out = eval_sampled(clause, env, G, budget=budget, seed=seed + 31 * i)
            if out.status == "falsified_by":
                mismatches.append(
                    {
                        "x": print_series(x),
                        "kind": "falsified",
                        "clause": label,
                        "witness": {
                            k: print_series(v) for k, v in (out.witness or {}).items()
                        },
                    }
                )
    return {
        "p": p,
        "n": n,
        "samples": samples,
        "checked": len(xs),
        "mismatches": mismatches,
    }


def differential_cross(
    G: LexWord, p_formula: int, p_ring: int, samples: int = 60, seed: int = 42
) -> list[dict]:
    """Harness sanity: judge the ring formula for one prime against the
    ring of another. On groups where the two rings differ this must find
    mismatches — if it cannot, the differential harness is blind."""
    if not G.is_effective():
        raise NonEffectiveError("differential sampling needs an effective group")
    phi = build_phi_p(p_formula)
    V = v_p_descriptor(G, p_ring)
    xs = boundary_monomials(G)
    xs += [sample_series(G, seed * 7457 + i) for i in range(samples)]
    found = []
    for x in xs:
        d = eval_decidable(phi, {"x": x}, G)
        r = ring_member(V, x)
        if d != r:
            found.append({"x": print_series(x), "decide": d, "ring": r})
    return found


# ---------------------------------------------------------------------------
# the classification report


def _np_display(G: LexWord, display_primes: tuple[int, ...]) -> dict:
    table = np_map(G)
    disp = {}
    for p in display_primes:
        v = table.value_at(p)
        disp[str(p)] = "inf" if v is INF else v
    return {"display": disp, "pieces": table.to_json()}


def _labels_display(G: LexWord, c: ConvexCut, display_primes: tuple[int, ...]) -> dict:
    disp = {}
    for p in display_primes:
        ns = labels_at(G, c, p)
        disp[str(p)] = "unbounded" if ns is None else ns
    return disp


def _coincidence_note(G: LexWord, display_primes: tuple[int, ...]) -> str | None:
    """Spotted when consecutive levels share a cut strictly below the top:
    the computed family repeats before it coarsens, which a reader eyeballing
    level counts may not expect. The note states the computed facts only."""
    for p in display_primes:
        np_v = np_map(G).value_at(p)
        if np_v is INF or np_v < 2:
            continue
        cuts = [g_pn(G, p, nn) for nn in range(np_v + 1)]
        for nn in range(np_v - 1):
            if cuts[nn] == cuts[nn + 1] and cuts[nn] != cuts[np_v]:
                return (
                    "for p = {p} the level-{a} and level-{b} cuts coincide "
                    "({c}) while level {np} is strictly coarser ({top}); the "
                    "family repeats before it coarsens and the computed cuts "
                    "are reported as-is".format(
                        p=p,
                        a=nn,
                        b=nn + 1,
                        c=cut_name(G, cuts[nn]),
                        np=np_v,
                        top=cut_name(G, cuts[np_v]),
                    )
                )
    return None


def classification_report(
    G: LexWord,
    display_primes: tuple[int, ...] = (2, 3, 5, 7),
    samples: int = 200,
    seed: int = 42,
    inner_limit: int = 4,
    falsify_budget: int = 25,
    differential_primes: tuple[int, ...] = (2, 3),
    differential_max_level: int = 1,
) -> dict:
    """Everything known about the definable coarsenings of one group.

    Chain cuts are classified exactly one way each: definable (labels from
    the level map), certified non-definable (straddling regular pair), or
    undecided with a reason. A labeled cut that also gets a certificate, or
    an unlabeled one that gets none, is a contradiction in the theory layer
    itself and is reported as a red flag instead of being patched over.

    The differential block reruns the formula-vs-ring sweep for the first
    differential_primes at levels up to differential_max_level (capped by
    each prime's own level bound) on effective groups; schematic groups
    record why sampling is impossible instead.
    """
    chain = chain_cuts(G, inner_limit=inner_limit)
    image = enumerate_definable(G, display_primes, inner_limit=inner_limit)
    image_cuts = {c for c, _ in image}

    notes: list[str] = []
    cuts_rows = []
    definable_rows = []
    cert_rows = []
    residue_rows = []
    for c in chain:
        nm = cut_name(G, c)
        residue_rows.append(
            {"cut": nm, "residue_real_closed": is_residue_real_closed(G, c)}
        )
        cert = non_definability_certificate(G, c, display_primes)
        if c in image_cuts:
            status = "definable"
            if cert is not None:
                status = "red-flag"
                notes.append(
                    f"RED FLAG: cut {nm} is labeled definable yet carries a "
                    "non-definability certificate; the two routes disagree"
                )
            cert_rows.append({"cut": nm, "certificate": "none"})
        elif cert is not None:
            status = "certified-non-definable"
            cert_rows.append({"cut": nm, "certificate": cert.to_json(G)})
        else:
            status = "undecided"
            cert_rows.append({"cut": nm, "certificate": "undecided"})
            notes.append(
                f"RED FLAG: cut {nm} is neither labeled nor certified below "
                f"the display horizon {display_primes}"
            )
        cuts_rows.append({"cut": nm, "status": status})

    for c, entries in image:
        definable_rows.append(
            {
                "cut": cut_name(G, c),
                "labels": [e.to_json() for e in entries],
                "display_labels": _labels_display(G, c, display_primes),
                "residue_real_closed": is_residue_real_closed(G, c),
                "trivial": c == top_cut(G),
            }
        )

    differential = []
    if G.is_effective():
        for p in differential_primes:
            np_v = np_map(G).value_at(p)
            top_n = differential_max_level if np_v is INF else min(np_v, differential_max_level)
            for nn in range(top_n + 1):
                run = differential_verify(
                    G, p, nn, samples=samples, seed=seed, falsify_budget=falsify_budget
                )
                differential.append(run)
    else:
        notes.append(
            "differential sampling skipped: the group has schematic components "
            "with no concrete element representation"
        )

    if has_tower(G):
        notes.append(
            f"the cut chain is infinite; the report materializes the first "
            f"{inner_limit} tower cuts and the deep limit cut"
        )
    coin = _coincidence_note(G, display_primes)
    if coin is not None:
        notes.append(coin)

    return {
        "group": print_group(G),
        "config": {
            "display_primes": list(display_primes),
            "samples": samples,
            "seed": seed,
            "inner_limit": inner_limit,
        },
        "np_table": _np_display(G, display_primes),
        "cuts": cuts_rows,
        "chain_truncated": has_tower(G),
        "definable": definable_rows,
        "certificates": cert_rows,
        "residue_flags": residue_rows,
        "thm26": verify_thm_defblRCF(G),
        "dp_minimal": is_dp_minimal(G),
        "differential": differential,
        "notes": notes,
    }
