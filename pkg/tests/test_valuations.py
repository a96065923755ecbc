import pytest

from arclab.convex import (
    bottom_cut,
    chain_cuts,
    cut_name,
    cuts_cmp,
    max_divisible,
    parse_cut,
    top_cut,
)
from arclab.errors import NonEffectiveError
from arclab.groups import parse_group
from arclab.hahn import parse_series, zero_series
from arclab.primes import PrimeSet
from arclab.valuations import (
    ValuationDescriptor,
    boundary_monomials,
    differential_cross,
    differential_verify,
    enumerate_definable,
    is_residue_real_closed,
    ring_member,
    v0_descriptor,
    v_p_descriptor,
    v_pn_descriptor,
    verify_thm_defblRCF,
)

K1 = parse_group("lex(Z, Q)")
K2 = parse_group("lex(omega_tower(start=0))")
ZPI = parse_group("lex(real(1, pi))")
C0 = parse_group("lex(poly_module(Zloc(2), pi))")
ZL2 = parse_group("lex(Zloc(2), Q)")


# -- ring membership ---------------------------------------------------------------


def test_ring_member_pins():
    V = ValuationDescriptor(K1, parse_cut(K1, "seg1"))
    assert ring_member(V, parse_series("t^(0,-5)", K1))
    assert not ring_member(V, parse_series("t^(-1,3)", K1))
    assert ring_member(V, parse_series("t^(1,-99)", K1))
    assert ring_member(V, zero_series(K1))


def test_trivial_ring_holds_everything():
    V = ValuationDescriptor(K1, top_cut(K1))
    assert V.is_trivial()
    for text in ("t^(-3,0)", "t^(0,-1/2)", "7", "t^(2,5)"):
        assert ring_member(V, parse_series(text, K1))


def test_bottom_ring_is_the_plain_valuation_ring():
    V = ValuationDescriptor(K1, bottom_cut(K1))
    assert ring_member(V, parse_series("t^(0,1/2)", K1))
    assert ring_member(V, parse_series("1 + t^(1,0)", K1))
    assert not ring_member(V, parse_series("t^(0,-1/2)", K1))


def test_ring_member_coarsening_monotone():
    # a shallower cut only ever enlarges the ring
    chain = chain_cuts(K1)
    probes = [parse_series(s, K1) for s in ("t^(-1,2)", "t^(0,-5)", "t^(1,0)", "3")]
    for deep, shallow in zip(chain[1:], chain):
        vd = ValuationDescriptor(K1, deep)
        vs = ValuationDescriptor(K1, shallow)
        assert cuts_cmp(shallow, deep) == -1
        for x in probes:
            if ring_member(vd, x):
                assert ring_member(vs, x)


def test_ring_member_inner_cut_zero_only():
    # schematic cuts admit no nonzero test elements; zero still belongs
    V = ValuationDescriptor(K2, parse_cut(K2, "seg0+2"))
    assert ring_member(V, zero_series(K2))


# -- descriptors ----------------------------------------------------------------------


def test_v_p_is_level_zero():
    for G in (K1, ZPI, ZL2):
        for p in (2, 3, 5):
            assert v_p_descriptor(G, p).cut == v_pn_descriptor(G, p, 0).cut


def test_v_pn_saturation_pin():
    assert v_pn_descriptor(ZPI, 2, 2).cut == top_cut(ZPI)
    assert v_pn_descriptor(ZPI, 2, 2).is_trivial()


def test_v0_pins():
    assert v0_descriptor(K1).name() == "seg1"
    assert v0_descriptor(K2).name() == "bottom"
    assert v0_descriptor(ZPI).name() == "bottom"
    assert v0_descriptor(C0).name() == "bottom"


def test_v0_residue_flag():
    # v0 is the shallowest chain cut whose residue is real closed
    for G in (K1, K2, ZPI, C0):
        c0 = v0_descriptor(G).cut
        assert is_residue_real_closed(G, c0)
        for c in chain_cuts(G):
            if cuts_cmp(c, c0) < 0:  # strictly shallower
                assert not is_residue_real_closed(G, c)
            else:
                assert is_residue_real_closed(G, c)


# -- the definable image ----------------------------------------------------------------


def _image_by_name(G, **kw):
    return {cut_name(G, c): entries for c, entries in enumerate_definable(G, **kw)}


def test_image_k1():
    img = _image_by_name(K1)
    assert set(img) == {"seg1", "top"}
    [e] = img["seg1"]
    assert e.primes.is_all() and (e.n_min, e.n_max) == (0, 0)
    [e] = img["top"]
    assert e.primes.is_all() and (e.n_min, e.n_max) == (1, 1)


def test_image_k2():
    img = _image_by_name(K2)
    assert set(img) == {"seg0+1", "seg0+2", "seg0+3", "seg0+4", "top"}
    for name, p in (("seg0+1", 3), ("seg0+2", 5), ("seg0+3", 7), ("seg0+4", 11)):
        [e] = img[name]
        assert e.primes == PrimeSet.single(p) and (e.n_min, e.n_max) == (0, 0)
    top_entries = {(e.primes, e.n_min, e.n_max) for e in img["top"]}
    assert top_entries == {
        (PrimeSet.single(2), 0, 0),
        (PrimeSet.cofinite_excluding([2]), 1, 1),
    }


def test_image_zpluspi():
    img = _image_by_name(ZPI)
    assert set(img) == {"bottom", "top"}
    [e] = img["bottom"]
    assert e.primes.is_all() and (e.n_min, e.n_max) == (0, 1)
    [e] = img["top"]
    assert e.primes.is_all() and (e.n_min, e.n_max) == (2, 2)


def test_image_c0():
    img = _image_by_name(C0)
    assert set(img) == {"bottom", "top"}
    [e] = img["bottom"]
    assert e.primes == PrimeSet.single(2) and e.n_min == 0 and e.n_max is None
    [e] = img["top"]
    assert e.primes == PrimeSet.cofinite_excluding([2]) and (e.n_min, e.n_max) == (0, 0)


def test_image_deepest_first():
    for G in (K1, K2, ZPI, C0):
        cuts = [c for c, _ in enumerate_definable(G)]
        for a, b in zip(cuts, cuts[1:]):
            assert cuts_cmp(a, b) == 1  # strictly deeper first


# -- the equivalence report ----------------------------------------------------------------


def test_thm_verdicts():
    assert verify_thm_defblRCF(K1) == {
        "cond1": True,
        "cond2": True,
        "cond3": True,
        "consistent": True,
    }
    assert verify_thm_defblRCF(K2) == {
        "cond1": False,
        "cond2": False,
        "cond3": False,
        "consistent": True,
    }
    assert verify_thm_defblRCF(parse_group("lex(Q)"))["cond3"] is True
    for G in (K1, K2, ZPI, C0, ZL2):
        assert verify_thm_defblRCF(G)["consistent"]


def test_v0_definable_iff_conditions_hold():
    for G in (K1, K2, ZPI, C0):
        rep = verify_thm_defblRCF(G)
        image_cuts = [c for c, _ in enumerate_definable(G)]
        assert rep["cond3"] == (max_divisible(G) in image_cuts)


# -- differential sweeps ----------------------------------------------------------------


def test_boundary_monomials_k1():
    probes = boundary_monomials(K1)
    assert len(probes) == 33  # 5 constants + 28 signed monomials (Z slot skips 1/2)
    texts = {p.is_zero() for p in probes}
    assert True in texts  # zero is probed


def test_differential_small_runs_clean():
    for G, p, n in ((K1, 2, 0), (K1, 2, 1), (ZPI, 2, 2), (ZL2, 3, 0)):
        run = differential_verify(G, p, n, samples=25, seed=7, falsify_budget=10)
        assert run["mismatches"] == []
        assert run["checked"] == 25 + len(boundary_monomials(G))


def test_differential_needs_effective_group():
    with pytest.raises(NonEffectiveError):
        differential_verify(K2, 2, 0, samples=5)
    with pytest.raises(NonEffectiveError):
        differential_verify(C0, 2, 0, samples=5)


def test_differential_cross_is_not_blind():
    # judging the 2-adic ring formula against the 3-ring must blow up:
    # on lex(Zloc(2), Q) those rings genuinely differ
    found = differential_cross(ZL2, 2, 3, samples=40, seed=3)
    assert found, "adversarial cross-check found no mismatch; harness is blind"


def test_differential_cross_agrees_when_rings_coincide():
    # on lex(Z, Q) every prime pins the same cut, so crossing primes is silent
    assert differential_cross(K1, 2, 3, samples=40, seed=3) == []


# -- classification reports (session fixture computes them once) -----------------------------


def test_report_shapes(reports):
    keys = {
        "group",
        "config",
        "np_table",
        "cuts",
        "chain_truncated",
        "definable",
        "certificates",
        "residue_flags",
        "thm26",
        "dp_minimal",
        "differential",
        "notes",
    }
    for name, rep in reports.items():
        assert set(rep) == keys, name


def test_report_statuses_clean(reports):
    for name, rep in reports.items():
        for row in rep["cuts"]:
            assert row["status"] in ("definable", "certified-non-definable"), (
                name,
                row,
            )
        assert not any(n.startswith("RED FLAG") for n in rep["notes"]), name


def test_report_np_tables(reports):
    assert reports["k1"]["np_table"]["display"] == {"2": 1, "3": 1, "5": 1, "7": 1}
    assert reports["k2"]["np_table"]["display"] == {"2": 0, "3": 1, "5": 1, "7": 1}
    assert reports["zpluspi"]["np_table"]["display"] == {"2": 2, "3": 2, "5": 2, "7": 2}
    assert reports["c0"]["np_table"]["display"] == {"2": "inf", "3": 0, "5": 0, "7": 0}


def test_report_dp_flags(reports):
    assert reports["k1"]["dp_minimal"] is True
    assert reports["k2"]["dp_minimal"] is True
    assert reports["zpluspi"]["dp_minimal"] is True
    assert reports["c0"]["dp_minimal"] is False


def test_report_differential_clean(reports):
    for name in ("k1", "zpluspi"):
        runs = reports[name]["differential"]
        assert runs, name
        for run in runs:
            assert run["mismatches"] == [], (name, run["p"], run["n"])
    for name in ("k2", "c0"):
        assert reports[name]["differential"] == []
        assert any("differential sampling skipped" in n for n in reports[name]["notes"])


def test_report_notes(reports):
    assert reports["k1"]["notes"] == []
    k2_notes = reports["k2"]["notes"]
    assert len(k2_notes) == 2
    assert any("chain is infinite" in n for n in k2_notes)
    zpi_notes = reports["zpluspi"]["notes"]
    assert len(zpi_notes) == 1 and "coincide" in zpi_notes[0]
    assert "level-0 and level-1" in zpi_notes[0]


def test_report_certificates(reports):
    by_cut = {row["cut"]: row["certificate"] for row in reports["k2"]["certificates"]}
    assert by_cut["top"] == "none"
    assert by_cut["seg0+1"] == "none"
    assert by_cut["bottom"] != "none" and by_cut["bottom"]["pieces"]
    k1_cuts = {row["cut"]: row["certificate"] for row in reports["k1"]["certificates"]}
    assert k1_cuts["seg1"] == "none" and k1_cuts["bottom"] != "none"


def test_report_thm_blocks(reports):
    assert reports["k1"]["thm26"] == {
        "cond1": True,
        "cond2": True,
        "cond3": True,
        "consistent": True,
    }
    assert reports["k2"]["thm26"]["cond1"] is False
    for rep in reports.values():
        assert rep["thm26"]["consistent"]
