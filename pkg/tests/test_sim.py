import math

import numpy as np
import oracles
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from bayespoly import sim
from bayespoly.errors import AlignmentError, DomainError
from bayespoly.genetics import GeneticModel as M
from bayespoly.results import ScanResult


def test_draw_maf_mean_floor_and_determinism():
    rng = sim.substream(1, sim.MAF)
    draws = np.array([sim.draw_maf(rng) for _ in range(100_000)])
    assert abs(draws.mean() - 0.2) < 0.005
    assert draws.min() >= 0.01
    again = sim.substream(1, sim.MAF)
    assert [sim.draw_maf(again) for _ in range(100)] == draws[:100].tolist()


def test_hwe_probabilities_and_gof():
    assert sim.hwe_probabilities(0.5).tolist() == [0.25, 0.5, 0.25]
    g = sim.genotypes_hwe(0.1, 100_000, np.random.default_rng(2))
    obs = np.bincount(g, minlength=3)
    chi2 = stats.chisquare(obs, 100_000 * np.array([0.81, 0.18, 0.01])).statistic
    assert chi2 < stats.chi2.ppf(0.999, 2)
    with pytest.raises(DomainError):
        sim.genotypes_hwe(0.0, 10, np.random.default_rng(0))
    with pytest.raises(DomainError):
        sim.genotypes_hwe(1.0, 10, np.random.default_rng(0))


def test_rare_allele_homozygote_count():
    # Around one minor homozygote expected at MAF 0.01 among 10,000 people.
    counts = [np.sum(sim.genotypes_hwe(0.01, 10_000, np.random.default_rng(s)) == 2) for s in range(400)]
    assert np.mean(counts) == pytest.approx(1.0, abs=0.2)


def test_effect_size_examples():
    a, d = sim.effect_size(0.002, 0.5, M.ADDITIVE)
    assert a == pytest.approx(math.sqrt(0.004), abs=1e-15) and d == 0.0
    assert a == pytest.approx(0.0632456, abs=1e-7)
    for mode, sign in ((M.DOMINANT, 1), (M.RECESSIVE, -1)):
        a, d = sim.effect_size(0.002, 0.2, mode)
        assert a > 0 and d == sign * a
        assert oracles.locus_h2_formula(a, d, 0.2) == pytest.approx(0.002, abs=1e-12)
    with pytest.raises(DomainError):
        sim.effect_size(0.0, 0.2, M.ADDITIVE)
    with pytest.raises(DomainError):
        sim.effect_size(0.01, 0.2, M.CODOMINANT)


@given(st.floats(1e-6, 0.5), st.floats(0.01, 0.99), st.sampled_from(sim.CAUSAL_MODES))
def test_heritability_round_trip(h2, p, mode):
    a, d = sim.effect_size(h2, p, mode)
    assert sim.heritability_identity(a, d, p) == pytest.approx(h2, abs=1e-12)
    assert oracles.locus_h2_formula(a, d, p) == pytest.approx(h2, abs=1e-12)


def test_null_phenotype_variance():
    n_causal = 100
    causal = [sim.CausalSpec(j, M.ADDITIVE, 0.3, 0.0, 0.0, 0.0) for j in range(n_causal)]
    g = np.random.default_rng(0).integers(0, 3, (n_causal, 10_000))
    y = sim.simulate_phenotypes(causal, g, np.random.default_rng(1))
    assert y.var() == pytest.approx(1.0, rel=0.05)


def test_study_trait_moments_near_reported_values():
    y = sim.study_trait(sim.plan_study(sim.SimConfig(n_individuals=10_000, n_snps=2000, seed=2)))
    assert abs(y.mean() - 2.55) < 0.5
    assert abs(y.std() - 1.10) < 0.5


def test_recessive_locus_separates_groups():
    g = np.random.default_rng(4).integers(0, 3, (1, 3000))
    locus = sim.CausalSpec(0, M.RECESSIVE, 0.5, 0.1, 20.0, -20.0)
    y = sim.simulate_phenotypes([locus], g, np.random.default_rng(5))
    bb, rest = y[g[0] == 2], y[g[0] != 2]
    assert bb.mean() - rest.mean() > 5 * rest.std()
    assert abs(y[g[0] == 1].mean() - y[g[0] == 0].mean()) < 0.2


def test_permute_trait():
    rng = np.random.default_rng(0)
    assert sim.permute_trait([3.5], rng).tolist() == [3.5]
    y = np.arange(50.0)
    out = sim.permute_trait(y, sim.substream(9, sim.PERM, 3))
    assert sorted(out) == sorted(y)
    assert np.array_equal(out, sim.permute_trait(y, sim.substream(9, sim.PERM, 3)))
    with pytest.raises(DomainError):
        sim.permute_trait([], rng)


def test_plan_study_invariants():
    cfg = sim.SimConfig(n_individuals=50, n_snps=500, n_causal=30, causal_split=(10, 10, 10), seed=7)
    plan = sim.plan_study(cfg)
    assert plan.truth.n_causal == 30
    assert sorted(np.bincount(plan.truth.modes[plan.truth.is_causal])) == [10, 10, 10]
    for c in plan.causal:
        assert c.d in (0.0, c.a, -c.a)
        assert sim.heritability_identity(c.a, c.d, c.maf) == pytest.approx(c.h2, abs=1e-12)
    assert sum(c.h2 for c in plan.causal) == pytest.approx(cfg.total_h2, abs=1e-9)
    again = sim.plan_study(cfg)
    assert np.array_equal(plan.mafs, again.mafs)
    assert np.array_equal(sim.study_trait(plan), sim.study_trait(again))


def test_genotypes_do_not_depend_on_block_layout():
    plan = sim.plan_study(sim.SimConfig(n_individuals=40, n_snps=300, n_causal=0, causal_split=(0, 0, 0)))
    a = np.concatenate([g for _, _, g in sim.iter_genotype_blocks(plan, 7)])
    b = np.concatenate([g for _, _, g in sim.iter_genotype_blocks(plan, 300)])
    assert np.array_equal(a, b)


@pytest.mark.parametrize("rule,scale", [("uniform", 1.0), ("additive_halved", 0.5),
                                        ("additive_quartered", 0.25)])
def test_rebalanced_heritability_preserves_total(rule, scale):
    cfg = sim.study_config("2", h2_rule=rule, n_snps=1000)
    h2 = cfg.locus_h2()
    assert h2[M.ADDITIVE] == pytest.approx(scale * 0.4 / 100, abs=1e-15)
    total = 34 * h2[M.ADDITIVE] + 33 * h2[M.DOMINANT] + 33 * h2[M.RECESSIVE]
    assert total == pytest.approx(0.4, abs=1e-9)
    assert h2[M.DOMINANT] == h2[M.RECESSIVE] >= 0.4 / 100


def test_equal_split_halved_matches_quarter_boost():
    # With A taking exactly a third of the loci, halving A gives D and R 25% more.
    cfg = sim.SimConfig(n_individuals=10, n_snps=300, n_causal=99, causal_split=(33, 33, 33),
                        h2_rule="additive_halved")
    assert cfg.locus_h2()[M.DOMINANT] == pytest.approx(1.25 * 0.4 / 99, rel=1e-12)


def test_config_validation():
    with pytest.raises(DomainError):
        sim.SimConfig(n_individuals=10, n_snps=100, n_causal=10, causal_split=(3, 3, 3))
    with pytest.raises(DomainError):
        sim.SimConfig(n_individuals=10, n_snps=100, n_causal=9, causal_split=(3, 3, 3), total_h2=1.0)
    with pytest.raises(DomainError):
        sim.study_config("4")


def _result(log_bf, best, min_p, freq_best):
    n = len(log_bf)
    return ScanResult([f"s{i}" for i in range(n)], np.zeros(n, np.int64), np.zeros((n, 6)),
                      np.asarray(log_bf, float), np.asarray(best, np.int8), np.zeros((n, 3)),
                      np.zeros(n, np.uint8), np.asarray(min_p, float), np.asarray(freq_best, np.int8))


def test_matched_cutoff_order_statistics():
    # "log BF > cutoff" with cutoff at the second-largest null value is the same
    # rule as "BF >= t" for any t in (5, 10].
    cut = sim.matched_cutoff(np.log([10.0, 5.0, 1.0]), 1)
    assert cut == math.log(5.0)
    assert np.sum(np.log([10.0, 5.0, 1.0]) > cut) == 1
    assert sim.matched_cutoff(np.array([1.0]), 3) == -math.inf


def test_evaluate_with_no_causal():
    res = _result(np.log([10.0, 5.0, 1.0]), [0, 1, 2], [1e-8, 0.5, 0.2], [0, 1, 2])
    truth = sim.TruthTable(np.full(3, -1, np.int8))
    rep = sim.evaluate(res, res, truth, [1e-7])
    row = rep.rows[0]
    assert row.fp_count == 1 and rep.fp_rate(0) == pytest.approx(1 / 3)
    assert row.fp_count_bayes == 1
    assert row.power_any_bayes == row.power_any_freq == 0
    assert row.matched_log_bf == math.log(5.0)
    assert row.matched_bf == pytest.approx(5.0, rel=1e-14)


def test_evaluate_scoring_rules():
    # Two causal SNPs: a dominant one called dominant, and a recessive one called genotypic.
    res = _result(np.log([1e6, 1e5, 2.0, 1.0]), [M.DOMINANT, M.GENOTYPIC, M.ADDITIVE, M.ADDITIVE],
                  [1e-9, 1e-9, 0.4, 0.9], [M.DOMINANT, M.RECESSIVE, M.ADDITIVE, M.ADDITIVE])
    truth = sim.TruthTable(np.array([M.DOMINANT, M.RECESSIVE, -1, -1], np.int8))
    row = sim.evaluate(res, res, truth, [1e-7]).rows[0]
    assert row.fp_count == 0
    assert row.power_any_bayes == 2 and row.power_any_freq == 2
    assert row.correct_bayes == (0, 1, 0)
    assert row.correct_freq == (0, 1, 1)
    with pytest.raises(AlignmentError):
        sim.evaluate(res, res, sim.TruthTable(np.full(3, -1, np.int8)))


def test_evaluate_end_to_end_small(tmp_path):
    cfg = sim.study_config("2", n_individuals=2000, n_snps=3000, n_causal=10, causal_split=(4, 3, 3),
                           total_h2=0.1)
    res, plan, _ = sim.run_association_study(cfg, block=512)
    rep = sim.evaluate(res, res, plan.truth)
    for i, r in enumerate(rep.rows):
        assert r.fp_count_bayes <= r.fp_count
        assert sum(r.correct_bayes) <= r.power_any_bayes <= rep.n_causal
        assert sum(r.correct_freq) <= r.power_any_freq <= rep.n_causal
        assert rep.correct_dr(i, "bayes") <= r.power_any_bayes
    path = tmp_path / "report.tsv"
    sim.write_report(rep, path)
    lines = path.read_text().splitlines()
    assert lines[0].split("\t") == list(sim.REPORT_COLUMNS)
    assert len(lines) == 1 + len(sim.STUDY2_P_THRESHOLDS)


def test_permutation_scan_counts_match_direct_scans():
    rng = np.random.default_rng(3)
    g = rng.integers(0, 3, (200, 120)).astype(np.int8)
    y = rng.normal(size=120)
    rep = sim.permutation_scan(g, y, 5, seed=4, block=64, bf_thresholds=(3.0,), p_thresholds=(0.05,))
    from bayespoly.scan import ScanOptions, scan_matrix
    ys = sim.permutation_traits(y, 5, 4)
    for r in range(5):
        res = scan_matrix(g, ys[:, r], options=ScanOptions(run_freq_baseline=True))
        assert rep.bf_hits[r, 0] == np.sum(res.log_bf_max > math.log(3.0))
        assert rep.p_hits[r, 0] == np.sum(res.min_p < 0.05)
    assert rep.median_rate("p")[0] == np.median(rep.p_hits[:, 0]) / 200
