"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test prints a single ``[PASS]``/``[FAIL]`` line (run with ``-s`` to
see them as they happen).  The replicate studies are module-scoped
fixtures so their cost is paid once.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy import stats

from kumiw import (
    KumIwParams,
    MomentNotDefinedError,
    log_posterior,
    SubModel,
    bonferroni,
    cdf,
    expanded_pdf,
    fit_mle,
    lorenz,
    lr_test,
    mean_deviation_about_mean,
    mean_deviation_about_median,
    moment,
    order_stat_moment,
    order_stat_pdf,
    pdf,
    quantile,
    renyi_entropy,
    shannon_entropy,
)
from kumiw.bayes import McmcConfig, PriorSpec, full_conditional_log, run_mcmc, summarize
from kumiw.cli import main as cli_main
from kumiw.measures import moment_exists
from kumiw.specfun import EULER_GAMMA, gen_binomial_weight
from kumiw.survdata import (
    CensoredDataset,
    censoring_upper_bound,
    kaplan_meier,
    km_vs_parametric,
    load_csv,
    simulate_censored,
)
from oracles import (
    ie_pdf,
    ir_pdf,
    iw_cdf,
    iw_pdf,
    pdf_normalization,
    quad_mean_deviation,
    quad_moment,
    quad_partial_first_moment,
    random_params,
)

GRID_B = (0.5, 1.0, 2.0, 4.0)
GRID_C = (0.5, 1.0, 3.0)
GRID_BETA = (1.5, 2.5, 4.0)

TRUTH = KumIwParams(2.0, 1.5, 3.0)


def _report(num, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {num:2d}: {description}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def _grid():
    for b in GRID_B:
        for c in GRID_C:
            for beta in GRID_BETA:
                yield KumIwParams(b, c, beta)


def test_criterion_01_normalization():
    start = time.perf_counter()
    worst = 0.0
    for p in _grid():
        worst = max(worst, abs(pdf_normalization(p) - 1.0))
    elapsed = time.perf_counter() - start
    _report(
        1, "pdf integrates to 1 on the 36-point grid (abs err <= 1e-8, < 10 s)",
        worst <= 1e-8 and elapsed < 10.0,
        f"max abs err {worst:.2e}, {elapsed:.1f} s",
    )


def test_criterion_02_quantile_roundtrip():
    start = time.perf_counter()
    rng = np.random.default_rng(20260810)
    u = np.linspace(0.001, 0.999, 999)
    worst = 0.0
    for _ in range(20):
        p = random_params(rng)
        worst = max(worst, float(np.max(np.abs(cdf(p, quantile(p, u)) - u))))
    elapsed = time.perf_counter() - start
    _report(
        2, "max |F(Q(u)) - u| <= 1e-10 on 999-point grids for 20 random triples (< 5 s)",
        worst <= 1e-10 and elapsed < 5.0,
        f"max err {worst:.2e}, {elapsed:.1f} s",
    )


def test_criterion_03_submodel_reductions():
    worst = 0.0

    def rel_gap(a, b):
        return float(np.max(np.abs(a - b) / np.abs(b)))

    # b = 1 -> inverse Weibull
    alpha, beta = 1.7, 2.4
    p = KumIwParams(1.0, alpha, beta)
    grid = np.asarray(quantile(p, np.linspace(0.02, 0.98, 50)))
    worst = max(worst, rel_gap(np.asarray(pdf(p, grid)), iw_pdf(alpha, beta, grid)))
    worst = max(worst, rel_gap(np.asarray(cdf(p, grid)), iw_cdf(alpha, beta, grid)))
    # beta = 2, b = 1 -> inverse Rayleigh
    p = KumIwParams(1.0, 1.3, 2.0)
    grid = np.asarray(quantile(p, np.linspace(0.02, 0.98, 50)))
    worst = max(worst, rel_gap(np.asarray(pdf(p, grid)), ir_pdf(1.3, grid)))
    worst = max(worst, rel_gap(np.asarray(cdf(p, grid)), iw_cdf(1.3, 2.0, grid)))
    # beta = 1, b = 1 -> inverse exponential
    p = KumIwParams(1.0, 0.9, 1.0)
    grid = np.asarray(quantile(p, np.linspace(0.02, 0.98, 50)))
    worst = max(worst, rel_gap(np.asarray(pdf(p, grid)), ie_pdf(0.9, grid)))
    worst = max(worst, rel_gap(np.asarray(cdf(p, grid)), iw_cdf(0.9, 1.0, grid)))
    _report(
        3, "sub-model reductions match IW/IR/IE closed forms (rel err <= 1e-13)",
        worst <= 1e-13,
        f"max rel err {worst:.2e}",
    )


def test_criterion_04_series_moments_and_expansion():
    worst_moment = 0.0
    checked = skipped = 0
    for p in _grid():
        for k in (1, 2):
            if k >= p.beta:
                continue
            if not moment_exists(p, k):
                with pytest.raises(MomentNotDefinedError):
                    moment(p, k)
                skipped += 1
                continue
            gap = abs(moment(p, k) - quad_moment(p, k)) / abs(quad_moment(p, k))
            worst_moment = max(worst_moment, gap)
            checked += 1

    worst_expansion = 0.0
    for p in _grid():
        for u in (0.1, 0.5, 0.9):
            t = float(quantile(p, u))
            worst_expansion = max(
                worst_expansion,
                abs(expanded_pdf(p, t) - float(pdf(p, t))) / float(pdf(p, t)),
            )
    # exact termination for integer b
    terminates = all(
        gen_binomial_weight(float(b), r) == 0.0
        for b in (1, 2, 4)
        for r in range(b, b + 4)
    )
    _report(
        4,
        "series moments match quadrature (rel <= 1e-5); expanded pdf matches "
        "direct pdf (rel <= 1e-8) with exact integer-b termination",
        worst_moment <= 1e-5 and worst_expansion <= 1e-8 and terminates,
        f"{checked} moments checked (worst {worst_moment:.2e}), "
        f"{skipped} divergent combos gated, expansion worst {worst_expansion:.2e}",
    )


def test_criterion_05_mean_deviations_bonferroni_lorenz():
    worst_dev = 0.0
    worst_ratio = 0.0
    lorenz_below = True
    checked = skipped = 0
    for p in _grid():
        if not (p.beta > 1):
            continue
        if p.b * p.beta <= 1:
            with pytest.raises(MomentNotDefinedError):
                mean_deviation_about_mean(p)
            skipped += 1
            continue
        mu = quad_moment(p, 1)
        med = float(quantile(p, 0.5))
        d1 = mean_deviation_about_mean(p)
        d2 = mean_deviation_about_median(p)
        worst_dev = max(worst_dev, abs(d1 - quad_mean_deviation(p, mu)) / quad_mean_deviation(p, mu))
        worst_dev = max(worst_dev, abs(d2 - quad_mean_deviation(p, med)) / quad_mean_deviation(p, med))
        for prob in (0.25, 0.5, 0.75):
            bval = bonferroni(p, prob)
            lval = lorenz(p, prob)
            q = float(quantile(p, prob))
            oracle = quad_partial_first_moment(p, q) / (prob * mu)
            worst_dev = max(worst_dev, abs(bval - oracle) / abs(oracle))
            worst_ratio = max(worst_ratio, abs(lval - prob * bval) / max(lval, 1e-30))
            lorenz_below = lorenz_below and (lval <= prob + 1e-12)
        checked += 1
    _report(
        5,
        "mean deviations and Bonferroni/Lorenz match quadrature (rel <= 1e-5); "
        "L = p*B rowwise; L <= p",
        worst_dev <= 1e-5 and worst_ratio <= 1e-13 and lorenz_below,
        f"{checked} triples (worst {worst_dev:.2e}), {skipped} heavy-tail combos gated",
    )


def test_criterion_06_entropies():
    bracket_ok = True
    for p in (KumIwParams(2, 1.5, 2), KumIwParams(1, 1, 3), KumIwParams(0.8, 2, 1.6)):
        h = shannon_entropy(p)
        bracket_ok = bracket_ok and abs(renyi_entropy(p, 0.999) - h) <= 1e-2
        bracket_ok = bracket_ok and abs(renyi_entropy(p, 1.001) - h) <= 1e-2

    rng = np.random.default_rng(6)
    worst_scale = 0.0
    for _ in range(10):
        b = float(np.exp(rng.uniform(np.log(0.5), np.log(4))))
        beta = float(np.exp(rng.uniform(np.log(0.9), np.log(4))))
        c = float(np.exp(rng.uniform(np.log(0.3), np.log(6))))
        gap = shannon_entropy(KumIwParams(b, c, beta)) - shannon_entropy(KumIwParams(b, 1.0, beta))
        worst_scale = max(worst_scale, abs(gap - math.log(c)))

    ie_gap = abs(shannon_entropy(KumIwParams(1, 1, 1)) - (1 + 2 * EULER_GAMMA))
    _report(
        6,
        "Renyi at rho = 1 +/- 1e-3 brackets Shannon (1e-2); scale law to 1e-7; "
        "inverse-exponential closed form to 1e-7",
        bracket_ok and worst_scale <= 1e-7 and ie_gap <= 1e-7,
        f"scale-law worst {worst_scale:.2e}, IE gap {ie_gap:.2e}",
    )


def test_criterion_07_order_statistics():
    from oracles import quad_t_integral

    p = KumIwParams(2.0, 1.0, 2.0)
    worst_norm = 0.0
    for (r, n) in ((2, 5), (1, 3), (4, 4)):
        total = quad_t_integral(lambda t: float(order_stat_pdf(p, r, n, t)))
        worst_norm = max(worst_norm, abs(total - 1.0))

    worst_sum = 0.0
    n = 5
    for t in (0.4, 1.0, 2.5):
        mix = sum(float(order_stat_pdf(p, r, n, t)) for r in range(1, n + 1)) / n
        worst_sum = max(worst_sum, abs(mix - float(pdf(p, t))) / float(pdf(p, t)))

    p3 = KumIwParams(2.0, 1.0, 3.0)
    pair_sum = order_stat_moment(p3, 1, 2, 1) + order_stat_moment(p3, 2, 2, 1)
    pair_gap = abs(pair_sum - 2 * moment(p3, 1)) / (2 * moment(p3, 1))
    _report(
        7,
        "order-statistic pdfs normalize (1e-7), rank mixture recovers f (1e-8), "
        "E[T(1:2)] + E[T(2:2)] = 2 E[T] (rel 1e-5)",
        worst_norm <= 1e-7 and worst_sum <= 1e-8 and pair_gap <= 1e-5,
        f"norm {worst_norm:.2e}, mixture {worst_sum:.2e}, pair {pair_gap:.2e}",
    )


@pytest.fixture(scope="module")
def mle_study():
    """200-replicate recovery/coverage study plus a 200-replicate LR size
    study under the b = 1 null; both at n = 500 with 20% censoring."""
    start = time.perf_counter()
    n, reps, rate = 500, 200, 0.2
    bound = censoring_upper_bound(TRUTH, rate)
    rel_errors = {name: [] for name in ("b", "c", "beta")}
    covered = {name: 0 for name in ("b", "c", "beta")}
    ci_available = 0
    nonconverged = 0
    for i in range(reps):
        d = simulate_censored(TRUTH, n, rate, 30_000 + i, upper_bound=bound)
        fit = fit_mle(d)
        nonconverged += not fit.converged
        for name, true in zip(("b", "c", "beta"), TRUTH.as_array()):
            rel_errors[name].append(abs(getattr(fit.params, name) - true) / true)
        if fit.ci is not None:
            ci_available += 1
            for name, true in zip(("b", "c", "beta"), TRUTH.as_array()):
                lo, hi = fit.ci[name]
                covered[name] += lo <= true <= hi

    null_truth = KumIwParams(1.0, 1.5, 3.0)
    null_bound = censoring_upper_bound(null_truth, rate)
    rejections = 0
    for i in range(reps):
        d = simulate_censored(null_truth, n, rate, 60_000 + i, upper_bound=null_bound)
        res = lr_test(d, SubModel.IW)
        rejections += res.p_value < 0.05

    elapsed = time.perf_counter() - start
    return {
        "reps": reps,
        "median_rel": {k: float(np.median(v)) for k, v in rel_errors.items()},
        "coverage": {k: covered[k] / max(ci_available, 1) for k in covered},
        "ci_available": ci_available,
        "nonconverged": nonconverged,
        "lr_size": rejections / reps,
        "elapsed": elapsed,
    }


def test_criterion_08_censored_mle_study(mle_study):
    # Known gap: the b clause of the median-error bound sits below the
    # maximum-likelihood information floor at these settings.  Across 200
    # replicates the median |rel err| of b is ~0.19 even WITHOUT censoring
    # (MC se ~0.014), b-hat is median-unbiased and init-insensitive, and
    # independent censoring can only remove information, so no 20% random
    # censoring mechanism can reach 0.15.  The clause is asserted as
    # stated rather than loosened; c and beta pass with wide margin.
    s = mle_study
    median_ok = all(v <= 0.15 for v in s["median_rel"].values())
    coverage_ok = all(0.90 <= v <= 0.99 for v in s["coverage"].values()) and (
        s["ci_available"] == s["reps"]
    )
    size_ok = 0.01 <= s["lr_size"] <= 0.12
    clauses = (
        f"median-rel-err<=0.15 [{'pass' if median_ok else 'FAIL'}: "
        + ", ".join(f"{k}={v:.3f}" for k, v in s["median_rel"].items())
        + f"]; coverage in [0.90,0.99] [{'pass' if coverage_ok else 'FAIL'}: "
        + ", ".join(f"{k}={v:.3f}" for k, v in s["coverage"].items())
        + f"]; LR size in [0.01,0.12] [{'pass' if size_ok else 'FAIL'}: {s['lr_size']:.3f}]"
    )
    _report(
        8,
        "MLE study (n=500, 20% censoring, 200 reps): median |rel err| <= 0.15, "
        "95% Wald coverage in [0.90, 0.99], LR size in [0.01, 0.12], < 5 min",
        median_ok and coverage_ok and size_ok and s["elapsed"] < 300.0,
        f"{clauses}; nonconv {s['nonconverged']}, {s['elapsed']:.0f} s",
    )


@pytest.fixture(scope="module")
def bayes_study():
    """Conditional sweeps, prior recovery with the likelihood off, and a
    50-replicate credible-interval calibration at n = 300."""
    start = time.perf_counter()

    sweep_data = simulate_censored(TRUTH, 80, 0.0, 21)
    prior = PriorSpec(1.2, 0.5, 2.0, 0.8, 1.5, 0.3)
    sweep_worst = 0.0
    base = [2.0, 1.5, 3.0]
    for which in range(3):
        diffs = []
        for v in np.linspace(0.4, 4.5, 20):
            theta = base.copy()
            theta[which] = v
            others = tuple(x for i, x in enumerate(theta) if i != which)
            cond = full_conditional_log(which, v, others, sweep_data, prior)
            joint = log_posterior(KumIwParams(*theta), sweep_data, prior)
            diffs.append(cond - joint)
        sweep_worst = max(sweep_worst, max(diffs) - min(diffs))

    dummy = CensoredDataset.from_arrays([1.0, 2.0, 3.0], [1, 1, 1])
    rec_prior = PriorSpec(2.0, 1.0, 3.0, 0.5, 1.5, 2.0)
    cfg = McmcConfig(n_iter=2000 + 10_000 * 10, burn_in=2000, thin=10, seed=77)
    chain = run_mcmc(dummy, rec_prior, cfg, likelihood_weight=0.0)
    ks_worst = max(
        stats.kstest(chain.draws[:, j], stats.gamma(a=shape, scale=1 / rate).cdf).statistic
        for j, (shape, rate) in enumerate(zip(rec_prior.shapes, rec_prior.rates))
    )

    reps = 50
    covered = {name: 0 for name in ("b", "c", "beta")}
    for i in range(reps):
        d = simulate_censored(TRUTH, 300, 0.0, 9000 + i)
        run_cfg = McmcConfig(n_iter=9000, burn_in=3000, thin=2, seed=100 + i)
        rows = summarize(run_mcmc(d, PriorSpec(), run_cfg))
        for row, true in zip(rows, TRUTH.as_array()):
            covered[row["Parameter"]] += row["2.5%"] <= true <= row["97.5%"]

    elapsed = time.perf_counter() - start
    return {
        "sweep_worst": sweep_worst,
        "ks_worst": ks_worst,
        "coverage": {k: v / reps for k, v in covered.items()},
        "elapsed": elapsed,
    }


def test_criterion_09_bayes_consistency(bayes_study):
    s = bayes_study
    coverage_ok = all(v >= 0.90 for v in s["coverage"].values())
    _report(
        9,
        "full conditionals match the joint (1e-9), prior recovery KS < 0.05, "
        "95% credible coverage >= 0.90 over 50 reps, < 10 min",
        s["sweep_worst"] <= 1e-9 and s["ks_worst"] < 0.05 and coverage_ok
        and s["elapsed"] < 600.0,
        f"sweep {s['sweep_worst']:.2e}, KS {s['ks_worst']:.3f}, "
        f"coverage {s['coverage']}, {s['elapsed']:.0f} s",
    )


def test_criterion_10_kaplan_meier():
    km1 = kaplan_meier(CensoredDataset.from_arrays([1.0, 2.0, 3.0], [1, 1, 1]))
    fixture1 = (
        np.array_equal(km1.times, [1.0, 2.0, 3.0])
        and np.allclose(km1.survival, [2 / 3, 1 / 3, 0.0], atol=1e-15)
    )
    km2 = kaplan_meier(CensoredDataset.from_arrays([1.0, 2.0, 3.0], [0, 1, 1]))
    fixture2 = (
        np.array_equal(km2.times, [2.0, 3.0])
        and np.allclose(km2.survival, [0.5, 0.0], atol=1e-15)
    )

    rng = np.random.default_rng(4)
    times = rng.uniform(0.5, 10.0, 60)
    km3 = kaplan_meier(CensoredDataset.from_arrays(times, np.ones(60)))
    srt = np.sort(times)
    ecdf_match = all(
        abs(km3.survival_at(t) - np.mean(srt > t)) <= 1e-12 for t in km3.times
    )

    d = simulate_censored(TRUTH, 1000, 0.0, 777)
    fit = fit_mle(d)
    comp = km_vs_parametric(d, fit.params)
    mean_gap = float(np.mean(np.abs(comp.km_survival - comp.model_survival)))
    _report(
        10,
        "KM matches hand fixtures exactly, equals empirical survival without "
        "censoring, and tracks the fitted model (mean gap <= 0.05 at n=1000)",
        fixture1 and fixture2 and ecdf_match and mean_gap <= 0.05,
        f"mean |KM - model| {mean_gap:.4f}",
    )


def test_criterion_11_reproducibility(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    sample_args = ["sample", "--b", "2", "--c", "1.5", "--beta", "3",
                   "--n", "300", "--seed", "11", "--censor-rate", "0.2"]
    bayes_args = ["fit-bayes", "--iterations", "1500", "--burn-in", "400",
                  "--thin", "2", "--seed", "5"]
    for out in (out_a, out_b):
        assert cli_main(sample_args + ["--out-dir", str(out)]) == 0
        assert cli_main(
            bayes_args + ["--data", str(out / "sample.csv"), "--out-dir", str(out)]
        ) == 0
        assert cli_main([
            "fit-mle", "--data", str(out / "sample.csv"), "--seed", "3",
            "--out-dir", str(out),
        ]) == 0
    identical = all(
        (out_a / name).read_bytes() == (out_b / name).read_bytes()
        for name in ("sample.csv", "chain.csv", "bayes_summary.csv", "fit_mle.json")
    )

    # emitted CSVs round-trip through the readers
    d = load_csv(out_a / "sample.csv")
    roundtrip = len(d) == 300
    chain = np.genfromtxt(out_a / "chain.csv", delimiter=",", names=True)
    roundtrip = roundtrip and set(chain.dtype.names) == {"iter", "b", "c", "beta", "log_post"}
    report = json.loads((out_a / "fit_mle.json").read_text())
    roundtrip = roundtrip and report["schema_version"] == 1
    _report(
        11,
        "seeded CLI runs are bit-identical and emitted files round-trip",
        identical and roundtrip,
    )
