"""Tail harness: substream invariance, exact binomial limits, small-space oracles."""

import json
import math

import numpy as np
import pytest

from multislice.core import EnumerationTooLarge, EnumeratedMultislice, MultisliceSpec
from multislice.harness import (
    CenterEstimate,
    TailExperiment,
    clopper_pearson,
    estimate_center,
    run_tail,
    run_talagrand_all_subsets,
    run_talagrand_exact,
    save_tail_csv,
    save_tail_metadata,
    talagrand_product,
)
from multislice.streams import BATCH_SIZE, batch_sizes, substream

HALF = MultisliceSpec((3, 3), (0.0, 1.0))


def small_experiment(**overrides):
    base = dict(
        spec=HALF,
        n=2,
        statistic="sample-mean",
        t_grid=(0.4,),
        samples=20_000,
        seed=42,
        bound="swor-bounded-difference",
        bound_params={"n": 2, "total": 6, "sum_c_sq": 0.5},
    )
    base.update(overrides)
    return TailExperiment(**base)


def test_batch_sizes():
    assert batch_sizes(20_000) == [8192, 8192, 3616]
    assert batch_sizes(BATCH_SIZE * 2) == [8192, 8192]
    assert batch_sizes(0) == []
    assert batch_sizes(5, batch=2) == [2, 2, 1]


def test_substream_reproducible_and_disjoint():
    a = substream(7, 3).integers(0, 2**63, 8)
    b = substream(7, 3).integers(0, 2**63, 8)
    np.testing.assert_array_equal(a, b)
    c = substream(7, 4).integers(0, 2**63, 8)
    assert not np.array_equal(a, c)
    d = substream(7, 3, center_pass=True).integers(0, 2**63, 8)
    assert not np.array_equal(a, d)
    with pytest.raises(ValueError):
        substream(7, -1)


def test_clopper_pearson_closed_forms():
    n = 100
    alpha = 1.0 - 0.999
    lo, hi = clopper_pearson(0, n)
    assert lo == 0.0
    # P(X = 0) = (1-p)^n = alpha/2 at the upper limit
    assert hi == pytest.approx(1.0 - (alpha / 2.0) ** (1.0 / n), rel=1e-10)
    lo, hi = clopper_pearson(n, n)
    assert hi == 1.0
    assert lo == pytest.approx((alpha / 2.0) ** (1.0 / n), rel=1e-10)
    lo, hi = clopper_pearson(7, n)
    assert lo < 0.07 < hi
    with pytest.raises(ValueError):
        clopper_pearson(5, 4)


def test_tail_matches_hypergeometric_truth():
    # n=2 of kappa=(3,3): mean - 1/2 >= 0.4 iff both draws are ones: (3*2)/(6*5)
    report = run_tail(small_experiment())
    row = report.rows[0]
    truth = 0.2
    assert abs(row.p_hat - truth) < 0.02
    assert row.ci_lo < truth < row.ci_hi
    assert row.count == round(row.p_hat * 20_000)
    assert row.bound == pytest.approx(math.exp(-0.16 / (4.0 * (2.0 / 3.0) * 0.5)))
    assert row.verdict == "DOMINATED"
    assert report.passed and not report.qualitative
    # two-sided override also counts the all-zeros pair
    two = run_tail(small_experiment(sided="two")).rows[0]
    assert two.ci_lo < 0.4 < two.ci_hi


def test_worker_count_invariance(tmp_path):
    reports = [run_tail(small_experiment(workers=w)) for w in (1, 3, 8)]
    rows0 = reports[0].rows
    for rep in reports[1:]:
        assert rep.rows == rows0
        assert rep.center == reports[0].center
    paths = []
    for w, rep in zip((1, 3, 8), reports):
        p = tmp_path / f"w{w}.csv"
        save_tail_csv(str(p), rep)
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] == paths[2]


def test_conc_threads_override(monkeypatch):
    base = run_tail(small_experiment(workers=1))
    monkeypatch.setenv("CONC_THREADS", "5")
    forced = run_tail(small_experiment(workers=1))
    assert forced.rows == base.rows
    monkeypatch.setenv("CONC_THREADS", "0")
    with pytest.raises(ValueError):
        run_tail(small_experiment())


def test_mc_center_and_widening():
    exp = small_experiment(centering="mc-expectation", scale=2.0)
    report = run_tail(exp)
    assert report.center.method == "mc-expectation"
    assert abs(report.center.value - 0.5) < 0.02
    assert report.center.se > 0.0
    row = report.rows[0]
    assert row.threshold == pytest.approx(0.4 - 3.0 * 2.0 * report.center.se)


def test_median_center():
    exp = small_experiment(centering="median")
    center = estimate_center(exp, workers=1)
    # sample means take values {0, 1/2, 1} with masses {1/5, 3/5, 1/5}
    assert center.value == pytest.approx(0.5)
    assert center.method == "median"
    assert center.se >= 0.0


def test_exact_center_unavailable():
    exp = small_experiment(statistic="sample-std")
    with pytest.raises(ValueError):
        run_tail(exp)


def test_none_centering_upper_sided():
    # kolmogorov statistic is itself a deviation; center at zero
    exp = small_experiment(
        statistic="kolmogorov",
        centering="none",
        bound="kolmogorov",
        bound_params={"n": 2, "total": 6},
        scale=math.sqrt(2.0),
        t_grid=(0.5, 1.0),
        sided="upper",
    )
    report = run_tail(exp)
    assert report.center == CenterEstimate(0.0, 0.0, "none")
    assert [r.verdict for r in report.rows] == ["DOMINATED", "DOMINATED"]


def test_degenerate_full_sample():
    exp = small_experiment(
        n=6,
        samples=1000,
        t_grid=(0.1, 0.2),
        bound="bounded-difference",
        bound_params={"total": 6, "sum_c_sq": 1.0 / 6.0},
    )
    report = run_tail(exp)
    for row in report.rows:
        assert row.count == 0
        assert row.p_hat == 0.0
        assert row.verdict == "DOMINATED"


def test_qualitative_triangle_run():
    spec = MultisliceSpec((3, 3), (0.0, 1.0))  # 4 vertices, 6 edges, 3 present
    exp = TailExperiment(
        spec=spec,
        n=6,
        statistic="triangles",
        statistic_params={"n_vertices": 4},
        t_grid=(0.5, 1.5, 2.5),
        samples=4000,
        seed=9,
        bound="triangles",
        bound_params={"n_vertices": 4, "edge_prob": 0.5},
    )
    report = run_tail(exp)
    assert report.qualitative
    assert all(r.verdict == "QUALITATIVE" for r in report.rows)
    p = [r.p_hat for r in report.rows]
    assert report.passed == all(a >= b for a, b in zip(p, p[1:]))
    # exact center from the closed form: 4 * 3*2*1 / (6*5*4)
    assert report.center.value == pytest.approx(0.2)


def test_experiment_validation():
    with pytest.raises(ValueError):
        small_experiment(samples=999)
    with pytest.raises(ValueError):
        small_experiment(t_grid=())
    with pytest.raises(ValueError):
        small_experiment(t_grid=(0.4, 0.3))
    with pytest.raises(ValueError):
        small_experiment(t_grid=(-0.1, 0.3))
    with pytest.raises(ValueError):
        small_experiment(n=7)
    with pytest.raises(ValueError):
        small_experiment(workers=0)
    with pytest.raises(ValueError):
        small_experiment(centering="guess")
    with pytest.raises(ValueError):
        small_experiment(scale=0.0)
    with pytest.raises(ValueError):
        small_experiment(sided="both")
    with pytest.raises(KeyError):
        run_tail(small_experiment(statistic="mystery"))
    with pytest.raises(KeyError):
        run_tail(small_experiment(bound="mystery"))
    with pytest.raises(ValueError):
        run_tail(small_experiment(statistic_params={"extra": 1}))


def test_csv_and_metadata_files(tmp_path):
    report = run_tail(small_experiment())
    csv_path = tmp_path / "run.csv"
    meta_path = tmp_path / "run.jsonl"
    save_tail_csv(str(csv_path), report)
    save_tail_metadata(str(meta_path), report)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,p_hat,ci_lo,ci_hi,bound,verdict"
    assert len(lines) == 2
    assert lines[1].endswith("DOMINATED")
    meta = json.loads(meta_path.read_text())
    assert meta["kappa"] == [3, 3]
    assert meta["passed"] is True
    assert meta["verdicts"] == ["DOMINATED"]
    assert meta["batch_size"] == BATCH_SIZE


def test_talagrand_whole_space_product_one():
    space = EnumeratedMultislice(MultisliceSpec((2, 2), (0.0, 1.0)))
    prob, moment, product = talagrand_product(space, range(space.size))
    assert prob == pytest.approx(1.0)
    assert moment == pytest.approx(1.0)
    assert product == pytest.approx(1.0)


def test_talagrand_singleton_by_hand():
    # kappa=(1,1): two states, A = one of them; d(other, A) = sqrt(2)
    space = EnumeratedMultislice(MultisliceSpec((1, 1), (0.0, 1.0)))
    prob, moment, product = talagrand_product(space, [0])
    assert prob == pytest.approx(0.5)
    assert moment == pytest.approx(0.5 * (1.0 + math.exp(2.0 / 144.0)))
    assert product <= 1.0


def test_talagrand_all_subsets_small():
    for kappa in [(2, 1), (2, 2)]:
        spec = MultisliceSpec(kappa, (0.0, 1.0))
        report = run_talagrand_all_subsets(spec)
        assert report.passed
        assert report.num_sets == 2 ** EnumeratedMultislice(spec).size - 1
        assert report.max_product <= 1.0 + 1e-9


def test_talagrand_random_trials():
    report = run_talagrand_exact(MultisliceSpec((3, 2), (0.0, 1.0)), trials=25, seed=3)
    assert report.passed and report.num_sets == 25
    fixed = run_talagrand_exact(MultisliceSpec((2, 2), (0.0, 1.0)), set_size=2, trials=10, seed=1)
    assert fixed.passed
    with pytest.raises(EnumerationTooLarge):
        run_talagrand_exact(MultisliceSpec((6, 6), (0.0, 1.0)))
    with pytest.raises(EnumerationTooLarge):
        run_talagrand_all_subsets(MultisliceSpec((4, 4), (0.0, 1.0)))
