import pytest

from rotawave.errors import CountMismatch, ValidationError
from rotawave.experiment import ExperimentSpec, bench_opcounts, format_bench, run_experiment


def test_spec_text_round_trip():
    spec = ExperimentSpec(n_a=3, n_b=5, alpha=22.5, dictionaries=("std", "wp:daub8"), depth=4, seed=7, r_step=0.1)
    text = spec.dumps()
    back = ExperimentSpec.loads(text)
    assert back == spec and back.dumps() == text


def test_spec_validation():
    with pytest.raises(ValidationError):
        ExperimentSpec(train=0)
    with pytest.raises(ValidationError):
        ExperimentSpec(length=100, depth=6)
    with pytest.raises(ValidationError):
        ExperimentSpec.loads("colour = red\n")
    with pytest.raises(ValidationError):
        ExperimentSpec.loads("depth 3\n")


def test_identical_classes_are_a_coin_flip():
    spec = ExperimentSpec(n_a=2, n_b=2, dictionaries=("std", "wp:coif6"), depth=3, length=128, train=30,
                          test=500, seed=3)
    report = run_experiment(spec)
    for row in report.rows:
        # Binomial standard deviation at 1000 test signals is about 1.6 %.
        assert 0.40 <= row.test_error <= 0.60


def test_report_outputs(tmp_path):
    spec = ExperimentSpec(dictionaries=("dct4", "lct"), depth=2, length=64, train=10, test=10, seed=1)
    report = run_experiment(spec)
    report.write(tmp_path)
    assert report.table().splitlines()[1].split() == ["Method", "Train", "%", "m", "r", "Test", "%"]
    assert (tmp_path / "report.csv").read_text().startswith("method,train_error,test_error,m,r,inner_class")
    assert ExperimentSpec.loads((tmp_path / "spec.txt").read_text()) == spec
    head = (tmp_path / "scatter_lct.csv").read_text().splitlines()[0]
    assert head == "label,x1,x2"
    assert report.best_packet().name == "lct"


def test_unknown_dictionary_carries_context():
    spec = ExperimentSpec(dictionaries=("wp:nosuch",), depth=2, length=64, train=2, test=2)
    with pytest.raises(ValidationError, match="wp:nosuch"):
        run_experiment(spec)


def test_bench_daub6_one_dim():
    (row,) = bench_opcounts(["daub6"], [64], 1)
    assert row.measured == row.formula == (256, 192)
    assert row.convolution == (384, 320)


def test_bench_daub6_two_dim():
    (row,) = bench_opcounts(["daub6"], [16], 2)
    assert row.measured[0] == 576 and row.ok


def test_bench_odd_odd_three_dim():
    (row,) = bench_opcounts(["oddodd53"], [8], 3)
    assert row.measured[0] == 3 * 8 * 512 // 8 == 1536
    # The symmetric 5/3 bank shares its rotations and needs half of that.
    (sym,) = bench_opcounts(["spline53"], [8], 3)
    assert sym.measured[0] == 768 and sym.ok


def test_bench_reports_mismatches():
    with pytest.raises(CountMismatch, match="eveneven44"):
        bench_opcounts(["daub4", "eveneven44"], [16], 1)
    rows = bench_opcounts(["daub4", "eveneven44"], [16], 1, strict=False)
    assert [r.ok for r in rows] == [True, False]
    assert "NO" in format_bench(rows).splitlines()[-1]
    with pytest.raises(ValidationError):
        bench_opcounts(["daub4"], [16], 4)
