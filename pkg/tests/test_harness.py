import json
import math

import numpy as np
import pytest

from qmemsim.cli import main as cli_main
from qmemsim.harness import (
    ExperimentConfig,
    fit_arrhenius,
    read_rows,
    report,
    rows_to_csv_bytes,
    run_experiment,
    uncensored_medians,
    write_rows,
)
from qmemsim.models import build_model
from qmemsim.thermal import lifetime_trial


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"kind": "dynamics", "trials": 0})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"kind": "dynamics", "sizes": []})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"kind": "dynamics", "t_max": 5, "check_interval": 10})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"kind": "warp"})
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"kind": "analyze", "unknown_knob": 1})


def test_analyze_rows_surface():
    cfg = ExperimentConfig(kind="analyze", family="surface2d", sizes=[2, 3, 4])
    result = run_experiment(cfg)
    values = {(r.linear_size, r.observable): r.value for r in result.rows}
    for L in (2, 3, 4):
        assert values[(L, "n")] == L * L + (L - 1) * (L - 1)
        assert values[(L, "k")] == 1
        assert values[(L, "distance")] == L
        assert values[(L, "valid")] == 1
    assert result.summary["refusals"] == 0


def test_dynamics_rerun_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(kind="dynamics", family="surface2d", sizes=[3],
                           betas=[1.5, 2.0], trials=4, t_max=1500,
                           check_interval=5, master_seed=9)
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    assert rows_to_csv_bytes(a.rows) == rows_to_csv_bytes(b.rows)
    out = tmp_path / "rows.csv"
    write_rows(a.rows, str(out))
    first = out.read_bytes()
    write_rows(b.rows, str(out))
    assert out.read_bytes() == first


def test_single_trial_reproducible_from_seed_label():
    cfg = ExperimentConfig(kind="dynamics", family="surface2d", sizes=[3],
                           betas=[2.0], trials=3, t_max=2000, check_interval=5,
                           master_seed=23)
    result = run_experiment(cfg)
    row = next(r for r in result.rows if r.observable == "Xbar_ec")
    master, point, trial = (int(x) for x in row.seed.split("."))
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([master, point, trial])))
    rec = lifetime_trial(build_model("surface2d", 3), 2.0, "match2d", 2000, 5,
                         ("Xbar_ec", "Zbar_ec"), rng)
    replayed = rec.failure_sweep["Xbar_ec"]
    assert (replayed if replayed is not None else 2000) == row.value
    assert rec.censored("Xbar_ec") == row.censored


def test_threaded_run_matches_serial():
    cfg = ExperimentConfig(kind="dynamics", family="ising1d", sizes=[7],
                           betas=[0.8], trials=6, t_max=300, check_interval=1,
                           master_seed=3)
    serial = run_experiment(cfg)
    cfg.threads = 2
    threaded = run_experiment(cfg)
    assert rows_to_csv_bytes(serial.rows) == rows_to_csv_bytes(threaded.rows)


def test_barrier_experiment_refusal_exit_path():
    cfg = ExperimentConfig(kind="barrier", family="toric3d", sizes=[2],
                           target="Z", method="exact", state_cap=1 << 10)
    result = run_experiment(cfg)
    assert result.summary["refusals"] == 1
    row = result.rows[0]
    assert row.value is None and "refused" in row.extra


def test_spectrum_experiment_rows():
    cfg = ExperimentConfig(kind="spectrum", family="surface2d", sizes=[2],
                           direction="Z", epsilons=[0.0, 0.1])
    result = run_experiment(cfg)
    split = {r.extra["epsilon"]: r.value for r in result.rows
             if r.observable == "splitting"}
    assert split[0.0] == pytest.approx(0.0, abs=1e-10)
    assert split[0.1] > 0


def test_fit_arrhenius_synthetic():
    points = [(b, math.exp(2.0 * b)) for b in (1.0, 1.5, 2.0, 2.5)]
    fit = fit_arrhenius(points)
    assert fit.slope == pytest.approx(2.0, abs=1e-9)
    assert fit.stderr == pytest.approx(0.0, abs=1e-9)
    flat = fit_arrhenius([(b, 7.0) for b in (1.0, 2.0, 3.0)])
    assert flat.slope == pytest.approx(0.0, abs=1e-12)


def test_fit_arrhenius_requires_three_betas():
    with pytest.raises(ValueError):
        fit_arrhenius([(1.0, 2.0), (2.0, 3.0)])
    with pytest.raises(ValueError):
        fit_arrhenius([(1.0, 2.0), (1.0, 2.5), (2.0, 3.0)])


def test_report_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    write_rows([], str(path))
    rep = report(str(path))
    assert "no result rows" in rep.text
    assert rep.data["dynamics"] == []


def test_report_single_censored_trial(tmp_path):
    cfg = ExperimentConfig(kind="dynamics", family="ising2d", sizes=[3],
                           betas=[3.0], trials=1, t_max=50, check_interval=10,
                           master_seed=1, out=str(tmp_path / "r.csv"))
    run_experiment(cfg)
    rep = report(str(tmp_path / "r.csv"))
    entry = next(e for e in rep.data["dynamics"] if e["observable"] == "bit_ec")
    assert entry["censoring_rate"] == 1.0
    assert entry["median_uncensored"] is None
    assert "arrhenius_slope" not in entry


def test_report_flags_malformed_rows(tmp_path):
    path = tmp_path / "broken.csv"
    good = ('kind,family,L,beta,seed,decoder,observable,value,censored,extra_json\n'
            'dynamics,surface2d,3,2.0,0.0.0,match2d,Xbar_ec,12,0,\n')
    path.write_text(good + "dynamics,surface2d,not_an_int,2.0,x,match2d,o,1,0,\n")
    rows, problems = read_rows(str(path))
    assert len(rows) == 1
    assert problems and problems[0][0] == 3
    rep = report(str(path))
    assert rep.data["problems"][0]["line"] == 3


def test_uncensored_medians_grouping(tmp_path):
    cfg = ExperimentConfig(kind="dynamics", family="surface2d", sizes=[3],
                           betas=[1.0, 1.5], trials=4, t_max=3000,
                           check_interval=1, master_seed=2)
    result = run_experiment(cfg)
    medians = uncensored_medians(
        [r for r in map(_parsed, result.rows)], "surface2d", 3, "memory_lifetime")
    assert set(medians) <= {1.0, 1.5}
    assert all(v > 0 for v in medians.values())


def _parsed(row):
    from qmemsim.harness import ParsedRow

    return ParsedRow(kind=row.kind, family=row.family, linear_size=row.linear_size,
                     beta=row.beta, seed=row.seed, decoder=row.decoder,
                     observable=row.observable,
                     value=None if row.value is None else float(row.value),
                     censored=row.censored, extra=row.extra)


def test_cli_end_to_end(tmp_path, capsys):
    out = tmp_path / "cli.csv"
    code = cli_main(["analyze", "--family", "surface2d", "--sizes", "2,3",
                     "--out", str(out)])
    assert code == 0
    rows, problems = read_rows(str(out))
    assert not problems and len(rows) == 8

    code = cli_main(["report", str(out), "--json", str(tmp_path / "sum.json")])
    assert code == 0
    summary = json.loads((tmp_path / "sum.json").read_text())
    assert summary["analyze"]

    # Config file + flag override.
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"family": "ising1d", "sizes": [4], "trials": 2,
                                   "t_max": 50, "check_interval": 5, "betas": [1.0]}))
    code = cli_main(["dynamics", "--config", str(cfgfile), "--seed", "4",
                     "--out", str(tmp_path / "dyn.csv")])
    assert code == 0
    rows, _ = read_rows(str(tmp_path / "dyn.csv"))
    assert {r.family for r in rows} == {"ising1d"}
    assert {r.seed.split(".")[0] for r in rows} == {"4"}


def test_cli_config_error_exit_code(tmp_path, capsys):
    cfgfile = tmp_path / "bad.json"
    cfgfile.write_text(json.dumps({"trials": 0}))
    assert cli_main(["dynamics", "--config", str(cfgfile)]) == 1


def test_cli_partial_refusal_exit_code(tmp_path):
    code = cli_main(["barrier", "--family", "toric3d", "--sizes", "2",
                     "--target", "Z", "--method", "exact",
                     "--out", str(tmp_path / "b.csv")])
    assert code == 2
