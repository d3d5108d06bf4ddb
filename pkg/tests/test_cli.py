import json
from fractions import Fraction

import pytest

from ekac.cli import main
from ekac.errors import ConfigError
from ekac.experiment import (
    ExperimentConfig,
    build_function,
    config_hash,
    default_workers,
    parse_config,
    preset_config,
    run_experiment,
    serialize_config,
    stats_dict,
)


def _cfg(**overrides) -> ExperimentConfig:
    base = dict(
        kind="all-integers",
        x=2000,
        shift=0,
        poly="T1",
        functions=("omega",),
        z_policy="auto",
        z_value=None,
        m_max=4,
        seed=7,
        out_dir="out",
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_config_round_trip():
    for cfg in (
        _cfg(),
        _cfg(kind="shifted-primes", shift=1, x=5000),
        _cfg(z_policy="explicit", z_value=128.0),
        _cfg(z_policy="full", poly="T1^2*T2 + 3*T1", functions=("omega", "omega-mod:4,1")),
    ):
        cfg = cfg.validate()
        assert parse_config(serialize_config(cfg)) == cfg


def test_config_hash_stable():
    assert config_hash(_cfg()) == config_hash(_cfg())
    assert config_hash(_cfg()) != config_hash(_cfg(seed=8))


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        _cfg(x=10).validate()
    with pytest.raises(ConfigError):
        _cfg(m_max=3).validate()
    with pytest.raises(ConfigError):
        _cfg(poly="T1-T2").validate()
    with pytest.raises(ConfigError):
        _cfg(kind="shifted-primes", shift=0).validate()
    with pytest.raises(ConfigError):
        _cfg(kind="shifted-primes", shift=5000).validate()
    with pytest.raises(ConfigError):
        _cfg(functions=()).validate()
    with pytest.raises(ConfigError):
        _cfg(z_policy="explicit", z_value=1.0).validate()
    with pytest.raises(ConfigError):
        _cfg(functions=("nonsense",)).validate()


def test_parse_error_reports_position():
    with pytest.raises(ConfigError, match="line"):
        parse_config("[input\nkind = 3")


def test_presets_build():
    for name in ("omega-square", "omega-cube", "class-product", "linear-combo", "shifted-omega"):
        cfg = preset_config(name, x=50_000)
        assert cfg.x == 50_000
    with pytest.raises(ConfigError):
        preset_config("nope")


def test_function_file_loading(tmp_path):
    path = tmp_path / "g.toml"
    path.write_text(
        """
name = "custom"
bound = 2.0
default = "1/4"

[values]
2 = "3/2"

[[classes]]
mod = 4
residue = 1
value = 1.0
"""
    )
    g = build_function(f"file:{path}")
    assert g.at(2) == Fraction(3, 2)
    assert g.at(5) == 1.0  # 5 = 1 mod 4
    assert g.at(3) == Fraction(1, 4)
    assert g.name == "custom"


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("EKAC_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.setenv("EKAC_WORKERS", "zebra")
    with pytest.raises(ConfigError):
        default_workers()
    monkeypatch.delenv("EKAC_WORKERS")
    assert default_workers() >= 1


def test_stats_dict_fields():
    payload = stats_dict(_cfg(x=5000, poly="T1^2"))
    assert payload["x"] == 5000
    assert payload["at_x"]["a_q"] == pytest.approx(payload["at_x"]["means"][0] ** 2)
    assert payload["at_z"]["b_q"] > 0
    assert "mu1_loglog_slope" in payload
    assert payload["config_hash"]


def test_stats_identity_poly_mean_is_prime_recip_sum():
    from ekac.sieve import primes_up_to

    payload = stats_dict(_cfg(x=5000, poly="T1", z_policy="full"))
    direct = sum(1.0 / p for p in primes_up_to(5000).primes.tolist())
    assert payload["at_x"]["a_q"] == pytest.approx(direct, rel=1e-12)
    assert payload["at_z"]["a_q"] == pytest.approx(direct, rel=1e-12)


def test_experiment_workers_agree():
    cfg = _cfg(x=20_000, m_max=6)
    r1 = run_experiment(cfg, workers=1)
    r4 = run_experiment(cfg, workers=4)
    assert r1.fit_report.n == r4.fit_report.n
    assert r1.fit_report.ks == pytest.approx(r4.fit_report.ks, abs=1e-12)
    for a, b in zip(r1.moment_report.rows, r4.moment_report.rows):
        assert a.value == pytest.approx(b.value, rel=1e-9)


def test_cli_experiment_writes_outputs(tmp_path, capsys):
    cfg_path = tmp_path / "exp.toml"
    out_dir = tmp_path / "results"
    cfg = _cfg(x=3000, out_dir=str(out_dir))
    cfg_path.write_text(serialize_config(cfg))
    code = main(["experiment", "--config", str(cfg_path)])
    assert code == 0
    for name in ("moments.csv", "fit.json", "histogram.csv"):
        assert (out_dir / name).exists()
    head = (out_dir / "moments.csv").read_text().splitlines()[0]
    assert config_hash(cfg) in head and "seed=7" in head
    fit = json.loads((out_dir / "fit.json").read_text())
    assert fit["config"] == config_hash(cfg)
    assert fit["seed"] == 7
    assert fit["n"] == 3000
    hist_lines = (out_dir / "histogram.csv").read_text().splitlines()
    assert hist_lines[1] == "bin_lo,bin_hi,count"
    assert len(hist_lines) == 2 + 101


def test_cli_stats_runs(tmp_path, capsys):
    code = main(["stats", "--preset", "omega-square", "--x", "5000", "--out", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "stats.json").read_text())
    assert data["x"] == 5000
    captured = capsys.readouterr()
    assert '"a_q"' in captured.out


def test_cli_moments_runs(tmp_path, capsys):
    code = main(
        ["moments", "--preset", "omega-square", "--x", "2000", "--out", str(tmp_path)]
    )
    assert code == 0
    assert (tmp_path / "moments.csv").exists()


def test_cli_bad_config_exit_code(tmp_path, capsys):
    assert main(["experiment", "--config", str(tmp_path / "missing.toml")]) == 1
    bad = tmp_path / "bad.toml"
    bad.write_text("[input]\nkind = 'all-integers'\nx = 5\n[law]\npoly='T1'\nfunctions=['omega']\n")
    assert main(["experiment", "--config", str(bad)]) == 1
    assert main(["experiment"]) == 1  # neither --config nor --preset


def test_cli_negative_poly_rejected(tmp_path, capsys):
    bad = tmp_path / "neg.toml"
    bad.write_text(
        "[input]\nkind = 'all-integers'\nx = 2000\n[law]\npoly = 'T1-T2'\nfunctions = ['omega', 'omega']\n"
    )
    assert main(["experiment", "--config", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "config error" in err


def test_cli_runtime_error_exit_code(tmp_path, capsys):
    # config loads fine, but the function value violates its bound at run time
    fn_path = tmp_path / "bad_fn.toml"
    fn_path.write_text('name = "bad"\nbound = 1.0\ndefault = 5.0\n')
    cfg_path = tmp_path / "exp.toml"
    cfg = _cfg(x=2000, functions=(f"file:{fn_path}",))
    cfg_path.write_text(serialize_config(cfg))
    assert main(["experiment", "--config", str(cfg_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_verify_exit_codes(tmp_path, capsys):
    assert main(["verify", "--fast", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "verify.txt").read_text()
    assert "PASS" in text and "seed=" in text
    assert main(["verify", "--fast", "--inject-failure"]) == 3


def test_cli_verify_byte_identical(capsys):
    assert main(["verify", "--fast", "--seed", "5"]) == 0
    first = capsys.readouterr().out
    assert main(["verify", "--fast", "--seed", "5"]) == 0
    second = capsys.readouterr().out
    assert first == second


def test_shifted_experiment_small():
    cfg = _cfg(kind="shifted-primes", shift=1, x=20_000, poly="T1")
    res = run_experiment(cfg, workers=2)
    assert res.fit_report.n > 0
    assert res.moment_report.rows[0].value == res.fit_report.n
    # negative shift exercises elements above x
    cfg2 = _cfg(kind="shifted-primes", shift=-2, x=20_000, poly="T1")
    res2 = run_experiment(cfg2, workers=1)
    assert res2.fit_report.n > 0
