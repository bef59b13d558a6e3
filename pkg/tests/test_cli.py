import json

import pytest
from click.testing import CliRunner

from wva_sim.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def parse_csv(text):
    header = {}
    columns = None
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[2:].partition(":")
            header[key.strip()] = value.strip()
        elif columns is None:
            columns = line.split(",")
        else:
            rows.append(dict(zip(columns, line.split(","))))
    return header, columns, rows


SMALL_ORACLE = {
    "alpha": [0.3],
    "delta": [0.1, 0.2],
    "beta": [0.8],
    "eta": [1.0],
    "phi_bar_urad": [1000.0],
    "span_over_phi_bar": 2.0,
    "tolerance": 0.05,
}


class TestOracleValidate:
    def test_small_grid_passes_tolerance(self, runner, tmp_path):
        config = tmp_path / "grid.json"
        config.write_text(json.dumps(SMALL_ORACLE))
        out = tmp_path / "oracle.csv"
        result = runner.invoke(
            main, ["oracle-validate", "--config", str(config), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        header, columns, rows = parse_csv(out.read_text())
        assert columns == [
            "alpha", "beta", "delta", "eta", "phi_plus", "phi_minus",
            "p_click_exact", "p_click_analytic", "diff_exact", "diff_analytic",
            "rel_error", "verdict",
        ]
        assert len(rows) == 2
        for row in rows:
            if row["verdict"] == "valid":
                assert float(row["rel_error"]) < 0.05

    def test_invalid_regime_rows_are_exempt(self, runner, tmp_path):
        config = tmp_path / "grid.json"
        config.write_text(
            json.dumps(dict(SMALL_ORACLE, beta=[2.0], phi_bar_urad=[2e5], delta=[0.05]))
        )
        out = tmp_path / "oracle.csv"
        result = runner.invoke(
            main, ["oracle-validate", "--config", str(config), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        _, _, rows = parse_csv(out.read_text())
        assert all(row["verdict"] == "invalid" for row in rows)

    def test_tolerance_flag_gates_exit_code(self, runner, tmp_path):
        config = tmp_path / "grid.json"
        config.write_text(json.dumps(SMALL_ORACLE))
        result = runner.invoke(
            main,
            ["oracle-validate", "--config", str(config), "--out",
             str(tmp_path / "o.csv"), "--tolerance", "1e-9"],
        )
        assert result.exit_code == 2

    def test_malformed_config_names_field(self, runner, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps(dict(SMALL_ORACLE, delta="not-a-list")))
        result = runner.invoke(main, ["oracle-validate", "--config", str(config)])
        assert result.exit_code == 1
        assert "delta" in result.output

    def test_unknown_field_rejected(self, runner, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps(dict(SMALL_ORACLE, detla=[0.1])))
        result = runner.invoke(main, ["oracle-validate", "--config", str(config)])
        assert result.exit_code == 1
        assert "detla" in result.output


class TestFig3:
    def test_zero_noise_columns_equal_analytic(self, runner, tmp_path):
        from wva_sim.model import predict_phases
        from wva_sim.presets import CAMPAIGN, point_params

        config = tmp_path / "fig3.json"
        points = [
            {"n_bar": p.n_bar, "delta": p.delta, "eta": p.eta,
             "n_total": p.n_total, "background": 0.0, "p_signal": p.p_signal}
            for p in CAMPAIGN
        ]
        config.write_text(json.dumps({"phase_sigma": 0.0, "points": points}))
        out = tmp_path / "fig3.csv"
        result = runner.invoke(
            main,
            ["fig3", "--config", str(config), "--out", str(out),
             "--seed", "7", "--trials-scale", "2e-4"],
        )
        assert result.exit_code == 0, result.output
        header, _, rows = parse_csv(out.read_text())
        assert "fit_phi0" in header  # skipped note for the zero-noise run
        assert "skipped" in header["fit_phi0"]
        for point, row in zip(CAMPAIGN, rows):
            pred = predict_phases(point_params(point))
            assert float(row["phi_click"]) * 1e-6 == pytest.approx(
                pred.phase_click, rel=1e-12
            )
            assert float(row["phi_noclick"]) * 1e-6 == pytest.approx(
                pred.phase_noclick, rel=1e-12
            )

    def test_campaign_points_echoed_in_header(self, runner, tmp_path):
        out = tmp_path / "fig3.csv"
        result = runner.invoke(
            main, ["fig3", "--out", str(out), "--seed", "7", "--trials-scale", "1e-4"]
        )
        assert result.exit_code == 0, result.output
        header, _, rows = parse_csv(out.read_text())
        config = json.loads(header["config"])
        assert [p["n_bar"] for p in config["points"]] == [95.0, 45.0, 20.0, 10.0, 40.0]
        assert [p["delta"] for p in config["points"]] == [0.10, 0.14, 0.22, 0.32, 1.0]
        assert len(rows) == 5

    def test_too_few_trials_exits_two(self, runner, tmp_path):
        # a vanishing trials scale leaves groups too small to estimate
        result = runner.invoke(
            main, ["fig3", "--seed", "7", "--trials-scale", "1e-8"]
        )
        assert result.exit_code == 2
        assert "estimation failure" in result.output

    def test_fit_written_with_noise(self, runner, tmp_path):
        out = tmp_path / "fig3.csv"
        result = runner.invoke(
            main, ["fig3", "--out", str(out), "--seed", "7", "--trials-scale", "1e-3"]
        )
        assert result.exit_code == 0, result.output
        fit = json.loads((tmp_path / "fig3.fit.json").read_text())
        assert {"phi0_urad", "stderr_urad", "chi_squared", "dof"} <= set(fit)
        assert fit["dof"] == 3


class TestFig4:
    def test_byte_identical_across_worker_counts(self, runner, tmp_path):
        outs = []
        for workers, name in ((1, "a.csv"), (4, "b.csv")):
            out = tmp_path / name
            result = runner.invoke(
                main,
                ["fig4", "--out", str(out), "--seed", "123",
                 "--trials-scale", "3e-4", "--workers", str(workers)],
            )
            assert result.exit_code == 0, result.output
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_fit_json_sidecar(self, runner, tmp_path):
        out = tmp_path / "fig4.csv"
        result = runner.invoke(
            main, ["fig4", "--out", str(out), "--seed", "9", "--trials-scale", "1e-3"]
        )
        assert result.exit_code == 0, result.output
        fit = json.loads((tmp_path / "fig4.fit.json").read_text())
        assert fit["dof"] == 3  # delta = 1 control excluded by default
        header, _, rows = parse_csv(out.read_text())
        assert [row["in_fit"] for row in rows] == ["1", "1", "1", "1", "0"]

    def test_single_delta_config_exits_two(self, runner, tmp_path):
        config = tmp_path / "one.json"
        config.write_text(
            json.dumps(
                {
                    "points": [
                        {"n_bar": 95, "delta": 0.1, "eta": 0.2,
                         "n_total": 100000, "background": 0.06}
                    ]
                }
            )
        )
        result = runner.invoke(
            main, ["fig4", "--config", str(config), "--seed", "9",
                   "--trials-scale", "0.1"],
        )
        assert result.exit_code == 2
        assert "fit failure" in result.output

    def test_missing_seed_is_usage_error(self, runner):
        result = runner.invoke(main, ["fig4"])
        assert result.exit_code == 2  # click usage error
        assert "--seed" in result.output

    def test_negative_seed_rejected(self, runner):
        result = runner.invoke(main, ["fig4", "--seed", "-1"])
        assert result.exit_code == 1
        assert "seed" in result.output

    def test_bad_point_field_named(self, runner, tmp_path):
        config = tmp_path / "bad.json"
        config.write_text(
            json.dumps(
                {
                    "points": [
                        {"n_bar": 95, "delta": 2.0, "eta": 0.2,
                         "n_total": 1000, "background": 0.06}
                    ]
                }
            )
        )
        result = runner.invoke(
            main, ["fig4", "--config", str(config), "--seed", "1"]
        )
        assert result.exit_code == 1
        assert "points[0].delta" in result.output


class TestSnr:
    def test_config_override_equalizes_schemes(self, runner, tmp_path):
        config = tmp_path / "snr.json"
        wva = {
            "n_bar": 95.0, "delta": 0.10, "eta": 0.2, "background": 0.06,
            "phi_bar_urad": 5.59, "span_urad": 8.7,
        }
        config.write_text(json.dumps({"wva": wva, "direct": wva, "n_trials": 600000}))
        out = tmp_path / "snr.json.out"
        result = runner.invoke(
            main, ["snr", "--config", str(config), "--seed", "5", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["ratio"] == pytest.approx(1.0, abs=0.35)

    def test_json_report(self, runner, tmp_path):
        out = tmp_path / "snr.json"
        result = runner.invoke(
            main, ["snr", "--out", str(out), "--seed", "31", "--trials-scale", "0.25"]
        )
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["seed"] == 31
        assert report["n_trials"] == 500_000
        assert report["ratio"] == pytest.approx(
            report["snr_wva"] / report["snr_direct"], rel=1e-12
        )
        assert report["ratio"] > 1.0
