"""Config validation, sweep runners, CSV contracts, CLI exit codes."""

import json
import math

import numpy as np
import pytest

from photonstat.cli import main
from photonstat.config import ResultTable, ScenarioConfig, format_cell
from photonstat.errors import ConfigError
from photonstat.figures import (
    run_classical,
    run_conditions,
    run_correlate,
    run_deviation,
    run_figure,
)


def write_config(tmp_path, payload, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


BASE = {
    "state": {"kind": "pulse", "theta": math.pi},
    "ensemble": {"n": 4, "seed": 1},
    "order": {"m": 2, "n": 2},
    "directions": {"preset": "forward"},
}


class TestScenarioConfig:
    def test_minimal_valid(self):
        cfg = ScenarioConfig.from_dict(dict(BASE))
        assert cfg.order.m == 2
        assert cfg.realizations == 1

    def test_missing_theta(self):
        bad = dict(BASE, state={"kind": "pulse"})
        with pytest.raises(ConfigError, match="state.theta"):
            ScenarioConfig.from_dict(bad)

    def test_bad_preset(self):
        bad = dict(BASE, directions={"preset": "sideways"})
        with pytest.raises(ConfigError, match="directions.preset"):
            ScenarioConfig.from_dict(bad)

    def test_empty_sweep_axis(self):
        bad = dict(BASE, sweep={"n_grid": []})
        with pytest.raises(ConfigError, match="sweep.n_grid"):
            ScenarioConfig.from_dict(bad)

    def test_two_state_axes(self):
        bad = dict(BASE, sweep={"r_grid": [0.1], "s_grid": [1.0]})
        with pytest.raises(ConfigError, match="at most one state axis"):
            ScenarioConfig.from_dict(bad)

    def test_vector_count_checked(self):
        bad = dict(BASE, directions={"vectors": [[0, 0, 0]] * 3})
        with pytest.raises(ConfigError, match="directions.vectors"):
            ScenarioConfig.from_dict(bad)

    def test_zero_realizations(self):
        bad = dict(BASE, realizations=0)
        with pytest.raises(ConfigError, match="realizations"):
            ScenarioConfig.from_dict(bad)


class TestResultTable:
    def test_csv_quoting_and_floats(self):
        table = ResultTable(columns=["name", "value"])
        table.append(name='needs,"quoting"', value=0.1)
        text = table.to_csv_text()
        assert text == 'name,value\n"needs,""quoting""",0.1\n'

    def test_format_cell(self):
        assert format_cell(None) == ""
        assert format_cell(True) == "true"
        assert format_cell(np.float64(1.5)) == "1.5"
        assert format_cell(2.0000000000000004) == "2.0000000000000004"
        assert format_cell(7) == "7"


class TestRunners:
    def test_correlate_inverted_n_sweep(self):
        cfg = ScenarioConfig.from_dict(dict(BASE, sweep={"n_grid": [2, 4, 8]}))
        table, _ = run_correlate(cfg)
        assert table.column("g_re") == pytest.approx([1.0, 1.5, 1.75], rel=1e-12)
        assert table.column("method") == ["forward-closed-form"] * 3

    def test_correlate_dark_state_flagged(self):
        cfg = ScenarioConfig.from_dict(
            dict(BASE, state={"kind": "pulse", "theta": 0.0})
        )
        table, _ = run_correlate(cfg)
        assert table.column("status") == ["dark-state"]
        assert table.column("g_re") == [None]

    def test_correlate_validate_appends_oracle(self):
        cfg = ScenarioConfig.from_dict(
            dict(
                BASE,
                state={"kind": "pulse", "theta": 1.2},
                ensemble={"n": 5, "seed": 2},
                directions={"preset": "off-axis"},
            )
        )
        plain, _ = run_correlate(cfg, validate=False)
        checked, summary = run_correlate(cfg, validate=True)
        assert plain.column("g_re") == checked.column("g_re")
        assert summary["max_rel_discrepancy"] is not None
        assert summary["max_rel_discrepancy"] < 1e-10

    def test_classical_forward_values(self):
        cfg = ScenarioConfig.from_dict(
            dict(
                BASE,
                state={"kind": "classical", "e_incoh": 1.0},
                sweep={"n_grid": [5, 30]},
            )
        )
        table, _ = run_classical(cfg)
        assert table.column("g_re") == pytest.approx([1.8, 2.0 - 1.0 / 30], rel=1e-12)

    def test_classical_mc_column(self):
        cfg = ScenarioConfig.from_dict(
            dict(
                BASE,
                state={"kind": "classical", "e_incoh": 1.0, "e_coh_re": 0.3},
                ensemble={"n": 3, "seed": 4},
                samples=20_000,
            )
        )
        table, _ = run_classical(cfg)
        (mc,) = table.column("mc_re")
        (g,) = table.column("g_re")
        (se,) = table.column("mc_se")
        assert abs(mc - g) <= 4 * se

    def test_deviation_runner(self):
        cfg = ScenarioConfig.from_dict(dict(BASE, ensemble={"n": 100, "seed": 3}))
        table, _ = run_deviation(cfg)
        (delta,) = table.column("delta_total_re")
        assert delta == pytest.approx(2.0 / 100, rel=1e-9)
        (flagged,) = table.column("flagged")
        assert not flagged

    def test_conditions_runner(self):
        cfg = ScenarioConfig.from_dict(
            dict(
                BASE,
                order={"m": 4, "n": 4},
                ensemble={"n": 10_000, "seed": 0},
                state={"kind": "pulse", "theta": math.pi},
            )
        )
        table, _ = run_conditions(cfg)
        (lhs,) = table.column("finite_n_lhs")
        assert lhs == pytest.approx(math.factorial(4) * 12 / 2e4, rel=1e-12)
        assert lhs == pytest.approx(1.44e-2, rel=1e-10)

    def test_conditions_short_circuit_note(self):
        cfg = ScenarioConfig.from_dict(
            dict(BASE, order={"m": 5, "n": 5}, ensemble={"n": 3, "seed": 0})
        )
        table, _ = run_conditions(cfg)
        assert "m > N" in table.column("note")[0]

    def test_unequal_condition_rhs(self):
        cfg = ScenarioConfig.from_dict(
            dict(
                BASE,
                order={"m": 2, "n": 1},
                ensemble={"n": 10_000, "seed": 0},
                state={"kind": "driven", "s": 100.0},
            )
        )
        table, _ = run_conditions(cfg)
        (rhs,) = table.column("spin_sqrt_rhs")
        assert rhs == pytest.approx(5e-3, rel=1e-3)


class TestFigures:
    def test_fig1_columns(self):
        table, meta = run_figure(
            "fig1", overrides={"n_grid": [100], "r_inv_grid": [1.0, 10.0]}
        )
        assert meta["figure"] == "fig1"
        assert len(table.rows) == 2
        g2 = table.column("g2")
        assert all(0.0 < v < 2.0 for v in g2)

    def test_fig2_slopes(self):
        r_inv = list(np.geomspace(1e5, 1e7, 21))
        table, _ = run_figure("fig2", overrides={"r_inv_grid": r_inv})
        rows = [
            (r, d)
            for m, r, d in zip(
                table.column("m"), table.column("ratio"), table.column("delta_coh_abs")
            )
            if m == 2
        ]
        xs = np.log([r for r, _ in rows])
        ys = np.log([d for _, d in rows])
        slope = np.polyfit(xs, ys, 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)

    def test_fig4_reference_columns(self):
        table, _ = run_figure("fig4", overrides={"r_inv_grid": [1e8]})
        for m, n, g_abs, pred in zip(
            table.column("m"), table.column("n"), table.column("g_abs"),
            table.column("leading_pred"),
        ):
            assert g_abs == pytest.approx(pred, rel=0.05)

    def test_fig3_thread_count_invariance(self):
        kwargs = dict(
            overrides={"r_inv_grid": [1e4], "n": 200},
            seed=7,
            realizations=8,
        )
        t1, _ = run_figure("fig3", threads=1, **kwargs)
        t4, _ = run_figure("fig3", threads=4, **kwargs)
        assert t1.to_csv_text() == t4.to_csv_text()

    def test_unknown_figure(self):
        with pytest.raises(ConfigError):
            run_figure("fig9")


class TestCliProcess:
    def test_correlate_roundtrip(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dict(BASE, sweep={"n_grid": [2, 4, 8]}))
        out = tmp_path / "out.csv"
        code = main(["correlate", "--config", str(cfg), "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("n_atoms,")
        sidecar = json.loads((tmp_path / "out.csv.meta.json").read_text())
        assert sidecar["tool"] == "photonstat"
        assert sidecar["config"]["order"] == {"m": 2, "n": 2}

    def test_config_error_exit_2(self, tmp_path):
        cfg = write_config(tmp_path, dict(BASE, directions={"preset": "bogus"}))
        assert main(["correlate", "--config", str(cfg)]) == 2

    def test_missing_config_exit_2(self, tmp_path):
        assert main(["correlate", "--config", str(tmp_path / "nope.json")]) == 2

    def test_capacity_error_exit_3(self, tmp_path):
        cfg = write_config(
            tmp_path,
            dict(BASE, order={"m": 5, "n": 5}, directions={"preset": "off-axis"}),
        )
        assert main(["correlate", "--config", str(cfg)]) == 3

    def test_validation_failure_exit_4(self, tmp_path, monkeypatch):
        import photonstat.cli as cli

        def rigged(cfg, validate=False, threads=1):
            table, summary = run_correlate(cfg, validate=validate, threads=threads)
            summary["max_rel_discrepancy"] = 1e-3
            return table, summary

        monkeypatch.setattr(cli, "run_correlate", rigged)
        cfg = write_config(tmp_path, dict(BASE))
        out = tmp_path / "v.csv"
        code = main(["correlate", "--config", str(cfg), "--validate", "--out", str(out)])
        assert code == 4
        assert out.exists()  # primary columns still written

    def test_figure_determinism_across_threads(self, tmp_path):
        fig_cfg = write_config(tmp_path, {"r_inv_grid": [1e4], "n": 150}, "fig.json")
        outs = []
        for threads, name in [(1, "a.csv"), (4, "b.csv"), (1, "c.csv")]:
            out = tmp_path / name
            code = main([
                "figure", "fig3", "--config", str(fig_cfg), "--seed", "7",
                "--realizations", "6", "--threads", str(threads),
                "--out", str(out),
            ])
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1] == outs[2]

    def test_conditions_cli(self, tmp_path):
        cfg = write_config(tmp_path, dict(BASE, ensemble={"n": 50, "seed": 0}))
        out = tmp_path / "cond.csv"
        assert main(["conditions", "--config", str(cfg), "--out", str(out)]) == 0
        assert out.exists()

    def test_classical_cli(self, tmp_path):
        cfg = write_config(
            tmp_path,
            dict(BASE, state={"kind": "classical", "e_incoh": 1.0}),
        )
        out = tmp_path / "cl.csv"
        assert main(["classical", "--config", str(cfg), "--out", str(out)]) == 0
        header, row = out.read_text().splitlines()
        assert "g_re" in header.split(",")
