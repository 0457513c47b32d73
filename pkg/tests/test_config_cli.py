import json
import textwrap

import pytest

from harvestsim.cli import main
from harvestsim.config import (
    ConfigError,
    load_config,
    loads_config,
    save_config,
)
from harvestsim.sweep import (
    COLUMNS,
    figure_preset,
    rows_to_csv,
    run_point,
    run_sweep,
)

FIG2_CONFIG = textwrap.dedent("""\
    [detector_a]
    gap = 1.0
    smearing = 0.001
    t_on = 0
    t_off = 100*sigma

    [detector_b]
    gap = 1.0
    smearing = 0.001
    t_on = 150*sigma
    t_off = 250*sigma

    [scenario]
    separation = 150*sigma
    """)


def fast_numerics_block(tail="1e-14"):
    return f"\n[numerics]\ntail_tol = {tail}\n"


class TestLoadConfig:
    def test_minimal_reference_config(self):
        cfg = loads_config(FIG2_CONFIG)
        s = cfg.scenario
        assert s.det_a.gap == 1.0
        assert s.det_a.smearing == 0.001
        assert s.det_a.window.t_on == 0.0
        assert s.det_a.window.t_off == pytest.approx(0.1)
        assert s.det_b.window.t_on == pytest.approx(0.15)
        assert s.det_b.window.t_off == pytest.approx(0.25)
        assert s.separation == pytest.approx(0.15)
        assert s.position_uncertainty == 0.0
        # coupling defaults to 0.01 * gap
        assert s.det_a.coupling == pytest.approx(0.01)

    def test_sigma_suffix_conversion(self):
        cfg = loads_config(FIG2_CONFIG.replace("150*sigma", "150 * sigma", 1))
        assert cfg.scenario.det_b.window.t_on == pytest.approx(0.15)

    def test_reversed_window_names_the_section(self):
        bad = FIG2_CONFIG.replace("t_off = 250*sigma", "t_off = 100*sigma")
        with pytest.raises(ConfigError, match="detector_b"):
            loads_config(bad)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="detector_a.potato"):
            loads_config(FIG2_CONFIG.replace("gap = 1.0", "gap = 1.0\npotato = 1", 1))

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="widgets"):
            loads_config(FIG2_CONFIG + "\n[widgets]\nx = 1\n")

    def test_missing_section_rejected(self):
        with pytest.raises(ConfigError, match="scenario"):
            loads_config(FIG2_CONFIG.split("[scenario]")[0])

    def test_missing_key_named(self):
        with pytest.raises(ConfigError, match="detector_a.gap"):
            loads_config(FIG2_CONFIG.replace("gap = 1.0\n", "", 1))

    def test_bad_number_named(self):
        with pytest.raises(ConfigError, match="separation"):
            loads_config(FIG2_CONFIG.replace("separation = 150*sigma",
                                             "separation = oops"))

    def test_sweep_section(self):
        cfg = loads_config(FIG2_CONFIG + textwrap.dedent("""\
            [sweep]
            parameter = r
            from = 10*sigma
            to = 400*sigma
            points = 20
            spacing = linear
            """))
        assert cfg.sweep.parameter == "r"
        assert cfg.sweep.start == pytest.approx(0.01)
        assert cfg.sweep.stop == pytest.approx(0.4)
        assert cfg.sweep.points == 20

    def test_sweep_validation(self):
        with pytest.raises(ConfigError, match="points"):
            loads_config(FIG2_CONFIG + "[sweep]\nparameter = r\nfrom = 1\nto = 2\npoints = 1\n")
        with pytest.raises(ConfigError, match="from"):
            loads_config(FIG2_CONFIG + "[sweep]\nparameter = r\nfrom = 2\nto = 1\npoints = 5\n")
        with pytest.raises(ConfigError, match="parameter"):
            loads_config(FIG2_CONFIG + "[sweep]\nparameter = bogus\nfrom = 1\nto = 2\npoints = 5\n")

    def test_numerics_and_output_sections(self):
        cfg = loads_config(FIG2_CONFIG + textwrap.dedent("""\
            [numerics]
            tol_abs = 1e-10
            eval_budget = 50000

            [output]
            path = out.csv
            format = csv
            """))
        assert cfg.numerics.tol_abs == 1e-10
        assert cfg.numerics.eval_budget == 50000
        assert cfg.numerics.tol_rel == 1e-9  # default preserved
        assert cfg.output.path == "out.csv"

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError):
            loads_config(FIG2_CONFIG.replace("gap = 1.0", "gap = 1.0\ngap = 2.0", 1))

    def test_round_trip(self, tmp_path):
        cfg = loads_config(FIG2_CONFIG + textwrap.dedent("""\
            [scenario_extra]
            """).replace("[scenario_extra]\n", "") + textwrap.dedent("""\
            [sweep]
            parameter = delta
            from = 0.0015
            to = 15.0
            points = 41
            spacing = log
            """))
        path = tmp_path / "cfg.ini"
        save_config(cfg, path)
        again = load_config(path)
        assert again == cfg

    def test_round_trip_without_sweep(self, tmp_path):
        cfg = loads_config(FIG2_CONFIG)
        path = tmp_path / "cfg.ini"
        save_config(cfg, path)
        assert load_config(path) == cfg


class TestSweepRunner:
    def small_sweep_cfg(self, parameter="r", extra=""):
        sweep = textwrap.dedent(f"""\
            [sweep]
            parameter = {parameter}
            from = 100*sigma
            to = 300*sigma
            points = 3
            """)
        return loads_config(FIG2_CONFIG + sweep + extra)

    def test_rows_and_columns(self):
        rows = run_sweep(self.small_sweep_cfg())
        assert len(rows) == 3
        rec = rows[0].to_record()
        assert tuple(rec.keys()) == COLUMNS
        assert rec["status"] == "ok"
        assert rec["i_aa"] > 0.0

    def test_zero_coupling_rows(self):
        cfg = self.small_sweep_cfg(extra="")
        text = FIG2_CONFIG.replace("[detector_a]\ngap",
                                   "[detector_a]\ncoupling = 0\ngap")
        text = text.replace("[detector_b]\ngap",
                            "[detector_b]\ncoupling = 0\ngap")
        cfg = loads_config(text + "[sweep]\nparameter = r\nfrom = 0.1\nto = 0.3\npoints = 3\n")
        for row in run_sweep(cfg):
            rec = row.to_record()
            assert rec["status"] == "ok"
            assert rec["i_aa"] == 0.0 and rec["i_bb"] == 0.0
            assert rec["j_abs"] == 0.0 and rec["negativity"] == 0.0

    def test_partial_failure_marks_row(self):
        # unreachable tolerance plus a tiny budget fails quadrature without
        # aborting the sweep
        cfg = self.small_sweep_cfg(
            extra="[numerics]\neval_budget = 200\ntol_abs = 1e-300\ntol_rel = 1e-16\n"
        )
        rows = run_sweep(cfg)
        assert len(rows) == 3
        assert all(r.status.startswith("ConvergenceFailure") for r in rows)
        assert all(r.report is None for r in rows)
        rec = rows[0].to_record()
        assert rec["i_aa"] is None

    def test_parallel_matches_serial(self):
        cfg = self.small_sweep_cfg()
        serial = [r.to_record() for r in run_sweep(cfg, workers=1)]
        parallel = [r.to_record() for r in run_sweep(cfg, workers=2)]
        assert serial == parallel

    def test_delta_sweep_has_ratio(self):
        cfg = loads_config(FIG2_CONFIG + textwrap.dedent("""\
            [sweep]
            parameter = delta
            from = 0.015
            to = 0.15
            points = 2
            spacing = log
            """))
        rows = run_sweep(cfg)
        for row in rows:
            rec = row.to_record()
            assert rec["status"] == "ok"
            assert 0.0 < rec["ratio_r"] <= 1.0
            assert rec["j_smeared_abs"] == pytest.approx(
                rec["ratio_r"] * rec["j_abs"], rel=1e-12)

    def test_gap_and_duration_sweeps(self):
        for parameter, lo, hi in (("gap", 0.01, 0.1), ("duration", 0.05, 0.15)):
            cfg = loads_config(FIG2_CONFIG + textwrap.dedent(f"""\
                [sweep]
                parameter = {parameter}
                from = {lo}
                to = {hi}
                points = 2
                """))
            rows = run_sweep(cfg)
            assert all(r.status == "ok" for r in rows)

    def test_delta_t_sweep(self):
        cfg = loads_config(FIG2_CONFIG + textwrap.dedent("""\
            [sweep]
            parameter = delta_t
            from = 0.05
            to = 0.2
            points = 2
            """))
        rows = run_sweep(cfg)
        recs = [r.to_record() for r in rows]
        assert all(r["status"] == "ok" for r in recs)
        assert recs[0]["j_smeared_abs"] > recs[1]["j_smeared_abs"]

    def test_csv_deterministic(self):
        cfg = self.small_sweep_cfg()
        a = rows_to_csv(run_sweep(cfg))
        b = rows_to_csv(run_sweep(cfg))
        assert a == b
        assert a.startswith(",".join(COLUMNS))
        assert "\r" not in a


class TestRunPoint:
    def test_point_report(self):
        cfg = loads_config(FIG2_CONFIG)
        rep = run_point(cfg)
        assert rep.integrals.i_aa > 0.0
        assert rep.causal_class.value == "fully-light-connected"


class TestCli:
    def write_cfg(self, tmp_path, text):
        path = tmp_path / "run.ini"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def test_compute_verb(self, tmp_path, capsys):
        path = self.write_cfg(tmp_path, FIG2_CONFIG)
        assert main(["compute", path]) == 0
        out = capsys.readouterr().out
        assert "negativity" in out
        assert "fully-light-connected" in out

    def test_compute_writes_json(self, tmp_path, capsys):
        out_path = tmp_path / "report.json"
        cfg = FIG2_CONFIG + f"[output]\npath = {out_path}\nformat = json\n"
        assert main(["compute", self.write_cfg(tmp_path, cfg)]) == 0
        capsys.readouterr()
        data = json.loads(out_path.read_text())
        assert data["causal_class"] == "fully-light-connected"
        assert data["i_aa"] > 0.0

    def test_sweep_verb_to_file(self, tmp_path, capsys):
        out_path = tmp_path / "table.csv"
        cfg = FIG2_CONFIG + textwrap.dedent(f"""\
            [sweep]
            parameter = r
            from = 0.1
            to = 0.3
            points = 3

            [output]
            path = {out_path}
            """)
        assert main(["sweep", self.write_cfg(tmp_path, cfg)]) == 0
        capsys.readouterr()
        text = out_path.read_text()
        assert text.splitlines()[0] == ",".join(COLUMNS)
        assert len(text.splitlines()) == 4

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = self.write_cfg(tmp_path, "[detector_a]\ngap = 1\n")
        assert main(["compute", path]) == 2
        assert "config error" in capsys.readouterr().err

    def test_figure_writes_sidecar_metadata(self, tmp_path, capsys):
        out_path = tmp_path / "fig.csv"
        # override tolerances only to keep this smoke test quick
        assert main(["figure", "fig2a", "--out", str(out_path)]) == 0
        capsys.readouterr()
        assert out_path.exists()
        meta = json.loads((tmp_path / "fig.csv.meta.json").read_text())
        assert meta["light_contact_r_min"] == pytest.approx(0.05)
        assert meta["light_contact_r_max"] == pytest.approx(0.25)

    def test_figure_rejects_unknown_name(self, capsys):
        with pytest.raises(SystemExit):
            main(["figure", "fig9"])


class TestFigurePresetShapes:
    def test_fig3_grid_contains_r0(self):
        from harvestsim.sweep import figure_config, sweep_values

        cfg = figure_config("fig3")
        values = sweep_values(cfg.sweep)
        assert len(values) == 41
        assert min(abs(values - 0.15)) < 1e-12

    def test_fig2b_metadata(self):
        from harvestsim.sweep import figure_config

        cfg = figure_config("fig2a")
        assert cfg.sweep.parameter == "r"
        assert cfg.sweep.points == 200

    def test_fig2b_phi_plus_column(self):
        import numpy as np

        rows, meta = figure_preset("fig2b")
        recs = [r.to_record() for r in rows]
        assert meta["highlight_column"] == "bell_phi_plus"
        vals = np.array([r["value"] for r in recs])
        phi = np.array([r["bell_phi_plus"] for r in recs])
        base = 0.5 * (1.0 - np.array([r["i_aa"] + r["i_bb"] for r in recs]))
        j_re = np.array([r["j_re"] for r in recs])
        # the fraction's deviation from baseline is exactly -Re(J), column-wise
        assert np.max(np.abs((phi - base) + j_re)) < 1e-15
        # its strongest excursion sits in the light-contact window, like |J|
        lo, hi = meta["light_contact_r_min"], meta["light_contact_r_max"]
        r_star = vals[int(np.argmax(np.abs(phi - base)))]
        assert lo < r_star < hi
        jabs = np.array([r["j_abs"] for r in recs])
        assert lo < vals[int(np.argmax(jabs))] < hi
