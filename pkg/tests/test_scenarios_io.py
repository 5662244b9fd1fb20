"""Configuration parsing, CSV/SVG emission and scenario presets."""

import os

import numpy as np
import pytest

from agrospray.config import (ConfigError, PARAMETER_PRESETS, load_config,
                              parse_config, resolve_config)
from agrospray.output import (CSV_HEADER, parse_csv, render_csv,
                              render_svg)
from agrospray.scenarios import PRESETS, run_scenario


class TestConfigParsing:
    def test_empty_yields_reference_defaults(self):
        loaded = resolve_config({})
        p = loaded.spec.params
        assert (p.r, p.e, p.a, p.b, p.c) == (1.0, 2.5, 3.1, 1.2, 0.2)
        assert p.xi == 50.0
        assert loaded.spec.horizon == 50.0
        assert loaded.spec.init.as_array().tolist() == [3.1, 3.7, 2.2]

    def test_comments_and_blank_lines(self):
        entries = parse_config("# comment\n\n  xi = 0  # trailing\n")
        assert entries == {"xi": 0.0}

    def test_unknown_key_rejected_with_line(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("xi = 0\nbogus = 1\n")

    def test_syntax_error_reports_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("not an assignment\n")

    def test_bad_number_reported(self):
        with pytest.raises(ConfigError, match="needs a number"):
            parse_config("xi = banana\n")

    def test_invariant_violation_names_field(self):
        with pytest.raises(ConfigError, match="q"):
            resolve_config({"q": 1.5})

    def test_mintime_preset_overlay(self):
        loaded = resolve_config({"preset": "mintime-paper"})
        p = loaded.spec.params
        assert (p.c, p.e) == (2.0, 0.3)
        assert p.a == 3.1  # untouched reference value

    def test_explicit_key_overrides_preset(self):
        loaded = resolve_config({"preset": "mintime-paper", "c": 3.0})
        assert loaded.spec.params.c == 3.0

    def test_unknown_preset_rejected(self):
        with pytest.raises(ConfigError, match="preset"):
            resolve_config({"preset": "nope"})

    def test_load_config_missing_file(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/path.cfg")

    def test_load_config_roundtrip(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("xi = 0\nT = 150\ndt = 0.02\n")
        loaded = load_config(str(path))
        assert loaded.spec.params.xi == 0.0
        assert loaded.spec.horizon == 150.0
        assert loaded.integrator.dt == 0.02


class TestCsv:
    def test_header_exact(self):
        assert CSV_HEADER == "t,f,s,v,u,lambda1,lambda2,lambda3"

    def test_empty_trajectory_header_only(self):
        text = render_csv(np.empty(0), np.empty((0, 3)), np.empty(0),
                          np.empty((0, 3)))
        assert text == CSV_HEADER + "\n"

    def test_roundtrip_formatted_precision(self):
        rng = np.random.default_rng(17)
        n = 57
        t = np.sort(rng.uniform(0, 50, n))
        states = rng.normal(size=(n, 3)) * 10
        u = rng.uniform(0, 1, n)
        adj = rng.normal(size=(n, 3))
        text = render_csv(t, states, u, adj)
        t2, s2, u2, a2 = parse_csv(text)
        # identity on the 12-significant-digit formatted values
        for orig, parsed in ((t, t2), (states, s2), (u, u2), (adj, a2)):
            formatted = np.vectorize(lambda x: float("%.12g" % x))(orig)
            assert np.array_equal(formatted, parsed)

    def test_rows_newline_terminated(self):
        text = render_csv(np.array([0.0]), np.zeros((1, 3)),
                          np.zeros(1), np.zeros((1, 3)))
        assert text.endswith("\n")
        assert text.count("\n") == 2

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            render_csv(np.zeros(2), np.zeros((3, 3)), np.zeros(2),
                       np.zeros((2, 3)))


class TestSvg:
    def test_contains_polyline_axes_title(self):
        t = np.linspace(0, 1, 11)
        svg = render_svg("demo title", t, np.sin(t))
        assert "<polyline" in svg
        assert svg.count("<line") >= 2 + 10   # axes plus tick marks
        assert "demo title" in svg
        assert svg.startswith('<?xml')

    def test_flat_series_padded(self):
        svg = render_svg("flat", np.array([0.0, 1.0]),
                         np.array([2.0, 2.0]))
        assert "<polyline" in svg

    def test_deterministic(self):
        t = np.linspace(0, 5, 100)
        y = np.cos(t)
        assert render_svg("x", t, y) == render_svg("x", t, y)


class TestScenarios:
    def test_every_figure_preset_exists(self):
        expected = {"no-spray-50", "no-spray-150", "no-spray-mintime",
                    "xi0-T50", "xi0-T150", "xi50-T50", "mintime-paper",
                    "mintime-prose"}
        assert expected <= set(PRESETS)

    def test_unknown_scenario_rejected(self, tmp_path):
        with pytest.raises(KeyError):
            run_scenario("nope", out_dir=str(tmp_path))

    def test_no_spray_50_artifacts(self, tmp_path):
        record = run_scenario("no-spray-50", out_dir=str(tmp_path))
        assert os.path.exists(record.csv_path)
        assert len(record.svg_paths) == 4
        for path in record.svg_paths:
            assert os.path.exists(path)
        assert np.all(record.u == 0.0)
        assert np.all(record.adjoints == 0.0)
        # pest population oscillates: multiple local maxima
        v = record.states[:, 2]
        peaks = np.sum((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:]))
        assert peaks >= 3
        # monotone time column
        assert np.all(np.diff(record.t) > 0)

    def test_xi50_band(self, tmp_path):
        record = run_scenario("xi50-T50", out_dir=str(tmp_path))
        assert record.u.max() < 0.4
        assert record.report.converged

    def test_mintime_final_row(self, tmp_path):
        record = run_scenario("mintime-paper", out_dir=str(tmp_path))
        assert abs(record.states[-1, 2]) <= 1e-6
        assert record.t[-1] == pytest.approx(0.6, abs=0.15)

    def test_preset_parameter_overlays_match_config(self):
        assert PRESETS["mintime-paper"].params.c == 2.0
        assert PRESETS["mintime-paper"].params.e == 0.3
        assert PARAMETER_PRESETS["mintime-paper"] == {"c": 2.0, "e": 0.3}
