"""Tests for scenario configs, generators, CSV emission and exit codes."""

import json
import math
import os

import numpy as np
import pytest

from discinterp.cli import main as cli_main
from discinterp.geometry import DiscSequence
from discinterp.growth import GrowthFunction
from discinterp.harness import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigError,
    generate_sequence,
    generate_targets,
    run_scenario,
)


def write_config(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


class TestGenerators:
    def test_sharpness_pairs_first_pair(self):
        seq = generate_sequence({"kind": "sharpness_pairs", "rho": 1.0, "n_max": 1}, 0)
        assert len(seq) == 2
        assert seq.values[0] == 0.5
        assert seq.values[1] == pytest.approx(0.5 + 0.5 * math.exp(-2.0), abs=1e-16)

    def test_radial(self):
        seq = generate_sequence({"kind": "radial", "radii": [0.5, 0.75]}, 0)
        assert np.allclose(seq.values, [0.5, 0.75])

    def test_explicit(self):
        seq = generate_sequence(
            {"kind": "explicit", "points": [[0.1, 0.2], [-0.3, 0.0]]}, 0)
        assert np.allclose(seq.values, [0.1 + 0.2j, -0.3])

    def test_deterministic_for_fixed_seed(self):
        spec = {"kind": "perturbed_lattice", "rings": 3, "r0": 0.5}
        a = generate_sequence(spec, 42)
        b = generate_sequence(spec, 42)
        assert np.array_equal(a.values, b.values)
        c = generate_sequence(spec, 43)
        assert not np.array_equal(a.values, c.values)

    def test_lattice_respects_invariants(self):
        seq = generate_sequence(
            {"kind": "perturbed_lattice", "rings": 5, "r0": 0.4, "max_points": 60}, 7)
        assert 0 < len(seq) <= 60
        assert seq.min_modulus > 0
        assert float(seq.moduli.max()) < 1

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            generate_sequence({"kind": "spiral"}, 0)

    def test_targets_admissible(self):
        gf = GrowthFunction.power(1.0)
        seq = generate_sequence({"kind": "radial", "radii": [0.4, 0.6, 0.9]}, 0)
        vals = generate_targets({"kind": "random_admissible", "constant": 2.0},
                                seq, gf, 5)
        tilde = np.asarray(gf.psi_tilde(1 / (1 - seq.moduli)))
        assert np.all(np.log(np.abs(vals)) <= 2.0 * tilde + 1e-12)

    def test_targets_length_mismatch(self):
        gf = GrowthFunction.power(1.0)
        seq = DiscSequence([0.5])
        with pytest.raises(ConfigError):
            generate_targets({"kind": "explicit", "values": [[1, 0], [2, 0]]},
                             seq, gf, 0)


BASE_INTERP = {
    "task": "interpolate",
    "sequence": {"kind": "perturbed_lattice", "rings": 3, "r0": 0.5,
                 "max_points": 25},
    "growth": {"family": "power", "param": 1.0},
    "targets": {"kind": "random_admissible", "constant": 2.0},
    "r_grid": [0.5, 0.9, 0.99],
    "theta_count": 64,
    "seed": 3,
}


class TestRunScenario:
    def test_interpolate_writes_artifacts(self, tmp_path):
        cfg = write_config(tmp_path, "a.json", BASE_INTERP)
        out = str(tmp_path / "out")
        assert run_scenario(cfg, out) == EXIT_OK
        assert set(os.listdir(out)) == {"constants.json", "identity.csv", "growth.csv"}
        growth = (tmp_path / "out" / "growth.csv").read_text().splitlines()
        assert growth[0] == "r,ln_max_modulus,psi_tilde,ratio"
        assert len(growth) == 1 + len(BASE_INTERP["r_grid"])
        identity = (tmp_path / "out" / "identity.csv").read_text().splitlines()
        constants = json.loads((tmp_path / "out" / "constants.json").read_text())
        assert constants["max_identity_error"] < 1e-8
        seq = generate_sequence(BASE_INTERP["sequence"], BASE_INTERP["seed"])
        assert len(identity) - 1 == len(seq)

    def test_reproducible_bytes(self, tmp_path):
        cfg = write_config(tmp_path, "a.json", BASE_INTERP)
        out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
        assert run_scenario(cfg, out1) == EXIT_OK
        assert run_scenario(cfg, out2) == EXIT_OK
        for name in ("identity.csv", "growth.csv", "constants.json"):
            a = (tmp_path / "o1" / name).read_bytes()
            b = (tmp_path / "o2" / name).read_bytes()
            assert a == b

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_config(tmp_path, "a.json", BASE_INTERP)
        out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
        run_scenario(cfg, out1)
        run_scenario(cfg, out2, seed=99)
        assert (tmp_path / "o1" / "identity.csv").read_bytes() != \
            (tmp_path / "o2" / "identity.csv").read_bytes()

    def test_check_singleton_all_zero(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {
            "task": "check",
            "sequence": {"kind": "radial", "radii": [0.5]},
            "growth": {"family": "power", "param": 1.0},
        })
        out = str(tmp_path / "out")
        assert run_scenario(cfg, out) == EXIT_OK
        constants = json.loads((tmp_path / "out" / "constants.json").read_text())
        assert constants["concentration"] == 0.0
        assert constants["korenblum_sum"] == 0.0
        assert constants["carleson_delta"] == 1.0

    def test_malformed_json_is_config_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        out = str(tmp_path / "out")
        assert run_scenario(str(path), out) == EXIT_CONFIG
        assert not os.path.exists(out)  # no partial outputs

    def test_bad_field_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, "bad.json",
                           {"task": "interpolate", "sequence": {"kind": "nope"},
                            "growth": {"family": "power", "param": 1.0}})
        assert run_scenario(cfg, str(tmp_path / "o")) == EXIT_CONFIG

    def test_unknown_task_rejected(self, tmp_path):
        cfg = write_config(tmp_path, "bad.json",
                           {"task": "frobnicate",
                            "sequence": {"kind": "radial", "radii": [0.5]},
                            "growth": {"family": "power", "param": 1.0}})
        assert run_scenario(cfg, str(tmp_path / "o")) == EXIT_CONFIG

    def test_sharpness_task(self, tmp_path):
        cfg = write_config(tmp_path, "s.json", {
            "task": "sharpness",
            "sequence": {"kind": "sharpness_pairs", "rho": 1.0, "n_max": 12},
            "eps0": 0.5,
        })
        out = str(tmp_path / "out")
        assert run_scenario(cfg, out) == EXIT_OK
        rows = (tmp_path / "out" / "sharpness.csv").read_text().splitlines()
        assert rows[0] == "n,N_value,target,ratio"
        assert len(rows) == 13
        witness = (tmp_path / "out" / "witness.csv").read_text().splitlines()
        assert len(witness) == 13
        constants = json.loads((tmp_path / "out" / "constants.json").read_text())
        assert constants["crossing_index"] == 3

    def test_oscillate_task(self, tmp_path):
        cfg = write_config(tmp_path, "o.json", {
            "task": "oscillate",
            "sequence": {"kind": "perturbed_lattice", "rings": 2, "r0": 0.45,
                         "max_points": 8},
            "growth": {"family": "power", "param": 1.0},
            "C0": 2.0,
            "residual_samples": 25,
            "r_grid": [0.5, 0.9],
            "theta_count": 64,
            "seed": 11,
        })
        out = str(tmp_path / "out")
        assert run_scenario(cfg, out) == EXIT_OK
        names = set(os.listdir(out))
        assert {"residual.csv", "zeros.csv", "growth_a.csv", "constants.json"} <= names
        residual = (tmp_path / "out" / "residual.csv").read_text().splitlines()
        assert len(residual) == 26
        constants = json.loads((tmp_path / "out" / "constants.json").read_text())
        assert constants["max_residual"] < 1e-6
        assert constants["max_winding_defect"] < 1e-3

    def test_plain_list_sequence_and_targets(self, tmp_path):
        cfg = write_config(tmp_path, "p.json", {
            "task": "interpolate",
            "sequence": [[0.5, 0.0], [0.0, 0.6], [-0.4, 0.2]],
            "targets": [[1.0, 0.0], [0.0, -2.0], [3.0, 1.0]],
            "growth": {"family": "power", "param": 1.0},
            "C0": 2.0,
            "theta_count": 32,
        })
        out = str(tmp_path / "out")
        assert run_scenario(cfg, out) == EXIT_OK
        constants = json.loads((tmp_path / "out" / "constants.json").read_text())
        assert constants["max_identity_error"] < 1e-8

    def test_nonfinite_targets_exit_numeric(self, tmp_path):
        cfg = write_config(tmp_path, "n.json", {
            "task": "interpolate",
            "sequence": [[0.5, 0.0], [0.0, 0.6]],
            "targets": [[1e400, 0.0], [1.0, 0.0]],  # parses to infinity
            "growth": {"family": "power", "param": 1.0},
            "theta_count": 32,
        })
        assert run_scenario(cfg, str(tmp_path / "out")) == EXIT_NUMERIC

    def test_growth_curve_has_denser_grid(self, tmp_path):
        cfg = dict(BASE_INTERP)
        cfg["task"] = "growth-curve"
        path = write_config(tmp_path, "g.json", cfg)
        out = str(tmp_path / "out")
        assert run_scenario(path, out) == EXIT_OK
        rows = (tmp_path / "out" / "growth.csv").read_text().splitlines()
        assert len(rows) > 1 + len(BASE_INTERP["r_grid"])

    def test_threads_do_not_change_bytes(self, tmp_path):
        cfg = write_config(tmp_path, "a.json", BASE_INTERP)
        out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
        run_scenario(cfg, out1, threads=1)
        run_scenario(cfg, out2, threads=4)
        assert (tmp_path / "o1" / "growth.csv").read_bytes() == \
            (tmp_path / "o2" / "growth.csv").read_bytes()


class TestCli:
    def test_cli_interpolate(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "a.json", BASE_INTERP)
        out = str(tmp_path / "out")
        code = cli_main(["interpolate", "--config", cfg, "--out", out])
        assert code == EXIT_OK
        assert "max_identity_error" in capsys.readouterr().out

    def test_cli_task_overrides_config(self, tmp_path):
        data = dict(BASE_INTERP)
        del data["task"]
        cfg = write_config(tmp_path, "a.json", data)
        out = str(tmp_path / "out")
        assert cli_main(["check", "--config", cfg, "--out", out]) == EXIT_OK
        assert os.path.exists(os.path.join(out, "conditions.csv"))

    def test_cli_requires_task(self):
        with pytest.raises(SystemExit):
            cli_main([])
