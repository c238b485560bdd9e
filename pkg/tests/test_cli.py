import json

import numpy as np
import pytest

from kitaevqse.cli import main
from kitaevqse.config import ConfigError, config_from_dict, load_config

FAST_CONFIG = {
    "lattice": {"rows": 2, "cols": 2},
    "coupling": -1.0,
    "field_z": 0.1,
    "seed": 1,
    "vqe": {"layers": 1, "epochs": 400, "layer_sweep": [0, 1]},
    "qse": {"n_k": 2, "n_l": 2, "shape_sweep": [[0, 0], [1, 1]], "trotter_sweep": [1, 2]},
    "gf": {"omega_min": -8.0, "omega_max": 8.0, "omega_step": 0.5},
    "dsf": {"h_values": [0.0, 0.1], "omega_min": -8.0, "omega_max": 8.0, "omega_step": 0.5},
}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli")
    config_path = path / "config.json"
    config_path.write_text(json.dumps(FAST_CONFIG))
    return path, config_path


def run(command, workdir, extra=()):
    path, config_path = workdir
    rc = main([command, "--config", str(config_path), "--out", str(path / "out"), *extra])
    assert rc == 0
    return path / "out"


class TestConfigValidation:
    def test_defaults_load(self):
        cfg = config_from_dict({})
        assert cfg.lattice.num_sites == 8
        assert cfg.qse.n_k == 3

    def test_unknown_key_path(self):
        with pytest.raises(ConfigError, match=r"\$\.bogus"):
            config_from_dict({"bogus": 1})

    def test_nested_error_path(self):
        with pytest.raises(ConfigError, match=r"\$\.qse\.n_k"):
            config_from_dict({"qse": {"n_k": -1}})

    def test_site_pair_bounds(self):
        with pytest.raises(ConfigError, match=r"\$\.gf\.site_pair"):
            config_from_dict({"gf": {"site_pair": [1, 9]}})

    def test_site_pair_must_differ(self):
        with pytest.raises(ConfigError, match="sites must differ"):
            config_from_dict({"gf": {"site_pair": [2, 2]}})

    def test_empty_kind_set_rejected(self):
        with pytest.raises(ConfigError, match=r"\$\.gf\.kinds"):
            config_from_dict({"gf": {"kinds": []}})

    def test_bad_evolution_mode(self):
        with pytest.raises(ConfigError, match=r"\$\.qse\.evolution_mode"):
            config_from_dict({"qse": {"evolution_mode": "suzuki4"}})

    def test_bad_coupling_list(self):
        with pytest.raises(ConfigError, match=r"\$\.coupling"):
            config_from_dict({"coupling": [1.0, 2.0]})

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"lattice": \n  oops}')
        with pytest.raises(ConfigError, match="line 2"):
            load_config(path)

    def test_empty_h_grid_rejected(self):
        with pytest.raises(ConfigError, match=r"\$\.dsf\.h_values"):
            config_from_dict({"dsf": {"h_values": []}})


class TestPipeline:
    def test_stage_order_enforced(self, tmp_path):
        config_path = tmp_path / "c.json"
        config_path.write_text(json.dumps(FAST_CONFIG))
        rc = main(["qse", "--config", str(config_path), "--out", str(tmp_path / "o")])
        assert rc == 2  # missing vqe artifact

    def test_full_chain(self, workdir):
        out = run("ed-reference", workdir)
        out = run("vqe", workdir)
        out = run("qse", workdir)
        out = run("greens", workdir)
        out = run("dsf", workdir)
        expected = [
            "ed_reference.json", "lattice_fixture.json",
            "vqe_layer_sweep.csv", "vqe_result.json",
            "qse_shape_sweep.csv", "qse_trotter_sweep.csv",
            "qse_ground_state.json", "qse_matrices.json",
            "gf_curve_z.csv", "sf_curve_z.csv",
            "lanczos_greater_z.json", "lanczos_lesser_z.json",
            "dsf_qse.csv", "dsf_ed.csv",
        ]
        for name in expected:
            assert (out / name).exists(), name

    def test_layer_sweep_contents(self, workdir):
        path, _ = workdir
        lines = [
            line for line in (path / "out" / "vqe_layer_sweep.csv").read_text().splitlines()
            if not line.startswith("#")
        ]
        assert lines[0] == "d,infidelity,delta_e"
        rows = [line.split(",") for line in lines[1:]]
        assert [int(r[0]) for r in rows] == [0, 1]
        assert float(rows[1][2]) < 1e-8  # d=1 converges

    def test_gf_curve_has_ed_reference_column(self, workdir):
        path, _ = workdir
        lines = [
            line for line in (path / "out" / "gf_curve_z.csv").read_text().splitlines()
            if not line.startswith("#")
        ]
        assert lines[0] == "omega,re_qse,im_qse,re_ed,im_ed"
        data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
        scale = np.max(np.abs(data[:, 3]))
        assert np.max(np.abs(data[:, 1] - data[:, 3])) / scale < 0.05

    def test_dsf_normalized_to_unit_interval(self, workdir):
        path, _ = workdir
        for name in ("dsf_qse.csv", "dsf_ed.csv"):
            lines = [
                line for line in (path / "out" / name).read_text().splitlines()
                if not line.startswith("#")
            ]
            values = np.array([float(line.split(",")[2]) for line in lines[1:]])
            assert values.min() >= 0.0 and values.max() <= 1.0

    def test_metadata_header(self, workdir):
        path, _ = workdir
        text = (path / "out" / "qse_shape_sweep.csv").read_text()
        assert text.startswith("# kitaevqse_version = ")
        assert "# seed = 1" in text
        assert "# config = " in text

    def test_echo_mismatch_rejected(self, workdir, tmp_path):
        path, _ = workdir
        changed = dict(FAST_CONFIG)
        changed["field_z"] = 0.3
        config_path = tmp_path / "changed.json"
        config_path.write_text(json.dumps(changed))
        rc = main(["greens", "--config", str(config_path), "--out", str(path / "out")])
        assert rc == 2


class TestDeterminism:
    def _strip_timestamp(self, text: str) -> str:
        return "\n".join(
            line for line in text.splitlines() if not line.startswith("# timestamp")
        )

    def test_vqe_rerun_identical(self, tmp_path):
        config_path = tmp_path / "c.json"
        config_path.write_text(json.dumps(FAST_CONFIG))
        for out in ("a", "b"):
            rc = main(["vqe", "--config", str(config_path), "--out", str(tmp_path / out)])
            assert rc == 0
        a = self._strip_timestamp((tmp_path / "a" / "vqe_layer_sweep.csv").read_text())
        b = self._strip_timestamp((tmp_path / "b" / "vqe_layer_sweep.csv").read_text())
        assert a == b

    def test_seed_flag_overrides(self, tmp_path):
        config_path = tmp_path / "c.json"
        config_path.write_text(json.dumps(FAST_CONFIG))
        rc = main(["ed-reference", "--config", str(config_path), "--out", str(tmp_path / "o"), "--seed", "7"])
        assert rc == 0
        assert "# seed = 7" not in (tmp_path / "o" / "lattice_fixture.json").read_text()
        meta = json.loads((tmp_path / "o" / "ed_reference.json").read_text())["_meta"]
        assert meta["seed"] == 7
