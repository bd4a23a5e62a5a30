import numpy as np
import pytest

from levelsets import load_records, make_model, sample
from levelsets.cli import main
from levelsets.harness import parse_config, write_config

from test_harness import raw_config


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "config.toml"
    write_config(parse_config(raw_config(sample={"ns": [500], "replications": 2})), path)
    return path


@pytest.fixture
def sample_csv(tmp_path):
    model = make_model("indep_exponential", 2, (1.0, 1.0))
    pts = sample(model, 2000, seed=12).points
    path = tmp_path / "sample.csv"
    np.savetxt(path, pts, delimiter=",", fmt="%.17g")
    return path


class TestEstimate:
    def test_writes_boundary_and_mask(self, tmp_path, sample_csv, capsys):
        out = tmp_path / "boundary.csv"
        mask_out = tmp_path / "mask.rle"
        code = main(
            [
                "estimate",
                "--input", str(sample_csv),
                "--level", "0.25",
                "--T", "3.0",
                "--cells", "64",
                "--output", str(out),
                "--mask-output", str(mask_out),
            ]
        )
        assert code == 0
        pts = np.loadtxt(out, delimiter=",", ndmin=2)
        assert pts.shape[1] == 2
        assert pts.shape[0] > 0
        assert mask_out.read_text().startswith("levelset-mask 1")
        assert "boundary_points" in capsys.readouterr().out

    def test_missing_input_is_io_error(self, tmp_path):
        code = main(
            [
                "estimate",
                "--input", str(tmp_path / "nope.csv"),
                "--level", "0.25",
                "--T", "3.0",
                "--cells", "64",
                "--output", str(tmp_path / "out.csv"),
            ]
        )
        assert code == 4

    def test_invalid_sample_is_config_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n-0.5,1.0\n")
        code = main(
            [
                "estimate",
                "--input", str(bad),
                "--level", "0.25",
                "--T", "3.0",
                "--cells", "64",
                "--output", str(tmp_path / "out.csv"),
            ]
        )
        assert code == 2

    def test_bad_level_is_config_error(self, tmp_path, sample_csv):
        code = main(
            [
                "estimate",
                "--input", str(sample_csv),
                "--level", "1.5",
                "--T", "3.0",
                "--cells", "64",
                "--output", str(tmp_path / "out.csv"),
            ]
        )
        assert code == 2


class TestBounds:
    def test_prints_constants(self, config_path, capsys):
        assert main(["bounds", "--config", str(config_path)]) == 0
        out = capsys.readouterr().out
        assert "m_grad = " in out
        assert "A = " in out
        assert "gate_ok = True" in out

    def test_unknown_key_exit_2(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text('spec_version = 1\nkind = "hausdorff"\nbogus_key = 3\n')
        assert main(["bounds", "--config", str(path)]) == 2
        assert "bogus_key" in capsys.readouterr().err

    def test_gate_failure_exit_3(self, tmp_path, capsys):
        config = parse_config(raw_config())
        path = tmp_path / "gate.toml"
        write_config(config, path)
        text = path.read_text().replace("T0 = 3.0", "T0 = 0.2")
        path.write_text(text)
        assert main(["bounds", "--config", str(path)]) == 3
        assert "hypothesis gate" in capsys.readouterr().err

    def test_missing_config_exit_4(self, tmp_path):
        assert main(["bounds", "--config", str(tmp_path / "none.toml")]) == 4


class TestExperiments:
    def test_hausdorff_experiment_writes_outputs(self, tmp_path, config_path, capsys):
        outdir = tmp_path / "run"
        code = main(
            ["hausdorff-exp", "--config", str(config_path), "--output", str(outdir), "--jobs", "2"]
        )
        assert code == 0
        records = load_records(outdir / "records.csv")
        assert len(records) == 2
        assert (outdir / "constants.txt").exists()

    def test_slope_on_records(self, tmp_path, capsys):
        config = parse_config(
            raw_config(sample={"ns": [200, 2000, 20000], "replications": 5})
        )
        cfg_path = tmp_path / "c.toml"
        write_config(config, cfg_path)
        outdir = tmp_path / "run"
        assert main(["volume-exp", "--config", str(cfg_path), "--output", str(outdir)]) == 0
        capsys.readouterr()
        assert main(["slope", "--records", str(outdir / "records.csv")]) == 0
        slope = float(capsys.readouterr().out.strip())
        assert -1.0 < slope < 0.0

    def test_slope_unknown_column_exit_2(self, tmp_path, config_path):
        outdir = tmp_path / "run"
        main(["hausdorff-exp", "--config", str(config_path), "--output", str(outdir)])
        assert (
            main(["slope", "--records", str(outdir / "records.csv"), "--y", "nope"]) == 2
        )
