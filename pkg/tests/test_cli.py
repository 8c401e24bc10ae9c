import numpy as np

from risra.cli import main


def run_cli(args):
    return main(args)


class TestCodebookCommand:
    def test_single_training_row(self, tmp_path, capsys):
        out = tmp_path / "train.csv"
        assert run_cli(["codebook", "train", "--preset", "table1", "--n", "1",
                        "--out", str(out)]) == 0
        lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert lines[0].startswith("n,theta_rad,phase_0")
        assert lines[0].endswith("phase_9")
        fields = lines[1].split(",")
        assert fields[0] == "0" and float(fields[1]) == 0.0
        assert len(fields) == 2 + 10

    def test_access_summary_reports_bound(self, capsys):
        assert run_cli(["codebook", "access", "--preset", "table1"]) == 0
        assert "lower bound 12" in capsys.readouterr().out

    def test_training_stat_summary(self, capsys):
        assert run_cli(["codebook", "train", "--preset", "fig4",
                        "--epsilon", "1e-2", "--stat", "median"]) == 0
        assert "median, epsilon=0.01): 16" in capsys.readouterr().out

    def test_ack_precoding_mean_angle(self, tmp_path, capsys):
        out = tmp_path / "ack.csv"
        assert run_cli(["codebook", "ack-precoding", "--preset", "table1",
                        "--slots", "0,11", "--override", "kappa=12",
                        "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "1 configuration" in text
        rows = [l for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(rows) == 2


class TestRunCommand:
    def test_empty_frame_trace(self, capsys):
        assert run_cli(["run", "--preset", "table1",
                        "--override", "kappa=1e-9", "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "contenders: 0" in out
        assert "record " in out

    def test_two_ue_trace_mentions_noise_provenance(self, capsys):
        assert run_cli(["run", "--preset", "table1", "--override", "kappa=2",
                        "--override", "n_tr_mode=46", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "companion material" in out


class TestSweepCommand:
    def test_byte_identical_reruns_and_threads(self, tmp_path):
        a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
        base = ["sweep", "--preset", "fig7", "--trials", "30", "--seed", "7"]
        assert run_cli(base + ["--out", str(a)]) == 0
        assert run_cli(base + ["--out", str(b)]) == 0
        assert run_cli(base + ["--threads", "4", "--out", str(c)]) == 0
        assert a.read_bytes() == b.read_bytes() == c.read_bytes()

    def test_policy_restriction(self, tmp_path):
        out = tmp_path / "f6.csv"
        assert run_cli(["sweep", "--preset", "fig6", "--trials", "2", "--seed", "1",
                        "--policy", "gscap", "--out", str(out)]) == 0
        rows = [l for l in out.read_text().splitlines()
                if l and not l.startswith("#")][1:]
        assert rows and all(",gscap," in r for r in rows)

    def test_metadata_comments_embedded(self, tmp_path):
        out = tmp_path / "meta.csv"
        assert run_cli(["sweep", "--preset", "fig7", "--trials", "2", "--seed", "5",
                        "--out", str(out)]) == 0
        text = out.read_text()
        assert "# build risra-" in text
        assert "# master seed 5" in text
        assert '"kappa"' in text  # resolved config embedded


class TestExitCodes:
    def test_unknown_override_key(self, capsys):
        assert run_cli(["run", "--preset", "table1",
                        "--override", "bogus_key=1"]) == 2

    def test_unknown_preset(self, capsys):
        assert run_cli(["analyze", "--preset", "nope"]) == 2

    def test_bad_value(self, capsys):
        assert run_cli(["run", "--override", "kappa=abc"]) == 2

    def test_analyze_ok(self, capsys):
        assert run_cli(["analyze", "--preset", "table1"]) == 0
        out = capsys.readouterr().out
        assert "far-field minimum distance" in out
        assert "access lower bound" in out


class TestConfigFile:
    def test_config_file_then_override_precedence(self, tmp_path, capsys):
        conf = tmp_path / "scenario.conf"
        conf.write_text("kappa = 30      # comment\npolicy = carap\n")
        assert run_cli(["run", "--preset", "table1", "--config", str(conf),
                        "--override", "kappa=1e-9", "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "policy=carap" in out
        assert "contenders: 0" in out  # override beat the file

    def test_malformed_config_line(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("kappa 30\n")
        assert run_cli(["run", "--config", str(conf)]) == 2

    def test_example_config_parses(self):
        from risra.config import load_config
        cfg = load_config("scenario.example.conf")
        assert cfg.kappa == 25.0
        assert cfg.ack_mode == "tdma"


def test_sweep_policy_override_restricts_rows(tmp_path):
    out = tmp_path / "f6o.csv"
    assert run_cli(["sweep", "--preset", "fig6", "--trials", "2", "--seed", "1",
                    "--override", "policy=gscap", "--out", str(out)]) == 0
    rows = [l for l in out.read_text().splitlines()
            if l and not l.startswith("#")][1:]
    assert rows and all(",gscap," in r for r in rows)
