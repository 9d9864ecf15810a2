import os

import pytest

from mutkill import cli
from mutkill import interp as I
from mutkill import symex as X

import conftest as C

FAST_CFG = "STEP_BUDGET = 2000\nBUDGET_SECONDS = 10\n"


class TestParseConfig:
    def test_empty_text_gives_defaults(self):
        m = cli.parse_config("")
        assert m.config == X.Config()
        assert m.operators == cli.DEFAULT_OPERATORS
        assert m.step_budget == I.DEFAULT_STEP_BUDGET

    def test_full_file(self):
        text = """
        # tuning
        PL = SMD2MS
        CW = 2
        PP = 0.5      # keep half
        PSS = MDO
        MPD = 1
        NSD = true
        NTPM = 3
        MODE = vanilla
        BUDGET_SECONDS = 2.5
        MAX_STATES = 100
        MAX_DEPTH = 50
        RNG_SEED = 9
        USE_PRECONDITION = false
        OPERATORS = SDL, ROR
        STEP_BUDGET = 1234
        """
        m = cli.parse_config(text)
        cfg = m.config
        assert (cfg.pl, cfg.cw, cfg.pp, cfg.pss, cfg.mpd, cfg.nsd, cfg.ntpm) \
            == ("SMD2MS", 2, 0.5, "MDO", 1, True, 3)
        assert cfg.mode == "vanilla" and m.mode == "vanilla"
        assert (cfg.budget_seconds, cfg.max_states, cfg.max_depth,
                cfg.rng_seed, cfg.use_precondition) == (2.5, 100, 50, 9, False)
        assert m.operators == ("SDL", "ROR")
        assert m.step_budget == 1234

    def test_unknown_key_reports_line(self):
        with pytest.raises(cli.ConfigError, match="line 2"):
            cli.parse_config("PP = 0.5\nWAT = 1\n")

    def test_out_of_range_pp(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_config("PP = 1.5\n")

    def test_bad_boolean(self):
        with pytest.raises(cli.ConfigError, match="line 1"):
            cli.parse_config("NSD = maybe\n")

    def test_missing_equals(self):
        with pytest.raises(cli.ConfigError, match="line 1"):
            cli.parse_config("just words\n")


class TestValuations:
    def test_parse_valuation(self):
        assert cli.parse_valuation("x=-3, y=4") == {"x": -3, "y": 4}

    def test_bad_pair(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_valuation("x3")

    def test_read_seeds_skips_comments(self):
        text = "# suite\nx=1\n\nx=2 # boundary\n"
        assert cli.read_seeds(text) == [{"x": 1}, {"x": 2}]

    def test_format_and_read_tests_roundtrip(self):
        tests = [X.GeneratedTest(inputs=(("x", -3),), mutant_id=7,
                                 site="terminal", k=4)]
        text = cli.format_tests(tests)
        assert text.splitlines()[0] == "# mutant=7 site=terminal k=4"
        assert cli.read_tests(text) == [{"x": -3}]


@pytest.fixture
def workdir(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text(FAST_CFG)
    return tmp_path, str(cfg)


def run_main(args):
    return cli.main(args)


class TestPipeline:
    def test_all_on_golden_program(self, workdir, capsys):
        tmp, cfg = workdir
        out = tmp / "out"
        rc = run_main(["all", "--program", C.corpus_path("fig1"),
                       "--config", cfg, "--out", str(out)])
        assert rc == 0
        for name in ("mutants.tsv", "tce.tsv", "tests.txt", "stats.txt",
                     "matrix.csv", "minimized.txt", "report.txt"):
            assert (out / name).exists(), name
        report = (out / "report.txt").read_text()
        assert "mutants_generated=76" in report
        assert "mutants_killed=" in report
        printed = capsys.readouterr().out
        assert "mutants_generated=76" in printed

    def test_report_consistent_with_matrix(self, workdir):
        tmp, cfg = workdir
        out = tmp / "out"
        run_main(["all", "--program", C.corpus_path("abs"),
                  "--config", cfg, "--out", str(out)])
        report = dict(
            line.split("=", 1) for line in
            (out / "report.txt").read_text().splitlines()
            if "=" in line and not line.startswith("tests_per_mutant"))
        killed = sum(1 for k, v in report.items()
                     if k.startswith("mutant_") and v == "killed")
        survived = sum(1 for k, v in report.items()
                       if k.startswith("mutant_") and v == "survived")
        assert killed == int(report["mutants_killed"])
        assert survived == int(report["mutants_surviving"])
        assert killed + survived == int(report["mutants_explored"])

    def test_reproducible_outputs(self, workdir):
        tmp, cfg = workdir
        names = ("mutants.tsv", "tce.tsv", "tests.txt", "matrix.csv",
                 "minimized.txt")
        outs = []
        for d in ("a", "b"):
            out = tmp / d
            rc = run_main(["all", "--program", C.corpus_path("fig1"),
                           "--config", cfg, "--out", str(out),
                           "--rng-seed", "5"])
            assert rc == 0
            outs.append({n: (out / n).read_bytes() for n in names})
        assert outs[0] == outs[1]

    def test_vanilla_mode_single_path(self, workdir):
        tmp, cfg = workdir
        out = tmp / "out"
        prog = tmp / "straight.mimp"
        prog.write_text("input x: int in [-8,7];\n"
                        "fn main() { output x + 1; }\n")
        rc = run_main(["gen", "--program", str(prog), "--config", cfg,
                       "--out", str(out), "--mode", "vanilla"])
        assert rc == 0
        tests = cli.read_tests((out / "tests.txt").read_text())
        assert tests == [{"x": -8}]
        header = (out / "tests.txt").read_text().splitlines()[0]
        assert header.startswith("# mutant=0 site=terminal")

    def test_stage_subcommands_chain(self, workdir):
        tmp, cfg = workdir
        out = tmp / "out"
        prog = C.corpus_path("abs")
        assert run_main(["mutate", "--program", prog, "--out", str(out),
                         "--config", cfg]) == 0
        assert run_main(["tce", "--program", prog, "--out", str(out),
                         "--config", cfg]) == 0
        assert run_main(["gen", "--program", prog, "--out", str(out),
                         "--config", cfg]) == 0
        assert run_main(["matrix", "--program", prog, "--out", str(out),
                         "--config", cfg,
                         "--tests", str(out / "tests.txt")]) == 0
        assert run_main(["minimize", "--program", prog, "--out", str(out),
                         "--config", cfg,
                         "--tests", str(out / "tests.txt")]) == 0
        matrix = (out / "matrix.csv").read_text().splitlines()
        assert matrix[0].startswith("test,")
        assert len(matrix) == 1 + len(cli.read_tests(
            (out / "tests.txt").read_text()))

    def test_operator_subset_flag(self, workdir):
        tmp, cfg = workdir
        out = tmp / "out"
        rc = run_main(["mutate", "--program", C.corpus_path("abs"),
                       "--out", str(out), "--operators", "SDL"])
        assert rc == 0
        rows = (out / "mutants.tsv").read_text().strip().splitlines()[1:]
        assert rows
        assert all(row.split("\t")[1].startswith("SDL") for row in rows)

    def test_external_solver_backend(self, workdir):
        import sys
        tmp, cfg = workdir
        out = tmp / "out"
        rc = run_main(["gen", "--program", C.corpus_path("abs"),
                       "--config", cfg, "--out", str(out),
                       "--solver", "external",
                       "--external-solver-cmd", f"{sys.executable} {C.STUB}"])
        assert rc == 0
        assert cli.read_tests((out / "tests.txt").read_text())


class TestErrors:
    def test_missing_program_file(self, tmp_path, capsys):
        rc = run_main(["all", "--program", str(tmp_path / "nope.mimp"),
                       "--out", str(tmp_path / "out")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err

    def test_syntax_error_reports_parse_stage(self, tmp_path, capsys):
        bad = tmp_path / "bad.mimp"
        bad.write_text("fn main( { }")
        rc = run_main(["all", "--program", str(bad),
                       "--out", str(tmp_path / "out")])
        assert rc == 1
        assert "[parse]" in capsys.readouterr().err

    def test_bad_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("NOPE = 1\n")
        rc = run_main(["all", "--program", C.corpus_path("abs"),
                       "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert rc == 1
        assert "unknown key" in capsys.readouterr().err

    def test_external_without_command(self, tmp_path, capsys):
        rc = run_main(["gen", "--program", C.corpus_path("abs"),
                       "--out", str(tmp_path / "out"), "--solver", "external"])
        assert rc == 1
        assert "external-solver-cmd" in capsys.readouterr().err
