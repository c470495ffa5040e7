import subprocess
import sys

import pytest

from uttp_reduction.cli import main, read_schedule
from uttp_reduction.metric import CostMatrix, Tour, read_instance
from uttp_reduction.ttp import TtpInstance

from conftest import TRIANGLE_BASE, TRIANGLE_WHEEL_D


@pytest.fixture
def triangle_file(tmp_path):
    path = tmp_path / "triangle.txt"
    path.write_text(CostMatrix.from_true(TRIANGLE_BASE).to_text())
    return path


@pytest.fixture
def n4_file(tmp_path):
    path = tmp_path / "n4.txt"
    assert main(["gen", "--n", "4", "--seed", "7", "--out", str(path)]) == 0
    return path


class TestGen:
    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for p in (a, b):
            assert main(["gen", "--n", "4", "--density", "0.5", "--seed", "7", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_round_trip(self, n4_file):
        assert read_instance(n4_file).matrix.to_text() == n4_file.read_text()

    def test_stdout(self, capsys):
        assert main(["gen", "--n", "3", "--seed", "1"]) == 0
        assert capsys.readouterr().out.startswith("3\n")

    @pytest.mark.parametrize("argv", [["--n", "2"], ["--n", "4", "--density", "1.5"]])
    def test_bad_flags(self, argv, capsys):
        assert main(["gen", *argv]) == 2
        assert "error" in capsys.readouterr().err


class TestReduce:
    def test_triangle_wheel(self, triangle_file, tmp_path):
        out = tmp_path / "red"
        argv = ["reduce", str(triangle_file), "--c", "3", "--out-dir", str(out), "--allow-small-c", "--skip-parity"]
        assert main(argv) == 0
        wheel = CostMatrix.from_text((out / "wheel.txt").read_text())
        assert wheel == CostMatrix.from_true(TRIANGLE_WHEEL_D)
        params = (out / "params.txt").read_text()
        assert "m = 7\n" in params
        assert "boost = 56\n" in params
        assert "w_u_true = 8.5\n" in params

    def test_odd_c_needs_skip(self, triangle_file, tmp_path, capsys):
        argv = ["reduce", str(triangle_file), "--c", "3", "--out-dir", str(tmp_path / "x"), "--allow-small-c"]
        assert main(argv) == 2
        assert "odd" in capsys.readouterr().err

    def test_small_c_needs_flag(self, triangle_file, tmp_path):
        assert main(["reduce", str(triangle_file), "--c", "2", "--out-dir", str(tmp_path / "x")]) == 2

    def test_outputs_reparse(self, n4_file, tmp_path):
        out = tmp_path / "red"
        assert main(["reduce", str(n4_file), "--c", "2", "--out-dir", str(out), "--allow-small-c"]) == 0
        inst = TtpInstance.from_text((out / "ttp_instance.txt").read_text())
        assert (inst.m, inst.team_count, inst.hub_weight) == (7, 560, 15)
        assert inst.to_text() == (out / "ttp_instance.txt").read_text()

    def test_missing_file(self, tmp_path):
        assert main(["reduce", str(tmp_path / "nope.txt"), "--out-dir", str(tmp_path)]) == 2


class TestScheduleCommands:
    @pytest.fixture
    def built(self, n4_file, tmp_path):
        sched, ttp = tmp_path / "s.txt", tmp_path / "ttp.txt"
        argv = ["build", str(n4_file), "--c", "2", "--allow-small-c", "--out", str(sched), "--instance-out", str(ttp)]
        assert main(argv) == 0
        return sched, ttp

    def test_build_validate_evaluate_extract(self, built, tmp_path):
        sched, ttp = built
        assert main(["validate", str(ttp), str(sched), "--out", str(tmp_path / "v.txt")]) == 0
        assert main(["evaluate", str(ttp), str(sched), "--out", str(tmp_path / "e.txt")]) == 0
        assert "stage1" in (tmp_path / "e.txt").read_text()
        tour_out = tmp_path / "tour.txt"
        argv = ["extract", str(ttp), str(sched), "--out", str(tmp_path / "x.txt"), "--tour-out", str(tour_out)]
        assert main(argv) == 0
        tour = Tour.from_text(tour_out.read_text())
        assert sorted(tour.order) == [0, 1, 2, 3]

    def test_layout_sidecar(self, built):
        sched, _ = built
        s = read_schedule(sched)
        assert s.groups.group_count == 70
        assert [name for name, _, _ in s.segments] == ["phase1", "stage1", "stage2"]
        assert s.day_count == 1118

    def test_validate_reports_failure(self, built, tmp_path):
        sched, ttp = built
        lines = sched.read_text().splitlines()
        broken = tmp_path / "broken.txt"
        # drop the first day and play the second one twice
        broken.write_text("\n".join([lines[0], *lines[2:], lines[2]]) + "\n")
        assert main(["validate", str(ttp), str(broken)]) == 1
        assert main(["evaluate", str(ttp), str(broken)]) == 1
        assert main(["extract", str(ttp), str(broken)]) == 1

    def test_unparsable_schedule(self, built, tmp_path):
        _, ttp = built
        bad = tmp_path / "bad.txt"
        bad.write_text("garbage\n")
        assert main(["validate", str(ttp), str(bad)]) == 2

    def test_build_with_given_tour(self, n4_file, tmp_path):
        sched = tmp_path / "s.txt"
        argv = ["build", str(n4_file), "--c", "2", "--allow-small-c", "--tour", "3 1 2 0", "--out", str(sched)]
        assert main(argv) == 0
        assert "tour_cost_half" in (tmp_path / "s.txt.layout").read_text()

    def test_build_rejects_bad_tour(self, n4_file, tmp_path):
        argv = ["build", str(n4_file), "--c", "2", "--allow-small-c", "--tour", "0 1", "--out", str(tmp_path / "s")]
        assert main(argv) == 2


class TestVerify:
    def test_wheel_optimum_sweep(self, tmp_path):
        out = tmp_path / "r.txt"
        assert main(["verify", "--mode", "corollary1", "--n", "4", "--c", "2", "--seeds", "50", "--out", str(out)]) == 0
        assert "passed = 50/50" in out.read_text()

    def test_all_mode(self, tmp_path):
        out = tmp_path / "r.txt"
        assert main(["verify", "--mode", "all", "--n", "4", "--c", "2", "--out", str(out)]) == 0
        text = out.read_text()
        assert "FAIL" not in text
        assert "flag.condition2.chain_strict = pass" in text

    def test_mode_filters_flags(self, tmp_path):
        out = tmp_path / "r.txt"
        assert main(["verify", "--mode", "lemma3", "--n", "4", "--c", "2", "--out", str(out)]) == 0
        flags = [ln for ln in out.read_text().splitlines() if ln.startswith("flag.")]
        assert flags and all(ln.startswith("flag.lemma3.") for ln in flags)

    def test_report_is_byte_stable(self, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        for p in (a, b):
            main(["verify", "--mode", "lemma2", "--n", "4", "--c", "2", "--seed", "3", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()

    def test_instance_file(self, triangle_file, capsys):
        assert main(["verify", "--mode", "corollary1", "--instance", str(triangle_file), "--c", "3"]) == 0
        assert "opt_wheel_half = 30" in capsys.readouterr().out

    def test_oracle_size_rejected(self, capsys, monkeypatch):
        monkeypatch.setenv("UTTP_ORACLE_LIMIT", "10")
        assert main(["verify", "--mode", "corollary1", "--n", "5", "--c", "3"]) == 2
        assert "limit is 10" in capsys.readouterr().err

    def test_needs_source(self):
        assert main(["verify", "--mode", "lemma2"]) == 2

    def test_odd_c_is_usage_error(self, capsys):
        assert main(["verify", "--mode", "lemma2", "--n", "4", "--c", "3"]) == 2
        assert "odd" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "uttp_reduction", "gen", "--n", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("3\n")


def test_argparse_usage_exit():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
