import json

import pytest

from castor.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSimulate:
    def test_four_state_champion(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "1RB1LB_1LA0LC_0RZ0LD_1RD0LB")
        assert code == 0
        assert out.startswith("halted-blank 34 ")

    def test_one_state(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "0RZ0RZ")
        assert code == 0
        assert out.startswith("halted-blank 1 ")

    def test_cutoff_is_inconclusive(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "0RB0RZ_1LA0RZ",
                               "--max-steps", "3")
        assert code == 1
        assert out.startswith("cutoff 3 ")

    def test_parse_error(self, capsys):
        code, _, err = run_cli(capsys, "simulate", "XXX")
        assert code == 2
        assert "error" in err

    def test_trace(self, capsys):
        code, out, _ = run_cli(capsys, "simulate", "0RB0RZ_1LA0RZ", "--trace")
        lines = out.strip().splitlines()
        assert lines[0] == "1 A 0 0->0"
        assert lines[1] == "2 B 1 0->1"
        assert lines[-1].startswith("halted-blank 4 ")


class TestDecide:
    def test_blank_halter(self, capsys):
        code, out, _ = run_cli(capsys, "decide", "1RB1LB_1LA0LC_0RZ0LD_1RD0LB")
        assert code == 0
        assert out.strip() == "halts-blank 34"

    def test_no_blank_halt(self, capsys):
        code, out, _ = run_cli(capsys, "decide", "0RB1RZ_1LA1LZ")
        assert code == 0
        assert out.strip() == "no-blank-halt backward-contradiction"

    def test_halt_unreachable(self, capsys):
        code, out, _ = run_cli(capsys, "decide", "1RB0LB_1LA0RA")
        assert code == 0
        assert out.strip() == "non-halting halt-unreachable"

    def test_unknown_exit_one(self, capsys):
        code, out, _ = run_cli(capsys, "decide",
                               "1RB1RA_1LB1LC_1RD0RE_0LE0RA_0RZ0RF_0RB0RC",
                               "--max-steps", "1000")
        assert code == 1
        assert out.strip() == "unknown 1000"

    def test_bounds_override(self, capsys, tmp_path, monkeypatch):
        # A rightward drifter, kept partial so the static checks abstain:
        # Unknown under loose bounds, bound-killed under the defaults.
        machine = "1RB1RA_1RA---"
        loose = tmp_path / "loose.txt"
        loose.write_text("9 9 1000000\n")
        code, out, _ = run_cli(capsys, "decide", machine, "--no-escape",
                               "--max-steps", "500", "--bounds", str(loose))
        assert (code, out.strip()) == (1, "unknown 500")
        monkeypatch.setenv("CASTOR_KNOWN_BOUNDS", str(loose))
        code, out, _ = run_cli(capsys, "decide", machine, "--no-escape",
                               "--max-steps", "500")
        assert (code, out.strip()) == (1, "unknown 500")
        monkeypatch.delenv("CASTOR_KNOWN_BOUNDS")
        code, out, _ = run_cli(capsys, "decide", machine, "--no-escape",
                               "--max-steps", "500")
        assert (code, out.strip()) == \
            (0, "non-halting known-bound-exceeded")

    def test_missing_bounds_file_exits_two(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "decide", "0RZ0RZ", "--bounds",
                               str(tmp_path / "absent.txt"))
        assert code == 2
        assert "error" in err


class TestSearch:
    def test_two_state_class(self, capsys):
        code, out, _ = run_cli(capsys, "search", "--states", "2",
                               "--symbols", "2", "--strict",
                               "--max-steps", "1000")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "class 2x2 mode=default strict=yes max-steps=1000"
        assert lines[1].startswith("champion ")
        assert " 4 proven=yes" in lines[1]

    def test_output_byte_stable(self, capsys):
        runs = []
        for workers in ("1", "2"):
            code, out, _ = run_cli(capsys, "search", "--states", "2",
                                   "--symbols", "3", "--strict",
                                   "--max-steps", "500",
                                   "--workers", workers)
            runs.append((code, out))
        assert runs[0] == runs[1]

    def test_report_and_records_files(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        rec_path = tmp_path / "records.tsv"
        code, _, _ = run_cli(capsys, "search", "--states", "2", "--strict",
                             "--max-steps", "1000",
                             "--out", str(out_path),
                             "--records", str(rec_path))
        assert code == 0
        report = json.loads(out_path.read_text())
        assert report["champion"]["steps"] == 4
        lines = rec_path.read_text().splitlines()
        assert len(lines) == report["emitted"]
        assert all(len(line.split("\t")) == 3 for line in lines)

    def test_records_format(self, capsys):
        code, out, _ = run_cli(capsys, "search", "--states", "1", "--strict",
                               "--max-steps", "100", "--format", "records")
        assert code == 0
        payload = json.loads(out)
        assert payload["champion"]["steps"] == 1

    def test_inconclusive_exit(self, capsys):
        code, out, _ = run_cli(capsys, "search", "--states", "4",
                               "--strict", "--max-steps", "90")
        assert code == 1
        assert "unknown" in out

    def test_desk_run_budget(self, capsys):
        code, out, _ = run_cli(capsys, "search", "--states", "6",
                               "--max-steps", "2000",
                               "--max-nodes", "5000")
        assert code == 1
        assert "complete no" in out


class TestVerify:
    def test_builds_and_checks(self, capsys):
        code, out, _ = run_cli(capsys, "verify")
        assert code == 0
        assert out.strip() == ("certificate ok: 13 macro steps, "
                               "total 438120, cross-check passed")

    def test_export_load_round_trip(self, capsys, tmp_path):
        path = tmp_path / "cert.txt"
        code, _, _ = run_cli(capsys, "verify", "--export", str(path))
        assert code == 0
        code, out, _ = run_cli(capsys, "verify", "--load", str(path))
        assert code == 0
        assert "certificate ok" in out

    def test_corrupted_file_exits_two(self, capsys, tmp_path):
        path = tmp_path / "cert.txt"
        run_cli(capsys, "verify", "--export", str(path))
        text = path.read_text().replace("69626", "69627")
        path.write_text(text)
        code, _, err = run_cli(capsys, "verify", "--load", str(path))
        assert code == 2
        assert "error" in err

    def test_missing_file_exits_two(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "verify", "--load",
                               str(tmp_path / "nope.txt"))
        assert code == 2


class TestCountAndTable:
    def test_count(self, capsys):
        for n, expect in [(1, "64"), (3, "16777216"), (4, "25600000000")]:
            code, out, _ = run_cli(capsys, "count", "--states", str(n),
                                   "--symbols", "2")
            assert code == 0
            assert out.strip() == expect

    def test_table(self, capsys, tmp_path):
        paths = []
        for n in (1, 2):
            path = tmp_path / f"r{n}.json"
            run_cli(capsys, "search", "--states", str(n), "--strict",
                    "--max-steps", "1000", "--out", str(path))
            paths.append(str(path))
        code, out, _ = run_cli(capsys, "table", *paths)
        assert code == 0
        assert "1*" in out and "4*" in out

    def test_table_missing_cell(self, capsys, tmp_path):
        paths = []
        for n, m in [(1, 2), (2, 2), (2, 3)]:
            path = tmp_path / f"r{n}{m}.json"
            run_cli(capsys, "search", "--states", str(n), "--symbols", str(m),
                    "--strict", "--max-steps", "1000", "--out", str(path))
            paths.append(str(path))
        code, out, _ = run_cli(capsys, "table", *paths)
        assert code == 0
        assert "—" in out  # the (1,3) cell is absent

    def test_table_records(self, capsys, tmp_path):
        path = tmp_path / "r.json"
        run_cli(capsys, "search", "--states", "2", "--strict",
                "--max-steps", "1000", "--out", str(path))
        code, out, _ = run_cli(capsys, "table", str(path),
                               "--format", "records")
        assert code == 0
        assert out == "2 2 4 proven\n"

    def test_table_bad_file(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        code, _, err = run_cli(capsys, "table", str(path))
        assert code == 2
