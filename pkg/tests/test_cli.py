import json

import pytest

from masw import io
from masw.cli import main
from masw.model import DispersionCurve


@pytest.fixture
def files(tmp_path, ref_model, variable40):
    io.write_model(tmp_path / "model.json", ref_model)
    io.write_curve(tmp_path / "variable.csv", variable40)
    return tmp_path


def run_curve(files, name, *extra):
    out = files / name
    code = main(["curve", str(files / "model.json"), "--curve", str(files / "variable.csv"),
                 "--deterministic", "-o", str(out), *extra])
    assert code == 0
    return out.read_bytes()


def test_engines_write_identical_files(files):
    serial = run_curve(files, "serial.csv")
    assert run_curve(files, "par.csv", "--engine", "parallel", "--workers", "4", "--strategy", "modular") == serial
    assert run_curve(files, "bat.csv", "--engine", "batched", "--block-size", "16") == serial
    assert run_curve(files, "again.csv") == serial


def test_timing_footer_only_without_deterministic(files):
    out = files / "timed.csv"
    assert main(["curve", str(files / "model.json"), "--wavelengths", "10,20", "-o", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[-1].startswith("# elapsed_seconds=")
    assert len(io.read_curve(out)) == 2


def test_curve_reports_misfit(files, capsys):
    run_curve(files, "x.csv")
    assert "misfit 0 (0.0000 %)" in capsys.readouterr().err


def test_curve_to_stdout(files, capsys):
    assert main(["curve", str(files / "model.json"), "--wavelengths", "10", "--deterministic"]) == 0
    assert capsys.readouterr().out.startswith(io.CURVE_HEADER)


def test_missing_model_file(files, capsys):
    assert main(["curve", str(files / "nope.json"), "--wavelengths", "10"]) == 2
    assert "nope.json" in capsys.readouterr().err


def test_no_sign_change_exits_1(files):
    assert main(["curve", str(files / "model.json"), "--wavelengths", "10",
                 "--vmin", "50", "--vmax", "60"]) == 1


def test_bad_sweep_exits_2(files):
    assert main(["curve", str(files / "model.json"), "--wavelengths", "10", "--vstep", "0"]) == 2


def test_curve_needs_one_wavelength_source(files):
    with pytest.raises(SystemExit) as exc:
        main(["curve", str(files / "model.json")])
    assert exc.value.code == 2


def write_spec(files, ref_model, **extra):
    spec = {"experimental_curve": "variable.csv", "sweep": {"v_min": 50, "v_max": 549.5, "v_step": 0.5}}
    spec.update(extra)
    (files / "spec.json").write_text(json.dumps(spec))
    return str(files / "spec.json")


def report_rows(text):
    return [line.split(",") for line in text.strip().splitlines()[1:]]


def test_invert_finds_generating_model(files, ref_model, capsys):
    other = io.model_to_json(ref_model)
    other["vs"] = [v * 1.1 for v in other["vs"]]
    other["vp"] = [v * 1.1 for v in other["vp"]]
    spec = write_spec(files, ref_model, candidates=[other, io.model_to_json(ref_model)])
    assert main(["invert", spec, "-o", str(files / "report.csv"), "--deterministic"]) == 0
    captured = capsys.readouterr()
    rows = report_rows(captured.out)
    assert rows[1][1] == "0"
    assert "best candidate: 1" in captured.err
    assert (files / "report.csv").read_text() == captured.out


def test_invert_tie_goes_to_lower_id(files, ref_model, capsys):
    m = io.model_to_json(ref_model)
    spec = write_spec(files, ref_model, candidates=[m, m])
    assert main(["invert", spec]) == 0
    assert "best candidate: 0" in capsys.readouterr().err


def test_invert_grid_has_one_row_per_candidate(files, ref_model, capsys):
    spec = write_spec(files, ref_model, grid={"base": io.model_to_json(ref_model),
                                              "parameters": {"vs[0]": {"values": [70, 75, 80]}}},
                      engine={"kind": "parallel", "workers": 2})
    assert main(["invert", spec]) == 0
    rows = report_rows(capsys.readouterr().out)
    assert [r[0] for r in rows] == ["0", "1", "2"]
    assert rows[1][1] == "0"


def test_invert_unavailable_and_all_fail(files, ref_model, capsys):
    spec = write_spec(files, ref_model, candidates=[io.model_to_json(ref_model)],
                      sweep={"v_min": 50, "v_max": 60, "v_step": 0.5})
    assert main(["invert", spec]) == 1
    captured = capsys.readouterr()
    assert report_rows(captured.out)[0][1] == "unavailable"


def test_gen_variable(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["gen", "--dataset", "variable", "-o", str(out)]) == 0
    assert len(io.read_curve(out)) == 40


def test_gen_uniform(tmp_path):
    out = tmp_path / "u.csv"
    assert main(["gen", "--dataset", "uniform", "--length", "1000", "--tier", "238", "-o", str(out)]) == 0
    c = io.read_curve(out)
    assert len(c) == 1000 and len(set(c.wavelengths)) == 1


@pytest.mark.parametrize("argv", [
    ["gen", "--dataset", "uniform", "--length", "0"],
    ["gen", "--dataset", "uniform", "--tier", "100"],
    ["gen", "--dataset", "other"],
    ["bench", "nonsense"],
    ["bench", "strong", "--workers", "0,2"],
    ["bench", "strong", "--reps", "0"],
])
def test_flag_errors(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_bench_strong_rows(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert main(["bench", "strong", "--workers", "1,2,4,8", "--dataset", "uniform", "--length", "16",
                 "--reps", "3", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "experiment,engine,dataset,workers,strategy,block_size,length,reps,median_seconds,dets,speedup"
    assert len(lines) == 5


def test_bench_weak_lengths(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["bench", "weak", "--base-length", "10", "--workers", "1,2,4", "--reps", "3", "-o", str(out)]) == 0
    rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
    assert [(int(r[3]), int(r[6])) for r in rows] == [(1, 10), (2, 20), (4, 40)]


def test_bench_elimination_and_engines(tmp_path):
    assert main(["bench", "elimination", "--reps", "3", "-o", str(tmp_path / "e.csv")]) == 0
    assert len((tmp_path / "e.csv").read_text().splitlines()) == 5
    assert main(["bench", "engines", "--length", "4", "--block-sizes", "16,256", "--reps", "3",
                 "-o", str(tmp_path / "g.csv")]) == 0
    assert len((tmp_path / "g.csv").read_text().splitlines()) == 4
