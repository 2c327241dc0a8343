import json
import math

import pytest

from dppstats import cli


def _run(tmp_path, name, *args):
    out = tmp_path / name
    code = cli.main(list(args) + ["--out", str(out)])
    return code, out


class TestRoundTrip:
    @pytest.mark.parametrize(
        "args",
        [
            ["tail", "--big-r", "100", "--grid", "0.25,0.5,1", "--samples", "2000", "--seed", "3"],
            ["rate", "--grid=-1,0,0.5,1"],
            ["rate", "--ensemble", "hyperbolic", "--rho", "2", "--grid", "0.1,0.5"],
            ["kernels", "--grid=-1,0,1.5"],
            ["kernels", "--ensemble", "hyperbolic", "--rho", "1", "--grid", "0.5,1,2"],
            ["entropy", "--radius", "3,5", "--beta", "2"],
            ["ldp", "--big-r", "400", "--grid", "1"],
            ["variance", "--radius", "1,2,5"],
            ["sample", "--big-r", "20,30", "--samples", "50", "--seed", "4"],
            ["rate", "--ensemble", "ginibre-finite", "--n-particles", "100", "--edge-aplus", "0", "--grid", "0.2"],
        ],
        ids=lambda a: "-".join(a[:3]),
    )
    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_rerun_from_embedded_config_is_bit_exact(self, tmp_path, args, fmt):
        code, first = _run(tmp_path, "a.out", *args, "--format", fmt)
        assert code == 0
        code, second = _run(tmp_path, "b.out", "--from-config", str(first))
        assert code == 0
        assert first.read_bytes() == second.read_bytes()

    def test_csv_header(self, tmp_path):
        code, out = _run(tmp_path, "v.csv", "variance", "--radius", "2")
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# config: {")
        cfg = json.loads(lines[0][len("# config: "):])
        assert cfg["command"] == "variance" and cfg["radius"] == [2.0]
        assert lines[1] == "r,exact_sum,bessel_closed,r_over_sqrt_pi"

    def test_json_and_csv_agree(self, tmp_path):
        args = ["rate", "--grid", "0.3,0.7"]
        _, c = _run(tmp_path, "r.csv", *args)
        _, j = _run(tmp_path, "r.json", *args, "--format", "json")
        _, cols_c, rows_c = cli.read_table(str(c))
        _, cols_j, rows_j = cli.read_table(str(j))
        assert cols_c == cols_j
        assert rows_c == rows_j

    def test_shortest_round_trip_floats(self, tmp_path):
        _, out = _run(tmp_path, "v.csv", "variance", "--radius", "5")
        _, _, rows = cli.read_table(str(out))
        text = out.read_text().splitlines()[2].split(",")
        for field, value in zip(text, rows[0]):
            assert repr(value) == field

    def test_values(self, tmp_path):
        _, out = _run(tmp_path, "k.csv", "kernels", "--grid", "0,1")
        _, cols, rows = cli.read_table(str(out))
        for s, t, k, closed in rows:
            assert k == pytest.approx(closed, abs=1e-9)
        _, out = _run(tmp_path, "t.csv", "tail", "--big-r", "400", "--grid", "1", "--samples", "0")
        _, cols, rows = cli.read_table(str(out))
        assert math.isnan(rows[0][cols.index("mc_point")])
        assert 0.9 < rows[0][1] / rows[0][2] < 1.1

    def test_worker_count_does_not_change_output(self, tmp_path):
        args = ["kernels", "--grid=-1,0,0.5,2"]
        _, a = _run(tmp_path, "a.csv", *args)
        _, b = _run(tmp_path, "b.csv", *args, "--workers", "4")
        assert a.read_bytes() == b.read_bytes()

    def test_sample_paths_reproducible(self, tmp_path):
        args = ["sample", "--big-r", "20,25", "--samples", "30000", "--seed", "9"]
        _, a = _run(tmp_path, "a.csv", *args)
        _, b = _run(tmp_path, "b.csv", *args, "--workers", "3")
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    @pytest.mark.parametrize(
        "args",
        [
            [],
            ["tail", "--grid", "1"],
            ["tail", "--big-r", "100", "--grid", ""],
            ["rate", "--grid", "1", "--ensemble", "hyperbolic"],
            ["rate", "--grid", "1", "--rho", "2"],
            ["rate", "--grid", "1", "--alpha", "-1"],
            ["entropy", "--radius", "-1"],
            ["entropy", "--radius", "1", "--ensemble", "hyperbolic", "--rho", "1"],
            ["ldp", "--big-r", "400", "--grid", "1", "--gamma", "1"],
            ["variance", "--radius", "2", "--alpha", "1"],
            ["rate", "--grid", "1", "--eps-window", "0.1"],
            ["rate", "--grid", "abc"],
            ["nonsense"],
            ["rate", "--grid", "1", "--edge-aplus", "0"],
            ["sample", "--big-r", "10", "--samples", "0"],
        ],
    )
    def test_config_errors(self, tmp_path, args):
        out = tmp_path / "x.csv"
        assert cli.main(args + ["--out", str(out)]) == 2
        assert not out.exists()

    def test_edge_saturation_is_numeric_failure(self, tmp_path):
        # with the disk boundary at the edge the count cannot exceed its mean by much
        args = ["rate", "--ensemble", "ginibre-finite", "--n-particles", "100", "--edge-aplus", "0", "--grid", "0.5"]
        assert cli.main(args) == 3

    def test_numeric_failure(self, tmp_path):
        out = tmp_path / "x.csv"
        assert cli.main(["rate", "--grid", "1000", "--out", str(out)]) == 3
        assert not out.exists()

    def test_missing_config_file(self, tmp_path):
        assert cli.main(["--from-config", str(tmp_path / "missing.csv")]) == 2

    def test_config_file_without_header(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert cli.main(["--from-config", str(bad)]) == 2

    def test_stdout(self, capsys):
        assert cli.main(["rate", "--grid", "0"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[1] == "y,I,Iprime,Idoubleprime"


class TestConfig:
    def test_canonical_json_sorted_and_compact(self):
        cfg = cli.RunConfig(command="rate", grid=(1.0,))
        text = cfg.canonical_json()
        keys = list(json.loads(text))
        assert keys == sorted(keys) and " " not in text

    def test_unknown_key(self):
        with pytest.raises(cli.ConfigError):
            cli.RunConfig.from_dict({"command": "rate", "grid": [1.0], "colour": "red"})

    def test_from_dict_round_trip(self):
        cfg = cli.RunConfig(command="tail", big_r=(100.0,), grid=(0.5,))
        assert cli.RunConfig.from_dict(json.loads(cfg.canonical_json())) == cfg
