import json
import subprocess
import sys

import pytest

from latentw.cli import main


@pytest.fixture
def third_counts(tmp_path):
    path = tmp_path / "third.tsv"
    path.write_text("outcome\tcount\n101\t100\n110\t100\n111\t100\n")
    return str(path)


@pytest.fixture
def intro_counts(tmp_path):
    path = tmp_path / "intro.tsv"
    path.write_text("outcome\tcount\n00\t2\n01\t6\n10\t2\n11\t10\n")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestWeight:
    def test_prints_one_third(self, capsys, third_counts):
        code, out, _ = run(capsys, "weight", "--counts", third_counts)
        assert code == 0
        assert out == "0.333333\n"

    def test_exact_mode(self, capsys, third_counts):
        code, out, _ = run(capsys, "weight", "--counts", third_counts,
                           "--exact")
        assert code == 0
        assert out == "1/3\n"

    def test_json_output(self, capsys, third_counts):
        code, out, _ = run(capsys, "weight", "--counts", third_counts,
                           "--json")
        payload = json.loads(out)
        assert abs(payload["value"] - 1 / 3) < 1e-12
        assert payload["meta"]["version"]
        assert payload["meta"]["config_hash"]

    def test_missing_file_exits_2(self, capsys, tmp_path):
        code, _, err = run(capsys, "weight", "--counts",
                           str(tmp_path / "none.tsv"))
        assert code == 2
        assert "E_IO" in err

    def test_malformed_file_exits_1(self, capsys, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("outcome\tcount\n01\t4\n01\t2\n")
        code, _, err = run(capsys, "weight", "--counts", str(bad))
        assert code == 1
        assert "E_COUNTS_FILE" in err

    def test_bad_usage_exits_1(self, capsys):
        code, _, err = run(capsys, "weight")
        assert code == 1
        assert "E_USAGE" in err


class TestVersion:
    def test_version_flag(self, capsys):
        code, out, _ = run(capsys, "--version")
        assert code == 0
        assert out.startswith("latentw ")

    def test_module_invocation(self):
        proc = subprocess.run([sys.executable, "-m", "latentw", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("latentw ")


class TestDecompose:
    def test_json_fields(self, capsys, third_counts, tmp_path):
        out_path = tmp_path / "dec.json"
        code, _, _ = run(capsys, "decompose", "--counts", third_counts,
                         "--out", str(out_path))
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert set(payload) == {"meta", "lambda", "q", "r", "per_class_min",
                                "argmin_sets"}
        assert abs(payload["lambda"] - 1 / 3) < 1e-12
        assert payload["q"][7] == 1.0
        assert abs(payload["r"][5] - 0.5) < 1e-12
        assert payload["argmin_sets"][3] == ["111"]


class TestBounds:
    def test_marginal(self, capsys, third_counts):
        code, out, _ = run(capsys, "bound", "marginal", "--counts",
                           third_counts, "--indices", "1,2")
        assert code == 0
        assert out == "0.666667\n"

    def test_marginal_exact(self, capsys, third_counts):
        code, out, _ = run(capsys, "bound", "marginal", "--counts",
                           third_counts, "--indices", "1,2", "--exact")
        assert out == "2/3\n"

    def test_lump(self, capsys, third_counts, tmp_path):
        map_path = tmp_path / "map.tsv"
        map_path.write_text("from\tto\n0\tx\n1\tx\n")
        code, out, _ = run(capsys, "bound", "lump", "--counts", third_counts,
                           "--map", str(map_path))
        assert code == 0
        assert out == "1.000000\n"


class TestTv:
    def test_value(self, capsys, third_counts):
        code, out, _ = run(capsys, "tv", "--counts", third_counts)
        assert code == 0
        assert out == "0.222222\n"


class TestClassWeight:
    def test_product_class(self, capsys, intro_counts):
        code, out, _ = run(capsys, "classweight", "--counts", intro_counts,
                           "--class", "product")
        assert code == 0
        assert abs(float(out) - 0.96) <= 1e-4

    def test_singleton_requires_q0(self, capsys, intro_counts):
        code, _, err = run(capsys, "classweight", "--counts", intro_counts,
                           "--class", "singleton")
        assert code == 1
        assert "E_USAGE" in err

    def test_singleton_with_q0(self, capsys, intro_counts, tmp_path):
        q0 = tmp_path / "q0.tsv"
        # Bernoulli(3/5) x Bernoulli(4/5) as counts out of 25
        q0.write_text("outcome\tcount\n00\t2\n01\t8\n10\t3\n11\t12\n")
        code, out, _ = run(capsys, "classweight", "--counts", intro_counts,
                           "--class", "singleton", "--q0", str(q0), "--json")
        payload = json.loads(out)
        assert abs(payload["lambda"] - 5 / 6) < 1e-12
        assert payload["certificate_margin"] >= -1e-9


class TestEstimate:
    def test_json_mirrors_fields(self, capsys, third_counts):
        code, out, _ = run(capsys, "estimate", "--counts", third_counts,
                           "--boot", "200", "--seed", "5")
        payload = json.loads(out)
        for key in ("lambda_hat", "lambda_corrected", "se_boot", "bias_boot",
                    "n", "n_boot", "resample_size", "seed",
                    "regularity_flag"):
            assert key in payload
        assert payload["n"] == 300
        assert payload["resample_size"] == 300
        assert payload["seed"] == 5

    def test_subsample_flag(self, capsys, third_counts):
        code, out, _ = run(capsys, "estimate", "--counts", third_counts,
                           "--boot", "200", "--seed", "5", "--subsample")
        payload = json.loads(out)
        assert payload["resample_size"] == 35   # ceil(2*sqrt(300))

    def test_byte_identical_reruns(self, capsys, third_counts, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run(capsys, "estimate", "--counts", third_counts, "--boot", "300",
            "--seed", "9", "--out", str(a))
        run(capsys, "estimate", "--counts", third_counts, "--boot", "300",
            "--seed", "9", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()


class TestSimulate:
    def test_size_table(self, capsys):
        code, out, _ = run(capsys, "simulate", "size", "--k", "2", "--d", "3",
                           "--sizes", "50,100", "--reps", "200", "--seed",
                           "1")
        assert code == 0
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert lines[0] == "n\tmean_bias\tsd"
        assert len(lines) == 3
        n50 = lines[1].split("\t")
        assert n50[0] == "50"
        assert float(n50[1]) < 0  # negative bias


class TestMeth:
    @pytest.fixture
    def epireads(self, tmp_path):
        lines = (["chr1 0 CCC"] * 100
                 + ["chr1 10 CTC"] * 100 + ["chr1 10 CCT"] * 100
                 + ["chr1 10 CCC"] * 100
                 + ["chr2 4 TTT"] * 99)
        path = tmp_path / "reads.epiread"
        path.write_text("\n".join(lines) + "\n")
        return str(path)

    def test_triplets_report(self, capsys, epireads, tmp_path):
        out = tmp_path / "report.tsv"
        code, _, _ = run(capsys, "meth", "triplets", "--epireads", epireads,
                         "--boot", "100", "--seed", "3", "--out", str(out))
        assert code == 0
        lines = out.read_text().splitlines()
        data = [l for l in lines if not l.startswith("#")]
        assert len(data) == 3   # header + 2 triplets (99-coverage excluded)
        assert data[1].split("\t")[0] == "chr1"

    def test_threads_do_not_change_bytes(self, capsys, epireads, tmp_path):
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        run(capsys, "meth", "triplets", "--epireads", epireads, "--boot",
            "100", "--seed", "3", "--threads", "1", "--out", str(a))
        run(capsys, "meth", "triplets", "--epireads", epireads, "--boot",
            "100", "--seed", "3", "--threads", "8", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_correlate(self, capsys, epireads, tmp_path):
        report = tmp_path / "report.tsv"
        run(capsys, "meth", "triplets", "--epireads", epireads, "--boot",
            "100", "--seed", "3", "--out", str(report))
        # three covariate rows so the pooled group has >= 3 points: add a
        # third triplet first
        extra = tmp_path / "extra.epiread"
        extra.write_text("\n".join(["chr3 7 TCT"] * 120) + "\n")
        run(capsys, "meth", "triplets", "--epireads",
            f"{epireads},{extra}", "--boot", "100", "--seed", "3", "--out",
            str(report))
        cov = tmp_path / "cov.tsv"
        cov.write_text("chrom\tindex\tvalue\n"
                       "chr1\t0\t100\nchr1\t10\t2000\nchr3\t7\t500\n")
        code, out, _ = run(capsys, "meth", "correlate", "--report",
                           str(report), "--covariate", str(cov),
                           "--group-by", "dataset")
        assert code == 0
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert lines[0].startswith("group\tn\t")
        assert lines[1].split("\t")[0] == "all"
        assert lines[1].split("\t")[1] == "3"

    def test_parse_error_exits_1(self, capsys, tmp_path):
        bad = tmp_path / "bad.epiread"
        bad.write_text("chr1 zero CCC\n")
        code, _, err = run(capsys, "meth", "triplets", "--epireads",
                           str(bad), "--out", str(tmp_path / "r.tsv"))
        assert code == 1
        assert "E_PARSE" in err

    def test_threads_env_fallback(self, capsys, epireads, tmp_path,
                                  monkeypatch):
        flagged = tmp_path / "flag.tsv"
        enved = tmp_path / "env.tsv"
        run(capsys, "meth", "triplets", "--epireads", epireads, "--boot",
            "100", "--seed", "3", "--threads", "4", "--out", str(flagged))
        monkeypatch.setenv("LATENTW_THREADS", "4")
        run(capsys, "meth", "triplets", "--epireads", epireads, "--boot",
            "100", "--seed", "3", "--out", str(enved))
        assert flagged.read_bytes() == enved.read_bytes()
