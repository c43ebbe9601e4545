import json
from pathlib import Path

import pytest

from rydmis.cli import main
from rydmis.distributions import load_distribution_csv
from rydmis.graphs import load_graph
from rydmis.pipeline import load_protocol


@pytest.fixture(scope="module")
def family_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("family")
    rc = main([
        "generate", "--layout", "triangular", "--rows", "5", "--cols", "5",
        "--sizes", "4..5", "--per-size", "2", "--seed", "7", "--out", str(out),
    ])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def protocol_path(tmp_path_factory, family_dir):
    out = tmp_path_factory.mktemp("train") / "proto.json"
    rc = main([
        "train", "--family", str(family_dir), "--m", "2", "--tmax-us", "3",
        "--budget", "4+6", "--seed", "1", "--out", str(out),
    ])
    assert rc == 0
    return out


class TestGenerate:
    def test_family_files_and_manifest(self, family_dir):
        graphs = sorted(family_dir.glob("graph_*.json"))
        assert len(graphs) == 4
        manifest = json.loads((family_dir / "manifest.json").read_text())
        assert manifest["subcommand"] == "generate"
        assert manifest["seed"] == 7
        assert len(manifest["outputs"]) == 4
        g = load_graph(graphs[0])
        assert g.origin.kind == "triangular"

    def test_reproducible_outputs(self, family_dir, tmp_path):
        out2 = tmp_path / "again"
        main([
            "generate", "--layout", "triangular", "--rows", "5", "--cols", "5",
            "--sizes", "4..5", "--per-size", "2", "--seed", "7", "--out", str(out2),
        ])
        for a, b in zip(sorted(family_dir.glob("graph_*.json")),
                        sorted(out2.glob("graph_*.json"))):
            assert a.read_text() == b.read_text()

    def test_usage_error_exit_2(self):
        assert main(["generate", "--layout", "nonsense"]) == 2


class TestTrainTransfer:
    def test_protocol_artifacts(self, protocol_path):
        protocol = load_protocol(protocol_path)
        assert len(protocol.theta) == 2 * 2 + 3
        assert protocol_path.with_suffix(".history.csv").exists()
        assert protocol_path.with_suffix(".state.json").exists()
        assert protocol_path.with_suffix(".schedule.json").exists()
        manifest = json.loads(
            protocol_path.with_suffix(".json.manifest.json").read_text()
        )
        assert manifest["subcommand"] == "train"

    def test_transfer_report(self, protocol_path, family_dir, tmp_path):
        out = tmp_path / "transfer.json"
        rc = main([
            "transfer", "--protocol", str(protocol_path), "--family",
            str(family_dir), "--out", str(out),
        ])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert len(doc["p_mis"]) == 4
        assert 0.0 <= doc["mean_pmis"] <= 1.0
        assert out.with_suffix(".histogram.csv").exists()


class TestSamplePipeline:
    def test_sample_corrupt_correct_postprocess(self, protocol_path, family_dir,
                                                tmp_path):
        graph = sorted(family_dir.glob("graph_*.json"))[0]
        dist = tmp_path / "dist.csv"
        rc = main([
            "sample", "--graph", str(graph), "--protocol", str(protocol_path),
            "--shots", "400", "--seed", "3", "--out", str(dist),
        ])
        assert rc == 0
        d = load_distribution_csv(dist)
        assert d.total == 400

        corrupted = tmp_path / "corrupted.csv"
        rc = main([
            "corrupt", "--dist", str(dist), "--mode", "stochastic",
            "--seed", "5", "--out", str(corrupted),
        ])
        assert rc == 0
        assert load_distribution_csv(corrupted).total == 400

        corrected = tmp_path / "corrected.csv"
        rc = main(["correct", "--dist", str(corrupted), "--out", str(corrected)])
        assert rc == 0
        c = load_distribution_csv(corrected)
        assert c.total == pytest.approx(1.0, abs=1e-9)

        refined = tmp_path / "refined.csv"
        rc = main([
            "postprocess", "--graph", str(graph), "--dist", str(corrupted),
            "--depth", "1", "--out", str(refined),
        ])
        assert rc == 0
        assert load_distribution_csv(refined).total == 400


class TestFit:
    def test_fit_from_csv(self, tmp_path):
        import numpy as np

        curves = tmp_path / "scaling.csv"
        rows = ["N,k,cum_prob"]
        for n in range(5, 200, 5):
            p = 1.0 if n <= 10 else float(np.exp(-(n - 10) / 50.0))
            rows.append(f"{n},0,{p}")
        curves.write_text("\n".join(rows) + "\n")
        out = tmp_path / "fit.json"
        assert main(["fit", "--curves", str(curves), "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc[0]["b_k"] == 10
        assert abs(doc[0]["N_k"] - 50.0) < 1.0


class TestGisp:
    def test_synth_import_tograph_embed(self, tmp_path):
        loads = tmp_path / "loads.csv"
        assert main(["gisp", "synth", "--tasks", "8", "--groups", "3",
                     "--seed", "2", "--out", str(loads)]) == 0
        inst = tmp_path / "inst.json"
        assert main(["gisp", "import", str(loads), "--out", str(inst)]) == 0
        conflict = tmp_path / "conflict.json"
        assert main(["gisp", "tograph", str(inst), "--out", str(conflict)]) == 0
        doc = json.loads(conflict.read_text())
        assert doc["n"] == 8
        register = tmp_path / "register.json"
        assert main(["embed", "--conflict", str(conflict),
                     "--out", str(register)]) == 0
        assert json.loads(register.read_text())["positions_um"]

    def test_domain_error_exit_1(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n")
        assert main(["gisp", "import", str(bad)]) == 1


class TestScanReport:
    def test_scan_and_report(self, family_dir, tmp_path):
        scan_dir = tmp_path / "scan"
        rc = main([
            "scan", "--family", str(family_dir), "--grid", "2",
            "--t-us", "2.0", "--out", str(scan_dir),
        ])
        assert rc == 0
        assert (scan_dir / "landscape.csv").exists()
        assert (scan_dir / "argmins.csv").exists()

        report_dir = tmp_path / "report"
        rc = main(["report", "--run", str(tmp_path), "--out", str(report_dir)])
        assert rc == 0
        assert (report_dir / "fig_landscape.csv").exists()
        summary = json.loads((report_dir / "summary.json").read_text())
        assert "fig_landscape.csv" in summary["collated"]


class TestConfigFile:
    def test_config_defaults_and_override(self, tmp_path):
        cfgfile = tmp_path / "run.toml"
        cfgfile.write_text(
            '[generate]\nlayout = "square"\nrows = 4\ncols = 4\n'
            'sizes = "3..3"\nper_size = 1\nseed = 9\n'
        )
        out = tmp_path / "fam"
        rc = main([
            "--config", str(cfgfile), "generate", "--per-size", "2",
            "--out", str(out),
        ])
        assert rc == 0
        graphs = sorted(out.glob("graph_*.json"))
        assert len(graphs) == 2      # flag overrode per_size = 1
        g = load_graph(graphs[0])
        assert g.origin.kind == "square"
