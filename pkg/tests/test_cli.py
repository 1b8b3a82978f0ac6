from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from mlmod import (
    CouplingSpec,
    ModularityParams,
    flatten_aspect_grid,
    generate_couplings,
    load_aspect_grid,
    load_multiplex,
    load_result,
    modularity,
    mspec_detect,
)
from mlmod.cli import _seed_for, main


def run_cli(args):
    return main(list(args))


class TestDetect:
    def test_karate_detect(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = run_cli([
            "detect", "--dataset", "karate", "--algorithm", "mspec",
            "--gamma", "1.0", "--omega", "1.0", "--out", str(out),
        ])
        assert code == 0
        printed = capsys.readouterr().out
        assert "Q=" in printed and "communities=" in printed
        result, _ = load_result(str(out / "result_mspec.txt"))
        assert result.n_communities >= 2
        assert result.divisions[0].applied
        # first division alone yields two communities
        first_applied = [d for d in result.divisions if d.applied]
        assert first_applied[0].community == 0

    def test_edgeless_network_coupling_only_q(self, tmp_path, capsys):
        edge = tmp_path / "e.txt"
        edge.write_text("# no edges\n")
        layers = tmp_path / "l.txt"
        layers.write_text("1 1 a\n2 1 b\n")
        out = tmp_path / "out"
        with pytest.warns(RuntimeWarning):
            code = run_cli([
                "detect", "--input", str(edge), "--layers-file", str(layers),
                "--nodes", "5", "--omega", "1.0", "--rho", "1.0",
                "--seed", "3", "--out", str(out),
            ])
        assert code == 0
        result, _ = load_result(str(out / "result_mspec.txt"))
        assert result.n_communities == 1
        # Q is the coupling sum alone: 5 nodes x 2 ordered layer pairs
        assert result.q_total == pytest.approx(10.0, abs=1e-12)

    def test_bad_path_exit_2_no_output(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = run_cli([
            "detect", "--input", str(tmp_path / "missing.txt"),
            "--out", str(out),
        ])
        assert code == 2
        assert not (out / "result_mspec.txt").exists()

    def test_printed_q_matches_recomputation(self, tmp_path, capsys):
        out = tmp_path / "out"
        run_cli([
            "detect", "--dataset", "karate-replica", "--layers", "3",
            "--gamma", "0.5", "1.0", "1.0", "--omega", "0.5",
            "--out", str(out),
        ])
        result, _ = load_result(str(out / "result_mspec.txt"))
        from mlmod import build_karate_replica

        net, params = build_karate_replica(3, [0.5, 1.0, 1.0])
        q = modularity(net, CouplingSpec(omega=0.5), params, result.partition)
        assert result.q_total == pytest.approx(q, abs=1e-9 * max(1.0, abs(q)))


class TestSweep:
    def test_replica_sweep_labels_and_consistency(self, tmp_path):
        out = tmp_path / "sweep"
        code = run_cli([
            "sweep", "--layers", "3", "--gamma", "0.5", "0.75", "1.0",
            "--omega", "0", "1", "10", "--out", str(out),
        ])
        assert code == 0
        labels = (out / "sweep_labels.csv").read_text().splitlines()
        assert labels[0] == "nodeId,layerId,aspectId,omega=0,omega=1,omega=10"
        assert len(labels) == 1 + 3 * 34
        summary = (out / "sweep_summary.csv").read_text().splitlines()
        rows = [line.split(",") for line in summary[1:]]
        consistency = {row[0]: float(row[3]) for row in rows}
        assert consistency["1"] == 1.0
        assert consistency["10"] == 1.0
        assert consistency["10"] >= consistency["0"]

    def test_byte_identical_reruns(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        args = ["sweep", "--layers", "2", "--gamma", "0.5", "1.0",
                "--omega", "0.1", "1", "--seed", "7"]
        assert run_cli(args + ["--out", str(out1)]) == 0
        assert run_cli(args + ["--out", str(out2)]) == 0
        for name in ("sweep_labels.csv", "sweep_summary.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        for name in sorted(os.listdir(out1 / "runs")):
            assert (out1 / "runs" / name).read_bytes() == (out2 / "runs" / name).read_bytes()


class TestCompare:
    def test_single_algorithm_single_rho(self, tmp_path):
        out = tmp_path / "cmp"
        code = run_cli([
            "compare", "--layers", "2", "--gamma", "1.0", "1.0",
            "--algorithm", "mspec", "--rho", "0.5", "--seed", "11",
            "--out", str(out),
        ])
        assert code == 0
        lines = (out / "compare.csv").read_text().splitlines()
        assert lines[0] == "algorithm,rho=0.5,variance,mean"
        cells = lines[1].split(",")
        assert cells[0] == "mspec"
        assert float(cells[2]) == 0.0  # variance of a single column
        assert float(cells[1]) == float(cells[3])

    def test_emitted_q_matches_offline_recomputation(self, tmp_path):
        out = tmp_path / "cmp"
        run_cli([
            "compare", "--layers", "2", "--gamma", "0.5", "1.0",
            "--algorithm", "mspec", "mlouv", "--rho", "0.0", "1.0",
            "--seed", "5", "--out", str(out),
        ])
        from mlmod import build_karate_replica

        net0, params = build_karate_replica(2, [0.5, 1.0])
        spec = CouplingSpec(omega=1.0)
        table = {}
        lines = (out / "compare.csv").read_text().splitlines()
        for line in lines[1:]:
            cells = line.split(",")
            table[cells[0]] = [float(c) for c in cells[1:-2]]
        for ri, rho in enumerate((0.0, 1.0)):
            coupled = net0.with_couplings(
                generate_couplings(net0, rho, _seed_for(5, ri, 0))
            )
            for alg in ("mspec", "mlouv"):
                run_file = out / "runs" / f"compare_rho{ri}_rep0_{alg}.txt"
                result, _ = load_result(str(run_file))
                q = modularity(coupled, spec, params, result.partition)
                assert result.q_total == pytest.approx(q, abs=1e-9 * max(1.0, abs(q)))
                assert table[alg][ri] == pytest.approx(q, abs=1e-9 * max(1.0, abs(q)))


class TestConvert:
    def grid_file(self, tmp_path):
        p = tmp_path / "grid.txt"
        p.write_text(
            "#dims 2 2\n"
            "1,1 1 2 1.0\n1,1 2 3 1.0\n"
            "1,2 1 3 1.0\n"
            "2,1 2 3 2.0\n"
            "2,2 1 2 1.0\n2,2 1 3 1.0\n"
        )
        c = tmp_path / "gridc.txt"
        c.write_text("1 1,1 2,1\n2 1,2 2,2\n")
        return p, c

    def test_grid_to_four_layers(self, tmp_path):
        grid, coup = self.grid_file(tmp_path)
        out = tmp_path / "conv"
        code = run_cli([
            "convert", "--input", str(grid), "--grid-couplings", str(coup),
            "--out", str(out),
        ])
        assert code == 0
        net = load_multiplex(str(out / "flat.edges"), str(out / "flat.layers"),
                             str(out / "flat.couplings"), n_nodes=3)
        assert net.n_cells == 4
        assert len(net.aspects) == 1
        mapping = (out / "flat.map").read_text().splitlines()
        assert mapping[1:] == ["1,1 1 1", "1,2 2 1", "2,1 3 1", "2,2 4 1"]

    def test_convert_then_detect_equals_direct(self, tmp_path):
        grid_path, coup = self.grid_file(tmp_path)
        out = tmp_path / "conv"
        run_cli(["convert", "--input", str(grid_path),
                 "--grid-couplings", str(coup), "--out", str(out)])
        net_files = load_multiplex(str(out / "flat.edges"), str(out / "flat.layers"),
                                   str(out / "flat.couplings"), n_nodes=3)
        grid = load_aspect_grid(str(grid_path), coupling_path=str(coup))
        net_direct, _ = flatten_aspect_grid(grid)
        assert net_files.within_edges == net_direct.within_edges
        assert net_files.couplings == net_direct.couplings
        params = ModularityParams.for_network(net_direct)
        spec = CouplingSpec(omega=1.0)
        r1 = mspec_detect(net_files, spec, params)
        r2 = mspec_detect(net_direct, spec, params)
        assert np.array_equal(r1.partition.labels, r2.partition.labels)
        assert r1.q_total == r2.q_total

    def test_identity_conversion_normalized_output(self, tmp_path):
        p = tmp_path / "flat_grid.txt"
        p.write_text("#dims 1\n1 1 2 1.0\n1 2 3 1.5\n")
        out1 = tmp_path / "c1"
        out2 = tmp_path / "c2"
        run_cli(["convert", "--input", str(p), "--out", str(out1)])
        # converting the converted output again is byte-identical
        p2 = tmp_path / "again.txt"
        edges = (out1 / "flat.edges").read_text().splitlines()
        body = [line.split() for line in edges if not line.startswith("#")]
        p2.write_text("#dims 1\n" + "\n".join(
            f"{row[0]} {row[1]} {row[2]} {row[3]}" for row in body) + "\n")
        run_cli(["convert", "--input", str(p2), "--out", str(out2)])
        assert (out1 / "flat.edges").read_bytes() == (out2 / "flat.edges").read_bytes()
        assert (out1 / "flat.layers").read_bytes() == (out2 / "flat.layers").read_bytes()

    def test_ragged_grid_exit_2(self, tmp_path):
        p = tmp_path / "grid.txt"
        p.write_text("#dims 2 2\n3,1 1 2 1.0\n")
        code = run_cli(["convert", "--input", str(p), "--out", str(tmp_path / "x")])
        assert code == 2


class TestExitCodes:
    def test_non_convergence_exit_1(self, tmp_path, monkeypatch):
        from mlmod import ConvergenceError
        import mlmod.cli as cli_mod

        def explode(*args, **kwargs):
            raise ConvergenceError("stuck", best_residual=1.0)

        monkeypatch.setattr(cli_mod, "mspec_detect", explode)
        code = run_cli(["detect", "--dataset", "karate",
                        "--out", str(tmp_path / "o")])
        assert code == 1

    def test_normalized_reporting(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli(["detect", "--dataset", "karate", "--normalized",
                        "--omega", "1.0", "--out", str(out)])
        assert code == 0
        result, _ = load_result(str(out / "result_mspec.txt"))
        from mlmod import build_karate_replica, normalization_factor

        net, params_raw = build_karate_replica(1, [1.0])
        params = ModularityParams.for_network(net, normalization="normalized")
        q = modularity(net, CouplingSpec(omega=1.0), params, result.partition)
        assert result.q_total == pytest.approx(q, abs=1e-12)
        mu = normalization_factor(net, CouplingSpec(omega=1.0), params)
        assert mu == pytest.approx(2 * 78.0)
        assert 0 < result.q_total < 1  # conventional-scale value


class TestWorkersAndStrategies:
    def test_worker_count_does_not_change_output(self, tmp_path, monkeypatch):
        args = ["compare", "--layers", "2", "--gamma", "1.0", "1.0",
                "--algorithm", "mspec", "--rho", "0.0", "0.5", "1.0",
                "--seed", "2"]
        monkeypatch.setenv("MLMOD_WORKERS", "1")
        out1 = tmp_path / "w1"
        assert run_cli(args + ["--out", str(out1)]) == 0
        monkeypatch.setenv("MLMOD_WORKERS", "4")
        out2 = tmp_path / "w4"
        assert run_cli(args + ["--out", str(out2)]) == 0
        assert (out1 / "compare.csv").read_bytes() == (out2 / "compare.csv").read_bytes()

    def test_explicit_strategy_from_coupling_file(self, tmp_path):
        edge = tmp_path / "e.txt"
        edge.write_text("1 1 2 1.0\n2 1 2 1.0\n")
        layers = tmp_path / "l.txt"
        layers.write_text("1 1 a\n2 1 b\n")
        coup = tmp_path / "c.txt"
        coup.write_text("1 1 1 2 1 0.75\n2 1 1 2 1 0.25\n")
        out = tmp_path / "out"
        code = run_cli([
            "detect", "--input", str(edge), "--layers-file", str(layers),
            "--couplings-file", str(coup), "--coupling-strategy", "explicit",
            "--out", str(out),
        ])
        assert code == 0
        result, _ = load_result(str(out / "result_mspec.txt"))
        # both node copies co-assigned: coupling contribution is
        # 2 * (0.75 + 0.25); within-layer gamma=1 single community adds 0
        assert result.q_total == pytest.approx(2.0, abs=1e-12)

    def test_temporal_strategy_cli(self, tmp_path):
        out = tmp_path / "out"
        code = run_cli([
            "detect", "--dataset", "karate-replica", "--layers", "3",
            "--gamma", "1.0", "--coupling-strategy", "temporal",
            "--omega", "0.5", "--out", str(out),
        ])
        assert code == 0

    def test_manifest_input(self, tmp_path):
        from mlmod.datasets import karate_manifest_path

        out = tmp_path / "out"
        code = run_cli(["detect", "--manifest", karate_manifest_path(),
                        "--omega", "1.0", "--out", str(out)])
        assert code == 0
        result, shape = load_result(str(out / "result_mspec.txt"))
        assert shape["n_nodes"] == 34

    def test_sweep_on_loaded_network(self, tmp_path):
        edge = tmp_path / "e.txt"
        edge.write_text("1 1 2 1.0\n1 2 3 1.0\n2 1 2 1.0\n2 1 3 1.0\n")
        coup = tmp_path / "c.txt"
        coup.write_text("1 1 1 2 1\n2 1 1 2 1\n3 1 1 2 1\n")
        out = tmp_path / "sw"
        code = run_cli(["sweep", "--input", str(edge),
                        "--couplings-file", str(coup),
                        "--omega", "0", "1", "--out", str(out)])
        assert code == 0
        summary = (out / "sweep_summary.csv").read_text().splitlines()
        assert len(summary) == 3

    def test_params_file_drives_detection(self, tmp_path):
        params_file = tmp_path / "params.txt"
        params_file.write_text("gamma = 1.0\nomega = 2.0\n"
                               "coupling.strategy = uniform\n")
        out = tmp_path / "out"
        code = run_cli([
            "detect", "--dataset", "karate", "--params-file", str(params_file),
            "--out", str(out),
        ])
        assert code == 0
        result, _ = load_result(str(out / "result_mspec.txt"))
        assert result.n_communities >= 2


def test_console_entry_point(tmp_path):
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "mlmod.cli", "detect", "--dataset", "karate",
         "--omega", "1.0", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "Q=" in proc.stdout
