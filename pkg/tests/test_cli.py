import json
import math

import numpy as np
import pytest

from mixrate import cli
from mixrate.cli import (
    EXIT_CONJECTURE,
    EXIT_INVARIANT,
    EXIT_OK,
    EXIT_USAGE,
    guard_status,
    main,
)
from mixrate.ensembles import serialize_ensemble, serialize_hamiltonian_set
from mixrate.entangling import (
    BipartiteOperator,
    PureState,
    serialize_bipartite_operator,
    serialize_pure_state,
)
from mixrate.harness import CSV_HEADER, ExperimentConfig, TrialRecord, run_trial

from conftest import random_ensemble, random_hamiltonian_set, rng


@pytest.fixture
def ensemble_file(tmp_path):
    E = random_ensemble(3, 3, rng(700))
    path = tmp_path / "ensemble.json"
    path.write_bytes(serialize_ensemble(E))
    return path


@pytest.fixture
def hamiltonian_file(tmp_path):
    H = random_hamiltonian_set(3, 3, rng(701))
    path = tmp_path / "hams.json"
    path.write_bytes(serialize_hamiltonian_set(H))
    return path


class TestCompute:
    def test_report_fields(self, ensemble_file, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["compute", "--ensemble", str(ensemble_file), "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        for key in (
            "mixing_rate_at_H",
            "max_rate",
            "binary_max_rate",
            "bound_thm",
            "bound_conjecture",
            "fd_residual",
            "ratio_thm",
            "ratio_conjecture",
        ):
            assert key in report
        assert report["max_rate"] <= report["bound_thm"] + 1e-8
        assert report["fd_residual"] <= 1e-6

    def test_with_hamiltonians_stdout(self, ensemble_file, hamiltonian_file, capsys):
        code = main(
            [
                "compute",
                "--ensemble",
                str(ensemble_file),
                "--hamiltonians",
                str(hamiltonian_file),
            ]
        )
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["mixing_rate_at_H"] is not None
        assert abs(report["mixing_rate_at_H"]) <= report["max_rate"] + 1e-9

    def test_missing_file_is_usage_error(self, tmp_path, capsys):
        code = main(["compute", "--ensemble", str(tmp_path / "nope.json")])
        assert code == EXIT_USAGE
        assert "error" in capsys.readouterr().err

    def test_malformed_ensemble_is_usage_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["compute", "--ensemble", str(bad)]) == EXIT_USAGE

    def test_missing_subcommand(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_help_exits_clean(self, capsys):
        assert main(["--help"]) == EXIT_OK


class TestVerify:
    ARGS = ["verify", "--dim", "3", "--states", "3", "--trials", "6", "--seed", "42"]

    @staticmethod
    def _strip_elapsed(text):
        return [",".join(line.split(",")[:-1]) for line in text.splitlines()]

    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(self.ARGS + ["--out", str(a)]) == EXIT_OK
        assert main(self.ARGS + ["--out", str(b)]) == EXIT_OK
        assert self._strip_elapsed(a.read_text()) == self._strip_elapsed(b.read_text())

    def test_csv_shape(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(self.ARGS + ["--out", str(out)]) == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 7

    def test_workers_agree(self, tmp_path):
        serial, parallel = tmp_path / "s.csv", tmp_path / "p.csv"
        assert main(self.ARGS + ["--workers", "1", "--out", str(serial)]) == EXIT_OK
        assert main(self.ARGS + ["--workers", "4", "--out", str(parallel)]) == EXIT_OK
        assert self._strip_elapsed(serial.read_text()) == self._strip_elapsed(
            parallel.read_text()
        )

    def test_workers_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MIXRATE_WORKERS", "2")
        out = tmp_path / "env.csv"
        assert main(self.ARGS + ["--out", str(out)]) == EXIT_OK
        assert len(out.read_text().splitlines()) == 7

    def test_bad_dim_is_usage_error(self, capsys):
        code = main(
            ["verify", "--dim", "1", "--states", "2", "--trials", "1", "--seed", "0"]
        )
        assert code == EXIT_USAGE


class TestScan:
    def test_grid_scan(self, tmp_path, capsys):
        out = tmp_path / "scan.csv"
        code = main(
            [
                "scan",
                "--p-grid",
                "0.2:0.8:0.3",
                "--dim",
                "2",
                "--trials",
                "2",
                "--seed",
                "7",
                "--out",
                str(out),
            ]
        )
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        # grid {0.2, 0.5, 0.8} x 2 trials
        assert len(lines) == 7
        header = CSV_HEADER.split(",")
        row = lines[3].split(",")
        assert float(row[header.index("bound_thm")]) == pytest.approx(2.0)
        err = capsys.readouterr().err
        assert "p=0.5000" in err

    def test_bad_grid(self, capsys):
        code = main(
            ["scan", "--p-grid", "0.5", "--dim", "2", "--trials", "1", "--seed", "0"]
        )
        assert code == EXIT_USAGE


class TestSearch:
    def test_binary_search(self, tmp_path):
        out = tmp_path / "search.json"
        code = main(
            [
                "search",
                "--dim",
                "2",
                "--states",
                "2",
                "--iters",
                "150",
                "--seed",
                "5",
                "--binary",
                "--out",
                str(out),
            ]
        )
        assert code == EXIT_OK
        rec = json.loads(out.read_text())[0]
        assert rec["iterations"] == 150
        assert rec["ratio_thm"] <= 1.0 + 1e-8
        assert 0.0 < rec["ratio_conj"] <= 1.0 + 1e-6


class TestSie:
    @staticmethod
    def _bell_files(tmp_path):
        amp = np.zeros(16, dtype=complex)
        amp[0b0000] = amp[0b0110] = 1 / math.sqrt(2)  # (|00>+|11>)_{AB}
        psi = PureState(amp, (2, 2, 2, 2))
        swap = np.zeros((4, 4))
        swap[0, 0] = swap[3, 3] = swap[1, 2] = swap[2, 1] = 1.0
        H = BipartiteOperator(swap, (2, 2), normalized=True)
        sp = tmp_path / "psi.json"
        hp = tmp_path / "ham.json"
        sp.write_bytes(serialize_pure_state(psi))
        hp.write_bytes(serialize_bipartite_operator(H))
        return sp, hp

    def test_bell_swap(self, tmp_path, capsys):
        sp, hp = self._bell_files(tmp_path)
        code = main(["sie", "--state", str(sp), "--ham", str(hp)])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "reduction_residual=" in out
        residual = float(out.split("reduction_residual=")[1].splitlines()[0])
        assert residual <= 1e-8
        assert out.count("ok=True") == 11

    def test_missing_state_file(self, tmp_path, capsys):
        _, hp = self._bell_files(tmp_path)
        code = main(["sie", "--state", str(tmp_path / "nope.json"), "--ham", str(hp)])
        assert code == EXIT_USAGE


class TestGuardStatus:
    @staticmethod
    def _record(**kw):
        base = dict(
            trial_id=0,
            seed=0,
            dim=2,
            n_states=2,
            probabilities=(0.5, 0.5),
            max_rate=1.0,
            bound_thm=2.0,
            shannon=math.log(2),
            ratio_thm=0.5,
            ratio_conj=0.9,
            fd_residual=1e-9,
            stm_ok=True,
        )
        base.update(kw)
        return TrialRecord(**base)

    def test_clean_batch(self):
        assert guard_status([self._record()]) == EXIT_OK

    def test_error_wins(self):
        records = [self._record(error="DomainError: x"), self._record(ratio_conj=2.0)]
        assert guard_status(records) == EXIT_INVARIANT

    def test_theorem_violation(self):
        assert guard_status([self._record(ratio_thm=1.0 + 1e-6)]) == EXIT_INVARIANT

    def test_stm_failure(self):
        assert guard_status([self._record(stm_ok=False)]) == EXIT_INVARIANT

    def test_large_fd_residual(self):
        assert guard_status([self._record(fd_residual=1e-3)]) == EXIT_INVARIANT

    def test_conjecture_event(self):
        assert guard_status([self._record(ratio_conj=1.01)]) == EXIT_CONJECTURE

    def test_conjecture_within_slack_ok(self):
        assert guard_status([self._record(ratio_conj=1.0 + 1e-7)]) == EXIT_OK

    def test_offender_serialization(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = ExperimentConfig(dim=2, n_states=2, seed=11)
        rec = run_trial(cfg, 0)
        rec.ratio_conj = 1.5  # synthetic event to exercise the reporting path
        from mixrate.harness import trial_ensemble

        cli._flag_conjecture_offenders(
            [rec], lambda r: trial_ensemble(cfg, r.trial_id), "conjecture_offender"
        )
        offender = tmp_path / "conjecture_offender_trial0.json"
        assert offender.exists()
        payload = json.loads(offender.read_text())
        assert payload["dim"] == 2
        assert len(payload["probabilities"]) == 2
