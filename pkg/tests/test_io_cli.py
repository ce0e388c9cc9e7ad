"""File formats and the command-line workflows, end to end through real
files."""

import numpy as np
import pytest

from markovfilter import FileFormatError, FilterMatrix, StateSpace, FilteredChain, io
from markovfilter.cli import (
    EXIT_CONSISTENCY,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_UNIDENTIFIABLE,
    main,
)
from conftest import BENCH_FILTER, BENCH_PROBS, WORKED_CHAIN_DIGITS, WORKED_FILTER


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def bench_files(tmp_path):
    p_file = tmp_path / "probs.csv"
    io.write_matrix_csv(p_file, BENCH_PROBS)
    f_file = tmp_path / "filter.csv"
    io.write_matrix_csv(f_file, BENCH_FILTER)
    return str(p_file), str(f_file)


class TestIoRoundTrips:
    def test_chain_round_trip(self, tmp_path, worked_chain):
        path = tmp_path / "chain.txt"
        io.write_chain(path, worked_chain)
        back = io.read_chain(path, 3)
        assert back.states == worked_chain.states

    def test_filtered_chain_round_trip(self, tmp_path):
        y = FilteredChain((1, None, 2, None), StateSpace(3))
        path = tmp_path / "filtered.txt"
        io.write_filtered_chain(path, y, blank_token="?")
        back = io.read_filtered_chain(path, 3, blank_token="?")
        assert back.symbols == y.symbols

    def test_matrix_round_trip(self, tmp_path):
        path = tmp_path / "m.csv"
        io.write_matrix_csv(path, BENCH_PROBS)
        np.testing.assert_allclose(io.read_matrix_csv(path), BENCH_PROBS, atol=1e-12)

    def test_kv_report_round_trip(self, tmp_path):
        path = tmp_path / "report.kv"
        io.write_kv_report(path, {"a.b.1": 0.25, "a.flag": True, "a.n": 7})
        back = io.read_kv_report(path)
        assert back == {"a.b.1": "0.25", "a.flag": "true", "a.n": "7"}

    def test_bad_cell_names_position(self, tmp_path):
        path = tmp_path / "bad.csv"
        write(path, "0.5,0.5\n0.4,oops\n")
        with pytest.raises(FileFormatError) as err:
            io.read_matrix_csv(path)
        assert err.value.line == 2
        assert err.value.column == 2

    def test_chain_rejects_alien_token(self, tmp_path):
        path = tmp_path / "chain.txt"
        write(path, "1 2 x 1\n")
        with pytest.raises(FileFormatError):
            io.read_chain(path, 3)

    def test_filter_rejects_fraction(self, tmp_path):
        path = tmp_path / "f.csv"
        write(path, "0.5,1\n0,1\n")
        with pytest.raises(FileFormatError):
            io.read_filter_csv(path)

    def test_filtered_chain_must_start_observed(self, tmp_path):
        path = tmp_path / "y.txt"
        write(path, "- 1 2\n")
        with pytest.raises(FileFormatError):
            io.read_filtered_chain(path, 3)


def test_failure_exit_codes_are_distinct():
    from markovfilter.cli import EXIT_NUMERICAL

    codes = {EXIT_PARSE, EXIT_CONSISTENCY, EXIT_NUMERICAL, EXIT_UNIDENTIFIABLE}
    assert len(codes) == 4
    assert EXIT_OK not in codes


class TestSimulateCommand:
    def test_writes_n_plus_one_tokens(self, tmp_path, bench_files):
        p_file, _ = bench_files
        out = tmp_path / "chain.txt"
        code = main(
            ["simulate", p_file, "--initial", "1", "--n", "1000", "--seed", "4", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert len(out.read_text().split()) == 1001

    def test_single_transition(self, tmp_path, bench_files):
        p_file, _ = bench_files
        out = tmp_path / "c.txt"
        assert main(["simulate", p_file, "--initial", "2", "--n", "1", "--seed", "0", "--out", str(out)]) == EXIT_OK
        assert len(out.read_text().split()) == 2

    def test_malformed_matrix_exits_parse(self, tmp_path, capsys):
        bad = write(tmp_path / "bad.csv", "0.5,0.5\nnope,1\n")
        code = main(["simulate", bad, "--initial", "1", "--n", "5", "--out", str(tmp_path / "c.txt")])
        assert code == EXIT_PARSE
        assert "bad.csv" in capsys.readouterr().err

    def test_warns_on_unrealized_transition(self, tmp_path, capsys):
        p = write(tmp_path / "p.csv", "1,0\n0.5,0.5\n")
        out = tmp_path / "c.txt"
        assert main(["simulate", p, "--initial", "1", "--n", "50", "--seed", "1", "--out", str(out)]) == EXIT_OK
        assert "never occurred" in capsys.readouterr().out


class TestFilterCommand:
    def test_worked_example_tokens(self, tmp_path, capsys):
        chain = write(tmp_path / "chain.txt", " ".join(WORKED_CHAIN_DIGITS))
        f_file = tmp_path / "f.csv"
        io.write_matrix_csv(f_file, WORKED_FILTER)
        out = tmp_path / "y.txt"
        assert main(["filter", chain, str(f_file), "--out", str(out)]) == EXIT_OK
        assert out.read_text().split() == "1 1 - 3 1 2 2 3 2 - - - - 3 1 1 - - - 3 1".split()
        printed = capsys.readouterr().out
        assert "reduction fraction" in printed

    def test_all_ones_reduces_nothing(self, tmp_path, capsys):
        chain = write(tmp_path / "chain.txt", "1 2 1 2")
        f_file = tmp_path / "f.csv"
        io.write_matrix_csv(f_file, np.ones((2, 2), dtype=bool))
        out = tmp_path / "y.txt"
        assert main(["filter", chain, str(f_file), "--out", str(out)]) == EXIT_OK
        assert "reduction fraction = 0" in capsys.readouterr().out

    def test_round_trip_through_files(self, tmp_path, bench_files):
        p_file, f_file = bench_files
        chain_file = tmp_path / "chain.txt"
        main(["simulate", p_file, "--initial", "1", "--n", "200", "--seed", "9", "--out", str(chain_file)])
        out = tmp_path / "y.txt"
        main(["filter", str(chain_file), f_file, "--out", str(out)])
        y = io.read_filtered_chain(out, 3)
        from markovfilter import apply_filter

        chain = io.read_chain(chain_file, 3)
        assert y.symbols == apply_filter(chain, FilterMatrix(BENCH_FILTER)).symbols


class TestCheckFilterCommand:
    def test_bench_filter_is_approved(self, bench_files, capsys):
        _, f_file = bench_files
        assert main(["check-filter", f_file]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "sufficient-identifiable" in printed
        assert "closure witness" in printed

    def test_sparse_large_filter_unknown(self, tmp_path):
        bits = np.zeros((10, 10), dtype=bool)
        bits[0, 0] = True
        f_file = tmp_path / "f.csv"
        io.write_matrix_csv(f_file, bits)
        assert main(["check-filter", str(f_file)]) == EXIT_UNIDENTIFIABLE

    def test_support_changes_the_verdict(self, tmp_path, bench_files):
        _, f_file = bench_files
        support = np.array([[1, 0, 0], [1, 1, 1], [1, 1, 1]])
        s_file = tmp_path / "s.csv"
        io.write_matrix_csv(s_file, support.astype(float))
        assert main(["check-filter", f_file, "--support", str(s_file)]) == EXIT_UNIDENTIFIABLE


class TestEstimateCommand:
    def test_full_observation_recovers_mle(self, tmp_path, capsys):
        chain = write(tmp_path / "chain.txt", " ".join(WORKED_CHAIN_DIGITS))
        ones = tmp_path / "ones.csv"
        io.write_matrix_csv(ones, np.ones((3, 3), dtype=bool))
        y_file = tmp_path / "y.txt"
        main(["filter", chain, str(ones), "--out", str(y_file)])
        capsys.readouterr()
        report = tmp_path / "report.kv"
        code = main(["estimate", str(y_file), str(ones), "--out", str(report)])
        assert code == EXIT_OK
        entries = io.read_kv_report(report)
        assert float(entries["estimate.theta.1.1"]) == pytest.approx(2 / 7)
        assert float(entries["estimate.theta.1.2"]) == pytest.approx(4 / 7)
        d = 6
        delta = np.array(
            [
                [float(entries[f"estimate.delta_v.{a + 1}.{b + 1}"]) for b in range(d)]
                for a in range(d)
            ]
        )
        assert np.all(delta == 0.0)

    def test_inconsistent_pattern_exits_consistency(self, tmp_path, capsys):
        y_file = write(tmp_path / "y.txt", "1 2\n")
        f_file = tmp_path / "f.csv"
        io.write_matrix_csv(f_file, np.eye(2).astype(bool))
        code = main(["estimate", str(y_file), str(f_file)])
        assert code == EXIT_CONSISTENCY
        assert "hint" in capsys.readouterr().err

    def test_bench_run_produces_finite_report(self, tmp_path, bench_files, capsys):
        p_file, f_file = bench_files
        chain_file = tmp_path / "chain.txt"
        main(["simulate", p_file, "--initial", "1", "--n", "500", "--seed", "3", "--out", str(chain_file)])
        y_file = tmp_path / "y.txt"
        main(["filter", str(chain_file), f_file, "--out", str(y_file)])
        capsys.readouterr()
        report = tmp_path / "report.kv"
        assert main(["estimate", str(y_file), f_file, "--out", str(report)]) == EXIT_OK
        entries = io.read_kv_report(report)
        assert entries["estimate.converged"] == "true"
        sym = float(entries["estimate.symmetry"])
        assert np.isfinite(sym) and sym < 1e-4
        for key in ("estimate.se.1.1", "estimate.ci.lo.1.1", "estimate.v_obs.1.1", "estimate.m1.1.1"):
            assert np.isfinite(float(entries[key]))

    def test_sem_failure_hints_at_skip_sem(self, tmp_path, capsys):
        # state 1 is only ever seen entering its self-loop tail, so its
        # recorded exits carry no information and the covariance cannot exist
        from markovfilter.cli import EXIT_NUMERICAL

        chain = write(tmp_path / "chain.txt", "2 3 2 3 2 1 1 1")
        f_file = tmp_path / "f.csv"
        io.write_matrix_csv(f_file, np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]]).astype(float))
        y_file = tmp_path / "y.txt"
        main(["filter", str(chain), str(f_file), "--out", str(y_file)])
        capsys.readouterr()
        assert main(["estimate", str(y_file), str(f_file)]) == EXIT_NUMERICAL
        assert "--skip-sem" in capsys.readouterr().err
        assert main(["estimate", str(y_file), str(f_file), "--skip-sem"]) == EXIT_OK

    def test_skip_sem_omits_covariances(self, tmp_path, capsys):
        chain = write(tmp_path / "chain.txt", "1 2 1 2 2 1")
        ones = tmp_path / "ones.csv"
        io.write_matrix_csv(ones, np.ones((2, 2), dtype=bool))
        y_file = tmp_path / "y.txt"
        main(["filter", chain, str(ones), "--out", str(y_file)])
        capsys.readouterr()
        report = tmp_path / "report.kv"
        assert main(["estimate", str(y_file), str(ones), "--skip-sem", "--out", str(report)]) == EXIT_OK
        entries = io.read_kv_report(report)
        assert "estimate.v_obs.1.1" not in entries
        assert "estimate.theta.1.1" in entries


class TestTestCommand:
    @pytest.fixture
    def fitted_report(self, tmp_path, bench_files):
        p_file, f_file = bench_files
        chain_file = tmp_path / "chain.txt"
        main(["simulate", p_file, "--initial", "1", "--n", "800", "--seed", "21", "--out", str(chain_file)])
        y_file = tmp_path / "y.txt"
        main(["filter", str(chain_file), f_file, "--out", str(y_file)])
        report = tmp_path / "report.kv"
        main(["estimate", str(y_file), f_file, "--out", str(report)])
        return report

    def test_null_at_the_estimate_scores_zero(self, tmp_path, fitted_report, capsys):
        entries = io.read_kv_report(fitted_report)
        k = int(entries["estimate.k"])
        probs = np.array(
            [[float(entries[f"estimate.theta.{i + 1}.{j + 1}"]) for j in range(k)] for i in range(k)]
        )
        probs /= probs.sum(axis=1, keepdims=True)
        null_file = tmp_path / "null.csv"
        io.write_matrix_csv(null_file, probs)
        capsys.readouterr()
        assert main(["test", str(fitted_report), str(null_file)]) == EXIT_OK
        printed = capsys.readouterr().out
        stat = float(printed.split("chi-square statistic = ")[1].splitlines()[0])
        assert stat == pytest.approx(0.0, abs=1e-10)
        assert "fail to reject" in printed

    def test_truth_is_not_rejected(self, tmp_path, fitted_report, bench_files, capsys):
        p_file, _ = bench_files
        capsys.readouterr()
        assert main(["test", str(fitted_report), p_file]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "per-parameter z tests" in printed
        assert "degrees of freedom   = 6" in printed

    def test_missing_key_exits_parse(self, tmp_path, bench_files):
        p_file, _ = bench_files
        broken = write(tmp_path / "broken.kv", "estimate.k = 3\n")
        assert main(["test", broken, p_file]) == EXIT_PARSE

    def test_rank_deficient_covariance_exits_numerical(self, tmp_path, capsys):
        from markovfilter.cli import EXIT_NUMERICAL

        entries = {"estimate.k": 2}
        probs = [[0.6, 0.4], [0.3, 0.7]]
        for i in range(2):
            for j in range(2):
                entries[f"estimate.theta.{i + 1}.{j + 1}"] = probs[i][j]
        for a in range(2):
            for b in range(2):
                entries[f"estimate.v_obs.{a + 1}.{b + 1}"] = 1.0  # rank one
        report = tmp_path / "report.kv"
        io.write_kv_report(report, entries)
        null_file = tmp_path / "null.csv"
        io.write_matrix_csv(null_file, np.array([[0.5, 0.5], [0.5, 0.5]]))
        assert main(["test", str(report), str(null_file)]) == EXIT_NUMERICAL
        assert "positive definite" in capsys.readouterr().err


class TestEmbedCommand:
    def test_small_embed(self, tmp_path, capsys):
        chain = write(tmp_path / "chain.txt", "1 2 2 1")
        out = tmp_path / "emb.txt"
        support = tmp_path / "support.csv"
        code = main(
            ["embed", chain, "--states", "2", "--order", "2", "--out", str(out), "--support-out", str(support)]
        )
        assert code == EXIT_OK
        assert len(out.read_text().split()) == 3
        mask = io.read_support_csv(support)
        assert mask.sum() == 2**3

    def test_chain_too_short(self, tmp_path):
        chain = write(tmp_path / "chain.txt", "1 2")
        code = main(
            [
                "embed",
                chain,
                "--states",
                "2",
                "--order",
                "3",
                "--out",
                str(tmp_path / "e.txt"),
                "--support-out",
                str(tmp_path / "s.csv"),
            ]
        )
        assert code != EXIT_OK

    def test_embedded_estimate_workflow(self, tmp_path, capsys):
        # order-2 workflow: embed, filter the tuple chain, estimate with the
        # embedded support (SEM skipped: most tuple parameters are fixed)
        rng = np.random.default_rng(10)
        states = [1]
        for _ in range(300):
            states.append(int(rng.integers(1, 3)))
        chain = write(tmp_path / "chain.txt", " ".join(map(str, states)))
        emb = tmp_path / "emb.txt"
        support = tmp_path / "support.csv"
        main(["embed", chain, "--states", "2", "--order", "2", "--out", str(emb), "--support-out", str(support)])
        f_file = tmp_path / "f.csv"
        io.write_matrix_csv(f_file, np.ones((4, 4), dtype=bool))
        y_file = tmp_path / "y.txt"
        main(["filter", str(emb), str(f_file), "--out", str(y_file)])
        capsys.readouterr()
        report = tmp_path / "report.kv"
        code = main(
            [
                "estimate",
                str(y_file),
                str(f_file),
                "--support",
                str(support),
                "--skip-sem",
                "--out",
                str(report),
            ]
        )
        assert code == EXIT_OK
        entries = io.read_kv_report(report)
        # off-support tuple transitions carry no estimated mass
        assert float(entries["estimate.theta.1.3"]) == 0.0
