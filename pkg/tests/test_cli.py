import numpy as np
import pytest

from nsgames import (
    FiniteChannel,
    Povm,
    chsh,
    dump_channel,
    dump_correlation,
    dump_game,
    dump_povm,
    load_povm,
    memory_game,
)
from nsgames.cli import main

from conftest import basis_pvm, pauli_pvm, pr_box, trine_povm, PAULI_X, PAULI_Z


@pytest.fixture
def chsh_file(tmp_path):
    path = tmp_path / "chsh.game"
    path.write_text(dump_game(chsh()))
    return str(path)


class TestValueCommand:
    def test_loc_machine(self, chsh_file, capsys):
        assert main(["value", chsh_file, "--type", "loc", "--format", "machine"]) == 0
        assert capsys.readouterr().out == "value loc 0.75\n"

    def test_ns_machine(self, chsh_file, capsys):
        assert main(["value", chsh_file, "--type", "ns", "--format", "machine"]) == 0
        assert capsys.readouterr().out == "value ns 1.0\n"

    def test_qs_machine(self, chsh_file, capsys):
        code = main(["value", chsh_file, "--type", "qs", "--format", "machine",
                     "--seeds", "10", "--sweeps", "100"])
        assert code == 0
        tag, kind, number = capsys.readouterr().out.split()
        assert (tag, kind) == ("value", "qs-lb")
        assert float(number) >= 0.8535

    def test_table_mentions_lower_bound(self, chsh_file, capsys):
        main(["value", chsh_file, "--type", "qs", "--seeds", "4", "--sweeps", "20"])
        out = capsys.readouterr().out
        assert "lower bound" in out

    def test_table_flags_heuristic_beyond_two_outcomes(self, tmp_path, capsys):
        from nsgames import dump_game, random_game
        from nsgames import rand as rand_mod

        path = tmp_path / "wide.game"
        path.write_text(dump_game(random_game((2, 2, 3, 3), rand_mod.generator(4))))
        main(["value", str(path), "--type", "qs", "--seeds", "4", "--sweeps", "20"])
        assert "heuristic" in capsys.readouterr().out

    def test_malformed_file_exit_2(self, tmp_path, capsys):
        path = tmp_path / "bad.game"
        path.write_text("this is not a game\n")
        assert main(["value", str(path), "--type", "loc"]) == 2
        assert "line 1" in capsys.readouterr().err

    def test_missing_file_exit_2(self):
        assert main(["value", "/nonexistent.game", "--type", "loc"]) == 2

    def test_cylinder_file_rejected(self, tmp_path):
        path = tmp_path / "cyl.game"
        path.write_text(dump_game(memory_game(chsh())))
        assert main(["value", str(path), "--type", "loc"]) == 2

    def test_engine_cap_exit_3(self, tmp_path):
        dist = " ".join([repr(1.0 / 12.0)] * 12)
        lines = ["game 12 1 12 1", f"dist {dist}", "win 0 0 0 0"]
        path = tmp_path / "big.game"
        path.write_text("\n".join(lines) + "\n")
        assert main(["value", str(path), "--type", "loc"]) == 3

    def test_unknown_flag_rejected(self, chsh_file):
        with pytest.raises(SystemExit) as err:
            main(["value", chsh_file, "--type", "loc", "--bogus"])
        assert err.value.code == 2

    def test_machine_output_stable(self, chsh_file, capsys):
        main(["value", chsh_file, "--type", "qs", "--format", "machine",
              "--seeds", "6", "--sweeps", "30", "--rng-seed", "7"])
        first = capsys.readouterr().out
        main(["value", chsh_file, "--type", "qs", "--format", "machine",
              "--seeds", "6", "--sweeps", "30", "--rng-seed", "7"])
        assert capsys.readouterr().out == first


class TestSequenceCommand:
    def test_iid_table(self, chsh_file, capsys):
        assert main(["sequence", chsh_file, "--mode", "iid", "--type", "loc",
                     "--n-max", "2"]) == 0
        out = capsys.readouterr().out
        assert "0.750000" in out and "0.790569" in out

    def test_iid_machine(self, chsh_file, capsys):
        main(["sequence", chsh_file, "--mode", "iid", "--type", "loc",
              "--n-max", "2", "--format", "machine"])
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "entry 1 0.75 0.75"
        assert lines[1].startswith("entry 2 0.625 0.7905694150420")

    def test_inner_running_max_column(self, chsh_file, capsys):
        main(["sequence", chsh_file, "--mode", "inner", "--type", "loc",
              "--n-max", "2", "--format", "machine"])
        lines = capsys.readouterr().out.splitlines()
        assert all(len(line.split()) == 5 for line in lines)

    def test_n_max_zero_empty(self, chsh_file, capsys):
        assert main(["sequence", chsh_file, "--mode", "iid", "--type", "loc",
                     "--n-max", "0", "--format", "machine"]) == 0
        assert capsys.readouterr().out == ""

    def test_memory_mode_on_cylinder_rejected(self, tmp_path):
        path = tmp_path / "cyl.game"
        path.write_text(dump_game(memory_game(chsh())))
        assert main(["sequence", str(path), "--mode", "memory",
                     "--type", "loc"]) == 2

    def test_inner_accepts_cylinder_file(self, tmp_path, capsys):
        path = tmp_path / "cyl.game"
        path.write_text(dump_game(memory_game(chsh())))
        assert main(["sequence", str(path), "--mode", "inner", "--type", "loc",
                     "--n-max", "1", "--format", "machine"]) == 0
        line = capsys.readouterr().out.splitlines()[0]
        assert line.startswith("entry 1 1.0")

    def test_truncation_flagged(self, tmp_path, capsys):
        path = tmp_path / "big.game"
        path.write_text(dump_game(chsh()))
        # n = 8 on a binary game: 16^4 predicate entries per stage is fine,
        # so instead use a 6-ary all-win game that trips the enumeration cap
        lines = ["game 6 6 6 6", "dist " + " ".join(["0.027777777777777776"] * 36)]
        lines += [f"win {x} {y} {a} {b}" for x in range(6) for y in range(6)
                  for a in range(6) for b in range(6)]
        path.write_text("\n".join(lines) + "\n")
        main(["sequence", str(path), "--mode", "iid", "--type", "loc",
              "--n-max", "2", "--format", "machine", "--threads", "1"])
        out = capsys.readouterr().out
        assert "truncated 1" in out


class TestDilateCommand:
    def test_trine_table(self, tmp_path, capsys):
        path = tmp_path / "trine.povm"
        path.write_text(dump_povm(trine_povm()))
        assert main(["dilate", str(path)]) == 0
        out = capsys.readouterr().out
        assert "K = C^6" in out

    def test_basis_pvm_machine_roundtrip(self, tmp_path, capsys):
        path = tmp_path / "basis.povm"
        path.write_text(dump_povm(basis_pvm(2)))
        assert main(["dilate", str(path), "--format", "machine"]) == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0].startswith("dilation naimark K=4")
        residuals = {line.split()[1]: float(line.split()[2])
                     for line in lines[1:5]}
        assert all(v <= 1e-12 for v in residuals.values())
        # the emitted PVM block parses back
        block = "\n".join(lines[5:]) + "\n"
        assert load_povm(block).outcomes == 2

    def test_channel_simultaneous(self, tmp_path, capsys):
        path = tmp_path / "chan.povm"
        channel = FiniteChannel([pauli_pvm(PAULI_Z), pauli_pvm(PAULI_X)])
        path.write_text(dump_channel(channel))
        assert main(["dilate", str(path)]) == 0
        assert "simultaneous" in capsys.readouterr().out

    def test_joint_commuting(self, tmp_path, capsys):
        import numpy as np

        z_big = Povm([np.kron(e, np.eye(2)) for e in pauli_pvm(PAULI_Z).effects])
        x_big = Povm([np.kron(np.eye(2), e) for e in pauli_pvm(PAULI_X).effects])
        p1 = tmp_path / "zi.povm"
        p2 = tmp_path / "ix.povm"
        p1.write_text(dump_povm(z_big))
        p2.write_text(dump_povm(x_big))
        assert main(["dilate", str(p1), "--joint", str(p2),
                     "--format", "machine"]) == 0
        out = capsys.readouterr().out
        cross = [line for line in out.splitlines()
                 if line.startswith("residual cross-commutation")]
        assert cross and float(cross[0].split()[2]) <= 1e-10

    def test_joint_non_commuting_exit_4(self, tmp_path, capsys):
        p1 = tmp_path / "z.povm"
        p2 = tmp_path / "x.povm"
        p1.write_text(dump_povm(pauli_pvm(PAULI_Z)))
        p2.write_text(dump_povm(pauli_pvm(PAULI_X)))
        assert main(["dilate", str(p1), "--joint", str(p2)]) == 4
        assert "commute" in capsys.readouterr().err


class TestCheckCommand:
    def test_pr_ns_pass(self, tmp_path, capsys):
        path = tmp_path / "pr.corr"
        path.write_text(dump_correlation(pr_box()))
        assert main(["check", str(path), "--test", "ns",
                     "--format", "machine"]) == 0
        assert capsys.readouterr().out == "check ns pass 0.0\n"

    def test_pr_local_fail(self, tmp_path, capsys):
        path = tmp_path / "pr.corr"
        path.write_text(dump_correlation(pr_box()))
        assert main(["check", str(path), "--test", "local",
                     "--format", "machine"]) == 0
        line = capsys.readouterr().out.splitlines()[0]
        assert line.startswith("check local fail")
        assert float(line.split()[3]) == pytest.approx(0.125, abs=1e-9)

    def test_product_local_pass_with_weights(self, tmp_path, capsys, rng):
        from nsgames import from_local

        weights = rng.dirichlet(np.ones(2))
        q = [rng.dirichlet(np.ones(2), size=2) for _ in range(2)]
        r = [rng.dirichlet(np.ones(2), size=2) for _ in range(2)]
        path = tmp_path / "local.corr"
        path.write_text(dump_correlation(from_local(weights, q, r)))
        assert main(["check", str(path), "--test", "local",
                     "--format", "machine"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("check local pass")
        total = sum(float(line.rsplit("w=", 1)[1]) for line in lines[1:])
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_parse_error_exit_2(self, tmp_path):
        path = tmp_path / "bad.corr"
        path.write_text("corr 2 2 2 2\nnope\n")
        assert main(["check", str(path), "--test", "ns"]) == 2
