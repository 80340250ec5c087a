"""
Unittests for main module.
"""
import os
import json
import pytest
import libbandgraph.main


class TestMain:
    """
    The the main module entry point.
    """

    @pytest.fixture(autouse=True)
    def setup(self, dummy_command):
        """
        Setup main before running tests.
        """
        folder = os.path.join(
            os.path.dirname(libbandgraph.main.__file__), "commands")

        libbandgraph.main.LOADED_COMMANDS.clear()
        libbandgraph.main._discover_commands(folder)
        libbandgraph.main.LOADED_COMMANDS.append(dummy_command)

        yield

        libbandgraph.main.LOADED_COMMANDS.clear()

    def read_report(self, out_dir) -> dict:
        """
        Read the report of a command run.
        """
        report = os.path.join(str(out_dir), "report.json")
        assert os.path.isfile(report)

        with open(report, 'r') as report_f:
            return json.loads(report_f.read())

    def test_wrong_options(self):
        """
        Test wrong options.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=["dummy", "--run-command1234"])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    def test_help(self, capsys):
        """
        Test help command.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=["help"])

        assert excinfo.value.code == libbandgraph.main.RC_OK

        captured = capsys.readouterr()
        for name in ["kernels", "locallaw", "selfenergy", "texpand",
                     "verify", "dummy"]:
            assert name in captured.out

    def test_version(self, capsys):
        """
        Test --version option.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=["--version"])

        assert excinfo.value.code == libbandgraph.main.RC_OK
        assert libbandgraph.__version__ in capsys.readouterr().out

    def test_unknown_command(self, tmpdir):
        """
        Test a command which doesn't exist.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=["foo", "-o", str(tmpdir)])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    def test_unknown_param(self, tmpdir):
        """
        Test a command parameter which doesn't exist.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=["dummy:foo=1", "-o", str(tmpdir)])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    def test_empty_param(self, tmpdir):
        """
        Test a command parameter without value.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(
                cmd_args=["dummy:outcome=", "-o", str(tmpdir)])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    @pytest.mark.parametrize("seed", ["-1", "18446744073709551616", "abc"])
    def test_invalid_seed(self, tmpdir, seed):
        """
        Test seeds outside the unsigned 64 bits range.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(
                cmd_args=["dummy", "-o", str(tmpdir), "--seed", seed])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    def test_missing_config(self, tmpdir):
        """
        Test a configuration file which doesn't exist.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=[
                "dummy",
                "-o", str(tmpdir),
                "-c", str(tmpdir / "missing.json")])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    def test_invalid_config(self, tmpdir):
        """
        Test a configuration with an invalid geometry.
        """
        config = tmpdir / "config.json"
        config.write(json.dumps({"lattice": {"L": 7}}))

        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=[
                "dummy", "-o", str(tmpdir / "out"), "-c", str(config)])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    def test_invalid_eta(self, tmpdir):
        """
        Test a non positive eta.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(
                cmd_args=["dummy", "-o", str(tmpdir), "--eta", "0"])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    def test_run(self, tmpdir):
        """
        Test a successful command run.
        """
        out_dir = tmpdir / "out"

        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=[
                "dummy", "-o", str(out_dir), "--seed", "0x10"])

        assert excinfo.value.code == libbandgraph.main.RC_OK

        report = self.read_report(out_dir)
        assert report["manifest"]["seeds"] == [16]

    def test_run_config_override(self, tmpdir):
        """
        Test command line options override the configuration file.
        """
        config = tmpdir / "config.json"
        config.write(json.dumps({"seed": 3, "samples": 10}))
        out_dir = tmpdir / "out"

        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=[
                "dummy",
                "-o", str(out_dir),
                "-c", str(config),
                "-N", "20"])

        assert excinfo.value.code == libbandgraph.main.RC_OK

        report = self.read_report(out_dir)
        assert report["manifest"]["config"]["seed"] == 3
        assert report["manifest"]["config"]["samples"] == 20

    def test_run_fail(self, tmpdir):
        """
        Test a failing hard check.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(
                cmd_args=["dummy:outcome=fail", "-o", str(tmpdir)])

        assert excinfo.value.code == libbandgraph.main.RC_ERROR

    def test_run_warn(self, tmpdir):
        """
        Test calibrated diagnostics fail only with --strict.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(
                cmd_args=["dummy:outcome=warn", "-o", str(tmpdir / "a")])

        assert excinfo.value.code == libbandgraph.main.RC_OK

        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=[
                "dummy:outcome=warn", "-o", str(tmpdir / "b"), "--strict"])

        assert excinfo.value.code == libbandgraph.main.RC_ERROR

    def test_run_verbose(self, tmpdir, capsys):
        """
        Test --verbose prints every check.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(
                cmd_args=["dummy", "-o", str(tmpdir), "--verbose", "-n"])

        assert excinfo.value.code == libbandgraph.main.RC_OK
        assert "exact" in capsys.readouterr().out

    def test_verify_without_op(self, tmpdir):
        """
        Test verify command requires --op.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=[
                "verify",
                "-o", str(tmpdir),
                "-c", str(self._small(tmpdir))])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    def test_selfenergy_low_order(self, tmpdir):
        """
        Test selfenergy command requires order >= 3.
        """
        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=[
                "selfenergy",
                "-o", str(tmpdir),
                "-c", str(self._small(tmpdir)),
                "-k", "2"])

        assert excinfo.value.code == libbandgraph.main.RC_USAGE

    @staticmethod
    def _small(tmpdir) -> str:
        config = tmpdir / "small.json"
        config.write(json.dumps({
            "lattice": {"d": 1, "L": 16, "W": 2},
            "eta": [1.0],
            "samples": 4,
        }))

        return str(config)

    def test_kernels(self, tmpdir):
        """
        Test kernels command.
        """
        out_dir = tmpdir / "out"

        with pytest.raises(SystemExit) as excinfo:
            libbandgraph.main.run(cmd_args=[
                "kernels",
                "-o", str(out_dir),
                "-c", self._small(tmpdir)])

        assert excinfo.value.code == libbandgraph.main.RC_OK

        for name in ["kernel_S.json", "kernel_B.json",
                     "kernel_Theta_eta=1.json", "kernels.csv", "checks.csv"]:
            assert os.path.isfile(str(out_dir / name))

        report = self.read_report(out_dir)
        assert report["stats"]["failed"] == 0

