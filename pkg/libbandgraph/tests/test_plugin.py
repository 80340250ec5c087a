"""
Unittests for plugin module.
"""
import os
import pytest
import libbandgraph.plugin
from libbandgraph.plugin import PluginError
from libbandgraph.command import Command


class TestPlugin:
    """
    Test plugins discovery.
    """

    def test_discover_errors(self):
        """
        Test discover with a missing folder.
        """
        with pytest.raises(PluginError):
            libbandgraph.plugin.discover(Command, None)

        with pytest.raises(PluginError):
            libbandgraph.plugin.discover(Command, "this_folder_doesnt_exist")

    def test_discover(self, tmpdir):
        """
        Test discover method.
        """
        count = 5
        for i in range(count):
            myfile = tmpdir / f"command{i}.py"
            myfile.write(
                "from libbandgraph.command import Command\n\n"
                f"class MyCommand{i}(Command):\n"
                "    @property\n"
                "    def name(self):\n"
                f"        return 'mycommand{count - i}'\n")

        (tmpdir / "_private.py").write("raise RuntimeError()\n")

        plugins = libbandgraph.plugin.discover(Command, str(tmpdir))

        assert len(plugins) == count
        assert [p.name for p in plugins] == sorted(p.name for p in plugins)

    def test_discover_commands(self):
        """
        Test that the shipped commands are found.
        """
        folder = os.path.join(
            os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
            "commands")

        plugins = libbandgraph.plugin.discover(Command, folder)
        names = [p.name for p in plugins]

        assert names == ["kernels", "locallaw", "selfenergy", "texpand", "verify"]

    def test_discover_twice(self, tmpdir):
        """
        Test two plugins with the same name.
        """
        for i in range(2):
            myfile = tmpdir / f"command{i}.py"
            myfile.write(
                "from libbandgraph.command import Command\n\n"
                f"class MyCommand{i}(Command):\n"
                "    @property\n"
                "    def name(self):\n"
                "        return 'mycommand'\n")

        with pytest.raises(PluginError):
            libbandgraph.plugin.discover(Command, str(tmpdir))

    def test_discover_broken(self, tmpdir):
        """
        Test a plugin file that can't be imported.
        """
        (tmpdir / "broken.py").write("raise RuntimeError()\n")

        with pytest.raises(PluginError):
            libbandgraph.plugin.discover(Command, str(tmpdir))
