"""
.. module:: plugin
    :platform: Linux
    :synopsis: loading of command plugins from a folder
"""
import os
import inspect
import logging
import importlib.util
from libbandgraph import BandGraphException

LOGGER = logging.getLogger("bandgraph.plugin")


class PluginError(BandGraphException):
    """
    Raised when plugins can't be loaded from a folder.
    """


class Plugin:
    """
    An object loaded at runtime and configured by name.
    """

    def setup(self, **kwargs: dict) -> None:
        """
        Configure the plugin with the parameters given by the user.
        :param kwargs: plugin parameters
        :type kwargs: dict
        """
        raise NotImplementedError()

    @property
    def config_help(self) -> dict:
        """
        Help message of every parameter, shown by the ``help`` command.
        :returns: dict
        """
        raise NotImplementedError()

    @property
    def name(self) -> str:
        """
        Name used to select the plugin.
        """
        raise NotImplementedError()


def _load_module(path: str) -> object:
    """
    Import the python file at ``path`` under a private module name.
    """
    modname = "bandgraph_plugin_" + os.path.splitext(os.path.basename(path))[0]
    spec = importlib.util.spec_from_file_location(modname, path)
    module = importlib.util.module_from_spec(spec)

    try:
        spec.loader.exec_module(module)
    except Exception as err:
        raise PluginError(f"Can't load plugin file {path}: {err}") from err

    return module


def discover(mytype: type, folder: str) -> list:
    """
    Instantiate every concrete ``mytype`` subclass defined inside the
    public python files of ``folder``, sorted by plugin name. Files
    starting with an underscore are skipped.
    :param mytype: plugins base class
    :type mytype: type
    :param folder: plugins folder
    :type folder: str
    :raises PluginError: when the folder doesn't exist, a file can't be
        imported or two plugins share the same name
    :returns: list
    """
    if not folder or not os.path.isdir(folder):
        raise PluginError(f"Plugins folder doesn't exist: {folder}")

    plugins = {}

    for myfile in sorted(os.listdir(folder)):
        path = os.path.join(folder, myfile)
        if not myfile.endswith(".py") or myfile.startswith("_") or \
                not os.path.isfile(path):
            continue

        module = _load_module(path)

        for _, klass in inspect.getmembers(module, inspect.isclass):
            if klass.__module__ != module.__name__ or \
                    klass is mytype or \
                    not issubclass(klass, mytype) or \
                    inspect.isabstract(klass):
                continue

            obj = klass()
            if obj.name in plugins:
                raise PluginError(
                    f"Plugin name '{obj.name}' is defined twice in {folder}")

            LOGGER.debug("Loaded plugin '%s' from %s", obj.name, path)
            plugins[obj.name] = obj

    return [plugins[name] for name in sorted(plugins)]
