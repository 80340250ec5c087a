"""
.. module:: main
    :platform: Linux
    :synopsis: main script
"""
import os
import asyncio
import argparse
import libbandgraph
import libbandgraph.plugin
from libbandgraph import __version__
from libbandgraph import BandGraphException
from libbandgraph import CapacityError
from libbandgraph.command import Command
from libbandgraph.command import CommandError
from libbandgraph.config import MAX_SEED
from libbandgraph.config import ConfigError
from libbandgraph.config import RunConfig
from libbandgraph.config import load_config
from libbandgraph.ui import ConsoleUserInterface
from libbandgraph.ui import VerboseUserInterface
from libbandgraph.session import Session

# runtime loaded Command(s)
LOADED_COMMANDS = []

# return codes of the application
RC_OK = 0
RC_ERROR = 1
RC_USAGE = 2
RC_CAPACITY = 3
RC_INTERRUPT = 130


def _from_params_to_config(params: list) -> dict:
    """
    Return a configuration as dictionary according with input parameters
    given to the commandline option.
    """
    config = {}
    for param in params:
        if '=' not in param:
            raise argparse.ArgumentTypeError(
                f"Missing '=' assignment in '{param}' parameter")

        key, value = param.split('=', 1)

        if not key:
            raise argparse.ArgumentTypeError(
                f"Empty key for '{param}' parameter")

        if not value:
            raise argparse.ArgumentTypeError(
                f"Empty value for '{param}' parameter")

        config[key] = value

    return config


def _dict_config(opt_name: str, plugins: list, value: str) -> dict:
    """
    Generic dictionary option configuration.
    """
    if value == "help":
        msg = f"{opt_name} supports the following syntax:\n"
        msg += "\n\t<name>:<param1>=<value1>:<param2>=<value2>:..\n"
        msg += "\nSupported commands: | "

        for plugin in plugins:
            msg += f"{plugin.name} | "

        msg += '\n'

        for plugin in plugins:
            msg += f"\n{plugin.name}: {plugin.description}\n"
            if not plugin.config_help:
                msg += "\thas no parameters\n"
            else:
                for opt, desc in plugin.config_help.items():
                    msg += f"\t{opt}: {desc}\n"

        return {"help": msg}

    if not value:
        raise argparse.ArgumentTypeError("Parameters list can't be empty")

    params = value.split(':')
    name = params[0]

    config = _from_params_to_config(params[1:])
    config['name'] = name

    return config


def _command_config(value: str) -> dict:
    """
    Return a command configuration according with input string.
    """
    return _dict_config("command", LOADED_COMMANDS, value)


def _seed(value: str) -> int:
    """
    Parse an unsigned 64 bits seed.
    """
    try:
        seed = int(value, 0)
    except ValueError as err:
        raise argparse.ArgumentTypeError(
            f"'{value}' is not an integer") from err

    if seed < 0 or seed > MAX_SEED:
        raise argparse.ArgumentTypeError(
            f"seed must be inside [0, 2^64 - 1]: {value}")

    return seed


def _discover_commands(path: str) -> None:
    """
    Discover Command implementations.
    """
    objs = libbandgraph.plugin.discover(Command, path)
    LOADED_COMMANDS.extend(objs)


def _get_plugin(plugins: list, name: str) -> object:
    """
    Return the Plugin object with given name.
    """
    obj = None
    for obj_comp in plugins:
        if obj_comp.name == name:
            obj = obj_comp
            break

    return obj


def _get_command(
        args: argparse.Namespace,
        parser: argparse.ArgumentParser) -> Command:
    """
    Create and return the Command object.
    """
    cmd_name = args.command["name"]
    command = _get_plugin(LOADED_COMMANDS, cmd_name)
    if not command:
        parser.error(f"'{cmd_name}' command is not available")

    try:
        command.setup(**args.command)
    except CommandError as err:
        parser.error(str(err))

    return command


def _get_config(
        args: argparse.Namespace,
        parser: argparse.ArgumentParser) -> RunConfig:
    """
    Read the configuration file and apply the command line options.
    """
    data = {}

    try:
        if args.config:
            data = load_config(args.config)

        overrides = {
            "seed": args.seed,
            "samples": args.samples,
            "order": args.order,
            "error_order": args.error_order,
            "eta": args.eta,
            "op": args.op,
        }
        data.update({k: v for k, v in overrides.items() if v is not None})

        config = RunConfig(**data)

        # geometry and spectral points are validated before running
        _ = config.lattice
        _ = config.points
    except ConfigError as err:
        parser.error(str(err))

    return config


def _start_session(
        args: argparse.Namespace,
        parser: argparse.ArgumentParser) -> None:
    """
    Run the command inside a session.
    """
    command = _get_command(args, parser)
    config = _get_config(args, parser)

    params = {k: v for k, v in args.command.items() if k != "name"}
    out_dir = args.out or os.path.join(os.getcwd(), f"bandgraph-{command.name}")

    session = Session(
        command=command,
        params=params,
        config=config,
        out_dir=out_dir,
        strict=args.strict)

    # initialize user interface
    if args.verbose:
        VerboseUserInterface(args.no_colors)
    else:
        ConsoleUserInterface(args.no_colors)

    # start event loop
    exit_code = RC_OK

    async def session_run() -> None:
        """
        Run session then stop events handler.
        """
        try:
            await session.run()
        finally:
            await libbandgraph.events.stop()

    loop = libbandgraph.get_event_loop()

    try:
        loop.run_until_complete(
            asyncio.gather(*[
                libbandgraph.events.start(),
                session_run()
            ])
        )

        if not session.results.ok(strict=args.strict):
            exit_code = RC_ERROR
    except KeyboardInterrupt:
        exit_code = RC_INTERRUPT
    except CapacityError:
        exit_code = RC_CAPACITY
    except CommandError as err:
        parser.error(str(err))
    except BandGraphException:
        exit_code = RC_ERROR
    finally:
        try:
            # at this point loop has been closed, so we can collect all
            # tasks and cancel them
            libbandgraph.cancel_tasks(loop)
        except KeyboardInterrupt:
            pass

    parser.exit(exit_code)


def run(cmd_args: list = None) -> None:
    """
    Entry point of the application.
    """
    currdir = os.path.dirname(os.path.realpath(__file__))
    if not LOADED_COMMANDS:
        _discover_commands(os.path.join(currdir, "commands"))

    parser = argparse.ArgumentParser(
        description='bandgraph - random band matrix graph expansions')

    # generic arguments
    parser.add_argument(
        "--version",
        "-V",
        action="version",
        version=f"%(prog)s, {__version__}")

    # user interface arguments
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Verbose mode")
    parser.add_argument(
        "--no-colors",
        "-n",
        action="store_true",
        help="If defined, no colors are shown")

    # command arguments
    parser.add_argument(
        "command",
        type=_command_config,
        help="Command and its parameters. For help please use 'help'")
    parser.add_argument(
        "--config",
        "-c",
        type=str,
        help="JSON configuration file")
    parser.add_argument(
        "--out",
        "-o",
        type=str,
        help="Output directory")
    parser.add_argument(
        "--seed",
        "-s",
        type=_seed,
        help="Root seed of the random streams")
    parser.add_argument(
        "--samples",
        "-N",
        type=int,
        help="Number of Monte Carlo samples")
    parser.add_argument(
        "--order",
        "-k",
        type=int,
        help="Expansion order")
    parser.add_argument(
        "--error-order",
        "-D",
        type=int,
        help="Error order")
    parser.add_argument(
        "--eta",
        "-e",
        type=float,
        action="append",
        help="Imaginary part of the spectral parameter (repeatable)")
    parser.add_argument(
        "--op",
        type=str,
        help="Operator or identity verified by the verify command")
    parser.add_argument(
        "--strict",
        action="store_true",
        help="Treat calibrated diagnostics as hard failures")

    # parse comand line
    args = parser.parse_args(cmd_args)

    if "help" in args.command:
        print(args.command["help"])
        parser.exit(RC_OK)

    if args.config and not os.path.isfile(args.config):
        parser.error(f"'{args.config}' configuration file doesn't exist")

    if args.out and os.path.exists(args.out) and not os.path.isdir(args.out):
        parser.error(f"'{args.out}' is not a directory")

    _start_session(args, parser)


if __name__ == "__main__":
    run()
