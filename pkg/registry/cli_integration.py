import argparse
from typing import Any, Dict

from registry.lab import ToolMetadata, ToolParameter, VerificationLab


def _output_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="write JSON (the default)")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("--output", default=None, help="write to this file instead of stdout")
    return common


def _add_option(command_parser: argparse.ArgumentParser, param: ToolParameter):
    if param.annotation is bool:
        command_parser.add_argument(param.flag, dest=param.name, action="store_true", help=param.help)
        return
    kwargs: Dict[str, Any] = {"dest": param.name, "help": param.help}
    if param.annotation in (int, float, str):
        kwargs["type"] = param.annotation
    if param.required:
        kwargs["required"] = True
    else:
        kwargs["default"] = param.default
    command_parser.add_argument(param.flag, **kwargs)


def _handler(lab_instance: VerificationLab, tool: ToolMetadata):
    def handler(namespace: argparse.Namespace):
        params = {key: value for key, value in vars(namespace).items() if key in tool.parameters}
        return lab_instance.execute_tool(tool.name, **params)

    handler.__name__ = f"execute_{tool.group}_{tool.command.replace('-', '_')}"
    return handler


def register_lab_commands(parser: argparse.ArgumentParser, lab_instance: VerificationLab, dest: str = "group"):
    """
    Register all lab tools as argparse subcommands.

    A tool named "<group>.<command>" becomes `<group> <command>`; each
    parameter becomes a `--flag-name` option typed from its annotation.

    Args:
        parser: The top-level argument parser
        lab_instance: The VerificationLab instance
        dest: Namespace attribute receiving the group name
    """
    common = _output_options()
    by_group = lab_instance.groups()
    groups = parser.add_subparsers(dest=dest, metavar="{" + ",".join(by_group) + "}")
    groups.required = True

    for group_name, tools in by_group.items():
        group_parser = groups.add_parser(group_name, help=f"{group_name} commands")
        commands = group_parser.add_subparsers(dest="command", metavar="{" + ",".join(t.command for t in tools) + "}")
        commands.required = True

        for tool in tools:
            command_parser = commands.add_parser(
                tool.command, parents=[common], help=tool.summary, description=tool.description
            )
            for param in tool.parameters.values():
                _add_option(command_parser, param)
            command_parser.set_defaults(handler=_handler(lab_instance, tool), tool=tool.name)

    return groups
