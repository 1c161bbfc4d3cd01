import inspect
import logging
from functools import wraps
from typing import Any, Callable, Dict, List, Optional, get_type_hints

from pydantic import BaseModel, Field

logger = logging.getLogger("lab")


def _type_name(annotation: Any) -> str:
    return getattr(annotation, "__name__", str(annotation))


class ToolParameter(BaseModel):
    name: str
    annotation: Any = Field(default=Any)
    required: bool = True
    default: Any = None
    help: str = ""

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


class ToolMetadata(BaseModel):
    """A registered lab command: "<group>.<command>" plus its signature."""

    name: str
    description: str = ""
    function: Callable
    parameters: Dict[str, ToolParameter] = {}
    return_type: Any = None

    @property
    def group(self) -> str:
        return self.name.split(".", 1)[0]

    @property
    def command(self) -> str:
        return self.name.split(".", 1)[-1]

    @property
    def summary(self) -> str:
        return self.description.split("\n")[0] if self.description else ""


def signature_parameters(func: Callable, help: Optional[Dict[str, str]] = None) -> Dict[str, ToolParameter]:
    hints = get_type_hints(func)
    out = {}
    for param_name, param in inspect.signature(func).parameters.items():
        required = param.default is inspect.Parameter.empty
        out[param_name] = ToolParameter(
            name=param_name,
            annotation=hints.get(param_name, Any),
            required=required,
            default=None if required else param.default,
            help=(help or {}).get(param_name, ""),
        )
    return out


class VerificationLab:
    def __init__(self, project_name: str):
        self.project_name = project_name
        self.tools: Dict[str, ToolMetadata] = {}
        logger.debug(f"Lab initialized for project: {project_name}")

    def tool(self, name: str = None, description: str = None, help: Optional[Dict[str, str]] = None):
        """
        Decorator to register a function as a lab command.

        Args:
            name: Dotted "<group>.<command>" name. Defaults to the function name.
            description: Defaults to the function docstring.
            help: Optional per-parameter help strings.
        """

        def decorator(func):
            tool_name = name or func.__name__
            if tool_name in self.tools:
                raise ValueError(f"Tool already registered: {tool_name}")

            @wraps(func)
            def wrapper(*args, **kwargs):
                logger.debug(f"Executing tool: {tool_name}")
                try:
                    return func(*args, **kwargs)
                except Exception as e:
                    logger.error(f"Error executing tool {tool_name}: {e}")
                    raise

            self.tools[tool_name] = ToolMetadata(
                name=tool_name,
                description=description or inspect.getdoc(func) or "",
                function=wrapper,
                parameters=signature_parameters(func, help),
                return_type=get_type_hints(func).get("return", Any),
            )
            logger.debug(f"Registered tool: {tool_name}")
            return wrapper

        return decorator

    def list_tools(self) -> List[str]:
        return list(self.tools)

    def groups(self) -> Dict[str, List[ToolMetadata]]:
        """Tools keyed by group, in registration order."""
        out: Dict[str, List[ToolMetadata]] = {}
        for tool in self.tools.values():
            out.setdefault(tool.group, []).append(tool)
        return out

    def get_tool_info(self, tool_name: str) -> Optional[Dict[str, Any]]:
        tool = self.tools.get(tool_name)
        if tool is None:
            return None
        parameters = {
            p.name: {"type": _type_name(p.annotation), "required": p.required, "default": p.default, "help": p.help}
            for p in tool.parameters.values()
        }
        return {
            "name": tool.name,
            "group": tool.group,
            "description": tool.description,
            "parameters": parameters,
            "return_type": _type_name(tool.return_type),
        }

    def execute_tool(self, tool_name: str, **kwargs) -> Any:
        tool = self.tools.get(tool_name)
        if tool is None:
            raise ValueError(f"Tool not found: {tool_name}")
        unknown = set(kwargs) - set(tool.parameters)
        if unknown:
            raise ValueError(f"Unknown parameters for {tool_name}: {', '.join(sorted(unknown))}")
        return tool.function(**kwargs)
