"""
Console styling, logging and display utilities.
"""

import logging

from colorama import init as colorama_init
from prompt_toolkit.styles import Style as PTStyle

from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.text import Text

# Initialize colorama
colorama_init(autoreset=True)

# Global console instance
console = Console(force_terminal=True, legacy_windows=False)

# CLI prompt styling
CLI_PROMPT_STYLE = PTStyle.from_dict({
    "prompt": "bold #4da6ff",
    "input": "#ffffff",

    # Completion Menu
    "completion-menu": "bg:#111111 noinherit",
    "completion-menu.completion": "bg:#111111 #bbbbbb",
    "completion-menu.completion.current": "bg:#2d2d2d #ffffff bold",

    # Custom classes
    "completion-command": "bold #ffffff",
    "completion-description": "italic #ff55ff",
    "completion-builtin": "italic #888888",

    "scrollbar.background": "bg:#111111",
    "scrollbar.button": "bg:#555555",
})

LOG_FORMAT = "%(name)s: %(message)s"


def setup_logging(level: int = logging.WARNING) -> logging.Logger:
    """
    Route the package logger through rich.

    Calling it again only changes the level.

    Args:
        level: Logging level for the shellmodal logger

    Returns:
        The configured logger
    """
    logger = logging.getLogger("shellmodal")
    logger.setLevel(level)
    if not any(isinstance(handler, RichHandler) for handler in logger.handlers):
        handler = RichHandler(console=console, show_path=False, markup=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False
    return logger


def print_error(message: str, module: str = "", title: str = "Error") -> None:
    """Red panel naming the module that failed."""
    body = Text()
    if module:
        body.append(f"[{module}] ", style="bold")
    body.append(message)
    console.print(Panel(body, title=title, border_style="red", box=box.ROUNDED))


def print_logo() -> None:
    """Render the gradient welcome logo when interactive mode launches."""
    print("\n")
    logo_lines = [
        " ███████╗██╗  ██╗███████╗██╗     ██╗     ███╗   ███╗ ██████╗ ██████╗  █████╗ ██╗     ",
        " ██╔════╝██║  ██║██╔════╝██║     ██║     ████╗ ████║██╔═══██╗██╔══██╗██╔══██╗██║     ",
        " ███████╗███████║█████╗  ██║     ██║     ██╔████╔██║██║   ██║██║  ██║███████║██║     ",
        " ╚════██║██╔══██║██╔══╝  ██║     ██║     ██║╚██╔╝██║██║   ██║██║  ██║██╔══██║██║     ",
        " ███████║██║  ██║███████╗███████╗███████╗██║ ╚═╝ ██║╚██████╔╝██████╔╝██║  ██║███████╗",
        " ╚══════╝╚═╝  ╚═╝╚══════╝╚══════╝╚══════╝╚═╝     ╚═╝ ╚═════╝ ╚═════╝ ╚═╝  ╚═╝╚══════╝",
    ]
    colors = [(0, 200, 255), (0, 180, 240), (0, 160, 225), (0, 140, 210), (0, 120, 195), (0, 100, 180)]
    for idx, line in enumerate(logo_lines):
        r, g, b = colors[idx]
        print(f"\033[38;2;{r};{g};{b}m{line}\033[0m")
