"""
CLI Command handling and interactive shell.
"""

import difflib
import logging
import sys
from typing import Dict, List, Optional, Tuple

from prompt_toolkit import PromptSession
from prompt_toolkit.auto_suggest import AutoSuggestFromHistory
from prompt_toolkit.completion import Completer, Completion
from prompt_toolkit.formatted_text import FormattedText
from prompt_toolkit.history import FileHistory
from prompt_toolkit.patch_stdout import StdoutProxy
from prompt_toolkit.shortcuts import CompleteStyle

from rich.console import Group
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from ..config import CLI_HISTORY_FILE, SCENARIOS, ensure_history_file
from .console import CLI_PROMPT_STYLE, console, print_error, setup_logging

# Command metadata
COMMAND_CATEGORY_ORDER = [
    "Simulation",
    "Verification",
    "Interactive Tools",
]

# flags that take no value
BOOLEAN_FLAGS = {"verbose", "debug"}


def get_command_metadata() -> List[Dict]:
    """Return metadata for all commands."""
    return [
        # Simulation
        {"name": "run <config...>", "description": "Run config files (--jobs N, --output DIR)", "category": "Simulation"},
        {"name": "analytical", "description": "Closed-form plate table (--shape, --size, --boundary, ...)", "category": "Simulation"},
        {"name": "scenarios", "description": "List the run scenarios", "category": "Simulation"},

        # Verification
        {"name": "verify [check...]", "description": "Run the built-in oracle checks", "category": "Verification"},

        # Interactive
        {"name": "log <level>", "description": "Set log level (warning, info, debug)", "category": "Interactive Tools"},
        {"name": "help", "description": "Show help information", "category": "Interactive Tools"},
        {"name": "exit", "description": "Exit the CLI", "category": "Interactive Tools"},
    ]


def fuzzy_filter_commands(commands: List[Dict], query: str) -> List[Dict]:
    """Filter commands using fuzzy matching."""
    if not query:
        return commands

    query_lower = query.lower()
    filtered = []

    for command in commands:
        haystack = f"{command['name']} {command['description']}".lower()
        if query_lower in haystack:
            filtered.append(command)
            continue
        ratio = difflib.SequenceMatcher(None, query_lower, command['name'].lower()).ratio()
        if ratio >= 0.6:
            filtered.append(command)

    return filtered


def display_command_palette(commands: List[Dict], category_order: List[str], query: str = "") -> None:
    """Display available commands in a categorized palette."""
    original_stdout = sys.stdout
    if isinstance(sys.stdout, StdoutProxy):
        sys.stdout = sys.stdout.original_stdout

    try:
        filtered_commands = fuzzy_filter_commands(commands, query)
        if not filtered_commands:
            message = f"No commands match '{query}'" if query else "No commands available"
            console.print(Panel(Text(message, justify="center"), title="Available Commands", border_style="red"))
            return

        grouped = {category: [] for category in category_order}
        for command in filtered_commands:
            grouped.setdefault(command['category'], []).append(command)

        sections = []
        for category in category_order:
            items = grouped.get(category) or []
            if not items:
                continue
            header = Text(category, style="bold green")
            table = Table.grid(expand=True)
            table.add_column(style="bold cyan", width=20)
            table.add_column()
            for item in items:
                table.add_row(item['name'], item['description'])
            sections.extend([header, table, Text("")])

        sections.append(Text("Type to search commands...", style="dim"))
        console.print(Panel(Group(*sections), title="Available Commands", border_style="green"))
    finally:
        sys.stdout = original_stdout


class ShellModalCommandCompleter(Completer):
    """Command completer for the shellmodal shell."""

    def __init__(self, metadata: List[Dict]):
        self.metadata = metadata
        self.names = [m['name'].split(' ')[0] for m in metadata] + ["quit", "?"]

    def get_completions(self, document, complete_event):
        text = document.text_before_cursor
        if text.startswith('/'):
            query = text[1:].lower()
            for cmd in self.metadata:
                name = cmd['name']
                desc = cmd.get('description', '')
                if query in name.lower() or query in desc.lower():
                    yield Completion(
                        name.split(' ')[0],
                        start_position=-len(query),
                        display=FormattedText([
                            ("class:completion-command", f"{name:<18}"),
                            ("class:completion-description", f"  {desc}")
                        ]),
                    )
            for builtin in ["quit", "?"]:
                if query in builtin:
                    yield Completion(
                        builtin,
                        start_position=-len(query),
                        display=FormattedText([
                            ("class:completion-command", f"{builtin:<18}"),
                            ("class:completion-builtin", "  Built-in command")
                        ]),
                    )
        else:
            word = text.split(' ')[-1]
            for name in self.names:
                if name.startswith(word):
                    yield Completion(name, start_position=-len(word))


LEGACY_SHORTCUTS = {
    "r": "run", "a": "analytical", "v": "verify", "s": "scenarios", "q": "exit",
}


def create_prompt_session(command_metadata: List[Dict]) -> PromptSession:
    """Create a configured prompt session."""
    ensure_history_file()
    completer = ShellModalCommandCompleter(command_metadata)
    return PromptSession(
        history=FileHistory(str(CLI_HISTORY_FILE)),
        auto_suggest=AutoSuggestFromHistory(),
        completer=completer,
        complete_style=CompleteStyle.COLUMN,
        style=CLI_PROMPT_STYLE,
    )


def parse_flags(args: List[str]) -> Tuple[List[str], Dict[str, str]]:
    """
    Split arguments into positionals and --key value / --key=value options.

    Boolean flags (--verbose, --debug) map to "1".

    Raises:
        ValueError: if an option is missing its value
    """
    positional, options = [], {}
    index = 0
    while index < len(args):
        arg = args[index]
        if not arg.startswith("--"):
            positional.append(arg)
            index += 1
            continue
        key, sep, value = arg[2:].partition("=")
        if not sep:
            if key in BOOLEAN_FLAGS:
                value = "1"
            elif index + 1 < len(args) and not args[index + 1].startswith("--"):
                index += 1
                value = args[index]
            else:
                raise ValueError(f"option --{key} needs a value")
        options[key] = value
        index += 1
    return positional, options


def log_level(options: Dict[str, str]) -> int:
    if "debug" in options:
        return logging.DEBUG
    if "verbose" in options:
        return logging.INFO
    return logging.WARNING


def display_scenarios() -> None:
    table = Table(title="Scenarios", header_style="bold cyan")
    table.add_column("Scenario", style="bold white")
    for name in SCENARIOS:
        table.add_row(name)
    console.print(table)


def execute_interactive_command(command: str, args: List[str], context: Dict) -> Optional[int]:
    """
    Execute a command.

    Args:
        command: Command name
        args: Command arguments
        context: Context dictionary with function references

    Returns:
        Exit status, or None if the command is unknown
    """
    command = command.lower()

    if command in {"help", "?"}:
        display_command_palette(context['metadata'], context['category_order'])
        return 0

    try:
        positional_args, options = parse_flags(args)
    except ValueError as exc:
        print_error(str(exc), "cli")
        return 2
    if "verbose" in options or "debug" in options:
        setup_logging(log_level(options))

    if command == "run":
        try:
            jobs = int(options.get("jobs", 1))
        except ValueError:
            print_error(f"--jobs needs an integer, got '{options['jobs']}'", "cli")
            return 2
        return context['run'](positional_args, output=options.get("output"), jobs=max(jobs, 1))

    if command == "analytical":
        options.pop("verbose", None)
        options.pop("debug", None)
        return context['analytical'](options)

    if command == "verify":
        return context['verify'](positional_args)

    if command == "scenarios":
        display_scenarios()
        return 0

    if command == "log":
        levels = {"warning": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
        level = positional_args[0].lower() if positional_args else ""
        if level not in levels:
            print_error(f"log level must be one of {', '.join(levels)}", "cli")
            return 2
        setup_logging(levels[level])
        console.print(f"[dim]Log level set to {level}[/dim]")
        return 0

    return None
