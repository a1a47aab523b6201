"""
shellmodal - Nonlinear modal analysis of graphene sheets and carbon nanotubes

A command-line tool for:
- Running plate, disk and nanotube modal scenarios from JSON run configurations
- Tracking frequencies along stretch, compression and adhesion load programs
- Tabulating closed-form plate frequencies
- Running the built-in verification checks

Usage:
    python main.py                      # Start interactive shell
    shellmodal run configs/plate.json   # If installed via pip
"""

import shlex
from typing import Dict, List, Optional

from prompt_toolkit.formatted_text import FormattedText
from prompt_toolkit.patch_stdout import patch_stdout

# Import UI components
from shellmodal.errors import ShellModalError
from shellmodal.ui.cli import (
    COMMAND_CATEGORY_ORDER,
    LEGACY_SHORTCUTS,
    create_prompt_session,
    display_command_palette,
    execute_interactive_command,
    get_command_metadata,
)
from shellmodal.ui.console import print_error, print_logo, setup_logging
from shellmodal.ui.run_ui import cmd_analytical, cmd_run, cmd_verify


def build_context(command_metadata: Optional[List[Dict]] = None) -> Dict:
    """Execution context with all command function references."""
    return {
        'run': cmd_run,
        'analytical': cmd_analytical,
        'verify': cmd_verify,

        # Metadata
        'metadata': command_metadata if command_metadata is not None else get_command_metadata(),
        'category_order': COMMAND_CATEGORY_ORDER,
    }


def main():
    """Main entry point for the interactive shell."""
    setup_logging()

    # Get command metadata and create session
    command_metadata = get_command_metadata()
    session = create_prompt_session(command_metadata)

    # Print logo before entering patch_stdout context
    print_logo()
    print("\nType '/' to search commands, 'help' for hints, and 'exit' to quit.\n")

    context = build_context(command_metadata)
    prompt_tokens = FormattedText([("class:prompt", "> ")])

    # Main REPL loop
    while True:
        try:
            with patch_stdout():
                user_input = session.prompt(prompt_tokens)
        except KeyboardInterrupt:
            print("\n(Press Ctrl+D or type 'exit' to quit, Enter to continue)")
            continue
        except EOFError:
            print("\nGoodbye!")
            break

        user_input = user_input.strip()
        if not user_input:
            continue

        # Handle "/command" syntax
        if user_input.startswith('/'):
            user_input = user_input[1:].strip()

            # Show palette if just '/'
            if not user_input:
                display_command_palette(command_metadata, COMMAND_CATEGORY_ORDER, "")
                continue

        # Parse command
        try:
            tokens = shlex.split(user_input)
        except ValueError as exc:
            print(f"✗ Unable to parse input: {exc}")
            continue

        if not tokens:
            continue

        # Resolve shortcuts
        command = LEGACY_SHORTCUTS.get(tokens[0], tokens[0])
        args = tokens[1:]

        # Handle exit
        if command in {"exit", "quit"}:
            print("Goodbye!")
            break

        # Execute command
        try:
            status = execute_interactive_command(command, args, context)
            if status is None:
                print(f"Unknown command: '{user_input}'. Type '/' to explore commands.")
        except KeyboardInterrupt:
            print("\n\n✗ Command cancelled")
            continue
        except ShellModalError as e:
            print_error(e.message, e.module)
            continue


if __name__ == "__main__":
    main()
