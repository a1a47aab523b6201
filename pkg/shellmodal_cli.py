"""
shellmodal CLI - Entry point wrapper for the main CLI application
This file provides the console script entry point for the installed package.

    shellmodal                                  interactive shell
    shellmodal run <config...> [--jobs N] [--output DIR]
    shellmodal analytical [--shape circle --size 5 --boundary clamped ...]
    shellmodal verify [check...]
"""
import sys
from typing import List, Optional


def dispatch(argv: List[str]) -> int:
    """Run one command given on the command line and return its exit status."""
    from main import build_context
    from shellmodal.errors import ShellModalError
    from shellmodal.ui.cli import LEGACY_SHORTCUTS, execute_interactive_command
    from shellmodal.ui.console import print_error, setup_logging

    setup_logging()
    command = LEGACY_SHORTCUTS.get(argv[0], argv[0])
    try:
        status = execute_interactive_command(command, argv[1:], build_context())
    except ShellModalError as e:
        print_error(e.message, e.module)
        return e.exit_status
    if status is None:
        print_error(f"unknown command '{argv[0]}' (try: run, analytical, verify, help)", "cli")
        return 2
    return status


def main(argv: Optional[List[str]] = None):
    """CLI entry point - runs a command, or the interactive shell without arguments."""
    argv = sys.argv[1:] if argv is None else argv
    try:
        if argv:
            sys.exit(dispatch(argv))
        from main import main as interactive_menu
        interactive_menu()
    except KeyboardInterrupt:
        print("\n\nExiting...")
        sys.exit(0)


if __name__ == "__main__":
    main()
