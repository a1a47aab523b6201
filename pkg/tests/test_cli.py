import logging

import pytest

from shellmodal.ui.cli import (
    COMMAND_CATEGORY_ORDER,
    execute_interactive_command,
    fuzzy_filter_commands,
    get_command_metadata,
    log_level,
    parse_flags,
)
from shellmodal.ui.run_ui import cmd_analytical, cmd_run, cmd_verify


@pytest.fixture
def calls():
    return []


@pytest.fixture
def context(calls):
    def record(name, status=0):
        def command(*args, **kwargs):
            calls.append((name, args, kwargs))
            return status

        return command

    return {
        "run": record("run"),
        "analytical": record("analytical"),
        "verify": record("verify", 1),
        "metadata": get_command_metadata(),
        "category_order": COMMAND_CATEGORY_ORDER,
    }


class TestParseFlags:
    def test_positionals_and_options(self):
        positional, options = parse_flags(["a.json", "--jobs", "2", "--output=out", "b.json"])
        assert positional == ["a.json", "b.json"]
        assert options == {"jobs": "2", "output": "out"}

    def test_boolean_flags(self):
        _, options = parse_flags(["--verbose", "x.json"])
        assert options == {"verbose": "1"}
        assert log_level(options) == logging.INFO
        assert log_level({"debug": "1"}) == logging.DEBUG
        assert log_level({}) == logging.WARNING

    def test_missing_value(self):
        with pytest.raises(ValueError):
            parse_flags(["--output"])


class TestDispatch:
    def test_run(self, context, calls):
        assert execute_interactive_command("run", ["a.json", "--jobs", "3"], context) == 0
        assert calls == [("run", (["a.json"],), {"output": None, "jobs": 3})]

    def test_bad_jobs(self, context, calls):
        assert execute_interactive_command("run", ["a.json", "--jobs", "many"], context) == 2
        assert calls == []

    def test_analytical_options(self, context, calls):
        execute_interactive_command("analytical", ["--shape", "circle", "--size=4"], context)
        assert calls == [("analytical", ({"shape": "circle", "size": "4"},), {})]

    def test_verify_status_is_returned(self, context, calls):
        assert execute_interactive_command("VERIFY", ["material"], context) == 1
        assert calls[0][1] == (["material"],)

    def test_unknown_command(self, context):
        assert execute_interactive_command("frobnicate", [], context) is None

    def test_builtin_commands(self, context):
        assert execute_interactive_command("help", [], context) == 0
        assert execute_interactive_command("scenarios", [], context) == 0

    def test_log_level(self, context):
        assert execute_interactive_command("log", ["loud"], context) == 2
        assert execute_interactive_command("log", ["warning"], context) == 0
        assert logging.getLogger("shellmodal").level == logging.WARNING

    def test_option_without_value(self, context):
        assert execute_interactive_command("run", ["--output"], context) == 2


def test_fuzzy_filter():
    names = [c["name"] for c in fuzzy_filter_commands(get_command_metadata(), "oracle")]
    assert names == ["verify [check...]"]


class TestCommands:
    def test_analytical_table(self, tmp_path):
        path = tmp_path / "disk.csv"
        assert cmd_analytical({"shape": "circle", "size": "5", "csv": str(path)}) == 0
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "m,n,gamma,omega,f_THz"
        assert len(lines) == 10

    @pytest.mark.parametrize(
        "options",
        [{"size": "five"}, {"bending": "DFT"}, {"shape": "rectangle", "boundary": "clamped"}, {"size": "-2"}],
    )
    def test_analytical_errors(self, options):
        assert cmd_analytical(options) == 2

    def test_verify_unknown_check(self):
        assert cmd_verify(["nope"]) == 2

    def test_verify_fast_checks(self):
        assert cmd_verify(["square-table", "material", "toy-pencil"]) == 0

    def test_run_needs_paths(self):
        assert cmd_run([]) == 2

    def test_run_invalid_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"scenario": "plate-modal", "geometry": {"degree": 1}}', encoding="utf-8")
        assert cmd_run([str(path)], output=str(tmp_path / "out")) == 2
        assert not (tmp_path / "out").exists()


def test_one_shot_dispatch():
    from shellmodal_cli import dispatch

    assert dispatch(["frobnicate"]) == 2
    assert dispatch(["a", "--shape", "circle", "--modes", "4"]) == 0
