# tests/test_main.py
from click.testing import CliRunner

from app.main import cli

runner = CliRunner()


def test_help_lists_commands():
    result = runner.invoke(cli, ["--help"])
    assert result.exit_code == 0
    for command in ("analyze", "annihilate", "sobolev", "stratify", "verify", "witness"):
        assert command in result.output


def test_unknown_command():
    result = runner.invoke(cli, ["transform"])
    assert result.exit_code == 2
