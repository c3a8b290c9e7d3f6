# tests/test_routes/test_verify.py
import orjson
from click.testing import CliRunner

from app.main import cli
from tests.utils.factories import basis_document, operator_document, write_json

runner = CliRunner()

SIN = ((1,), "sin", 1)
COS = ((1,), "cos", 1)
FOUR_PI_SQUARED = 4 * 3.141592653589793 ** 2


class TestVerifyCommand:
    """Test the verify subcommand"""

    def test_passes(self, tmp_path):
        """Test d^2 + 4 pi^2 on {sin, cos}"""
        basis = write_json(tmp_path / "basis.json", basis_document(1, [[SIN], [COS]]))
        operator = write_json(tmp_path / "op.json", operator_document(1, [((0,), FOUR_PI_SQUARED), ((2,), 1.0)], order=2))
        report_path = tmp_path / "verify.json"
        result = runner.invoke(cli, ["verify", str(operator), str(basis), "--report", str(report_path)])
        assert result.exit_code == 0, result.output
        report = orjson.loads(report_path.read_bytes())
        assert report["passed"] is True
        assert len(report["worst"]) == 5

    def test_negative_control(self, tmp_path):
        """Test the Laplacian on {sin} fails with status 1"""
        basis = write_json(tmp_path / "basis.json", basis_document(1, [[SIN]]))
        operator = write_json(tmp_path / "op.json", operator_document(1, [((2,), 1.0)], order=2))
        result = runner.invoke(cli, ["verify", str(operator), str(basis), "--grid", "256"])
        assert result.exit_code == 1
        assert "verification failed" in result.output
        assert "f1 at c0" in result.output

    def test_exact_symbolic_zero(self, tmp_path):
        """Test exact operators are checked symbolically"""
        basis = write_json(tmp_path / "basis.json", basis_document(1, [[SIN], [COS]], mode="exact"))
        operator = write_json(
            tmp_path / "op.json", operator_document(1, [((0,), "4*pi**2"), ((2,), "1")], order=2, mode="exact")
        )
        result = runner.invoke(cli, ["verify", str(operator), str(basis), "--grid", "32"])
        assert result.exit_code == 0, result.output
        assert "exact" in result.output

    def test_dimension_mismatch(self, tmp_path):
        """Test a torus operator against a circle basis"""
        basis = write_json(tmp_path / "basis.json", basis_document(1, [[SIN]]))
        operator = write_json(tmp_path / "op.json", operator_document(2, [((2, 0), 1.0), ((0, 2), 1.0)], order=2))
        result = runner.invoke(cli, ["verify", str(operator), str(basis)])
        assert result.exit_code == 2

    def test_missing_operator(self, tmp_path):
        """Test an unreadable operator file"""
        basis = write_json(tmp_path / "basis.json", basis_document(1, [[SIN]]))
        result = runner.invoke(cli, ["verify", str(tmp_path / "nope.json"), str(basis)])
        assert result.exit_code == 2
