import json
from pathlib import Path

import numpy as np
import pytest

jsonschema = pytest.importorskip("jsonschema")

from elastica_lab.cli import main  # noqa: E402
from elastica_lab.curves import PlanarCurve, save_curve, to_constant_speed  # noqa: E402
from elastica_lab.energies import open_excess_energy  # noqa: E402
from elastica_lab.geometry import circle  # noqa: E402
from elastica_lab.measures import IntervalMeasure, save_measure  # noqa: E402
from elastica_lab.recovery_open import block_report, build_key_block  # noqa: E402
from elastica_lab.relaxer import RelaxOptions, bump_state, dump_trajectory, minimize_open  # noqa: E402

DOCS = Path(__file__).resolve().parents[1] / "docs"


def schema(name):
    doc = json.loads((DOCS / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(doc)
    return jsonschema.Draft202012Validator(doc)


def test_curve_files_validate(tmp_path):
    v = schema("curve")
    for i, c in enumerate([circle(64), to_constant_speed(PlanarCurve(np.array([[0.0, 0], [1, 0], [2, 1]])), 1.0)]):
        save_curve(c, tmp_path / f"{i}.json")
        v.validate(json.loads((tmp_path / f"{i}.json").read_text()))
    with pytest.raises(jsonschema.ValidationError):
        v.validate({"param": "constant_speed", "closed": False, "points": [[0, 0], [1, 0], [2, 0]]})


def test_measure_files_validate(tmp_path):
    v = schema("measure")
    for i, mu in enumerate([IntervalMeasure(2.0, np.ones(5), [(0.5, -1.0)]),
                            IntervalMeasure(1.0, np.ones(3), [], np.array([0.0, 0.1, 1.0])),
                            IntervalMeasure(1.0, None, [(0.0, 2.0)])]):
        save_measure(mu, tmp_path / f"{i}.json")
        v.validate(json.loads((tmp_path / f"{i}.json").read_text()))


def test_energy_reports_validate():
    v = schema("energy_report")
    x = np.linspace(0.0, 1.0, 101)
    seg = PlanarCurve(np.column_stack([x, np.zeros_like(x)]))
    v.validate(json.loads(open_excess_energy(seg, (0, 0), (1, 0), 1e-3).to_json()))
    v.validate(json.loads(block_report(build_key_block(1e-3, 0.375)).to_json()))


def test_cli_checks_validate(tmp_path):
    assert main(["sigma-check", "--out", str(tmp_path)]) == 0
    schema("checks").validate(json.loads((tmp_path / "sigma-check" / "checks.json").read_text()))


def test_relax_log_validates(tmp_path):
    v = schema("relax_log")
    traj = minimize_open(1.0, 1e-2, bump_state(1.0, 1e-2, 100, 1), RelaxOptions(max_iter=20))
    dump_trajectory(traj, tmp_path / "traj.jsonl")
    for line in (tmp_path / "traj.jsonl").read_text().splitlines():
        v.validate(json.loads(line))
