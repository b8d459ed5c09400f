import json
import math

import numpy as np
import pytest

from rdolp import (
    DimensionNotPlottable,
    EmptyPolytopeRow,
    ParseError,
    membership_by_simulation,
)
from rdolp.cli import (
    InstanceFile,
    build_plot_data,
    ellipse_boundary,
    emit_instance,
    format_plot_data,
    gen_hard_instance,
    load_instance_file,
    main,
    parse_instance,
    polygon_vertices,
)
from rdolp.core import ExcludedAt, InsideUpTo

import sample_instances as si


@pytest.fixture
def corner_box_file(tmp_path, corner_box):
    path = tmp_path / "corner_box.json"
    emit_instance(InstanceFile(instance=corner_box, name="corner-box"), str(path))
    return str(path)


@pytest.fixture
def switched_file(tmp_path, switched_pair):
    path = tmp_path / "switched.json"
    emit_instance(InstanceFile(instance=switched_pair), str(path))
    return str(path)


class TestParsing:
    def test_parse_single_matrix(self, corner_box_file):
        inst = parse_instance(corner_box_file)
        assert inst.polytope.m == 4
        assert inst.n == 2
        assert inst.s == 1

    def test_parse_switched(self, switched_file):
        inst = parse_instance(switched_file)
        assert inst.s == 2

    def test_missing_key(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"c": [1, 0], "A": [[1, 0]], "G": [[0, 0], [0, 0]]}')
        with pytest.raises(ParseError, match="'b'"):
            parse_instance(str(p))

    def test_both_dynamics_keys(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(
            '{"c": [1], "A": [[1]], "b": [1], "G": [[0]], "Gs": [[[0]]]}'
        )
        with pytest.raises(ParseError, match="exactly one"):
            parse_instance(str(p))

    def test_ragged_matrix(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"c": [1, 0], "A": [[1, 0], [1]], "b": [1, 1], "G": [[0, 0], [0, 0]]}')
        with pytest.raises(ParseError, match="row 1"):
            parse_instance(str(p))

    def test_unknown_key(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"c": [1], "A": [[1]], "b": [1], "G": [[0]], "bogus": 3}')
        with pytest.raises(ParseError, match="bogus"):
            parse_instance(str(p))

    def test_syntax_error_carries_location(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"c": [1],\n  "A": [[1]\n}')
        with pytest.raises(ParseError, match=r":\d+:\d+"):
            parse_instance(str(p))

    def test_query_length_checked(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"c": [1], "A": [[1]], "b": [1], "G": [[0]], "query": [1, 2]}')
        with pytest.raises(ParseError, match="query"):
            parse_instance(str(p))

    def test_validation_errors_pass_through(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{"c": [1], "A": [[0]], "b": [-1], "G": [[0]]}')
        with pytest.raises(EmptyPolytopeRow):
            parse_instance(str(p))


class TestRoundTrip:
    def test_bit_exact(self, tmp_path, rng):
        for trial in range(10):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 5))
            s = int(rng.integers(1, 3))
            A = rng.normal(size=(m, n))
            b = rng.uniform(0.1, 3.0, size=m)
            c = rng.normal(size=n)
            mats = [rng.normal(size=(n, n)) * 0.3 for _ in range(s)]
            from rdolp import validate_instance

            inst = validate_instance(c, A, b, mats)
            doc = InstanceFile(
                instance=inst,
                name=f"trial-{trial}",
                rho_star=float(rng.uniform(0.5, 0.99)),
                query=rng.normal(size=n),
            )
            path = tmp_path / f"t{trial}.json"
            emit_instance(doc, str(path))
            back = load_instance_file(str(path))
            assert np.array_equal(back.instance.polytope.A, A)
            assert np.array_equal(back.instance.polytope.b, b)
            assert np.array_equal(back.instance.c, c)
            for M1, M2 in zip(back.instance.dynamics.matrices, mats):
                assert np.array_equal(M1, M2)
            assert back.rho_star == doc.rho_star
            assert np.array_equal(back.query, doc.query)
            assert back.name == doc.name

    def test_emitted_text_is_json(self, corner_box):
        text = emit_instance(InstanceFile(instance=corner_box))
        json.loads(text)


class TestPolygonVertices:
    def test_unit_box(self):
        A = np.vstack([np.eye(2), -np.eye(2)])
        v = polygon_vertices(A, np.ones(4))
        assert v.shape == (4, 2)
        # counterclockwise: positive shoelace area
        area = 0.0
        for i in range(4):
            x1, y1 = v[i]
            x2, y2 = v[(i + 1) % 4]
            area += x1 * y2 - x2 * y1
        assert area > 0

    def test_redundant_rows_ignored(self):
        A = np.vstack([np.eye(2), -np.eye(2), np.eye(2)])
        b = np.concatenate([np.ones(4), np.full(2, 5.0)])
        v = polygon_vertices(A, b)
        assert v.shape == (4, 2)

    def test_vertices_satisfy_constraints(self, corner_box):
        from rdolp import stack_constraints

        rows, rhs = stack_constraints(corner_box, 2)
        v = polygon_vertices(rows, rhs)
        assert v.shape[0] == 6
        for p in v:
            assert np.all(rows @ p <= rhs + 1e-7)
            # each vertex pinned by at least two active rows
            active = np.sum(np.abs(rows @ p - rhs) <= 1e-7 * (1 + np.abs(rhs)))
            assert active >= 2


def test_ellipse_boundary_circle():
    pts = ellipse_boundary(lambda d: float(d @ d), 4.0, samples=256)
    assert pts.shape == (256, 2)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 2.0, atol=1e-12)


class TestPlotData:
    def test_layers_for_stable_single_matrix(self, corner_box):
        pd = build_plot_data(corner_box, 2)
        kinds = [(layer.kind, layer.label) for layer in pd.layers]
        assert ("polygon", "P") in kinds
        assert ("polygon", "S_2") in kinds
        assert ("ellipse", "E_2") in kinds

    def test_polygons_closed(self, corner_box):
        pd = build_plot_data(corner_box, 1)
        for layer in pd.layers:
            if layer.kind == "polygon":
                np.testing.assert_array_equal(layer.points[0], layer.points[-1])

    def test_rotation_skips_ellipse(self, pure_rotation):
        notes = []
        pd = build_plot_data(pure_rotation, 0, notes=notes)
        assert [l.kind for l in pd.layers] == ["polygon", "polygon"]
        assert notes
        square = pd.layers[1].points
        assert square.shape == (5, 2)

    def test_dimension_guard(self):
        from rdolp import validate_instance

        inst = validate_instance(
            np.zeros(3),
            np.vstack([np.eye(3), -np.eye(3)]),
            np.ones(6),
            [np.eye(3) * 0.5],
        )
        with pytest.raises(DimensionNotPlottable):
            build_plot_data(inst, 0)

    def test_format_line_oriented(self, corner_box):
        text = format_plot_data(build_plot_data(corner_box, 0))
        lines = text.split("\n")
        assert lines[0] == "layer polygon P"
        # every non-header line is two floats
        for ln in lines[1:]:
            if not ln or ln.startswith("layer"):
                continue
            xs = ln.split(" ")
            assert len(xs) == 2
            float(xs[0]), float(xs[1])
        assert text.endswith("\n")
        assert "\r" not in text


class TestGenHard:
    def test_complete_digraph_inside(self):
        doc = gen_hard_instance(2, [(1, 1), (1, 2), (2, 1), (2, 2)])
        v = membership_by_simulation(doc.instance, doc.query, 50)
        assert v == InsideUpTo(50)

    def test_two_cycle_excluded_at_parity_break(self):
        """1->2->1 without self-loops: length-k paths from 1 to 2 exist only
        for odd k, so the first even requirement fails."""
        doc = gen_hard_instance(2, [(1, 2), (2, 1)])
        v = membership_by_simulation(doc.instance, doc.query, 50)
        assert v == ExcludedAt(1, (0,))

    def test_no_outgoing_edge_rejected_at_construction(self):
        with pytest.raises(EmptyPolytopeRow):
            gen_hard_instance(2, [(2, 1), (2, 2)])

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            gen_hard_instance(1, [])

    def test_round_trips_through_file(self, tmp_path):
        doc = gen_hard_instance(3, [(1, 2), (2, 3), (3, 1), (1, 1)])
        path = tmp_path / "hard.json"
        emit_instance(doc, str(path))
        back = load_instance_file(str(path))
        assert np.array_equal(back.query, doc.query)
        assert back.instance.n == 3


class TestMainExitCodes:
    def test_solve_fixed_point_exit_zero(self, corner_box_file, capsys):
        rc = main(["solve", corner_box_file])
        out = capsys.readouterr().out
        assert rc == 0
        assert "fixed-point at r=2" in out
        assert "1.1492" in out

    def test_solve_cap_exit_two(self, switched_file, capsys):
        rc = main(["solve", switched_file, "--l", "2", "--r-max", "1"])
        out = capsys.readouterr().out
        assert rc == 2
        assert "level-cap-reached" in out

    def test_parse_error_exit_one(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{nope}")
        rc = main(["check", str(p)])
        err = capsys.readouterr().err
        assert rc == 1
        assert "ParseError" in err

    def test_missing_file_exit_one(self, capsys):
        rc = main(["check", "/nonexistent/x.json"])
        assert rc == 1

    def test_upper_origin_not_interior_exit_one(self, tmp_path, capsys):
        path = tmp_path / "corner_touch.json"
        emit_instance(InstanceFile(instance=si.corner_touch()), str(path))
        rc = main(["upper", str(path)])
        err = capsys.readouterr().err
        assert rc == 1
        assert "OriginNotInterior" in err

    def test_check_reports_shape(self, corner_box_file, capsys):
        rc = main(["check", corner_box_file])
        out = capsys.readouterr().out
        assert rc == 0
        assert "m=4 n=2 s=1" in out
        assert "origin interior: yes" in out

    def test_lower_subcommand(self, corner_box_file, capsys):
        rc = main(["lower", corner_box_file])
        out = capsys.readouterr().out
        assert rc == 0
        assert "-1.1492" in out

    def test_jsr_subcommand(self, switched_file, capsys):
        rc = main(["jsr", switched_file, "--l", "2"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "l=1 infeasible" in out
        assert "l=2 feasible" in out

    def test_bound_subcommand(self, corner_box_file, capsys):
        rc = main(["bound", corner_box_file, "--rho-star", "0.95"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "r_bar: 102" in out

    def test_plot_to_file(self, corner_box_file, tmp_path, capsys):
        out_path = tmp_path / "plot.txt"
        rc = main(["plot", corner_box_file, "--r", "2", "--out", str(out_path)])
        assert rc == 0
        text = out_path.read_text()
        assert text.count("layer") == 3

    def test_gen_hard_to_stdout(self, capsys):
        rc = main(["gen-hard", "--nodes", "2", "--edges", "1:1,1:2,2:1,2:2"])
        out = capsys.readouterr().out
        assert rc == 0
        doc = json.loads(out)
        assert doc["query"] == [0, 1]

    def test_gen_hard_degenerate_exit_one(self, capsys):
        rc = main(["gen-hard", "--nodes", "2", "--edges", "2:1"])
        err = capsys.readouterr().err
        assert rc == 1
        assert "EmptyPolytopeRow" in err

    def test_solver_env_overrides_flag(self, corner_box_file, monkeypatch, capsys):
        monkeypatch.setenv("RDO_SOLVER", "CLARABEL")
        rc = main(["solve", corner_box_file, "--solver", "NOSUCHSOLVER"])
        assert rc == 0

    def test_exit_codes_stable(self, corner_box_file):
        assert main(["lower", corner_box_file]) == main(["lower", corner_box_file])


class TestPlotVerticesSound:
    def test_emitted_vertices_satisfy_level_constraints(self, corner_box):
        """Spec-level soundness of the plot: parse the text back and check
        every S_r vertex against the stacked constraints."""
        from rdolp import stack_constraints

        r = 2
        text = format_plot_data(build_plot_data(corner_box, r))
        rows, rhs = stack_constraints(corner_box, r)
        in_layer = False
        for ln in text.splitlines():
            if ln.startswith("layer"):
                in_layer = ln == f"layer polygon S_{r}"
                continue
            if in_layer and ln:
                x = np.array([float(t) for t in ln.split(" ")])
                assert np.all(rows @ x <= rhs + 1e-7)
