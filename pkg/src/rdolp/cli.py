"""Command-line front end: instance files, bound tables, plot data.

Instance files are JSON documents with keys "c", "A", "b" and exactly one
of "G" (single matrix) or "Gs" (list of matrices), plus optional "name",
"rho_star" and "query".  All numbers are serialized with 17 significant
digits so that emit -> parse round-trips every double bit-exactly.

Plot output is line-oriented text: a `layer <kind> <label>` header followed
by one "x y" pair per line, LF endings.  Polygons are closed (first vertex
repeated) and counterclockwise; ellipse boundaries carry 256 samples.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BoundLedger,
    BoundStatus,
    BracketFailure,
    DEFAULT_TOL,
    DimensionNotPlottable,
    Dynamics,
    ExcludedAt,
    InfeasibleLevel,
    LedgerRow,
    MultiEllipsoid,
    OriginNotInterior,
    ParseError,
    RdoError,
    RdoInstance,
    Tolerances,
    membership_by_simulation,
    validate_instance,
)
from .inner import inner_sdp
from .numlin import joint_norm_bound, spectral_radius
from .outer import (
    check_bounded,
    check_origin_interior,
    convergence_bound,
    convergence_bound_fixed_rho,
    fixed_point_reached,
    lower_bound,
    solve_outer,
    stack_constraints,
)
from .solverapi import DEFAULT_CONFIG, SolverConfig
from .switched import (
    jsr_lower_bound,
    jsr_upper_bound,
    multi_ellipsoid_invariant_set,
    path_complete_feasible,
    switched_inner_sdp,
)

__all__ = [
    "InstanceFile",
    "PlotLayer",
    "PlotData",
    "parse_instance",
    "load_instance_file",
    "emit_instance",
    "polygon_vertices",
    "ellipse_boundary",
    "build_plot_data",
    "format_plot_data",
    "gen_hard_instance",
    "main",
]


@dataclass(frozen=True)
class InstanceFile:
    """One instance document: the validated instance plus the optional
    metadata keys that ride along in the file."""

    instance: RdoInstance
    name: str | None = None
    rho_star: float | None = None
    query: np.ndarray | None = None


_KNOWN_KEYS = {"c", "A", "b", "G", "Gs", "name", "rho_star", "query"}


def _as_number(key: str, v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: key '{key}': expected a number, got {v!r}")
    return float(v)


def _as_vector(key: str, v, where: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ParseError(f"{where}: key '{key}': expected a non-empty array")
    return np.array([_as_number(key, u, where) for u in v], dtype=float)


def _as_matrix(key: str, v, where: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ParseError(f"{where}: key '{key}': expected a non-empty array of rows")
    rows = []
    width = None
    for idx, row in enumerate(v):
        if not isinstance(row, list) or not row:
            raise ParseError(
                f"{where}: key '{key}': row {idx} is not a non-empty array"
            )
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(
                f"{where}: key '{key}': row {idx} has {len(row)} entries, "
                f"expected {width}"
            )
        rows.append([_as_number(key, u, where) for u in row])
    return np.array(rows, dtype=float)


def load_instance_file(path: str) -> InstanceFile:
    """Parse and validate an instance document, keeping the metadata."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top-level value must be an object")
    unknown = sorted(set(doc) - _KNOWN_KEYS)
    if unknown:
        raise ParseError(f"{path}: unknown key(s): {', '.join(unknown)}")
    for key in ("c", "A", "b"):
        if key not in doc:
            raise ParseError(f"{path}: missing required key '{key}'")
    if ("G" in doc) == ("Gs" in doc):
        raise ParseError(f"{path}: exactly one of 'G' or 'Gs' is required")

    c = _as_vector("c", doc["c"], path)
    A = _as_matrix("A", doc["A"], path)
    b = _as_vector("b", doc["b"], path)
    if "G" in doc:
        mats = [_as_matrix("G", doc["G"], path)]
    else:
        gs = doc["Gs"]
        if not isinstance(gs, list) or not gs:
            raise ParseError(f"{path}: key 'Gs': expected a non-empty array of matrices")
        mats = [_as_matrix(f"Gs[{i}]", g, path) for i, g in enumerate(gs)]

    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ParseError(f"{path}: key 'name': expected a string")
    rho_star = doc.get("rho_star")
    if rho_star is not None:
        rho_star = _as_number("rho_star", rho_star, path)
    query = doc.get("query")
    if query is not None:
        query = _as_vector("query", query, path)

    inst = validate_instance(c, A, b, mats)
    if query is not None and query.shape != (inst.n,):
        raise ParseError(
            f"{path}: key 'query': expected length {inst.n}, got {query.shape[0]}"
        )
    return InstanceFile(instance=inst, name=name, rho_star=rho_star, query=query)


def parse_instance(path: str) -> RdoInstance:
    """Validated instance from a document; metadata dropped."""
    return load_instance_file(path).instance


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _vec_json(v: np.ndarray) -> str:
    return "[" + ", ".join(_g17(x) for x in v) + "]"


def _mat_json(M: np.ndarray, indent: str) -> str:
    rows = (",\n" + indent + " ").join(_vec_json(row) for row in M)
    return "[" + rows + "]"


def emit_instance(doc: InstanceFile, path: str | None = None) -> str:
    """Serialize with 17 significant digits per number; parse(emit(x))
    reproduces every matrix bit-exactly."""
    inst = doc.instance
    parts: list[str] = []
    if doc.name is not None:
        parts.append(f'  "name": {json.dumps(doc.name)}')
    parts.append(f'  "c": {_vec_json(inst.c)}')
    parts.append(f'  "A": {_mat_json(inst.polytope.A, "        ")}')
    parts.append(f'  "b": {_vec_json(inst.polytope.b)}')
    if inst.s == 1:
        parts.append(f'  "G": {_mat_json(inst.dynamics.matrices[0], "        ")}')
    else:
        mats = ",\n    ".join(
            _mat_json(G, "          ") for G in inst.dynamics.matrices
        )
        parts.append(f'  "Gs": [\n    {mats}\n  ]')
    if doc.rho_star is not None:
        parts.append(f'  "rho_star": {_g17(doc.rho_star)}')
    if doc.query is not None:
        parts.append(f'  "query": {_vec_json(doc.query)}')
    text = "{\n" + ",\n".join(parts) + "\n}\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# plot data


@dataclass(frozen=True)
class PlotLayer:
    kind: str  # polygon | ellipse | point
    label: str
    points: np.ndarray  # (k, 2)


@dataclass(frozen=True)
class PlotData:
    layers: tuple[PlotLayer, ...] = field(default_factory=tuple)


def polygon_vertices(
    rows: np.ndarray, rhs: np.ndarray, tol: Tolerances = DEFAULT_TOL
) -> np.ndarray:
    """Vertices of {x in R^2 : rows x <= rhs}, counterclockwise, not closed.

    Every pair of constraints is intersected; candidate points are kept when
    they satisfy all constraints within eps_feas and merged when closer than
    a scale-relative snap distance.
    """
    if rows.shape[1] != 2:
        raise DimensionNotPlottable("polygon enumeration needs n = 2")
    m = rows.shape[0]
    slack = tol.eps_feas * (1.0 + np.abs(rhs))
    cands: list[np.ndarray] = []
    for i in range(m):
        for j in range(i + 1, m):
            M = np.array([rows[i], rows[j]])
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            scale = max(np.abs(M).max(), 1e-300)
            if abs(det) <= 1e-12 * scale * scale:
                continue
            p = np.linalg.solve(M, np.array([rhs[i], rhs[j]]))
            if np.all(rows @ p <= rhs + slack):
                cands.append(p)
    if not cands:
        return np.zeros((0, 2))
    pts = np.array(cands)
    snap = 1e-9 * (1.0 + float(np.abs(pts).max()))
    kept: list[np.ndarray] = []
    for p in pts:
        if all(np.linalg.norm(p - q) > snap for q in kept):
            kept.append(p)
    verts = np.array(kept)
    center = verts.mean(axis=0)
    angles = np.arctan2(verts[:, 1] - center[1], verts[:, 0] - center[0])
    return verts[np.argsort(angles)]


def ellipse_boundary(value_fn, alpha: float, samples: int = 256) -> np.ndarray:
    """Boundary of {x : value_fn(x) <= alpha} for a positive-definite
    quadratic (or max of quadratics), sampled along rays from the origin."""
    out = np.zeros((samples, 2))
    for k in range(samples):
        th = 2.0 * math.pi * k / samples
        d = np.array([math.cos(th), math.sin(th)])
        v = value_fn(d)
        out[k] = d * math.sqrt(alpha / v)
    return out


def _close_polygon(verts: np.ndarray) -> np.ndarray:
    if verts.shape[0] == 0:
        return verts
    return np.vstack([verts, verts[:1]])


def build_plot_data(
    inst: RdoInstance,
    r: int,
    tol: Tolerances = DEFAULT_TOL,
    config: SolverConfig = DEFAULT_CONFIG,
    notes: list[str] | None = None,
) -> PlotData:
    """Layers for P, the level-r outer polygon, and (when one is available)
    an invariant ellipsoidal boundary."""
    if inst.n != 2:
        raise DimensionNotPlottable(f"plot data needs n = 2, got n = {inst.n}")
    layers = [
        PlotLayer(
            "polygon",
            "P",
            _close_polygon(polygon_vertices(inst.polytope.A, inst.polytope.b, tol)),
        )
    ]
    rows, rhs = stack_constraints(inst, r)
    layers.append(
        PlotLayer("polygon", f"S_{r}", _close_polygon(polygon_vertices(rows, rhs, tol)))
    )
    try:
        if inst.s == 1:
            level = inner_sdp(inst, r, tol, config)
            ell = level.ellipsoid
            if ell is not None:
                layers.append(
                    PlotLayer(
                        "ellipse",
                        f"E_{r}",
                        ellipse_boundary(ell.value, ell.alpha),
                    )
                )
        else:
            for l in (1, 2, 3):
                if path_complete_feasible(inst.dynamics, l, tol, config) is not None:
                    fam = multi_ellipsoid_invariant_set(inst, l, tol, config)
                    layers.append(
                        PlotLayer(
                            "ellipse",
                            f"F_{l}",
                            ellipse_boundary(fam.value, fam.alpha),
                        )
                    )
                    break
    except RdoError as e:
        if notes is not None:
            notes.append(f"invariant-set layer skipped: {type(e).__name__}: {e}")
    return PlotData(layers=tuple(layers))


def format_plot_data(pd: PlotData) -> str:
    lines: list[str] = []
    for layer in pd.layers:
        lines.append(f"layer {layer.kind} {layer.label}")
        for p in layer.points:
            lines.append(f"{_g17(p[0])} {_g17(p[1])}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# hard-instance generation


def gen_hard_instance(
    n: int, edges: list[tuple[int, int]], name: str | None = None
) -> InstanceFile:
    """Path-existence instance over a digraph on nodes 1..n: with G the
    adjacency matrix, A = -(first row of G) and b = -1/2, the query point
    z = e_n belongs to the invariant feasible set exactly when a length-k
    path from node 1 to node n exists for every k >= 1."""
    if n < 2:
        raise ValueError("digraph needs at least 2 nodes")
    G = np.zeros((n, n))
    for u, v in edges:
        if not (1 <= u <= n and 1 <= v <= n):
            raise ValueError(f"edge ({u}, {v}) out of range 1..{n}")
        G[u - 1, v - 1] = 1.0
    A = -G[0:1, :].copy()
    b = np.array([-0.5])
    c = np.zeros(n)
    z = np.zeros(n)
    z[n - 1] = 1.0
    inst = validate_instance(c, A, b, [G])
    return InstanceFile(
        instance=inst,
        name=name or f"hard-digraph-{n}",
        query=z,
    )


# ---------------------------------------------------------------------------
# commands


_EXIT_BY_STATUS = {
    BoundStatus.FIXED_POINT: 0,
    BoundStatus.CONVERGED: 0,
    BoundStatus.INFEASIBLE: 0,
    BoundStatus.LEVEL_CAP_REACHED: 2,
    BoundStatus.OPEN: 2,
}


def _fmt_bound(v: float | None) -> str:
    if v is None:
        return "--"
    if v == -math.inf:
        return "-inf"
    if v == math.inf:
        return "empty"
    return f"{v:.4f}"


def _print_table(rows: list[LedgerRow], out) -> None:
    head = "      " + "".join(f"{'r=' + str(row.r):>12}" for row in rows)
    lo = "lower " + "".join(f"{_fmt_bound(row.lower):>12}" for row in rows)
    up = "upper " + "".join(f"{_fmt_bound(row.upper):>12}" for row in rows)
    print(head, file=out)
    print(lo, file=out)
    print(up, file=out)


def _fmt_matrix(M: np.ndarray, indent: str = "  ") -> str:
    return "\n".join(
        indent + " ".join(f"{x: .6g}" for x in row) for row in np.asarray(M)
    )


def _fmt_point(x: np.ndarray | None) -> str:
    if x is None:
        return "--"
    return "[" + ", ".join(f"{v:.6f}" for v in np.asarray(x)) + "]"


def _tolerances(args) -> Tolerances:
    if getattr(args, "tol", None) is None:
        return DEFAULT_TOL
    t = args.tol
    return Tolerances(eps_fp=t, eps_gap=t)


def _config(args) -> SolverConfig:
    backend = os.environ.get("RDO_SOLVER") or getattr(args, "solver", None)
    if backend:
        return SolverConfig(backend=backend)
    return DEFAULT_CONFIG


def _out_stream(args):
    if getattr(args, "out", None):
        return open(args.out, "w", encoding="utf-8", newline="\n")
    return None


def cmd_check(args) -> int:
    doc = load_instance_file(args.instance)
    inst = doc.instance
    if doc.name:
        print(f"name: {doc.name}")
    print(f"m={inst.polytope.m} n={inst.n} s={inst.s}")
    print(f"origin interior: {'yes' if check_origin_interior(inst.polytope) else 'no'}")
    try:
        check_bounded(inst.polytope)
        print("bounded: yes")
    except RdoError as e:
        print(f"bounded: no ({type(e).__name__})")
    if inst.s == 1:
        print(f"spectral radius: {spectral_radius(inst.dynamics.matrices[0]):.6f}")
    else:
        print(f"norm bound: {joint_norm_bound(inst.dynamics):.6f}")
        print(f"jsr lower bound (k<=2): {jsr_lower_bound(inst.dynamics, 2):.6f}")
    if doc.query is not None:
        verdict = membership_by_simulation(inst, doc.query, args.k_max)
        if isinstance(verdict, ExcludedAt):
            print(f"query: ExcludedAt(k={verdict.k}, word={verdict.word})")
        else:
            print(f"query: InsideUpTo({verdict.k_max})")
    return 0


def cmd_lower(args) -> int:
    inst = parse_instance(args.instance)
    tol = _tolerances(args)
    ledger = solve_outer(inst, r_max=args.r_max, tol=tol)
    _print_table(list(ledger.rows), sys.stdout)
    status = ledger.status
    last = ledger.last
    print(f"status: {status.value} at r={last.r}")
    return _EXIT_BY_STATUS[status]


def _upper_levels(
    inst: RdoInstance, r_max: int, l: int | None, tol: Tolerances, config: SolverConfig
):
    """Per-level upper bounds; yields (r, value or None, witness, certificate).

    s = 1 uses the per-level ellipsoid SDP; s >= 2 the path-complete family
    SDP at the first feasible level among 1..3 (or the requested one).
    """
    if inst.s == 1:
        rho = spectral_radius(inst.dynamics.matrices[0])
        if rho >= 1.0:
            raise InfeasibleLevel(
                f"spectral radius {rho:.6f} >= 1: no invariant ellipsoid exists"
            )
        for r in range(r_max + 1):
            level = inner_sdp(inst, r, tol, config)
            yield r, level.value, level.witness, level.ellipsoid
    else:
        l_used = l
        if l_used is None:
            for cand in (1, 2, 3):
                if path_complete_feasible(inst.dynamics, cand, tol, config) is not None:
                    l_used = cand
                    break
            if l_used is None:
                raise InfeasibleLevel(
                    "no feasible invariant family at levels l = 1..3"
                )
        for r in range(r_max + 1):
            level = switched_inner_sdp(inst, l_used, r, tol, config)
            yield r, level.value, level.witness, level.ellipsoid


def cmd_upper(args) -> int:
    inst = parse_instance(args.instance)
    tol = _tolerances(args)
    config = _config(args)
    r_max = args.r_max if args.r_max is not None else 2
    rows = []
    cert = None
    witness = None
    for r, value, w, ell in _upper_levels(inst, r_max, args.l, tol, config):
        rows.append(LedgerRow(r=r, lower=None, upper=value, witness=w, status=BoundStatus.OPEN))
        cert, witness = ell, w
    _print_table(rows, sys.stdout)
    if witness is not None:
        print(f"witness: {_fmt_point(witness)}")
    if isinstance(cert, MultiEllipsoid):
        print(f"certificate: {len(cert.forms)} quadratic forms, level {cert.alpha:.6g}")
    elif cert is not None:
        print(f"certificate: ellipsoid level {cert.alpha:.6g}, M =")
        print(_fmt_matrix(cert.M))
    return 0


def cmd_solve(args) -> int:
    inst = parse_instance(args.instance)
    tol = _tolerances(args)
    config = _config(args)
    r_max = args.r_max
    if r_max is None:
        r_max = 16 if inst.s == 1 else 8

    uppers_on = True
    upper_note = None
    upper_gen = None
    try:
        upper_gen = _upper_levels(inst, r_max, args.l, tol, config)
    except RdoError as e:  # pragma: no cover - generator defers errors
        uppers_on = False
        upper_note = f"{type(e).__name__}: {e}"

    rows: list[LedgerRow] = []
    status = BoundStatus.LEVEL_CAP_REACHED
    final_r = r_max
    witness = None
    witness_feasible = False
    cert = None
    for r in range(r_max + 1):
        level = lower_bound(inst, r)
        lower = level.lower
        if lower == math.inf:
            rows.append(LedgerRow(r=r, lower=None, upper=None, witness=None,
                                  status=BoundStatus.INFEASIBLE))
            status = BoundStatus.INFEASIBLE
            final_r = r
            break
        upper = None
        if uppers_on and upper_gen is not None:
            try:
                _, upper, uw, ell = next(upper_gen)
                if uw is not None:
                    witness, witness_feasible, cert = uw, True, ell
            except (RdoError, StopIteration) as e:
                uppers_on = False
                if isinstance(e, RdoError):
                    upper_note = f"{type(e).__name__}: {e}"
        if not witness_feasible and level.witness is not None:
            witness = level.witness
        rows.append(LedgerRow(r=r, lower=lower, upper=upper, witness=witness,
                              status=BoundStatus.OPEN))
        if fixed_point_reached(inst, r, tol):
            status = BoundStatus.FIXED_POINT
            final_r = r
            if level.witness is not None:
                witness, witness_feasible = level.witness, True
            break
        if upper is not None and math.isfinite(lower) and \
                upper - lower <= tol.eps_gap * (1.0 + abs(upper)):
            status = BoundStatus.CONVERGED
            final_r = r
            break

    rows[-1] = LedgerRow(r=rows[-1].r, lower=rows[-1].lower, upper=rows[-1].upper,
                         witness=rows[-1].witness, status=status)
    ledger = BoundLedger(tuple(rows))
    _print_table(list(ledger.rows), sys.stdout)
    print(f"status: {status.value} at r={final_r}")
    if upper_note:
        print(f"note: upper bounds unavailable ({upper_note})")

    last = ledger.rows[-1]
    value = None
    if status is BoundStatus.FIXED_POINT:
        value = last.lower
    elif status is BoundStatus.CONVERGED:
        value = last.upper
    elif last.upper is not None:
        value = last.upper
    elif last.lower is not None and math.isfinite(last.lower):
        value = last.lower
    if status is BoundStatus.INFEASIBLE:
        print("feasible set is empty")
    elif value is not None:
        exact = status in (BoundStatus.FIXED_POINT, BoundStatus.CONVERGED)
        kind = "optimal value" if exact else "best bound"
        print(f"{kind}: {value:.4f}")
        print(f"note: objective is min c^T x; |value| = {abs(value):.4f}")
    if witness is not None:
        tag = "" if witness_feasible else " (outer approximation, not certified)"
        print(f"witness{tag}: {_fmt_point(witness)}")
    if isinstance(cert, MultiEllipsoid):
        print(f"certificate: {len(cert.forms)} quadratic forms, level {cert.alpha:.6g}")
    elif cert is not None:
        print(f"certificate: ellipsoid level {cert.alpha:.6g}, M =")
        print(_fmt_matrix(cert.M))
    elif status is BoundStatus.FIXED_POINT:
        print(f"certificate: level {final_r} constraints are invariant (fixed point)")
    return _EXIT_BY_STATUS[status]


def cmd_bound(args) -> int:
    doc = load_instance_file(args.instance)
    inst = doc.instance
    sb = convergence_bound(inst)
    print("M =")
    print(_fmt_matrix(sb.M))
    print(f"alpha1: {sb.alpha1:.6g}  alpha2: {sb.alpha2:.6g}  gamma: {sb.gamma:.6g}")
    print(f"r_bar: {sb.r_bar}")
    rho_star = args.rho_star if args.rho_star is not None else doc.rho_star
    if rho_star is not None:
        sf = convergence_bound_fixed_rho(inst, rho_star)
        print(f"fixed-rho (rho*={rho_star:g}): r_bar = {sf.r_bar}")
    return 0


def cmd_jsr(args) -> int:
    inst = parse_instance(args.instance)
    tol = args.tol if args.tol is not None else 1e-3
    dyn = inst.dynamics
    l_max = args.l if args.l is not None else (1 if dyn.s == 1 else 2)
    lower = jsr_lower_bound(dyn, args.k_max)
    print(f"lower bound (products up to k={args.k_max}): {lower:.6f}")
    for l in range(1, l_max + 1):
        cert = path_complete_feasible(dyn, l, config=_config(args))
        if cert is None:
            print(f"l={l} infeasible")
        else:
            print(f"l={l} feasible (margin {cert.margin:.3e})")
    try:
        bounds = jsr_upper_bound(dyn, l_max, tol, _config(args))
    except BracketFailure as e:
        print(f"error: {e}", file=sys.stderr)
        print(f"norm-bound fallback: {e.norm_bound:.6f}", file=sys.stderr)
        return 1
    print(f"upper bound (l={l_max}): {bounds.upper:.6f}")
    print(f"l_used: {bounds.l}")
    return 0


def cmd_plot(args) -> int:
    inst = parse_instance(args.instance)
    notes: list[str] = []
    pd = build_plot_data(inst, args.r, _tolerances(args), _config(args), notes)
    text = format_plot_data(pd)
    stream = _out_stream(args)
    if stream is None:
        sys.stdout.write(text)
    else:
        with stream:
            stream.write(text)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    return 0


def _parse_edges(text: str) -> list[tuple[int, int]]:
    edges = []
    if not text:
        return edges
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        parts = token.split(":")
        if len(parts) != 2:
            raise ParseError(f"edge '{token}': expected 'u:v'")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as e:
            raise ParseError(f"edge '{token}': expected integers") from e
    return edges


def cmd_gen_hard(args) -> int:
    doc = gen_hard_instance(args.nodes, _parse_edges(args.edges), args.name)
    text = emit_instance(doc)
    stream = _out_stream(args)
    if stream is None:
        sys.stdout.write(text)
    else:
        with stream:
            stream.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rdolp",
        description="Bounds and invariant sets for linear programs whose "
        "feasible points must stay feasible under linear dynamics.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, r_max=False, l=False, k_max=None):
        p.add_argument("instance", help="instance file (JSON)")
        p.add_argument("--tol", type=float, default=None,
                       help="decision tolerance (fixed point / gap / bisection)")
        p.add_argument("--solver", default=None,
                       help="conic solver backend (env RDO_SOLVER overrides)")
        if r_max:
            p.add_argument("--r-max", type=int, default=None, dest="r_max",
                           help="deepest level to compute")
        if l:
            p.add_argument("--l", type=int, default=None,
                           help="invariant-family level (default: smallest feasible)")
        if k_max is not None:
            p.add_argument("--k-max", type=int, default=k_max, dest="k_max",
                           help="simulation / product depth")

    p = sub.add_parser("check", help="validate an instance and report its shape")
    common(p, k_max=50)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("lower", help="outer (lower) bounds with fixed-point test")
    common(p, r_max=True)
    p.set_defaults(fn=cmd_lower)

    p = sub.add_parser("upper", help="inner (upper) bounds via invariant ellipsoids")
    common(p, r_max=True, l=True)
    p.set_defaults(fn=cmd_upper)

    p = sub.add_parser("solve", help="two-sided bounds until fixed point or gap closes")
    common(p, r_max=True, l=True)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("bound", help="a priori step bound for fixed-point convergence")
    common(p)
    p.add_argument("--rho-star", type=float, default=None, dest="rho_star",
                   help="spectral-radius budget for the fixed-rho bound")
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("jsr", help="joint spectral radius bracket")
    common(p, l=True, k_max=4)
    p.set_defaults(fn=cmd_jsr)

    p = sub.add_parser("plot", help="2-D plot data for P, S_r, and invariant sets")
    common(p)
    p.add_argument("--r", type=int, default=0, help="outer level to draw")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(fn=cmd_plot)

    p = sub.add_parser("gen-hard", help="emit a path-existence hard instance")
    p.add_argument("--nodes", type=int, required=True, help="digraph node count")
    p.add_argument("--edges", default="", help="comma-separated u:v pairs (1-based)")
    p.add_argument("--name", default=None, help="instance name")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.set_defaults(fn=cmd_gen_hard)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except RdoError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
