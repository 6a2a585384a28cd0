"""Command-line front end.

Usage::

    ultradiff run scenario.json
    ultradiff weights classify --params '{"generator": {"kind": "gevrey", "s": 2, "kmax": 200}}'
    ultradiff hs geodesic --scenario geo.json --out-csv geo.csv

A scenario is a JSON object with a ``command`` (``group.name``), the
command's parameters, and optional ``out_json`` / ``out_csv`` paths.
Without ``out_json`` the JSON report goes to standard output.

Exit codes: 0 ok, 2 invariant or validation failure, 3 domain error,
64 usage error, 65 malformed scenario, 74 I/O error.  Every nonzero exit
prints an error JSON on standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import diffeo, hs, jets, pathologies, spaces, weights
from .emit import dumps, emit_report
from .errors import DomainError, InvariantError, UltradiffError

EXIT_OK, EXIT_INVARIANT, EXIT_DOMAIN = 0, 2, 3
EXIT_USAGE, EXIT_DATA, EXIT_IO = 64, 65, 74


class UsageError(Exception):
    pass


class ScenarioError(Exception):
    pass


# ---------------------------------------------------------------------------
# parameter helpers
# ---------------------------------------------------------------------------


DEFAULT_KMAX = 200


def _seq(spec, kmax=None):
    if spec is None:
        raise DomainError("missing weight-sequence generator")
    if isinstance(spec, list):
        spec = {"kind": "custom", "values": spec}
    elif isinstance(spec, str):
        spec = {"kind": spec}
    spec = dict(spec)
    if "kmax" not in spec and spec.get("kind") not in ("custom", "explicit"):
        spec["kmax"] = DEFAULT_KMAX if kmax is None else kmax
    return weights.make_sequence(spec)


def _window(p):
    w = p.get("window", [-10.0, 10.0])
    return float(w[0]), float(w[1])


def _grid_fn(desc, p):
    return spaces.grid_function(desc, _window(p), float(p.get("h", 1e-3)))


def _jet(spec, exact):
    if isinstance(spec, str):
        return jets.Jet.from_csv(spec, exact=exact)
    if isinstance(spec, dict):
        coeffs = spec["coeffs"]
        base = spec.get("base_point", 0)
    else:
        coeffs, base = spec, 0
    conv = Fraction if exact else float
    return jets.Jet([conv(c) for c in coeffs], conv(base), exact=exact)


def _jet_table(j):
    return {"columns": ["k", "a_k"], "rows": [[k, str(c) if j.exact else float(c)] for k, c in enumerate(j.coeffs)]}


def _diffeo(spec, p):
    if spec == "identity":
        return diffeo.identity(_window(p), float(p.get("h", 1e-3)))
    if isinstance(spec, str):
        return diffeo.read_csv(spec, p.get("decay_class", "none"))
    return diffeo.from_descriptor(spec, _window(p), float(p.get("h", 1e-3)))


def _diffeo_table(D):
    return {"columns": ["x", "f", "df"], "rows": [[float(a), float(b), float(c)] for a, b, c in zip(D.x, D.values, D.df)]}


def _hs(spec, p):
    window, h = _window(p), float(p.get("h", 1e-3))
    if spec == "identity":
        return hs.identity(window, h)
    if "calibrated" in spec:
        c = spec["calibrated"]
        gamma = hs.calibrated_pair_gamma(float(c["c1"]), c["bump1"], c["bump2"], window, h)
        return hs.from_gamma(gamma, window, h)
    desc = {k: v for k, v in spec.items() if k != "mode"}
    return hs.from_descriptor(desc, window, h, spec.get("mode", "f"))


def _float_list(v):
    return [float(x) for x in v]


# ---------------------------------------------------------------------------
# handlers: each returns (json_report, csv_table_or_None, ok)
# ---------------------------------------------------------------------------


def weights_classify(p):
    M = _seq(p.get("generator"), p.get("kmax"))
    rep = weights.check_conditions(M)
    rep["sequence"] = M.to_json()
    return rep, None, True


def weights_qa(p):
    M = _seq(p.get("generator"), p.get("kmax"))
    rep = weights.quasianalytic_diagnostic(M)
    table = {"columns": ["k", "term", "partial_sum"],
             "rows": [[k + 1, t, s] for k, (t, s) in enumerate(zip(rep["terms"], rep["partial_sums"]))]}
    return rep, table, True


def jets_compose(p):
    exact = bool(p.get("exact", False))
    out = jets.compose_jets(_jet(p["f"], exact), _jet(p["g"], exact), p.get("method", "auto"))
    t = _jet_table(out)
    return {"degree": out.degree, "base_point": out.base_point, "coeffs": t["rows"]}, t, True


def jets_invert(p):
    exact = bool(p.get("exact", False))
    f = _jet(p["f"], exact)
    inv = jets.invert_jet(f)
    shifted = jets.Jet([0] + list(inv.coeffs[1:]), 0, exact=exact)
    back = jets.compose_jets(f, shifted)
    ident = [0, 1] + [0] * (f.degree - 1)
    resid = max(abs(float(a - b)) for a, b in zip(back.coeffs, ident))
    t = _jet_table(inv)
    return {"degree": inv.degree, "coeffs": t["rows"], "compose_back_residual": resid}, t, True


def jets_majorant(p):
    exact = bool(p.get("exact", False))
    N = int(p.get("N", 10))
    M = _seq(p.get("generator", {"kind": "constant-one"}), max(N, 8))
    maj = jets.majorant_series(p.get("A", 1), p.get("C", 1), p.get("rho", 1), M, N, exact=exact)
    conv = str if exact else float
    rows = [[i, conv(maj.g_coeffs[i]), conv(maj.psi_coeffs[i]),
             conv(maj.bound_ratios[i - 2]) if i >= 2 else ""] for i in range(1, N + 1)]
    rep = {"A": conv(maj.A), "C": conv(maj.C), "rho": conv(maj.rho), "N": N,
           "g_coeffs": [r[1] for r in rows], "bound_ratios": [conv(r) for r in maj.bound_ratios],
           "bound_holds": True}
    return rep, {"columns": ["i", "c_i", "psi_i", "ratio"], "rows": rows}, True


def jets_fdbbound(p):
    gmax = int(p.get("gamma_max", 10))
    M = _seq(p.get("generator", {"kind": "constant-one"}), max(gmax, 8))
    rep = jets.fdb_bound_check(float(p.get("A", 1.0)), M, gmax, p.get("A_values"))
    Cs = [f["C"] for f in rep["fits"]]
    rep["C_decreasing"] = all(b < a for a, b in zip(Cs, Cs[1:]))
    return rep, None, True


def _query(p):
    kmax = int(p.get("kmax", 12))
    M = _seq(p.get("M", {"kind": "constant-one"}), max(kmax, 8))
    L = _seq(p["L"], max(int(p.get("pmax", 8)), 8)) if "L" in p else None
    return M, L, dict(p=float(p.get("p", 2.0)), kmax=kmax, pmax=int(p.get("pmax", 8)),
                      fd_order=int(p.get("fd_order", 4)), use_oracle=bool(p.get("use_oracle", True)))


def spaces_seminorm(p):
    f = _grid_fn(p["function"], p)
    M, L, opts = _query(p)
    res = spaces.seminorm(f, spaces.SeminormQuery(p.get("class", "B"), float(p.get("rho", 1.0)), M, L=L, **opts))
    return res.to_json(), None, True


def spaces_diagnose(p):
    f = _grid_fn(p["function"], p)
    M, L, opts = _query(p)
    rep = spaces.class_diagnostic(f, p.get("class", "B"), M, p.get("rho_grid", [1, 2, 4, 8]), L=L, **opts)
    table = {"columns": ["rho", "value", "finite"], "rows": [[r["rho"], r["value"], r["finite"]] for r in rep["rows"]]}
    return rep, table, True


def spaces_inclusions(p):
    f = _grid_fn(p["function"], p)
    rep = spaces.inclusion_report(f, float(p.get("p", 1.0)), float(p.get("q", 2.0)), int(p.get("alpha", 0)))
    ok = rep["interpolation"]["ratio"] <= 1 + 1e-8 and rep["weighted"]["ratio"] <= 1 + 1e-8
    return rep, None, ok


def diffeo_compose(p):
    F, G = _diffeo(p["F"], p), _diffeo(p["G"], p)
    H = diffeo.compose(F, G)
    return {"witness": H.witness, "class": H.class_claim, "support": H.f.support}, _diffeo_table(H), True


def diffeo_invert(p):
    F = _diffeo(p["F"], p)
    G = diffeo.invert(F)
    resid = diffeo.inversion_residual(F, G)
    return {"witness": G.witness, "residual": resid, "support": G.f.support}, _diffeo_table(G), True


def diffeo_conjugate(p):
    G, H = _diffeo(p["G"], p), _diffeo(p["H"], p)
    R, rep = diffeo.conjugate(G, H)
    return rep, _diffeo_table(R), True


def diffeo_evolve(p):
    X = diffeo.VectorField.from_json(p["field"])
    t_final = float(p.get("t_final", 1.0))
    path = diffeo.evolve(X, t_final, _window(p), float(p.get("h", 1e-3)), p.get("t_grid"), p.get("dt"))
    rep = {"times": list(path.times), "dt": path.dt, "bound": path.bound, "support_radius": path.support_radius,
           "violations": path.violations}
    return rep, {"columns": ["t", "x", "f"], "rows": [list(r) for r in path.to_rows()]}, True


def diffeo_matrix(p):
    return diffeo.inverse_norm_bound(np.asarray(p["A"], dtype=float)), None, True


def hs_rt(p):
    phi = _hs(p["phi"], p)
    g = hs.r_transform(phi)
    back = hs.r_inverse(g)
    e1 = float(np.max(np.abs(back.values - phi.values)))
    e2 = float(np.max(np.abs(hs.r_transform(back).samples - g.samples)))
    rep = {"floor": g.floor, "round_trip_phi": e1, "round_trip_gamma": e2, "in_group": phi.in_group}
    rows = [[float(a), float(b), float(c)] for a, b, c in zip(phi.x, phi.values, g.samples)]
    return rep, {"columns": ["x", "f", "gamma"], "rows": rows}, e1 < 1e-9 and e2 < 1e-9


def hs_geodesic(p):
    phi0 = _hs(p.get("phi0", "identity"), p)
    t_grid = _float_list(p.get("t_grid", [0.0, 0.5, 1.0]))
    rows, flags = [], []
    if "phi1" in p:
        phi1 = _hs(p["phi1"], p)
        ga = hs.r_transform(phi0).samples
        gb = hs.r_transform(phi1).samples - ga
        step = lambda t: hs.geodesic_bvp(phi0, phi1, t)  # noqa: E731
    else:
        u = _grid_fn(p["u0"], p)
        ga = hs.r_transform(phi0).samples
        gb = hs.tangent_direction(phi0, u)
        step = lambda t: hs.geodesic_ivp(phi0, u, t)  # noqa: E731
    for t in t_grid:
        pt = step(t)
        # the R-coordinate is affine in t, also past the monoid boundary
        gam = ga + t * gb
        flags.append({"t": t, "monoid": pt.meta.get("monoid", False), "in_group": pt.in_group})
        rows.extend([t, float(x), float(f), float(gg)] for x, f, gg in zip(pt.x, pt.values, gam))
    return {"t_grid": t_grid, "points": flags}, {"columns": ["t", "x", "f", "gamma"], "rows": rows}, True


def hs_distance(p):
    phi0, phi1 = _hs(p.get("phi0", "identity"), p), _hs(p["phi1"], p)
    return {"distance": hs.distance(phi0, phi1)}, None, True


def hs_shift(p):
    phi0, phi1 = _hs(p["phi0"], p), _hs(p["phi1"], p)
    rows = [hs.shift_r(phi0, phi1, float(t)) for t in p.get("t_grid", [0.25, 0.5, 2.0])]
    table = {"columns": ["t", "closed_form", "measured"], "rows": [[r["t"], r["closed_form"], r["measured"]] for r in rows]}
    return {"rows": rows}, table, True


def hs_blowup(p):
    phi0 = _hs(p.get("phi0", "identity"), p)
    mode = p.get("mode", "ivp")
    target = _hs(p["phi1"], p) if mode == "bvp" else _grid_fn(p["u0"], p)
    rep = hs.blowup_monoid(phi0, target, mode)
    out = rep.to_json()
    samples = []
    for t in p.get("t_samples", []):
        s = rep.sample(float(t))
        samples.append({k: v for k, v in s.items() if k != "phi"})
    out["samples"] = samples
    return out, None, True


def hs_validate(p):
    out, table, ok = {}, None, True
    if "phi1" in p:
        res = hs.validate(_hs(p.get("phi0", "identity"), p), _hs(p["phi1"], p))
        out["geodesic_checks"] = res
        ok = ok and res["pass"]
    if "u0" in p:
        u = _grid_fn(p["u0"], p)
        phi0 = hs.identity(_window(p), u.h)
        b = hs.blowup_monoid(phi0, u, "ivp")
        frac = float(p.get("t_fraction", 0.5))
        t = frac * b.t1
        gap = hs.oracle_gap(u, t, float(p.get("dt", 1e-4)))
        out["oracle"] = gap
        out["t1"] = b.t1
        table = {"columns": ["t", "sup_error", "l2_error"], "rows": [[gap["t"], gap["sup_error"], gap["l2_error"]]]}
        ok = ok and gap["sup_error"] < float(p.get("tolerance", 1e-3))
    out["pass"] = ok
    return out, table, ok


def patho_lemma157(p):
    rep = pathologies.lemma157_profile(tuple(p.get("p_values", (1.5, 2.0, 4.0))), int(p.get("n_max", 1000)),
                                       int(p.get("k_max", 3)), tuple(p.get("schedule", pathologies.SCHEDULE)))
    rows = [[r["k"], r["p"], r["series_value"], r["quadrature_value"], r["rel_gap"]] for r in rep["table"]]
    return rep, {"columns": ["k", "p", "series_value", "quadrature_value", "rel_gap"], "rows": rows}, True


def patho_halflie(p):
    rep = pathologies.halflie_divergence(float(p.get("p", 2.0)), int(p.get("n_max", 10000)),
                                         tuple(p.get("schedule", pathologies.SCHEDULE)))
    rows = [[r["window_right_edge"], r["term1_mass"], r["term2_mass"]] for r in rep["rows"]]
    return rep, {"columns": ["window_right_edge", "term1_mass", "term2_mass"], "rows": rows}, True


def patho_mu(p):
    k_max = int(p.get("k_max", 100))
    M = _seq(p.get("generator", {"kind": "gevrey", "s": 2}), max(k_max, 8))
    rep = pathologies.gevrey_mu_sequence(M, k_max)
    rows = [[k, r, kr] for k, r, kr in zip(rep["k"], rep["r"], rep["k_r"])]
    return rep, {"columns": ["k", "r_k", "k_r_k"], "rows": rows}, True


COMMANDS = {
    "weights.classify": weights_classify,
    "weights.qa": weights_qa,
    "jets.compose": jets_compose,
    "jets.invert": jets_invert,
    "jets.majorant": jets_majorant,
    "jets.fdbbound": jets_fdbbound,
    "spaces.seminorm": spaces_seminorm,
    "spaces.diagnose": spaces_diagnose,
    "spaces.inclusions": spaces_inclusions,
    "diffeo.compose": diffeo_compose,
    "diffeo.invert": diffeo_invert,
    "diffeo.conjugate": diffeo_conjugate,
    "diffeo.evolve": diffeo_evolve,
    "diffeo.matrix": diffeo_matrix,
    "hs.rt": hs_rt,
    "hs.geodesic": hs_geodesic,
    "hs.distance": hs_distance,
    "hs.shift": hs_shift,
    "hs.blowup": hs_blowup,
    "hs.validate": hs_validate,
    "patho.lemma157": patho_lemma157,
    "patho.halflie": patho_halflie,
    "patho.mu": patho_mu,
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def run_scenario(scenario: dict, out_json=None, out_csv=None, stdout=None) -> int:
    """Dispatch one scenario; returns the exit code.  Exceptions propagate."""
    if not isinstance(scenario, dict):
        raise ScenarioError("scenario must be a JSON object")
    command = scenario.get("command")
    if command not in COMMANDS:
        raise UsageError(f"unknown command {command!r}")
    params = {k: v for k, v in scenario.items() if k not in ("command", "out_json", "out_csv")}
    out_json = out_json or scenario.get("out_json")
    out_csv = out_csv or scenario.get("out_csv")
    report, table, ok = COMMANDS[command](params)
    if out_csv is not None:
        if table is None:
            raise UsageError(f"{command} has no CSV output")
        emit_report(table, "csv", out_csv, command, params)
    if out_json is not None:
        emit_report({"result": report, "ok": ok}, "json", out_json, command, params)
    else:
        from .emit import provenance

        (stdout or sys.stdout).write(dumps({"result": report, "ok": ok, "provenance": provenance(command, params)}))
    return EXIT_OK if ok else EXIT_INVARIANT


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ultradiff", description=__doc__.split("\n\n")[0])
    ap.add_argument("group", help="run, or a command group: " + ", ".join(sorted({c.split('.')[0] for c in COMMANDS})))
    ap.add_argument("name", help="scenario path for 'run', else the command name")
    ap.add_argument("--params", help="inline JSON parameters")
    ap.add_argument("--scenario", help="JSON file with parameters")
    ap.add_argument("--out-json")
    ap.add_argument("--out-csv")
    return ap


def _error(kind: str, message: str, code: int, **extra) -> int:
    payload = {"error": kind, "message": message, "exit_code": code}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON in {what}: {exc}") from exc


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        if args.group == "run":
            try:
                text = Path(args.name).read_text()
            except OSError as exc:
                return _error("IOError", str(exc), EXIT_IO)
            scenario = _load_json(text, args.name)
        else:
            command = f"{args.group}.{args.name}"
            if command not in COMMANDS:
                raise UsageError(f"unknown command {command!r}")
            scenario = {}
            if args.scenario:
                try:
                    scenario.update(_load_json(Path(args.scenario).read_text(), args.scenario))
                except OSError as exc:
                    return _error("IOError", str(exc), EXIT_IO)
            if args.params:
                scenario.update(_load_json(args.params, "--params"))
            scenario["command"] = command
        return run_scenario(scenario, args.out_json, args.out_csv)
    except UsageError as exc:
        return _error("UsageError", str(exc), EXIT_USAGE)
    except ScenarioError as exc:
        return _error("ScenarioError", str(exc), EXIT_DATA)
    except InvariantError as exc:
        return _error("InvariantError", str(exc), EXIT_INVARIANT, invariant=exc.invariant)
    except UltradiffError as exc:
        return _error(type(exc).__name__, str(exc), exc.exit_code)
    except (KeyError, TypeError) as exc:
        return _error("ScenarioError", f"missing or invalid parameter: {exc}", EXIT_DATA)
    except OSError as exc:
        return _error("IOError", str(exc), EXIT_IO)
    except (ValueError, ZeroDivisionError) as exc:
        return _error("DomainError", str(exc), EXIT_DOMAIN)
