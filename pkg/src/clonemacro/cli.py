"""Command-line front end: plot-ready CSV or JSON tables for every computation.

Every output starts with the full run configuration, as a ``# config:`` line
in CSV or a ``config`` object in JSON, so a file records how it was made.

Exit codes: 0 on success, 2 for invalid input, 3 when a numerical health or
consistency check fails (including a failed ``oracle-check``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import crosscheck, distinguish, macromeasures, metrology
from .errors import CapacityError, ConsistencyError, NumericalHealthError, UnsupportedInputError

__all__ = ["main", "build_parser", "PRESETS", "run"]

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

#: Named argument sets reproducing the published figures and table.
PRESETS = {
    "fig-subgroup": ("subgroup", {"k_range": "1:200"}),
    "table-effective-sizes": ("measures", {"n_range": "3:101:2"}),
    "fig-distinguishability": ("distinguish", {"n_range": "3:199:2", "u": 0.9}),
    "fig-povm-profiles": ("povm-profile", {"n": 31, "sigma": "0,1,sqrt"}),
    "fig-metrology-bitflip": (
        "metrology",
        {"n_range": "3:9:2", "omega": 1.0, "gamma": 0.5, "noise": "bitflip", "measurement": "global,z,local"},
    ),
    "fig-metrology-white": (
        "metrology",
        {"n_range": "3:9:2", "omega": 1.0, "gamma": 0.2, "noise": "white", "measurement": "global,z,local"},
    ),
    "oracle-check": ("oracle-check", {"n_range": "3:7:2"}),
}


class _InvalidInput(ValueError):
    pass


# -- argument parsing ----------------------------------------------------------


def _int_list(text: str, odd: bool) -> list[int]:
    """``"a:b[:step]"`` (inclusive) or ``"a,b,c"``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) == 3 else (2 if odd else 1)
            if step <= 0 or stop < start:
                raise ValueError
            values = list(range(start, stop + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise _InvalidInput(f"cannot parse range {text!r}; use start:stop[:step] or a comma list") from None
    if not values:
        raise _InvalidInput(f"range {text!r} is empty")
    if odd:
        even = [v for v in values if v < 1 or v % 2 == 0]
        if even:
            raise _InvalidInput(
                f"qubit numbers must be positive and odd (got {even[:5]}); "
                "the cloner output is only modelled for odd N"
            )
    return values


def _sigma_list(text: str, n: int) -> list[float]:
    out = []
    for p in text.split(","):
        p = p.strip().lower()
        if p in ("sqrt", "sqrt(n)", "sqrtn"):
            out.append(math.sqrt(n))
            continue
        try:
            v = float(p)
        except ValueError:
            raise _InvalidInput(f"cannot parse sigma {p!r}") from None
        if v < 0 or not math.isfinite(v):
            raise _InvalidInput("sigma must be a finite non-negative number")
        out.append(v)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clonemacro", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--preset", choices=sorted(k for k, v in PRESETS.items() if v[0] == p.prog.split()[-1]))
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("subgroup", help="success probability of k-qubit subgroups")
    p.add_argument("--n", type=int, help="finite odd N (exact); omit for the large-N limit")
    p.add_argument("--k-range", default="1:200")
    common(p)

    p = sub.add_parser("measures", help="effective-size measures")
    p.add_argument("--n-range", default="3:101:2")
    p.add_argument("--threshold", type=float, default=0.99)
    common(p)

    p = sub.add_parser("distinguish", help="distinguishability under imperfect measurements")
    p.add_argument("--n-range", default="3:199:2")
    p.add_argument("--sigma", help="POVM width (default sqrt(N))")
    p.add_argument("--u", type=float, default=0.9, help="phase-noise keep probability")
    common(p)

    p = sub.add_parser("povm-profile", help="outcome probabilities of the Gaussian POVM")
    p.add_argument("--n", type=int, default=31)
    p.add_argument("--sigma", default="0,1,sqrt", help="comma list; 'sqrt' means sqrt(N)")
    common(p)

    p = sub.add_parser("metrology", help="gain over product states for frequency estimation")
    p.add_argument("--n-range", default="3:9:2")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--noise", choices=("bitflip", "white"), default="bitflip")
    p.add_argument("--measurement", default="global,z,local", help="comma list of global, z, local")
    common(p)

    p = sub.add_parser("oracle-check", help="compare formulas with brute-force simulation")
    p.add_argument("--n-range", default="3:7:2")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    return parser


# -- commands --------------------------------------------------------------------


def _cmd_subgroup(cfg):
    ks = _int_list(cfg["k_range"], odd=False)
    n = cfg.get("n")
    if n is not None:
        _int_list(str(n), odd=True)
    if min(ks) < 1 or (n is not None and max(ks) > n):
        raise _InvalidInput("k must lie in [1, N]")
    rows = []
    for k in ks:
        if n is None:
            p_k = macromeasures.asymptotic_subgroup_probability(k)
            p_rest = macromeasures.asymptotic_complement_probability(k)
        else:
            p_k = macromeasures.subgroup_success_probability(n, k).probability
            p_rest = macromeasures.subgroup_success_probability(n, n - k).probability if k < n else 0.5
        rows.append({"k": k, "p_subgroup": p_k, "p_all_but_k": p_rest})
    return ["k", "p_subgroup", "p_all_but_k"], rows


def _cmd_measures(cfg):
    if not 0.5 < cfg["threshold"] < 1:
        raise _InvalidInput("threshold must lie in (1/2, 1)")
    rows = []
    for n in _int_list(cfg["n_range"], odd=True):
        r = macromeasures.effective_sizes(n, cfg["threshold"], exact=True)
        rows.append(
            {
                "n": n,
                "korsbakken": float(r.korsbakken),
                "marquardt": float(r.marquardt),
                "relative_fisher": float(r.relative_fisher),
                "index_p_size": float(r.index_p_size),
                "fisher_size": float(r.fisher_size),
                "max_variance": float(r.max_variance),
            }
        )
    return list(rows[0]), rows


def _cmd_distinguish(cfg):
    ns = _int_list(cfg["n_range"], odd=True)
    u = cfg["u"]
    if not 0.5 <= u <= 1:
        raise _InvalidInput("u must lie in [1/2, 1]")
    sigma_text = cfg.get("sigma")
    sigma_fixed = None
    if sigma_text is not None and sigma_text.strip().lower() not in ("sqrt", "sqrt(n)", "sqrtn"):
        sigma_fixed = _sigma_list(sigma_text, 1)[0]
    series = {"sharp": [], "pair": [], "povm": [], "noise": []}
    rows = []
    for n in ns:
        sigma = math.sqrt(n) if sigma_fixed is None else sigma_fixed
        values = {
            "sharp": (None, distinguish.sharp_probabilities(n)),
            "pair": (None, distinguish.pair_coarsened_probabilities(n)),
            "povm": (sigma, distinguish.povm_probabilities(n, sigma)),
            "noise": (u, distinguish.noisy_probabilities(n, u)),
        }
        for name, (param, dist) in values.items():
            d = distinguish.distinguishability(dist)
            series[name].append(d)
            # small registers carry an independent brute-force value
            ref = crosscheck.oracle_distinguishability(n, name, param) if n <= crosscheck.MAX_CHECK_QUBITS else None
            rows.append({"n": n, "scenario": name, "parameter": param, "d": d, "oracle_d": ref})
    if len(ns) >= 5:
        for name in ("pair", "povm", "noise"):
            limit, diag = distinguish.extrapolate_limit(ns, series[name])
            rows.append({"n": "inf", "scenario": name, "parameter": diag.max_residual, "d": limit, "oracle_d": None})
    return ["n", "scenario", "parameter", "d", "oracle_d"], rows


def _cmd_povm_profile(cfg):
    n = _int_list(str(cfg["n"]), odd=True)[0]
    rows = []
    for sigma in _sigma_list(cfg["sigma"], n):
        dist = distinguish.povm_probabilities(n, sigma)
        for i in range(n + 1):
            rows.append({"sigma": sigma, "i": i, "p_plus": dist.probs_plus[i], "p_minus": dist.probs_minus[i]})
    return ["sigma", "i", "p_plus", "p_minus"], rows


def _cmd_metrology(cfg):
    ns = _int_list(cfg["n_range"], odd=True)
    kinds = [m.strip() for m in cfg["measurement"].split(",") if m.strip()]
    bad = [m for m in kinds if m not in ("global", "z", "local")]
    if bad or not kinds:
        raise _InvalidInput(f"unknown measurement(s) {bad}; choose from global, z, local")
    if not cfg["gamma"] > 0:
        raise _InvalidInput("gamma must be positive")
    if "global" in kinds and max(ns) > metrology.MAX_DENSITY_QUBITS:
        raise _InvalidInput(f"the global measurement needs N <= {metrology.MAX_DENSITY_QUBITS}")
    rows = metrology.relative_improvement_curve(cfg["noise"], cfg["omega"], cfg["gamma"], kinds, ns)
    return list(rows[0]), rows


def _cmd_oracle_check(cfg):
    ns = _int_list(cfg["n_range"], odd=True)
    if max(ns) > crosscheck.MAX_CHECK_QUBITS:
        raise _InvalidInput(f"oracle checks are limited to N <= {crosscheck.MAX_CHECK_QUBITS}")
    results = crosscheck.run_checks(ns, cfg["points"], cfg["seed"])
    rows = [
        {
            "check": r.name,
            "n": r.n_qubits,
            "points": r.n_points,
            "max_deviation": r.max_deviation,
            "tolerance": r.tolerance,
            "expect": "detect" if r.canary else "agree",
            "status": "pass" if r.passed else "FAIL",
        }
        for r in results
    ]
    failed = [r for r in results if not r.passed]
    return list(rows[0]), rows, failed


_COMMANDS = {
    "subgroup": _cmd_subgroup,
    "measures": _cmd_measures,
    "distinguish": _cmd_distinguish,
    "povm-profile": _cmd_povm_profile,
    "metrology": _cmd_metrology,
    "oracle-check": _cmd_oracle_check,
}


# -- output ------------------------------------------------------------------------


def _plain(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def _cell(value):
    value = _plain(value)
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else value


def _render(cfg: dict, columns: list[str], rows: list[dict], fmt: str) -> str:
    config_json = json.dumps(cfg, sort_keys=True)
    if fmt == "json":
        payload = {"config": cfg, "columns": columns, "rows": [{c: _plain(r[c]) for c in columns} for r in rows]}
        return json.dumps(payload, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# config: {config_json}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r[c]) for c in columns])
    return buf.getvalue()


def run(args: argparse.Namespace) -> tuple[int, str]:
    """Execute parsed arguments and return ``(exit_code, rendered_output)``."""
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "format", "preset")}
    if args.preset:
        cfg.update(PRESETS[args.preset][1])
        cfg["preset"] = args.preset
    result = _COMMANDS[args.command](cfg)
    status = EXIT_OK
    if len(result) == 3:
        columns, rows, failed = result
        if failed:
            status = EXIT_NUMERICAL
    else:
        columns, rows = result
    return status, _render(cfg, columns, rows, args.format)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit with 2
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INVALID
    try:
        status, text = run(args)
    except (NumericalHealthError, ConsistencyError) as exc:
        print(f"numerical health check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (_InvalidInput, UnsupportedInputError, CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status == EXIT_NUMERICAL:
        print("oracle check failed", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
