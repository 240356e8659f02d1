"""Command-line entry point: ``ndks <command> [options]``.

Every command writes CSV (default) or JSON to stdout or ``--out``. Floats are
printed with 17 significant digits so identical invocations give identical
bytes. Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 verify
failure.
"""

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from ndks import __version__, entangle, measures
from ndks.errors import NdksError
from ndks.fock import NdksParams, build_ndks, choose_cutoff

COMMANDS = ("state", "pnd", "mandel", "wigner", "husimi", "squeeze", "ep", "verify")
SWEEP_COMMANDS = ("mandel", "squeeze", "ep")
GRID_COMMANDS = ("wigner", "husimi")
SWEEP_VARS = ("gamma", "alpha_sq")
DEFAULT_TAIL = 1e-9
PHASE_SPACE_TAIL = 1e-13

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: NdksParams
    auto_cutoff: bool = True
    sweep: Sweep | None = None
    grid: measures.GridSpec | None = None
    output: str = "csv"
    out_path: str | None = None
    tail_tol: float = DEFAULT_TAIL
    variant: str = "two_term"

    def echo(self) -> dict:
        d = asdict(self)
        d["params"] = {
            "alpha": [self.params.alpha.real, self.params.alpha.imag],
            "beta": [self.params.beta.real, self.params.beta.imag],
            "gamma": self.params.gamma,
            "p": self.params.p,
            "cutoff": 0 if self.auto_cutoff else self.params.cutoff,
        }
        return d


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_sweep(text: str) -> Sweep:
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"--sweep expects VAR:FROM:TO:STEPS, got {text!r}")
    var = parts[0]
    if var not in SWEEP_VARS:
        raise UsageError(f"sweep variable must be one of {', '.join(SWEEP_VARS)}, got {var!r}")
    try:
        start, stop, steps = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError:
        raise UsageError(f"malformed --sweep {text!r}") from None
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise UsageError("sweep bounds must be finite")
    if steps < 2:
        raise UsageError("sweep needs at least 2 steps")
    if var == "alpha_sq" and min(start, stop) < 0:
        raise UsageError("alpha_sq sweep must be non-negative")
    return Sweep(var, start, stop, steps)


def _parse_grid(text: str) -> measures.GridSpec:
    parts = text.split(":")
    if len(parts) != 6:
        raise UsageError(f"--grid expects XMIN:XMAX:YMIN:YMAX:NX:NY, got {text!r}")
    try:
        x0, x1, y0, y1 = map(float, parts[:4])
        nx, ny = int(parts[4]), int(parts[5])
        return measures.GridSpec(x0, x1, y0, y1, nx, ny)
    except ValueError as exc:
        raise UsageError(f"malformed --grid {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ndks", description="Nonlinear displaced Kerr state calculator.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--alpha-re", type=float, default=1.0)
    parser.add_argument("--alpha-im", type=float, default=0.0)
    parser.add_argument("--beta-re", type=float, default=2.0)
    parser.add_argument("--beta-im", type=float, default=0.0)
    parser.add_argument("--gamma", type=float, default=0.05)
    parser.add_argument("--p", type=int, default=0)
    parser.add_argument("--cutoff", type=int, default=0, help="Fock dimension, 0 = automatic")
    parser.add_argument("--tail-tol", type=float, default=None,
                        help="discarded probability allowed by the automatic cutoff")
    parser.add_argument("--sweep", default=None, metavar="VAR:FROM:TO:STEPS")
    parser.add_argument("--grid", default=None, metavar="XMIN:XMAX:YMIN:YMAX:NX:NY")
    parser.add_argument("--variant", choices=("two_term", "projection", "full"), default="two_term",
                        help="EP input: truncated two-term state, projected output, or full state")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", default=None)
    return parser


def _attach_values(argv):
    """Glue VALUE onto --grid/--sweep so ranges like -4:10:... are not read as flags."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--grid", "--sweep"):
            value = next(it, None)
            if value is None:
                raise UsageError(f"{tok} needs a value")
            tok = f"{tok}={value}"
        out.append(tok)
    return out


def parse_args(argv) -> RunConfig:
    ns = build_parser().parse_args(_attach_values(argv))
    if ns.p < 0:
        raise UsageError(f"--p must be non-negative, got {ns.p}")
    if ns.cutoff < 0:
        raise UsageError(f"--cutoff must be non-negative, got {ns.cutoff}")
    if ns.cutoff and ns.cutoff < ns.p + 2:
        raise UsageError(f"--cutoff must be at least p + 2 = {ns.p + 2}")
    tail = ns.tail_tol
    if tail is None:
        tail = PHASE_SPACE_TAIL if ns.command in GRID_COMMANDS else DEFAULT_TAIL
    if not 0.0 < tail < 1.0:
        raise UsageError(f"--tail-tol must lie in (0, 1), got {tail}")
    sweep = _parse_sweep(ns.sweep) if ns.sweep else None
    if sweep and ns.command not in SWEEP_COMMANDS:
        raise UsageError(f"--sweep only applies to {', '.join(SWEEP_COMMANDS)}")
    grid = _parse_grid(ns.grid) if ns.grid else None
    if grid and ns.command not in GRID_COMMANDS:
        raise UsageError(f"--grid only applies to {', '.join(GRID_COMMANDS)}")
    try:
        params = NdksParams(complex(ns.alpha_re, ns.alpha_im), complex(ns.beta_re, ns.beta_im),
                            ns.gamma, ns.p, ns.cutoff or ns.p + 2)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(ns.command, params, ns.cutoff == 0, sweep, grid, ns.format, ns.out,
                     tail, ns.variant)


def _fmt(v) -> str:
    return format(float(v), ".16e")


def _sized(cfg: RunConfig, params: NdksParams) -> NdksParams:
    if cfg.auto_cutoff:
        return params.with_cutoff(choose_cutoff(params, cfg.tail_tol))
    return params


def _sweep_params(cfg: RunConfig):
    """(value, params) pairs for the sweep, or the single configured point."""
    base = cfg.params
    if cfg.sweep is None:
        if cfg.command == "ep":
            return "alpha_sq", [(abs(base.alpha) ** 2, base)]
        return "gamma", [(base.gamma, base)]
    out = []
    for v in cfg.sweep.values():
        if cfg.sweep.variable == "gamma":
            q = NdksParams(base.alpha, base.beta, float(v), base.p, base.cutoff)
        else:
            # alpha keeps its phase; only the modulus is swept
            phase = base.alpha / abs(base.alpha) if base.alpha != 0 else 1.0
            q = NdksParams(math.sqrt(float(v)) * phase, base.beta, base.gamma, base.p, base.cutoff)
        out.append((float(v), q))
    return cfg.sweep.variable, out


def _ep_value(cfg: RunConfig, q: NdksParams) -> float:
    if cfg.variant == "full":
        return entangle.ep_full(_sized(cfg, q))
    return entangle.ep_truncated(q, cfg.variant)


def compute(cfg: RunConfig):
    """Return ``(columns, rows, extra)`` for a non-verify command."""
    cmd = cfg.command
    if cmd == "state":
        amps = build_ndks(_sized(cfg, cfg.params))
        rows = [(n, a.real, a.imag) for n, a in enumerate(amps)]
        return ["n", "re", "im"], rows, {}
    if cmd == "pnd":
        probs = measures.pnd(_sized(cfg, cfg.params))
        return ["n", "probability"], list(enumerate(probs)), {}
    if cmd in SWEEP_COMMANDS:
        var, points = _sweep_params(cfg)
        rows = []
        for v, q in points:
            if cmd == "mandel":
                rows.append((v, measures.mandel_q(_sized(cfg, q))))
            elif cmd == "squeeze":
                s = measures.squeezing(_sized(cfg, q))
                rows.append((v, s.s_x, s.s_p))
            else:
                rows.append((v, _ep_value(cfg, q)))
        names = {"mandel": ["mandel_q"], "squeeze": ["s_x", "s_p"], "ep": ["ep"]}[cmd]
        return [var] + names, rows, {}
    params = _sized(cfg, cfg.params)
    if cmd == "wigner":
        result = measures.wigner_grid(params, cfg.grid)
    else:
        result = measures.husimi_grid(params, cfg.grid)
    return ["re", "im", "value"], list(result.rows()), {"integral": result.integral}


def _render_csv(columns, rows, extra) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(str(v) if isinstance(v, (int, np.integer)) else _fmt(v) for v in row) + "\n")
    if "integral" in extra:
        buf.write(f"# integral={_fmt(extra['integral'])}\n")
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    return float(_fmt(v))


def _render_json(cfg: RunConfig, columns, rows, extra) -> str:
    doc = {
        "meta": {"config": cfg.echo(), "version": __version__},
        "columns": columns,
        "rows": [[_jsonable(v) for v in row] for row in rows],
    }
    for k, v in extra.items():
        doc[k] = _jsonable(v)
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def _emit(cfg: RunConfig, text: str):
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_verify(cfg: RunConfig) -> int:
    from ndks.verify import run_verify

    report = run_verify()
    if cfg.output == "json":
        doc = {"meta": {"config": cfg.echo(), "version": __version__},
               "checks": [asdict(c) for c in report.checks], "passed": report.passed}
        text = json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    else:
        text = "\n".join(report.lines()) + "\n"
    _emit(cfg, text)
    return EXIT_OK if report.passed else EXIT_VERIFY


def run(cfg: RunConfig) -> int:
    try:
        if cfg.command == "verify":
            return _run_verify(cfg)
        columns, rows, extra = compute(cfg)
    except NdksError as exc:
        print(f"ndks {cfg.command}: numerical failure for {cfg.params}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.output == "json":
        text = _render_json(cfg, columns, rows, extra)
    else:
        text = _render_csv(columns, rows, extra)
    _emit(cfg, text)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"ndks: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
