"""Command-line front end: ``kmu-shadowed <command> [options]``.

Every command sweeps one variable over ``--x start:stop:points`` and writes
CSV rows ``x,value[,...]`` after a header line that echoes the canonical
parameters::

    # kmu-shadowed v1 command=<cmd> <canonical params>

For ``pdf``, ``cdf`` and ``mgf`` the sweep variable is the SNR ``gamma`` (or
``s`` for the MGF).  With more than one branch ``pdf`` and ``cdf`` describe
the MRC output (the sum of the branch SNRs) and ``mgf`` is the product of the
branch MGFs.  For the diversity commands the sweep variable is the average
SNR per branch: branch ``k`` gets mean SNR ``x * gamma_bar_k``, so with the
presets (``gamma_bar_k = 1``) ``x`` is the per-branch average SNR itself.

Exit status is 0 on success, 2 on a usage error and 3 when a numerical
evaluation fails to converge.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import distribution, montecarlo, performance, summax
from .distribution import ShadowedParams
from .errors import ConvergenceError, DomainError
from .performance import ModulationSpec, OutageQuery
from .specialfn import NumericControl
from .summax import BranchSet

__all__ = ["CurveSpec", "UsageError", "parse_args", "render", "run", "main"]

COMMANDS = ("pdf", "cdf", "mgf", "outage-sc", "outage-mrc", "ber-mrc", "simulate", "validate")
SIM_TARGETS = ("outage-sc", "outage-mrc", "ber-mrc")
DIVERSITY = ("outage-sc", "outage-mrc", "ber-mrc", "simulate", "validate")

# kappa and mu of the three-branch scenario used by the diversity figures
PRESET_BRANCHES = ((1.2, 4.0), (2.7, 2.0), (3.1, 1.0))
PRESETS = ("fig2", "fig3", "fig4")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

DEFAULT_SEED = 1
DEFAULT_SAMPLES = {"simulate": 1_000_000, "validate": 100_000}
CTL_FLAGS = (("rel_tol", float), ("abs_tol", float), ("max_terms", int),
             ("quad_points", int), ("inv_laplace_terms", int))


class UsageError(Exception):
    """Invalid command line; maps to exit status 2."""


@dataclass(frozen=True)
class CurveSpec:
    """Fully validated description of one CLI run."""

    command: str
    branches: BranchSet
    x_axis: str
    x_range: Tuple[float, float, int]
    modulation: Optional[ModulationSpec] = None
    eta_db: Optional[float] = None
    seed: Optional[int] = None
    samples: Optional[int] = None
    target: Optional[str] = None
    ctl: NumericControl = NumericControl()

    def grid(self) -> np.ndarray:
        start, stop, points = self.x_range
        return np.linspace(start, stop, points)

    def x_linear(self) -> np.ndarray:
        x = self.grid()
        return 10.0 ** (x / 10.0) if self.x_axis == "snr_db" else x


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kmu-shadowed", description="Statistics and diversity performance "
                "of kappa-mu shadowed fading channels.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--branch", action="append", default=[], metavar="SPEC",
                   help="branch parameters 'gamma_db=G,kappa=K,mu=MU,m=M' (gamma=G for a "
                        "linear mean SNR); repeat for several branches")
    p.add_argument("--preset", choices=PRESETS,
                   help="three-branch scenario kappa=(1.2,2.7,3.1), mu=(4,2,1); needs --m")
    p.add_argument("--m", type=float, help="shadowing parameter of every preset branch")
    p.add_argument("--x", dest="x_range", metavar="START:STOP:POINTS", help="sweep grid")
    p.add_argument("--x-axis", choices=("gamma", "snr_db"))
    p.add_argument("--eta-db", type=float, help="outage threshold in dB (default 0)")
    p.add_argument("--modulation", help="'bpsk' or 'alpha:beta[,alpha:beta...]' (default bpsk)")
    p.add_argument("--target", choices=SIM_TARGETS, help="quantity estimated by simulate")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="Monte-Carlo trials per curve or grid point")
    for name, typ in CTL_FLAGS:
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)
    return p


def _parse_branch(text: str) -> ShadowedParams:
    fields = {}
    for item in text.split(","):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key in fields:
            raise UsageError(f"malformed branch {text!r}: bad or repeated item {item!r}")
        try:
            fields[key] = float(val)
        except ValueError:
            raise UsageError(f"malformed branch {text!r}: {val!r} is not a number") from None
    if ("gamma" in fields) == ("gamma_db" in fields):
        raise UsageError(f"malformed branch {text!r}: give exactly one of gamma_db or gamma")
    missing = {"kappa", "mu", "m"} - fields.keys()
    unknown = fields.keys() - {"gamma", "gamma_db", "kappa", "mu", "m"}
    if missing or unknown:
        raise UsageError(f"malformed branch {text!r}: missing {sorted(missing)} unknown {sorted(unknown)}")
    gbar = fields["gamma"] if "gamma" in fields else 10.0 ** (fields["gamma_db"] / 10.0)
    try:
        return ShadowedParams(gbar, fields["kappa"], fields["mu"], fields["m"])
    except DomainError as exc:
        raise UsageError(f"malformed branch {text!r}: {exc}") from None


def _parse_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"malformed --x {text!r}: expected START:STOP:POINTS")
    try:
        start, stop = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError:
        raise UsageError(f"malformed --x {text!r}") from None
    if not (math.isfinite(start) and math.isfinite(stop)) or not start < stop:
        raise UsageError(f"invalid --x {text!r}: need start < stop")
    if points < 2:
        raise UsageError(f"invalid --x {text!r}: need at least 2 points")
    return start, stop, points


def _parse_modulation(text: str) -> ModulationSpec:
    if text.strip().lower() == "bpsk":
        return ModulationSpec.bpsk()
    pairs = []
    for item in text.split(","):
        a, sep, b = item.partition(":")
        try:
            if not sep:
                raise ValueError
            pairs.append((float(a), float(b)))
        except ValueError:
            raise UsageError(f"malformed --modulation {text!r}: bad pair {item!r}") from None
    try:
        return ModulationSpec(pairs)
    except DomainError as exc:
        raise UsageError(f"malformed --modulation {text!r}: {exc}") from None


def parse_args(argv) -> CurveSpec:
    """Validate a command line into a :class:`CurveSpec`; raises :class:`UsageError`."""
    ns = _build_parser().parse_args(list(argv))
    cmd = ns.command

    if ns.preset is not None:
        if ns.branch:
            raise UsageError("--preset and --branch are mutually exclusive")
        if ns.m is None:
            raise UsageError(f"--preset {ns.preset} needs --m")
        try:
            branches = [ShadowedParams(1.0, k, mu, ns.m) for k, mu in PRESET_BRANCHES]
        except DomainError as exc:
            raise UsageError(f"invalid --m {ns.m!r}: {exc}") from None
    else:
        if ns.m is not None:
            raise UsageError("--m is only meaningful with --preset")
        if not ns.branch:
            raise UsageError("give at least one --branch or a --preset")
        branches = [_parse_branch(b) for b in ns.branch]
    bs = BranchSet(branches)

    if ns.x_range is None:
        if ns.preset is None:
            raise UsageError("--x START:STOP:POINTS is required")
        x_range = (0.0, 30.0, 31)
    else:
        x_range = _parse_range(ns.x_range)

    x_axis = ns.x_axis or ("snr_db" if cmd in DIVERSITY else "gamma")
    if cmd == "mgf" and x_axis != "gamma":
        raise UsageError("mgf sweeps the transform variable s; --x-axis must be gamma")
    if cmd in DIVERSITY and x_axis == "gamma" and x_range[0] <= 0:
        raise UsageError("a linear average-SNR sweep must start above zero")
    if cmd in ("pdf", "cdf") and x_axis == "gamma" and x_range[0] < 0:
        raise UsageError("the SNR sweep must not start below zero")

    target = ns.target
    if cmd == "simulate":
        if target is None:
            raise UsageError("simulate needs --target outage-sc|outage-mrc|ber-mrc")
    elif target is not None:
        raise UsageError("--target is only meaningful with simulate")
    quantity = target if cmd == "simulate" else cmd

    modulation = None
    if quantity == "ber-mrc":
        modulation = _parse_modulation(ns.modulation) if ns.modulation else ModulationSpec.bpsk()
    elif ns.modulation is not None:
        raise UsageError(f"--modulation is not used by {cmd}")

    eta_db = None
    if quantity in ("outage-sc", "outage-mrc"):
        eta_db = 0.0 if ns.eta_db is None else float(ns.eta_db)
        if not math.isfinite(eta_db):
            raise UsageError("--eta-db must be finite")
    elif ns.eta_db is not None:
        raise UsageError(f"--eta-db is not used by {cmd}")

    seed = samples = None
    if cmd in ("simulate", "validate"):
        seed = DEFAULT_SEED if ns.seed is None else ns.seed
        samples = DEFAULT_SAMPLES[cmd] if ns.samples is None else ns.samples
        if not 0 <= seed < 2 ** 64:
            raise UsageError(f"--seed must be in [0, 2^64), got {seed}")
        if samples < 1:
            raise UsageError(f"--samples must be positive, got {samples}")
    elif ns.seed is not None or ns.samples is not None:
        raise UsageError(f"--seed/--samples are not used by {cmd}")

    overrides = {name: getattr(ns, name) for name, _ in CTL_FLAGS if getattr(ns, name) is not None}
    try:
        ctl = NumericControl(**overrides)
    except DomainError as exc:
        raise UsageError(str(exc)) from None

    return CurveSpec(cmd, bs, x_axis, x_range, modulation, eta_db, seed, samples, target, ctl)


def _num(x) -> str:
    return repr(float(x))


def render_argv(spec: CurveSpec):
    """Canonical argument list (without the command) that parses back to ``spec``."""
    out = []
    for b in spec.branches:
        out.append(f"--branch=gamma={_num(b.gamma_bar)},kappa={_num(b.kappa)},"
                   f"mu={_num(b.mu)},m={_num(b.m)}")
    start, stop, points = spec.x_range
    out += [f"--x-axis={spec.x_axis}", f"--x={_num(start)}:{_num(stop)}:{points}"]
    if spec.eta_db is not None:
        out.append(f"--eta-db={_num(spec.eta_db)}")
    if spec.modulation is not None:
        out.append("--modulation=" + ",".join(f"{_num(a)}:{_num(b)}" for a, b in spec.modulation.pairs))
    if spec.target is not None:
        out.append(f"--target={spec.target}")
    if spec.seed is not None:
        out.append(f"--seed={spec.seed}")
    if spec.samples is not None:
        out.append(f"--samples={spec.samples}")
    for name, _ in CTL_FLAGS:
        val = getattr(spec.ctl, name)
        out.append(f"--{name.replace('_', '-')}={_num(val) if isinstance(val, float) else val}")
    return out


def render(spec: CurveSpec) -> str:
    """Canonical parameter echo used in the CSV header."""
    return " ".join(render_argv(spec))


def _threads() -> int:
    raw = os.environ.get("KMU_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"KMU_THREADS must be a positive integer, got {raw!r}")
    return n


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return format(float(v), ".17g")


def _scaled(bs: BranchSet, x: float) -> BranchSet:
    return BranchSet(dataclasses.replace(b, gamma_bar=x * b.gamma_bar) for b in bs)


class _RowError(Exception):
    def __init__(self, x, exc):
        super().__init__(f"row x={_fmt(x)}: {exc}")
        self.exc = exc


def _point_fn(spec: CurveSpec):
    """Callable ``(x_display, x_linear) -> tuple of row values`` for analytic commands."""
    bs, ctl, cmd = spec.branches, spec.ctl, spec.command
    single = len(bs) == 1
    eta = 10.0 ** (spec.eta_db / 10.0) if spec.eta_db is not None else None

    if cmd == "pdf":
        return lambda x: (float(distribution.pdf(bs[0], x, ctl) if single else summax.sum_pdf(bs, x, ctl)),)
    if cmd == "cdf":
        return lambda x: (float(distribution.cdf(bs[0], x, ctl) if single else summax.sum_cdf(bs, x, ctl)),)
    if cmd == "mgf":
        return lambda s: (math.prod(float(distribution.mgf(b, s, ctl)) for b in bs),)
    if cmd == "outage-sc":
        return lambda x: (performance.outage_sc(OutageQuery(_scaled(bs, x), eta), ctl),)
    if cmd == "outage-mrc":
        return lambda x: (performance.outage_mrc(OutageQuery(_scaled(bs, x), eta), ctl),)
    if cmd == "ber-mrc":
        return lambda x: (performance.ber_mrc(_scaled(bs, x), spec.modulation, ctl),)
    if cmd == "validate":
        M = len(bs)
        threshold = montecarlo.ks_threshold(spec.samples)

        def validate(x, i):
            sb = _scaled(bs, x)
            # an independent stream per grid point and branch
            draws = [montecarlo.sample_extended(b, spec.samples, spec.seed, branch=i * M + k)
                     for k, b in enumerate(sb)]
            if single:
                batch, fn = draws[0], lambda g: distribution.cdf(sb[0], g, ctl)
            else:
                total = np.sum([d.values for d in draws], axis=0)
                batch = montecarlo.SampleBatch(total, spec.seed, spec.samples)
                fn = lambda g: summax.sum_cdf(sb, g, ctl)  # noqa: E731
            ks = montecarlo.ks_statistic(batch, fn)
            return ks, threshold, ks <= threshold

        return validate
    raise AssertionError(cmd)


def _evaluate(spec: CurveSpec, threads: int):
    xs = spec.grid()
    lin = spec.x_linear()
    if spec.command == "simulate":
        eta = 10.0 ** (spec.eta_db / 10.0) if spec.eta_db is not None else 1.0
        try:
            est = montecarlo.simulate_curve(spec.branches, lin, spec.target, spec.samples, spec.seed,
                                            eta=eta, mod=spec.modulation, workers=threads)
        except (ConvergenceError, DomainError) as exc:
            raise _RowError(xs[0], exc) from exc
        return [(x, e.value, e.lo, e.hi) for x, e in zip(xs, est)]

    fn = _point_fn(spec)
    indexed = spec.command == "validate"

    def one(i):
        try:
            vals = fn(lin[i], i) if indexed else fn(lin[i])
        except (ConvergenceError, DomainError) as exc:
            raise _RowError(xs[i], exc) from exc
        return (xs[i],) + tuple(vals)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(xs.size)))
    return [one(i) for i in range(xs.size)]


def run(spec: CurveSpec, out, err=None) -> int:
    """Write the CSV for ``spec`` to the byte sink ``out``; returns the exit status."""
    err = err if err is not None else sys.stderr
    try:
        threads = _threads()
        rows = _evaluate(spec, threads)
    except UsageError as exc:
        print(f"kmu-shadowed: error: {exc}", file=err)
        return EXIT_USAGE
    except _RowError as exc:
        print(f"kmu-shadowed: error: {exc}", file=err)
        return EXIT_USAGE if isinstance(exc.exc, DomainError) else EXIT_NUMERIC
    lines = [f"# kmu-shadowed v1 command={spec.command} {render(spec)}"]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    out.write(("\n".join(lines) + "\n").encode("ascii"))
    out.flush()
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_args(argv)
    except UsageError as exc:
        print(f"kmu-shadowed: error: {exc}", file=sys.stderr)
        print("usage: kmu-shadowed {" + ",".join(COMMANDS) + "} [options]; see --help", file=sys.stderr)
        return EXIT_USAGE
    return run(spec, sys.stdout.buffer)


if __name__ == "__main__":
    sys.exit(main())
