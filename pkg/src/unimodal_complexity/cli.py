"""Command line: kneading, complexity, wild-verify, odometer.

Exit codes: 0 ok, 2 precision exhausted, 3 budget or horizon exceeded,
4 hypothesis violation, 5 configuration error.

Configuration files are plain ``key = value`` lines (``#`` starts a comment);
keys are the long flag names with dashes replaced by underscores.  Flags given
on the command line override the file.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import List, Optional, Sequence

from .arith import as_fraction
from .complexity import (
    build_nice_cover,
    complexity_curve,
    envelope_sups,
    growth_classify,
    p_of_n,
    q_of_n,
    sandwich_check,
)
from .errors import ConfigError, HorizonExceeded, UnimodalError
from .interval_dynamics import Dynamics, renormalization_tower, seed_nice_interval
from .kneading import (
    KneadingData,
    bruin_criterion,
    bruin_lock_in,
    cutting_times,
    cutting_times_from_word,
    itinerary,
    kneading_map_from_S,
    parameter_bisection,
    q_pattern_lock_in,
    wild_combinatorics,
)
from .map_core import MapSpec
from .odometer import OdometerBase, alpha_from_covers, alpha_line, bases_up_to, check_odometer, min_separation, refinement_check, sweep
from .presets import NAMES, preset, target_cutting_times
from .wild import check_properties, wild_cyclic_covers, wild_domains

COMMANDS = ("kneading", "complexity", "wild-verify", "odometer")


@dataclass
class RunConfig:
    command: str = "kneading"
    param: Optional[str] = None
    ell: str = "2"
    preset: Optional[str] = None
    K: int = 20
    n_max: int = 200
    orbit: int = 200_000
    sample: Optional[int] = None
    cover_level: int = 1
    single_n: Optional[int] = None
    budget_iterate: int = 1 << 20
    budget_transition: int = 4000
    budget_branch: int = 4096
    budget_bisection: int = 4000
    precision_max: int = 4096
    alpha: Optional[str] = None
    alpha_bound: Optional[int] = None
    integer_only: bool = False
    bisect_K: int = 16
    wild_r0: int = 3
    wild_t0: int = 2
    out: Optional[str] = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("K", "n_max", "orbit", "budget_iterate", "budget_transition", "budget_branch", "budget_bisection", "precision_max", "cover_level", "bisect_K"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.sample is not None and self.sample <= 0:
            raise ConfigError("sample must be positive")
        if self.param is not None and self.preset is not None:
            raise ConfigError("give either param or preset, not both")
        if self.preset is not None and self.preset not in NAMES:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.param is not None:
            try:
                a = as_fraction(self.param)
            except (ValueError, ZeroDivisionError) as err:
                raise ConfigError(f"bad parameter {self.param!r}") from err
            if not 0 < a <= 1:
                raise ConfigError("param must lie in (0, 1]")
        try:
            ell = as_fraction(self.ell)
        except (ValueError, ZeroDivisionError) as err:
            raise ConfigError(f"bad ell {self.ell!r}") from err
        if ell <= 1:
            raise ConfigError("ell must exceed 1")
        if self.alpha is not None:
            parse_alphas(self.alpha)

    # -- serialization --------------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        return cls(**parse_config_text(text))


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    t = str(types[name])
    if "bool" in t:
        if raw.lower() in ("1", "true", "yes"):
            return True
        if raw.lower() in ("0", "false", "no"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if "int" in t:
        try:
            return int(raw)
        except ValueError as err:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from err
    return raw


def parse_config_text(text: str) -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"line {n}: expected key = value")
        key = key.strip().replace("-", "_")
        out[key] = _coerce(key, val.strip())
    return out


def parse_alphas(text: str) -> List[OdometerBase]:
    """'2,3;2,2,2,2' -> two bases."""
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            digits = tuple(int(x) for x in chunk.replace(" ", ",").split(",") if x)
        except ValueError as err:
            raise ConfigError(f"bad alpha {chunk!r}") from err
        out.append(OdometerBase(digits))
    if not out:
        raise ConfigError("alpha is empty")
    return out


# ---------------------------------------------------------------------------
# helpers


def _emit(cfg: RunConfig, text: str, suffix: str = "") -> None:
    if cfg.out:
        path = Path(cfg.out + suffix) if suffix else Path(cfg.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def resolve_map(cfg: RunConfig, orbit_length: int = 0) -> MapSpec:
    ell = as_fraction(cfg.ell)
    if cfg.param is not None:
        return MapSpec(as_fraction(cfg.param), ell)
    if cfg.preset is not None:
        if ell != 2 and cfg.preset != "chebyshev":
            S = target_cutting_times(cfg.preset, 12)
            return MapSpec(parameter_bisection(ell, target_S=S, tol=1, max_steps=cfg.budget_bisection, prec_cap=cfg.precision_max).a, ell)
        p = preset(cfg.preset, orbit_length)
        return p.map
    raise ConfigError("a parameter (--param) or a preset (--preset) is required")


def _sample_size(cfg: RunConfig) -> int:
    if cfg.sample is not None:
        return cfg.sample
    return cfg.orbit - max(1000, 5 * cfg.n_max)


# ---------------------------------------------------------------------------
# commands


def cmd_kneading(cfg: RunConfig) -> int:
    m = resolve_map(cfg)
    try:
        kd = cutting_times(m, cfg.K, iterate_budget=cfg.budget_iterate, prec_cap=cfg.precision_max)
    except HorizonExceeded as err:
        n = min(cfg.budget_iterate, 64)
        word = itinerary(m, n, prec_cap=cfg.precision_max)
        S = cutting_times_from_word(word)
        kd = KneadingData(symbols=word, S=S, Q=kneading_map_from_S(S), notes=[f"cutting times stop at the horizon: {err}"])
    kd.notes.insert(0, f"a = {m.a} (~{float(m.a):.16g}), ell = {m.ell}")
    _emit(cfg, kd.to_text())
    return 0


def _cover_base(m: MapSpec, cfg: RunConfig, dyn: Dynamics):
    if cfg.cover_level == 1:
        return seed_nice_interval(m)
    return renormalization_tower(m, cfg.cover_level, dyn)[cfg.cover_level - 1]


def cmd_complexity(cfg: RunConfig) -> int:
    m = resolve_map(cfg, cfg.orbit)
    dyn = Dynamics(m, cfg.orbit, prec_cap=cfg.precision_max)
    Y = _cover_base(m, cfg, dyn)
    N = _sample_size(cfg)
    if cfg.single_n is not None:
        cover = build_nice_cover(m, Y, N, dyn=dyn)
        n = cfg.single_n
        text = f"n,q,p_next\n{n},{q_of_n(m, cover, n)},{p_of_n(cover, n + 1)}\n"
        _emit(cfg, text, ".single.csv")
        return 0
    curve = complexity_curve(m, Y, cfg.n_max, N, dyn, child_budget=min(cfg.budget_transition, dyn.M // 2 - 2))
    report = []
    sw = sandwich_check(curve)
    report.append(f"sandwich violations: {len(sw.violations)}")
    report.extend(sw.violations)
    report.extend(sw.notes)
    series_p = [(n, curve.p[n]) for n in range(2, curve.n_max + 1)]
    try:
        fit = growth_classify(series_p, tail_from=max(2, curve.n_max // 4))
        report.append("growth of p:")
        report.extend("  " + line for line in fit.lines())
        shifted = [(n, curve.p[n + 1]) for n in range(2, curve.n_max)]
        report.append(f"inf p(n+1)/n over the tail: {growth_classify(shifted, tail_from=max(2, curve.n_max // 4)).inf_over_n:.6g}")
    except UnimodalError as err:
        report.append(f"growth fit skipped: {err}")
    if curve.n_max >= 50:
        sups = envelope_sups({n: curve.p[n] for n in range(50, curve.n_max + 1)}, 50, curve.n_max)
        report.append(f"sup p(n)/(n log n) over n in [50, {curve.n_max}]: {sups[0]:.6g}")
    if curve.n_max >= 100:
        report.append(f"min q(n)/n over n in [100, {min(200, curve.n_max)}]: {min(curve.q[n] / n for n in range(100, min(200, curve.n_max) + 1)):.6g}")
    if curve.M:
        ratios = [curve.M[n] / math.log(n) for n in curve.M if n > 1]
        if ratios:
            report.append(f"max M_n/log n over n <= {curve.n_max}: {max(ratios):.6g}")
    if cfg.out:
        _emit(cfg, curve.to_csv(), ".csv")
        _emit(cfg, curve.sidecar_json(), ".json")
        _emit(cfg, "\n".join(report) + "\n", ".report.txt")
    else:
        sys.stdout.write(curve.to_csv())
        sys.stderr.write("\n".join(report) + "\n")
    return 0


def cmd_wild_verify(cfg: RunConfig) -> int:
    lines: List[str] = []
    ok = True

    def check(name: str, passed: bool, detail: str = ""):
        nonlocal ok
        ok &= bool(passed)
        lines.append(f"{'PASS' if passed else 'FAIL'} {name}" + (f": {detail}" if detail else ""))

    K = max(cfg.K, 6)
    wc = wild_combinatorics(K, r0=cfg.wild_r0, t0=cfg.wild_t0)
    reference = wild_combinatorics(K)
    check("recursions give r = 3, 5, 10, 15, 30, ...", wc.r[:5] == [3, 5, 10, 15, 30], " ".join(map(str, wc.r[:8])))
    check("merged cutting times begin 5, 8, 10, 15, 25, 30, 45, 75, 90", wc.merged_cutting_times[:9] == [5, 8, 10, 15, 25, 30, 45, 75, 90], " ".join(map(str, wc.merged_cutting_times[:9])))
    S = [1, 2, 3] + wc.merged_cutting_times
    try:
        Q = kneading_map_from_S(S)
    except UnimodalError as err:
        check("merged sequence is a cutting-time sequence", False, str(err))
        Q = None
    if Q is not None:
        lock = q_pattern_lock_in(Q)
        check("kneading map locks into the k-5, k-3, k-2 pattern", lock is not None and sorted(lock[1]) == [2, 3, 5], str(lock))
        k1 = bruin_lock_in(Q, 5)
        rep = bruin_criterion(Q, k1 if k1 is not None else 1, 5)
        check("Q(k+1) >= Q(Q(k)) + 1 and k - Q(k) <= 5 beyond lock-in", k1 is not None and rep.holds, f"k1 = {k1}, horizon = {rep.horizon}")
    if not cfg.integer_only:
        ell = as_fraction(cfg.ell)
        if cfg.param is not None or cfg.preset is not None:
            m = resolve_map(cfg, cfg.orbit)
        else:
            target = [1, 2, 3] + reference.merged_cutting_times
            target = target[: cfg.bisect_K + 1]
            enc = parameter_bisection(ell, target_S=target, tol=1, max_steps=cfg.budget_bisection, prec_cap=cfg.precision_max)
            m = MapSpec(enc.a, ell)
            lines.append(f"bisection: a ~ {float(enc.a):.16g} realizes S up to {target[-1]}")
        dyn = Dynamics(m, cfg.orbit, prec_cap=cfg.precision_max)
        N = _sample_size(cfg)
        depth = 5
        while depth < 9:
            try:
                W = wild_domains(dyn, depth + 1, with_spans=False)
            except UnimodalError:
                break
            if sum(W.r) * 4 > dyn.M:
                break
            depth += 1
        W = wild_domains(dyn, depth)
        check("nest return times follow r_k", W.r == reference.r[: len(W.r)], "r = " + " ".join(map(str, W.r)))
        check("returns of R_{I_k}(c) follow t_k", W.t == reference.t[: len(W.t)], "t = " + " ".join(map(str, W.t)))
        props = check_properties(W, N)
        for name, passed in props.results.items():
            check(name, passed, props.details.get(name, ""))
        levels = [n for n in (1, 2, 3) if 2 * n + 1 <= depth]
        try:
            covers = wild_cyclic_covers(W, levels, N)
            check("cyclic covers built", True, ", ".join(f"level {n}: {c.size} sets" for n, c in zip(levels, covers)))
            check("each level refines the previous", all(refinement_check(covers[i], covers[i + 1]) for i in range(len(covers) - 1)))
            pts = dyn.orbit.floats()
            seps = [min_separation(c, pts) for c in covers]
            check("cover sets pairwise disjoint on the sample", all(s > 0 for s in seps), "min separation " + ", ".join(f"{s:.3g}" for s in seps))
            lines.append(alpha_line(alpha_from_covers(covers)))
        except UnimodalError as err:
            check("cyclic covers built", False, str(err))
    _emit(cfg, "\n".join(lines) + "\n")
    return 0 if ok else 4


def cmd_odometer(cfg: RunConfig) -> int:
    if cfg.alpha is not None:
        reports = [check_odometer(b) for b in parse_alphas(cfg.alpha)]
        _emit(cfg, "\n".join(r.line() for r in reports) + "\n")
        return 0 if all(r.ok for r in reports) else 4
    if cfg.alpha_bound is not None:
        rep = sweep(bases_up_to(cfg.alpha_bound), f"every alpha with product <= {cfg.alpha_bound}")
        _emit(cfg, rep.line() + "\n" + "".join(r.line() + "\n" for r in rep.failures))
        return 0 if rep.ok else 4
    raise ConfigError("odometer needs --alpha or --alpha-bound")


DISPATCH = {
    "kneading": cmd_kneading,
    "complexity": cmd_complexity,
    "wild-verify": cmd_wild_verify,
    "odometer": cmd_odometer,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unimodal-complexity", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--param", help="parameter a in (0, 1] (decimal or p/q)")
    parser.add_argument("--ell", help="critical order (default 2)")
    parser.add_argument("--preset", choices=NAMES)
    parser.add_argument("--K", type=int, help="number of cutting times")
    parser.add_argument("--n-max", type=int)
    parser.add_argument("--orbit", type=int, help="critical orbit length N_orbit")
    parser.add_argument("--sample", type=int, help="orbit points used as the omega(c) sample")
    parser.add_argument("--cover-level", type=int, help="1 = seed cover, i > 1 = i-th renormalization seed")
    parser.add_argument("--single-n", type=int, help="recompute q(n) and p(n+1) for one n")
    parser.add_argument("--budget-iterate", type=int)
    parser.add_argument("--budget-transition", type=int)
    parser.add_argument("--budget-branch", type=int)
    parser.add_argument("--budget-bisection", type=int)
    parser.add_argument("--precision-max", type=int)
    parser.add_argument("--alpha", help="odometer bases, e.g. '2,3;2,2,2,2'")
    parser.add_argument("--alpha-bound", type=int, help="check every base with product up to this bound (about 7 s at 1000)")
    parser.add_argument("--integer-only", action="store_true", default=None)
    parser.add_argument("--bisect-K", type=int)
    parser.add_argument("--wild-r0", type=int)
    parser.add_argument("--wild-t0", type=int)
    parser.add_argument("--out", help="output path (prefix for complexity)")
    return parser


def config_from_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            values.update(parse_config_text(Path(args.config).read_text()))
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from err
    for f in fields(RunConfig):
        if f.name == "command":
            continue
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    values["command"] = args.command
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = config_from_args(argv)
        return DISPATCH[cfg.command](cfg)
    except UnimodalError as err:
        sys.stderr.write(f"error: {type(err).__name__}: {err}\n")
        return err.exit_code
    except TypeError as err:  # unknown keys in a config file
        sys.stderr.write(f"error: ConfigError: {err}\n")
        return 5


if __name__ == "__main__":
    sys.exit(main())
