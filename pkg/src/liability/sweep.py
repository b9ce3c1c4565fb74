"""Parameter sweeps, region maps and their CSV tables.

Scenarios are INI files with three sections::

    [scenario]
    name = fig2a
    mode = subjective          ; subjective | objective | commitment | expost
    overlays = objective       ; optional, comma separated extra modes
    outputs = welfare, fines   ; optional column groups, default: all

    [base]
    beta = 9/13                ; fractions are accepted
    p_x = 3/4
    p_y = 3/4
    gamma = 11/20
    gamma_bar = 1/2            ; or: loss = 1

    [sweep]
    axis = p_x                 ; p_x | p_y | beta | gamma
    start = 0.55
    stop = 0.95
    step = 0.001
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .equilibrium import MODES, fine_b, fine_u, solve
from .model import (
    CaseError,
    CaseLabel,
    InformationEnvironment,
    ModelError,
    PopulationModel,
    _delta,
    bisect,
    classify_case,
    delta,
)
from .oracle import thread_count

AXES = ("p_x", "p_y", "beta", "gamma")
OUTPUT_GROUPS = ("welfare", "fines", "mixing", "case")
BUNDLED = ("fig2a", "fig2b", "fig3a", "fig3b")

JUMP_WINDOW = 5
JUMP_FACTOR = 10.0
JUMP_FLOOR = 1e-12


def _number(text: str) -> float:
    return float(Fraction(text.strip()))


@dataclass(frozen=True)
class Scenario:
    name: str
    env: InformationEnvironment
    pop: PopulationModel
    axis: str
    start: float
    stop: float
    step: float
    mode: str = "subjective"
    overlays: Tuple[str, ...] = ()
    outputs: Tuple[str, ...] = OUTPUT_GROUPS

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ModelError(f"sweep axis must be one of {AXES}, got {self.axis!r}")
        if not self.step > 0:
            raise ModelError("step must be positive")
        if self.stop < self.start:
            raise ModelError("stop must not be below start")
        for mode in (self.mode, *self.overlays):
            if mode not in MODES:
                raise ModelError(f"unknown mode {mode!r}")
        for group in self.outputs:
            if group not in OUTPUT_GROUPS:
                raise ModelError(f"unknown output group {group!r}")
        # Constructing the end points validates the range against the domain.
        for value in (self.start, self.stop):
            self.point(value)

    def grid(self) -> List[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        return [round(self.start + k * self.step, 12) for k in range(n + 1)]

    def point(self, value: float) -> Tuple[InformationEnvironment, PopulationModel]:
        if self.axis == "gamma":
            return self.env, PopulationModel(value, self.pop.gamma_bar)
        return self.env.with_(**{self.axis: value}), self.pop


def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read_string(text)
    meta = cp["scenario"] if cp.has_section("scenario") else {}
    base = cp["base"]
    sweep = cp["sweep"]
    if "gamma_bar" in base:
        pop = PopulationModel(_number(base["gamma"]), _number(base["gamma_bar"]))
    elif "loss" in base:
        pop = PopulationModel.from_loss(_number(base["gamma"]), _number(base["loss"]))
    else:
        raise ModelError("[base] needs gamma_bar or loss")
    env = InformationEnvironment(_number(base["beta"]), _number(base["p_x"]), _number(base["p_y"]))

    def listed(key: str, default: Tuple[str, ...]) -> Tuple[str, ...]:
        raw = meta.get(key, "") if meta else ""
        items = tuple(s.strip() for s in raw.split(",") if s.strip())
        return items or default

    return Scenario(
        name=meta.get("name", default_name) if meta else default_name,
        env=env,
        pop=pop,
        axis=sweep["axis"].strip(),
        start=_number(sweep["start"]),
        stop=_number(sweep["stop"]),
        step=_number(sweep["step"]),
        mode=(meta.get("mode", "subjective") if meta else "subjective").strip(),
        overlays=listed("overlays", ()),
        outputs=listed("outputs", OUTPUT_GROUPS),
    )


def load_scenario(source: str) -> Scenario:
    """Load a scenario from a file path or a bundled name such as ``fig2a``."""
    path = Path(source)
    if path.is_file():
        return parse_scenario(path.read_text(), path.stem)
    if source in BUNDLED:
        text = resources.files("liability").joinpath("scenarios", f"{source}.ini").read_text()
        return parse_scenario(text, source)
    raise ModelError(f"no scenario file or bundled scenario named {source!r}")


# ---------------------------------------------------------------------------
# Sweeps


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _columns(scenario: Scenario) -> List[str]:
    cols = [scenario.axis, "status"]
    groups = scenario.outputs
    if "case" in groups:
        cols += ["case", "supported", "knife_edge"]
    if "welfare" in groups:
        cols += ["welfare", "regime", "profile", "regime_change", "jump"]
        cols += [f"welfare_{m}" for m in scenario.overlays]
    if "fines" in groups:
        cols += ["f_bar", "fine_u", "fine_b", "delta"]
    if "mixing" in groups:
        cols += ["a_u_-1_1", "a_b_-1_-1"]
    return cols


def _solve_point(args) -> Dict[str, object]:
    scenario, value = args
    env, pop = scenario.point(value)
    row: Dict[str, object] = {scenario.axis: value, "status": "ok"}
    case = classify_case(env)
    row["case"] = case.value
    row["supported"] = pop.supported
    row["delta"] = delta(env)
    try:
        row["fine_u"] = fine_u(env)
    except CaseError:
        row["fine_u"] = None
    try:
        row["fine_b"] = fine_b(env)
    except CaseError:
        row["fine_b"] = None
    if not pop.supported:
        row["status"] = "unsupported-population"
    needs_case = scenario.mode == "objective"
    if needs_case and case is not CaseLabel.EITHER_POSITIVE:
        row["status"] = "unsupported-case"
        row["welfare"] = None
    else:
        sol = solve(env, pop, scenario.mode)
        row["welfare"] = sol.welfare
        row["regime"] = sol.regime.value
        # Selected outcome on the x = 1 and x = -1 slices, e.g. first_best/mix_at_fb.
        row["profile"] = "/".join(sol.slice_regimes[x] for x in (1, -1))
        row["f_bar"] = sol.f_bar
        row["knife_edge"] = sol.knife_edge
        row.update(sol.mixing())
    for mode in scenario.overlays:
        if mode == "objective" and case is not CaseLabel.EITHER_POSITIVE:
            row[f"welfare_{mode}"] = None
        else:
            row[f"welfare_{mode}"] = solve(env, pop, mode).welfare
    return row


def detect_jumps(values: Sequence[Optional[float]]) -> List[str]:
    """Mark ``up``/``down`` where a step is far larger than its neighbours.

    A step ``d_i`` between adjacent points is a jump when ``|d_i|`` exceeds
    ``JUMP_FACTOR`` times the larger of the median absolute steps in the
    ``JUMP_WINDOW`` steps on either side (floored at ``JUMP_FLOOR``).  The
    mark goes on the right-hand point of the step.
    """
    marks = [""] * len(values)
    steps: List[Optional[float]] = []
    for a, b in zip(values, values[1:]):
        steps.append(None if a is None or b is None else b - a)
    for i, d in enumerate(steps):
        if d is None:
            continue
        left = [abs(s) for s in steps[max(0, i - JUMP_WINDOW):i] if s is not None]
        right = [abs(s) for s in steps[i + 1:i + 1 + JUMP_WINDOW] if s is not None]
        scale = max(
            statistics.median(left) if left else 0.0,
            statistics.median(right) if right else 0.0,
            JUMP_FLOOR,
        )
        if abs(d) > JUMP_FACTOR * scale:
            marks[i + 1] = "up" if d > 0 else "down"
    return marks


@dataclass
class Table:
    columns: List[str]
    rows: List[Dict[str, object]] = field(default_factory=list)

    def column(self, name: str) -> List[object]:
        return [r.get(name) for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv())


def run_sweep(scenario: Scenario, workers: Optional[int] = None) -> Table:
    """Solve every grid point; rows come back in grid order."""
    grid = scenario.grid()
    workers = workers or thread_count()
    jobs = [(scenario, v) for v in grid]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(_solve_point, jobs))
    else:
        rows = [_solve_point(j) for j in jobs]
    previous = None
    for row in rows:
        regime = (row["regime"], row["profile"]) if row.get("regime") is not None else None
        row["regime_change"] = previous is not None and regime is not None and regime != previous
        if regime is not None:
            previous = regime
    for row, mark in zip(rows, detect_jumps([r.get("welfare") for r in rows])):
        row["jump"] = mark
    return Table(_columns(scenario), rows)


# ---------------------------------------------------------------------------
# Region map


def region_map(beta: float, step: float) -> Table:
    """Case label and sign of ``F^b - F^u`` on a ``(p_x, p_y)`` grid.

    ``cell`` rows hold the grid; ``locus`` rows hold the points where the
    two critical fines coincide, located by bisection along each ``p_y`` row.
    """
    if not 0.0 < beta < 1.0:
        raise ModelError("beta must lie in (0, 1)")
    if not 0.0 < step < 0.5:
        raise ModelError("step must lie in (0, 1/2)")
    n = int(round(0.5 / step))
    axis = [round(0.5 + k * step, 12) for k in range(1, n) if 0.5 + k * step < 1.0]
    rows = []
    for p_y in axis:
        signs = []
        for p_x in axis:
            env = InformationEnvironment(beta, p_x, p_y)
            d = delta(env)
            sign = 0 if abs(d) <= 1e-12 else (1 if d > 0 else -1)
            signs.append(sign)
            rows.append({"kind": "cell", "p_x": p_x, "p_y": p_y,
                         "case": classify_case(env).value, "delta_sign": sign})
        for (a, sa), (b, sb) in zip(zip(axis, signs), zip(axis[1:], signs[1:])):
            if sa == 0:
                root = a
            elif sa < 0 < sb:
                root = bisect(lambda p: _delta(beta, p, p_y), a, b, increasing=True)
            else:
                continue
            env = InformationEnvironment(beta, root, p_y)
            rows.append({"kind": "locus", "p_x": root, "p_y": p_y,
                         "case": classify_case(env).value, "delta_sign": 0})
    return Table(["kind", "p_x", "p_y", "case", "delta_sign"], rows)
