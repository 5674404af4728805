"""Config files, CSV/JSON reports and run manifests.

Config grammar (INI style, ``#`` or ``;`` comments)::

    agents = 100              # keys before any section are allowed
    [model]
    options = 100
    epsilon = 4
    [experiment]
    epsilon_grid = 0:7:0.5    # inclusive start:stop:step, or a comma list
    replicates = 10
    [analysis]
    identity_tolerance = 0.2

Every key belongs to one section (see ``SECTIONS``); keys written before
the first section header may come from any of them.
"""

from __future__ import annotations

import configparser
import csv
import json
import os
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .sweeps import OBSERVABLES, ENVY_MODES, ExperimentConfig, RunResult, SweepRecord
from .ultimatum import UltimatumSolution
from .utility import Variant

SECTIONS: Dict[str, tuple] = {
    "model": (
        "agents", "options", "theta", "kappa", "epsilon", "variant",
        "fitness_offset", "fitness_floor", "iterations", "log_guard", "stop_tol",
    ),
    "experiment": ("envy_mode", "epsilon_grid", "replicates", "base_seed", "seeds"),
    "analysis": ("purity_threshold", "support_threshold", "identity_tolerance"),
}
_TOP = "__top__"
_INT_KEYS = {"agents", "options", "iterations", "replicates", "base_seed"}
_STR_KEYS = {"variant", "envy_mode"}


class ConfigError(ValueError):
    """Bad config file; the message names the file, line or key at fault."""


def fmt(x: float) -> str:
    """Float with 17 significant digits (round-trips every double)."""
    return format(float(x), ".17g")


def _parse_grid(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(n))
    return tuple(float(t) for t in text.split(","))


def _convert(key: str, raw: str):
    raw = raw.strip()
    if key in _INT_KEYS:
        return int(raw)
    if key in _STR_KEYS:
        return raw
    if key == "epsilon_grid":
        return _parse_grid(raw)
    if key == "seeds":
        return tuple(int(t) for t in raw.split(",") if t.strip()) or None
    if key == "stop_tol":
        return float(raw) if raw else None
    return float(raw)


def _line_of(lines: Sequence[str], key: str) -> Optional[int]:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*[=:]", re.IGNORECASE)
    for n, line in enumerate(lines, 1):
        if pat.match(line):
            return n
    return None


def _check_domain(values: dict, where) -> None:
    def bad(key, msg):
        raise ConfigError(f"{where(key)}: {key} {msg}")

    if "theta" in values and not 0 <= values["theta"] < 1:
        bad("theta", f"must lie in [0, 1), got {values['theta']}")
    if "kappa" in values and values["kappa"] < 0:
        bad("kappa", f"must be >= 0, got {values['kappa']}")
    if "epsilon" in values and values["epsilon"] < 0:
        bad("epsilon", f"must be >= 0, got {values['epsilon']}")
    if any(e < 0 for e in values.get("epsilon_grid", ())):
        bad("epsilon_grid", "entries must be >= 0")
    for key in ("agents", "replicates", "iterations"):
        if key in values and values[key] < 1:
            bad(key, "must be >= 1")
    if "options" in values and values["options"] < 2:
        bad("options", "must be >= 2")
    if "variant" in values:
        try:
            Variant.parse(values["variant"])
        except ValueError as exc:
            bad("variant", str(exc))
    if "envy_mode" in values and values["envy_mode"] not in ENVY_MODES:
        bad("envy_mode", f"must be one of {', '.join(ENVY_MODES)}")


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    lines = text.splitlines()
    first = next((ln.strip() for ln in lines if ln.strip() and ln.strip()[0] not in "#;"), "")
    shift = 0
    if not first.startswith("["):
        text = f"[{_TOP}]\n" + text
        shift = 1
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), empty_lines_in_values=False
    )
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        if lineno is None and getattr(exc, "errors", None):
            lineno = exc.errors[0][0]
        msg = exc.message.splitlines()[0] if hasattr(exc, "message") else str(exc)
        where = f"{source}:{lineno - shift}" if lineno is not None else source
        raise ConfigError(f"{where}: parse error: {msg}") from None

    def where(key):
        n = _line_of(lines, key)
        return f"{source}:{n}" if n else source

    values: dict = {}
    for section in parser.sections():
        if section != _TOP and section not in SECTIONS:
            raise ConfigError(f"{where('[' + section)}: unknown section [{section}]")
        allowed = (
            {k for keys in SECTIONS.values() for k in keys} if section == _TOP else set(SECTIONS[section])
        )
        for key, raw in parser.items(section):
            if key not in allowed:
                raise ConfigError(f"{where(key)}: unknown key {key!r} in [{section if section != _TOP else 'top level'}]")
            if key in values:
                raise ConfigError(f"{where(key)}: duplicate key {key!r}")
            try:
                values[key] = _convert(key, raw)
            except ValueError as exc:
                raise ConfigError(f"{where(key)}: bad value for {key}: {raw!r} ({exc})") from None
    _check_domain(values, where)
    try:
        return ExperimentConfig(**values)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def parse_config(path) -> ExperimentConfig:
    """Read a config file (or the ``config`` block of a manifest.json)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror or exc}") from None
    if path.suffix == ".json":
        try:
            text = json.loads(text)["config_text"]
        except (ValueError, KeyError, TypeError):
            raise ConfigError(f"{path}: not a run manifest with a config_text entry") from None
    return parse_config_text(text, str(path))


def _short(x: float) -> str:
    return repr(float(x))  # shortest text that round-trips


def format_config(config: ExperimentConfig) -> str:
    """Config text that parses back to an equal ``ExperimentConfig``."""
    vals = {f.name: getattr(config, f.name) for f in fields(config)}
    out = []
    for section, keys in SECTIONS.items():
        out.append(f"[{section}]")
        for key in keys:
            val = vals[key]
            if val is None:
                continue
            if key == "variant":
                text = val.value
            elif key in _STR_KEYS or key in _INT_KEYS:
                text = str(val)
            elif key == "epsilon_grid":
                text = ", ".join(_short(e) for e in val)
                if not val:
                    continue
            elif key == "seeds":
                text = ", ".join(str(s) for s in val)
            else:
                text = _short(val)
            out.append(f"{key} = {text}")
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------- reports

AGENT_COLUMNS = ("agent_id", "epsilon", "class", "support_size", "p2", "income", "reward", "envy_term")
PAYOFF_COLUMNS = ("agent_id", "option_index", "q", "v", "p", "reward_component")
SWEEP_COLUMNS = ("epsilon",) + OBSERVABLES + tuple(f"{k}_sd" for k in OBSERVABLES) + ("n_replicates", "n_failed")
REPLICATE_COLUMNS = ("epsilon", "seed") + OBSERVABLES
ULTIMATUM_COLUMNS = ("epsilon", "threshold")


class OutputError(OSError):
    pass


def agent_rows(run: RunResult) -> List[list]:
    st, rep = run.state, run.report
    envy = run.params.envy_vector()
    return [
        [a, fmt(envy[a]), rep.labels[a].value, len(rep.supports[a]), fmt(st.participation[a]),
         fmt(st.agent_incomes[a]), fmt(st.agent_rewards[a]), fmt(st.envy_terms[a])]
        for a in range(len(rep.labels))
    ]


def payoff_rows(run: RunResult, profile) -> List[list]:
    p = run.dynamics.final_population
    R = run.state.option_rewards
    q, v = profile.qualities, profile.bare_utilities
    M, N = p.shape
    return [
        [a, i, fmt(q[i]), fmt(v[i]), fmt(p[a, i]), fmt(R[a, i])]
        for a in range(M)
        for i in range(N)
    ]


def sweep_rows(records: Iterable[SweepRecord]) -> List[list]:
    rows = []
    for rec in records:
        rows.append(
            [fmt(rec.epsilon)]
            + [fmt(rec.mean(k)) for k in OBSERVABLES]
            + [fmt(rec.sd(k)) for k in OBSERVABLES]
            + [len(rec.replicates), len(rec.failures)]
        )
    return rows


def replicate_rows(records: Iterable[SweepRecord]) -> List[list]:
    return [
        [fmt(rec.epsilon), seed] + [fmt(obs[k]) for k in OBSERVABLES]
        for rec in records
        for seed, obs in zip(rec.seeds, rec.replicates)
    ]


def ultimatum_rows(solutions: Iterable[UltimatumSolution]) -> List[list]:
    return [[fmt(s.epsilon), fmt(s.threshold)] for s in solutions]


@dataclass
class RunManifest:
    config_text: str
    command: str
    tool_version: str
    seeds: List[int] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    wall_clock: List[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def emit_reports(out_dir, tables: Dict[str, tuple], manifest: Optional[RunManifest] = None) -> List[Path]:
    """Write ``{filename: (columns, rows)}`` as CSV plus an optional manifest.

    Files are staged under temporary names and renamed only after all of
    them were written; on failure nothing new is left behind.
    """
    out = Path(out_dir)
    staged: List[tuple] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name in sorted(tables):
            columns, rows = tables[name]
            final = out / name
            tmp = out / f".{name}.tmp"
            staged.append((tmp, final))
            with open(tmp, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(columns)
                w.writerows(rows)
        if manifest is not None:
            final = out / "manifest.json"
            tmp = out / ".manifest.json.tmp"
            staged.append((tmp, final))
            manifest.outputs = sorted(str(f.name) for _, f in staged)
            tmp.write_text(manifest.to_json(), encoding="utf-8")
        for tmp, final in staged:
            os.replace(tmp, final)
    except OSError as exc:
        for tmp, _ in staged:
            try:
                tmp.unlink()
            except OSError:
                pass
        target = exc.filename or out
        raise OutputError(f"{target}: cannot write report: {exc.strerror or exc}") from exc
    return [final for _, final in staged]


def read_csv(path) -> List[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
