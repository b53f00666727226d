"""Line-oriented job configuration (``[section]`` headers, ``key = value`` lines).

See ``docs/config.md`` for the key table. Unknown sections and keys are errors,
so a typo never silently falls back to a default.
"""

from __future__ import annotations

import configparser
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FloquetError
from .fd_oracle import FdProblem
from .floquet import DEFAULT_MONODROMY_STEPS, DEFAULT_TOL_LOCK, HillOptions
from .models import FLAT_CRITICAL_LOAD, PendulumParams, WinklerParams
from .winkler import CriticalSearchOptions

__all__ = ["JOB_KINDS", "AxisSpec", "JobConfig", "parse_config", "load_config", "WORKERS_ENV"]

JOB_KINDS = (
    "pendulum-map",
    "winkler-map",
    "winkler-critical",
    "pendulum-point",
    "reconstruct",
    "oracle-compare",
)

WORKERS_ENV = "FLOQUET_LOCKIN_WORKERS"

_PENDULUM_C_DEFAULT = 0.001


def _bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _points(v: str) -> list[tuple[float, float]]:
    out = []
    for item in v.split(";"):
        item = item.strip()
        if not item:
            continue
        k, _, lam = item.partition(":")
        if not lam:
            raise ValueError(f"expected 'K_bar:lambda_bar', got {item!r}")
        out.append((float(k), float(lam)))
    if not out:
        raise ValueError("no points given")
    return out


# section -> key -> parser
_SCHEMA = {
    "job": {
        "kind": str,
        "workers": int,
        "K_bar": float,
        "lambda_bar": float,
        "A_bar": float,
        "Omega_bar": float,
        "T_over_2pi": float,
        "C_bar": float,
        "periods": float,
        "samples_per_period": int,
        "points": _points,
    },
    "axes": {
        "x_min": float,
        "x_max": float,
        "x_count": int,
        "y_min": float,
        "y_max": float,
        "y_count": int,
        "scale": str,
    },
    "hill": {
        "M": int,
        "brillouin_tolerance": float,
        "tol_lock": float,
        "re_threshold": float,
        "P_lo": float,
        "P_hi": float,
        "coarse_steps": int,
        "bisection_tol": float,
        "monodromy_steps": int,
    },
    "fd": {
        "periods": float,
        "nodes_per_period": int,
        "boundary": str,
    },
    "output": {
        "dir": str,
        "svg": _bool,
        "channel": str,
    },
}

# axis defaults per map kind: (x_min, x_max, x_count, y_min, y_max, y_count)
_AXIS_DEFAULTS = {
    "pendulum-map": (0.1, 2.0, 96, 0.0, 1.0, 51),
    "winkler-map": (0.01, 2.0, 191, 0.0, 0.5, 51),
}
_DEFAULT_CHANNEL = {"pendulum-map": "max_im_fraction", "winkler-map": "locked_fraction"}


@dataclass(frozen=True)
class AxisSpec:
    """``count`` linearly spaced values from ``min`` to ``max`` (``min`` alone when ``count == 1``)."""

    min: float
    max: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class JobConfig:
    kind: str
    params: dict = field(default_factory=dict)
    x_axis: AxisSpec | None = None
    y_axis: AxisSpec | None = None
    hill: HillOptions = field(default_factory=HillOptions)
    search: CriticalSearchOptions = field(default_factory=CriticalSearchOptions)
    monodromy_steps: int = DEFAULT_MONODROMY_STEPS
    fd: dict = field(default_factory=lambda: {"periods": 40.0, "nodes_per_period": 200, "boundary": "pinned"})
    output_dir: str = "."
    svg: bool = True
    channel: str | None = None
    workers: int = 1
    echo: dict = field(default_factory=dict)

    @property
    def tol_lock(self) -> float:
        return self.search.tol_lock

    def with_overrides(self, *, workers=None, M=None, output_dir=None) -> "JobConfig":
        """Copy with the command-line overrides applied (``None`` leaves a field alone)."""
        text = _render(self.echo, workers=workers, M=M, output_dir=output_dir)
        return parse_config(text, default_workers=self.workers)


def _render(echo, workers=None, M=None, output_dir=None) -> str:
    sections = {s: dict(kv) for s, kv in echo.items()}
    if workers is not None:
        sections.setdefault("job", {})["workers"] = str(workers)
    if M is not None:
        sections.setdefault("hill", {})["M"] = str(M)
    if output_dir is not None:
        sections.setdefault("output", {})["dir"] = str(output_dir)
    lines = []
    for s, kv in sections.items():
        lines.append(f"[{s}]")
        lines.extend(f"{k} = {v}" for k, v in kv.items())
    return "\n".join(lines) + "\n"


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` inside its section, for error messages."""
    out = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            out[(section, "")] = n
            continue
        m = re.match(r"\s*([^#;=:\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            out.setdefault((section, m.group(1)), n)
    return out


def parse_config(text: str, default_workers: int | None = None) -> JobConfig:
    """Parse and validate a job configuration.

    Raises
    ------
    ConfigError
        On syntax errors (with the line number), unknown sections or keys,
        unparsable values and range violations (with the key name).
    """
    parser = configparser.ConfigParser(
        interpolation=None,
        inline_comment_prefixes=("#",),
        comment_prefixes=("#",),
        default_section="\x00defaults",
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("syntax error: expected 'key = value' or '[section]'", line=line) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key in [{exc.section}]", line=exc.lineno, key=exc.option) from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.Error as exc:
        raise ConfigError(f"syntax error: {exc.message}") from None

    lines = _key_lines(text)
    raw: dict[str, dict[str, str]] = {}
    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"unknown section [{section}]; expected one of {sorted(_SCHEMA)}",
                line=lines.get((section, "")),
            )
        raw[section] = {}
        values[section] = {}
        for key, text_value in parser.items(section):
            line = lines.get((section, key))
            if key not in _SCHEMA[section]:
                raise ConfigError(
                    f"unknown key in [{section}]; valid keys: {', '.join(_SCHEMA[section])}",
                    line=line,
                    key=key,
                )
            try:
                values[section][key] = _SCHEMA[section][key](text_value.strip())
            except ValueError as exc:
                raise ConfigError(f"invalid value {text_value.strip()!r}: {exc}", line=line, key=key) from None
            raw[section][key] = text_value.strip()

    def where(section, key):
        return lines.get((section, key))

    def fail(msg, section, key):
        raise ConfigError(msg, line=where(section, key), key=key)

    job = values.get("job", {})
    kind = job.get("kind")
    if kind is None:
        raise ConfigError("missing required key", key="kind")
    if kind not in JOB_KINDS:
        fail(f"unknown job kind {kind!r}; expected one of {', '.join(JOB_KINDS)}", "job", "kind")

    workers = job.get("workers")
    if workers is None:
        workers = default_workers if default_workers is not None else _env_workers()
    if workers < 1:
        fail(f"workers must be >= 1, got {workers}", "job", "workers")

    # numerical options
    h = values.get("hill", {})
    for key in ("brillouin_tolerance", "tol_lock", "re_threshold", "bisection_tol"):
        if key in h and not h[key] > 0:
            fail(f"{key} must be > 0, got {h[key]}", "hill", key)
    if "M" in h and not 1 <= h["M"] <= 64:
        fail(f"M must satisfy 1 <= M <= 64, got {h['M']}", "hill", "M")
    if "monodromy_steps" in h and h["monodromy_steps"] < 100:
        fail(f"monodromy_steps must be >= 100, got {h['monodromy_steps']}", "hill", "monodromy_steps")
    if "coarse_steps" in h and h["coarse_steps"] < 2:
        fail(f"coarse_steps must be >= 2, got {h['coarse_steps']}", "hill", "coarse_steps")
    if "P_lo" in h and h["P_lo"] < 0:
        fail(f"P_lo must be >= 0, got {h['P_lo']}", "hill", "P_lo")
    P_lo = h.get("P_lo", 0.0)
    P_hi = h.get("P_hi", 1.2 * FLAT_CRITICAL_LOAD)
    if not P_lo < P_hi:
        fail(f"P bracket must satisfy P_lo < P_hi, got [{P_lo}, {P_hi}]", "hill", "P_hi" if "P_hi" in h else "P_lo")
    hill = HillOptions(h.get("M", 9), h.get("brillouin_tolerance"))
    search = CriticalSearchOptions(
        re_threshold=h.get("re_threshold", 1e-8),
        P_lo=P_lo,
        P_hi=P_hi,
        coarse_steps=h.get("coarse_steps", 200),
        bisection_tol=h.get("bisection_tol", 1e-8),
        hill=hill,
        tol_lock=h.get("tol_lock", DEFAULT_TOL_LOCK),
    )

    # physical parameters per kind
    params = {}

    def need(key):
        if key not in job:
            raise ConfigError(f"job kind '{kind}' requires this key in [job]", key=key)
        return job[key]

    def check_winkler(K, lam, key_K="K_bar", key_lam="lambda_bar"):
        if not 0 <= K < 1:
            fail(f"K_bar must satisfy 0 <= K_bar < 1, got {K}", "job", key_K)
        if not lam > 0:
            fail(f"lambda_bar must be > 0, got {lam}", "job", key_lam)

    if kind in ("winkler-critical", "reconstruct"):
        K, lam = need("K_bar"), need("lambda_bar")
        check_winkler(K, lam)
        params.update(K_bar=K, lambda_bar=lam)
    if kind == "reconstruct":
        periods = job.get("periods", 10.0)
        spp = job.get("samples_per_period", 64)
        if not periods >= 1:
            fail(f"periods must be >= 1, got {periods}", "job", "periods")
        if spp < 8:
            fail(f"samples_per_period must be >= 8, got {spp}", "job", "samples_per_period")
        params.update(periods=periods, samples_per_period=spp)
    if kind == "oracle-compare":
        pts = need("points")
        for K, lam in pts:
            if not (0 <= K < 1 and lam > 0):
                fail(f"point ({K}, {lam}) violates 0 <= K_bar < 1, lambda_bar > 0", "job", "points")
        params["points"] = pts
    if kind in ("pendulum-map", "pendulum-point"):
        C = job.get("C_bar", _PENDULUM_C_DEFAULT)
        if not C >= 0:
            fail(f"C_bar must be >= 0, got {C}", "job", "C_bar")
        params["C_bar"] = C
    if kind == "pendulum-point":
        A = need("A_bar")
        if not A >= 0:
            fail(f"A_bar must be >= 0, got {A}", "job", "A_bar")
        if ("Omega_bar" in job) == ("T_over_2pi" in job):
            raise ConfigError("pendulum-point needs exactly one of Omega_bar or T_over_2pi", key="Omega_bar")
        if "Omega_bar" in job:
            if not job["Omega_bar"] > 0:
                fail(f"Omega_bar must be > 0, got {job['Omega_bar']}", "job", "Omega_bar")
            params["Omega_bar"] = job["Omega_bar"]
        else:
            if not job["T_over_2pi"] > 0:
                fail(f"T_over_2pi must be > 0, got {job['T_over_2pi']}", "job", "T_over_2pi")
            params["Omega_bar"] = 1.0 / job["T_over_2pi"]
        params["A_bar"] = A

    extra = set(job) - {"kind", "workers"} - _USED_KEYS[kind]
    if extra:
        key = sorted(extra)[0]
        fail(f"key not used by job kind '{kind}'", "job", key)

    # axes
    x_axis = y_axis = None
    a = values.get("axes", {})
    if kind in _AXIS_DEFAULTS:
        d = _AXIS_DEFAULTS[kind]
        if a.get("scale", "linear") != "linear":
            fail(f"only linear axis scale is supported, got {a['scale']!r}", "axes", "scale")
        x_axis = _axis(a, "x", d[:3], fail)
        y_axis = _axis(a, "y", d[3:], fail)
        if kind == "pendulum-map":
            if not x_axis.min > 0:
                fail(f"T_bar/(2 pi) axis must be > 0, got x_min = {x_axis.min}", "axes", "x_min")
            if not y_axis.min >= 0:
                fail(f"A_bar axis must be >= 0, got y_min = {y_axis.min}", "axes", "y_min")
        else:
            if not x_axis.min > 0:
                fail(f"lambda_bar axis must be > 0, got x_min = {x_axis.min}", "axes", "x_min")
            if not y_axis.min >= 0:
                fail(f"K_bar axis must satisfy 0 <= K_bar < 1, got y_min = {y_axis.min}", "axes", "y_min")
            top = y_axis.max if y_axis.count > 1 else y_axis.min
            if not top < 1:
                fail(f"K_bar axis must satisfy K_bar < 1, got y_max = {top}", "axes", "y_max")
    elif a:
        fail(f"[axes] is not used by job kind '{kind}'", "axes", sorted(a)[0])

    f = values.get("fd", {})
    fd = {
        "periods": f.get("periods", 40.0),
        "nodes_per_period": f.get("nodes_per_period", 200),
        "boundary": f.get("boundary", "pinned"),
    }
    if fd["boundary"] not in ("pinned", "clamped"):
        fail(f"boundary must be 'pinned' or 'clamped', got {fd['boundary']!r}", "fd", "boundary")
    if fd["periods"] < 20:
        fail(f"periods must be >= 20, got {fd['periods']}", "fd", "periods")
    if fd["nodes_per_period"] < 50:
        fail(f"nodes_per_period must be >= 50, got {fd['nodes_per_period']}", "fd", "nodes_per_period")

    o = values.get("output", {})
    channel = o.get("channel", _DEFAULT_CHANNEL.get(kind))

    # let the analysis types have the final word on anything left
    try:
        if "K_bar" in params:
            WinklerParams(P_lo, params["K_bar"], params["lambda_bar"])
        if kind == "pendulum-point":
            PendulumParams(params["A_bar"], params["Omega_bar"], params["C_bar"])
        if kind == "oracle-compare":
            for K, lam in params["points"]:
                FdProblem.with_resolution(K, lam, fd["periods"], fd["nodes_per_period"], fd["boundary"])
    except FloquetError as exc:
        raise ConfigError(str(exc)) from None

    return JobConfig(
        kind=kind,
        params=params,
        x_axis=x_axis,
        y_axis=y_axis,
        hill=hill,
        search=search,
        monodromy_steps=h.get("monodromy_steps", DEFAULT_MONODROMY_STEPS),
        fd=fd,
        output_dir=o.get("dir", "."),
        svg=o.get("svg", True),
        channel=channel,
        workers=workers,
        echo=raw,
    )


_USED_KEYS = {
    "pendulum-map": {"C_bar"},
    "winkler-map": set(),
    "winkler-critical": {"K_bar", "lambda_bar"},
    "pendulum-point": {"A_bar", "Omega_bar", "T_over_2pi", "C_bar"},
    "reconstruct": {"K_bar", "lambda_bar", "periods", "samples_per_period"},
    "oracle-compare": {"points"},
}


def _axis(a, prefix, defaults, fail) -> AxisSpec:
    lo = a.get(f"{prefix}_min", defaults[0])
    hi = a.get(f"{prefix}_max", defaults[1])
    count = a.get(f"{prefix}_count", defaults[2])
    if count < 1:
        fail(f"{prefix}_count must be >= 1, got {count}", "axes", f"{prefix}_count")
    if count > 1 and not lo < hi:
        fail(f"{prefix}_min must be < {prefix}_max, got {lo} >= {hi}", "axes", f"{prefix}_max")
    return AxisSpec(lo, hi, count)


def _env_workers() -> int:
    v = os.environ.get(WORKERS_ENV)
    if v is None or not v.strip():
        return 1
    try:
        n = int(v)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {v!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {n}")
    return n


def load_config(path, default_workers: int | None = None) -> JobConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), default_workers)
