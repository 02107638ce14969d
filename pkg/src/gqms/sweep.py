"""
Parameter-grid evaluation of the entanglement pipeline.

A :class:`SweepConfig` names a model, up to three axes and fixed values for
the remaining parameters. Every grid point is evaluated independently, and
results are written into pre-allocated slots so the output order
(row-major over the axes, last axis fastest) never depends on scheduling.
"""

from concurrent.futures import ProcessPoolExecutor
import configparser
import csv
from dataclasses import dataclass, field
import io
import itertools
import json
import math
import os

import numpy as np

from . import numkit
from .core import GklsGenerator, build_drift_diffusion
from .models.common import analyse_system
from .models.single_noise import (
    SingleNoiseParams,
    single_noise_entangled,
    single_noise_system,
)
from .models.two_noise import (
    TwoNoiseParams,
    two_noise_equal_temp_region,
    two_noise_system,
)
from .validation import check_scalar

__all__ = [
    "MODELS",
    "OUTPUT_FLAGS",
    "Axis",
    "SweepConfig",
    "RegionSample",
    "default_jobs",
    "build_system",
    "evaluate_point",
    "sample_from_verdict",
    "run_sweep",
    "records_to_csv",
    "records_from_csv",
    "records_to_json",
    "load_config",
    "load_generator",
]

OUTPUT_FLAGS = ("stability", "ppt", "det_witness", "log_negativity", "analytic_region")
RESULT_COLUMNS = ("stable", "entangled", "det_tilde", "min_eig_tilde",
                  "log_negativity", "analytic_entangled", "status")
MAX_AXES = 3


def _single_noise(params):
    p = SingleNoiseParams(params["kappa"], params["g"], params["beta_tilde"])
    analytic = single_noise_entangled(p.kappa, p.g, p.beta_tilde)
    return single_noise_system(p), (1, 2), analytic


def _two_noise(params):
    p = TwoNoiseParams(params["kappa"], params["g"], params["beta0_tilde"], params["beta3_tilde"])
    analytic = None
    if p.kappa == 0:
        analytic = False
    elif p.kappa == 1 and p.beta0_tilde == p.beta3_tilde and p.beta0_tilde > 1:
        analytic = two_noise_equal_temp_region(p.beta0_tilde, p.g)
    return two_noise_system(p), (1, 2), analytic


def _equal_temp(params):
    b, g = params["b"], params["g"]
    p = TwoNoiseParams(1.0, g, b, b)
    analytic = two_noise_equal_temp_region(b, g) if b > 1 else None
    return two_noise_system(p), (1, 2), analytic


def _custom(params):
    gen = params["generator"]
    scaled = GklsGenerator(
        Omega=params["omega_scale"] * gen.Omega,
        Kappa=params["kappa_scale"] * gen.Kappa,
        U=params["noise_scale"] * gen.U,
        V=params["noise_scale"] * gen.V,
        zeta=gen.zeta,
    )
    return build_drift_diffusion(scaled), tuple(params["keep"]), None


@dataclass(frozen=True)
class _ModelEntry:
    numeric: tuple          # names of real parameters, in canonical order
    build: object           # params -> (DriftDiffusion, kept modes, analytic verdict)
    defaults: dict = field(default_factory=dict)
    other: tuple = ()       # non-numeric fixed parameters


MODELS = {
    "single_noise": _ModelEntry(("kappa", "g", "beta_tilde"), _single_noise),
    "two_noise": _ModelEntry(("kappa", "g", "beta0_tilde", "beta3_tilde"), _two_noise),
    "two_noise_equal_temp": _ModelEntry(("g", "b"), _equal_temp),
    "custom_generator": _ModelEntry(
        ("omega_scale", "kappa_scale", "noise_scale"), _custom,
        defaults={"omega_scale": 1.0, "kappa_scale": 1.0, "noise_scale": 1.0},
        other=("generator", "keep"),
    ),
}


def default_jobs():
    """Worker count from ``GQMS_JOBS``, else 1."""
    raw = os.environ.get("GQMS_JOBS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GQMS_JOBS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"GQMS_JOBS must be >= 1, got {n}")
    return n


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    steps: int
    log: bool = False

    def __post_init__(self):
        check_scalar(self.start, f"axis {self.name} min")
        check_scalar(self.stop, f"axis {self.name} max")
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or self.steps < 2:
            raise ValueError(f"axis {self.name} needs an integer steps >= 2, got {self.steps}")
        if self.log and not (self.start > 0 and self.stop > 0):
            raise ValueError(f"log axis {self.name} needs positive endpoints")

    @classmethod
    def parse(cls, text):
        """``name:min:max:steps`` with an optional trailing ``:log`` or ``:linear``."""
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise ValueError(f"axis spec {text!r} is not name:min:max:steps[:log]")
        log = False
        if len(parts) == 5:
            if parts[4] not in ("log", "linear"):
                raise ValueError(f"axis spacing must be log or linear, got {parts[4]!r}")
            log = parts[4] == "log"
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]), log)
        except ValueError as exc:
            raise ValueError(f"bad axis spec {text!r}: {exc}") from None

    def values(self):
        if self.log:
            return np.geomspace(self.start, self.stop, self.steps)
        return np.linspace(self.start, self.stop, self.steps)

    def spec(self):
        return f"{self.name}:{self.start!r}:{self.stop!r}:{self.steps}" + (":log" if self.log else "")


@dataclass(frozen=True)
class SweepConfig:
    model: str
    axes: tuple = ()
    fixed: dict = field(default_factory=dict)
    outputs: tuple = OUTPUT_FLAGS
    dead_band: float = numkit.PSD_RTOL

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {sorted(MODELS)}")
        entry = MODELS[self.model]
        axes = tuple(self.axes)
        if len(axes) > MAX_AXES:
            raise ValueError(f"at most {MAX_AXES} axes, got {len(axes)}")
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis names {names}")
        for n in names:
            if n not in entry.numeric:
                raise ValueError(f"{n!r} is not a sweepable parameter of {self.model}; "
                                 f"choose from {list(entry.numeric)}")
        fixed = dict(self.fixed)
        for n in fixed:
            if n not in entry.numeric and n not in entry.other:
                raise ValueError(f"{n!r} is not a parameter of {self.model}")
            if n in names:
                raise ValueError(f"{n!r} is both fixed and an axis")
        for n in entry.numeric:
            if n not in names and n not in fixed and n not in entry.defaults:
                raise ValueError(f"parameter {n!r} of {self.model} needs a value")
        for n in entry.other:
            if n not in fixed:
                raise ValueError(f"{self.model} needs {n!r}")
        outputs = tuple(self.outputs)
        bad = [o for o in outputs if o not in OUTPUT_FLAGS]
        if bad:
            raise ValueError(f"unknown output flags {bad}; choose from {list(OUTPUT_FLAGS)}")
        check_scalar(self.dead_band, "dead_band", low=0.0, low_inclusive=True)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "outputs", outputs)
        self._check_points()

    def _check_points(self):
        # constructing the parameter objects enforces g != 0, beta_tilde >= 1 etc.
        probe = {"single_noise": lambda q: SingleNoiseParams(q["kappa"], q["g"], q["beta_tilde"]),
                 "two_noise": lambda q: TwoNoiseParams(q["kappa"], q["g"], q["beta0_tilde"],
                                                       q["beta3_tilde"]),
                 "two_noise_equal_temp": lambda q: (check_scalar(q["b"], "b", low=1.0),
                                                    TwoNoiseParams(1.0, q["g"], q["b"], q["b"]))}
        check = probe.get(self.model)
        for q in self.points():
            for n in MODELS[self.model].numeric:
                check_scalar(q[n], n)
            if check is not None:
                check(q)

    @property
    def shape(self):
        return tuple(a.steps for a in self.axes)

    def points(self):
        """Parameter dicts in row-major order (last axis fastest)."""
        base = dict(MODELS[self.model].defaults)
        base.update(self.fixed)
        grids = [a.values() for a in self.axes]
        for combo in itertools.product(*grids):
            q = dict(base)
            q.update({a.name: float(v) for a, v in zip(self.axes, combo)})
            yield q

    def echo(self):
        """JSON-serialisable description (generator objects become their source path)."""
        fixed = {}
        for k, v in self.fixed.items():
            if isinstance(v, GklsGenerator):
                v = getattr(v, "_source", "<in-memory generator>")
            elif isinstance(v, tuple):
                v = list(v)
            fixed[k] = v
        return {
            "model": self.model,
            "axes": [a.spec() for a in self.axes],
            "fixed": fixed,
            "outputs": list(self.outputs),
            "dead_band": self.dead_band,
        }


@dataclass(frozen=True)
class RegionSample:
    """One grid point: its axis coordinates and the pipeline outcome.

    Absent values (witnesses of unstable points, analytic verdicts of models
    without one) are None, never NaN.
    """

    coordinates: dict
    stable: bool
    entangled: bool = None
    det_tilde: float = None
    min_eig_tilde: float = None
    log_negativity: float = None
    analytic_entangled: bool = None
    status: str = "ok"

    def __post_init__(self):
        if self.entangled and not self.stable:
            raise ValueError("entangled sample must be stable")
        for name in ("det_tilde", "min_eig_tilde", "log_negativity"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{name} is not finite: {v}")

    def as_row(self):
        row = dict(self.coordinates)
        for name in RESULT_COLUMNS:
            row[name] = getattr(self, name)
        return row


def sample_from_verdict(coords, v, outputs=OUTPUT_FLAGS):
    w = v.witnesses
    keep = set(outputs)
    return RegionSample(
        coordinates=coords,
        stable=bool(v.stable),
        entangled=v.entangled if "ppt" in keep else None,
        det_tilde=w.det_tilde if w is not None and "det_witness" in keep else None,
        min_eig_tilde=w.min_eig_tilde if w is not None and "ppt" in keep else None,
        log_negativity=w.log_negativity if w is not None and "log_negativity" in keep else None,
        analytic_entangled=v.analytic_entangled if "analytic_region" in keep else None,
        status=v.status,
    )


def build_system(model, params):
    """``(DriftDiffusion, kept modes, analytic verdict or None)`` for a parameter dict."""
    q = dict(MODELS[model].defaults)
    q.update(params)
    return MODELS[model].build(q)


def evaluate_point(model, params, dead_band=numkit.PSD_RTOL):
    """:class:`~gqms.models.common.RegionVerdict` of one parameter dict."""
    dd, keep, analytic = build_system(model, params)
    return analyse_system(dd, keep=keep, analytic=analytic, dead_band=dead_band)


def _task(args):
    index, model, params, dead_band, axis_names, outputs = args
    v = evaluate_point(model, params, dead_band)
    coords = {n: params[n] for n in axis_names}
    return index, sample_from_verdict(coords, v, outputs)


def run_sweep(config, jobs=None):
    """Evaluate every grid point; returns samples in row-major order.

    ``jobs`` defaults to :func:`default_jobs`; ``jobs == 1`` stays in-process.
    """
    jobs = default_jobs() if jobs is None else int(jobs)
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    names = [a.name for a in config.axes]
    tasks = [(i, config.model, q, config.dead_band, names, config.outputs)
             for i, q in enumerate(config.points())]
    out = [None] * len(tasks)
    if jobs == 1 or len(tasks) < 2:
        results = map(_task, tasks)
        for i, s in results:
            out[i] = s
    else:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, s in pool.map(_task, tasks, chunksize=chunk):
                out[i] = s
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def records_to_csv(samples, axis_names):
    """CSV text: axis columns, then the fixed result columns."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(axis_names) + list(RESULT_COLUMNS))
    for s in samples:
        row = s.as_row()
        w.writerow([_fmt(row[n]) for n in list(axis_names) + list(RESULT_COLUMNS)])
    return buf.getvalue()


def _parse_bool(text):
    return {"": None, "true": True, "false": False}[text]


def _parse_float(text):
    return None if text == "" else float(text)


def records_from_csv(text):
    """Inverse of :func:`records_to_csv`."""
    rows = list(csv.reader(io.StringIO(text)))
    header = rows[0]
    n_axes = len(header) - len(RESULT_COLUMNS)
    if n_axes < 0 or tuple(header[n_axes:]) != RESULT_COLUMNS:
        raise ValueError("not a sweep CSV: unexpected header")
    axis_names = header[:n_axes]
    out = []
    for r in rows[1:]:
        coords = {n: float(x) for n, x in zip(axis_names, r[:n_axes])}
        vals = dict(zip(RESULT_COLUMNS, r[n_axes:]))
        out.append(RegionSample(
            coordinates=coords,
            stable=_parse_bool(vals["stable"]),
            entangled=_parse_bool(vals["entangled"]),
            det_tilde=_parse_float(vals["det_tilde"]),
            min_eig_tilde=_parse_float(vals["min_eig_tilde"]),
            log_negativity=_parse_float(vals["log_negativity"]),
            analytic_entangled=_parse_bool(vals["analytic_entangled"]),
            status=vals["status"],
        ))
    return out


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating, int)):
        return float(v)
    return v


def records_to_json(samples, config):
    doc = {
        "config": config.echo(),
        "records": [{k: _json_value(v) for k, v in s.as_row().items()} for s in samples],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _complex_matrix(spec, key, shape=None):
    re = np.array(spec.get(key, np.zeros(shape) if shape else []), dtype=float)
    im = spec.get(key + "_imag")
    return re if im is None else re + 1j * np.array(im, dtype=float)


def load_generator(path):
    """Read a generator from JSON.

    Keys ``Omega``, ``Kappa``, ``U``, ``V`` (real parts, nested lists) and
    optional ``zeta``; an ``_imag`` suffix gives imaginary parts.
    """
    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)
    missing = [k for k in ("Omega", "U", "V") if k not in spec]
    if missing:
        raise ValueError(f"generator file {path} lacks {missing}")
    Om = _complex_matrix(spec, "Omega")
    d = Om.shape[0]
    gen = GklsGenerator(
        Omega=Om,
        Kappa=_complex_matrix(spec, "Kappa", (d, d)),
        U=_complex_matrix(spec, "U"),
        V=_complex_matrix(spec, "V"),
        zeta=_complex_matrix(spec, "zeta") if "zeta" in spec else None,
    )
    object.__setattr__(gen, "_source", str(path))
    return gen


def parse_keep(text):
    keep = tuple(int(x) for x in str(text).replace(" ", "").split(",") if x)
    if len(keep) != 2:
        raise ValueError(f"keep must name two modes, got {text!r}")
    return keep


def coerce_fixed(model, raw):
    """Turn string-valued fixed parameters (from flags or files) into typed values."""
    fixed = {}
    for k, v in raw.items():
        if k == "generator":
            fixed[k] = v if isinstance(v, GklsGenerator) else load_generator(v)
        elif k == "keep":
            fixed[k] = parse_keep(v) if isinstance(v, str) else tuple(v)
        else:
            try:
                fixed[k] = float(v)
            except ValueError:
                raise ValueError(f"value of {k!r} is not a number: {v!r}") from None
    return fixed


def load_config(path):
    """Read an INI-style sweep file.

    ``[sweep]`` holds ``model``, ``outputs`` (comma list) and ``dead_band``;
    ``[fixed]`` holds ``name = value`` pairs; ``[axes]`` holds
    ``name = min:max:steps[:log]``. Returns the keyword arguments of
    :class:`SweepConfig` so command-line flags can override them.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep parameter names case-sensitive
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    unknown = set(cp.sections()) - {"sweep", "fixed", "axes"}
    if unknown:
        raise ValueError(f"unknown sections {sorted(unknown)} in {path}")
    kw = {}
    if cp.has_section("sweep"):
        s = cp["sweep"]
        if "model" in s:
            kw["model"] = s["model"].strip()
        if "outputs" in s:
            kw["outputs"] = tuple(x.strip() for x in s["outputs"].split(",") if x.strip())
        if "dead_band" in s:
            kw["dead_band"] = float(s["dead_band"])
        extra = set(s) - {"model", "outputs", "dead_band"}
        if extra:
            raise ValueError(f"unknown [sweep] keys {sorted(extra)}")
    if cp.has_section("fixed"):
        kw["fixed"] = dict(cp["fixed"])
        gen = kw["fixed"].get("generator")
        if gen is not None and not os.path.isabs(gen):
            kw["fixed"]["generator"] = os.path.join(os.path.dirname(os.path.abspath(path)), gen)
    if cp.has_section("axes"):
        kw["axes"] = [Axis.parse(f"{k}:{v}") for k, v in cp["axes"].items()]
    return kw
