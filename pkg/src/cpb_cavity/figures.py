"""Figure presets, custom sweeps and their CSV/JSON serialization.

Every file starts with ``#`` comment lines carrying the program version
and the resolved parameters of each curve, followed by one header row.
Column groups, in this order:

==============  ===========================================================
pt_eigs         pt_eig_1 .. pt_eig_4
populations     pop_g_n, pop_e_nm1, pop_g_np1, pop_e_n
coherences      re_coh, im_coh  (``<g,n| rho |e,n-1>``)
concurrence     concurrence
negativity      negativity
fidelity        p_phi_plus, p_phi_minus, p_psi_plus, p_psi_minus,
                f_psi_plus_cond, f_mean, f_avg_inputs, f_paper, f_paper_avg
==============  ===========================================================

Multi-curve figures (4a, 4b, 5) suffix each fidelity column with the curve
label, e.g. ``f_mean_n3``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from cpb_cavity import __version__
from cpb_cavity.entanglement import (
    SELECTIONS,
    EntanglementReport,
    analyze,
    first_local_max,
    refine_max,
)
from cpb_cavity.errors import DomainError
from cpb_cavity.evolution import (
    MODES,
    MU_MODES,
    ExcitedFock,
    FigureThree,
    GroundFock,
    InitialState,
    SuperposedQubitFock,
    closed_form_rho,
    parallel_map,
    sweep,
)
from cpb_cavity.model import HilbertSpace, ModelParams, figure_params
from cpb_cavity.teleport import TeleportResult, UnknownQubit, fidelity_sweep

GROUPS: dict[str, tuple[str, ...]] = {
    "pt_eigs": ("pt_eig_1", "pt_eig_2", "pt_eig_3", "pt_eig_4"),
    "populations": ("pop_g_n", "pop_e_nm1", "pop_g_np1", "pop_e_n"),
    "coherences": ("re_coh", "im_coh"),
    "concurrence": ("concurrence",),
    "negativity": ("negativity",),
    "fidelity": (
        "p_phi_plus", "p_phi_minus", "p_psi_plus", "p_psi_minus",
        "f_psi_plus_cond", "f_mean", "f_avg_inputs", "f_paper", "f_paper_avg",
    ),
}
OUTPUT_KINDS = tuple(GROUPS)
FIDELITY_COLUMNS = ("f_psi_plus_cond", "f_mean", "f_avg_inputs", "f_paper", "f_paper_avg")
INIT_KINDS = ("ground", "excited", "figure3", "superposed")

DEFAULT_STEPS = 1000
DEFAULT_TAU_MAX = 10.0
MAX_STEPS = 10**6


class SpecError(ValueError):
    """Invalid sweep specification; ``problems`` lists every offending field."""

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def schema(outputs: Iterable[str]) -> list[str]:
    wanted = set(outputs)
    cols = ["tau"]
    for kind in OUTPUT_KINDS:
        if kind in wanted:
            cols.extend(GROUPS[kind])
    return cols


def format_value(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x + 0.0:.12g}"  # + 0.0 folds -0.0 into 0


# --------------------------------------------------------------------------- #
# row extraction
# --------------------------------------------------------------------------- #


def entanglement_row(rep: EntanglementReport) -> dict[str, float]:
    row = {f"pt_eig_{i + 1}": float(v) for i, v in enumerate(rep.pt_support)}
    row.update(
        pop_g_n=rep.pop_g_n,
        pop_e_nm1=rep.pop_e_nm1,
        pop_g_np1=rep.pop_g_np1,
        pop_e_n=rep.pop_e_n,
        re_coh=rep.coherence_gn_en1.real,
        im_coh=rep.coherence_gn_en1.imag,
        concurrence=rep.concurrence,
        negativity=rep.negativity,
    )
    return row


def teleport_row(res: TeleportResult) -> dict[str, float]:
    p = res.outcome_probs
    return {
        "p_phi_plus": float(p[0]),
        "p_phi_minus": float(p[1]),
        "p_psi_plus": float(p[2]),
        "p_psi_minus": float(p[3]),
        "f_psi_plus_cond": res.f_psi_plus_cond,
        "f_mean": res.mean_fidelity,
        "f_avg_inputs": res.avg_over_inputs,
        "f_paper": res.paper_fidelity,
        "f_paper_avg": res.paper_avg_fidelity,
    }


# --------------------------------------------------------------------------- #
# sweep specification
# --------------------------------------------------------------------------- #


@dataclass
class SweepSpec:
    c_jg: float = 2.5
    delta: float = 0.0
    n_photon: int = 1
    init: str = "ground"
    a: float = 0.5
    alpha: float = 1.0
    beta: float = 0.0
    tau_max: float = DEFAULT_TAU_MAX
    steps: int = DEFAULT_STEPS
    mode: str = "oracle"
    mu_mode: str = "standard"
    selection: str = "paper_pair"
    fock_cutoff: int | None = None
    input_theta: float = math.pi / 4
    input_phi: float = 0.0
    outputs: list[str] = field(default_factory=lambda: list(OUTPUT_KINDS))

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> SweepSpec:
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise SpecError([f"unknown field {k!r}" for k in unknown])
        spec = cls(**data)
        spec.validate()
        return spec

    def problems(self) -> list[str]:
        out = []

        def num(name, cond, msg):
            v = getattr(self, name)
            try:
                ok = cond(v)
            except TypeError:
                ok = False
            if not ok:
                out.append(f"{name}={v!r}: {msg}")

        num("c_jg", lambda v: float(v) > 0 and math.isfinite(v), "must be a positive number")
        num("delta", lambda v: math.isfinite(float(v)) and v >= -1.0,
            "must be finite and >= -1 (Josephson energy 1 + delta cannot be negative)")
        num("n_photon", lambda v: int(v) == v and v >= 0, "must be a non-negative integer")
        num("tau_max", lambda v: float(v) > 0 and math.isfinite(v), "must be > 0")
        num("steps", lambda v: int(v) == v and 2 <= v <= MAX_STEPS,
            f"must be an integer in [2, {MAX_STEPS}]")
        num("init", lambda v: v in INIT_KINDS, f"must be one of {INIT_KINDS}")
        num("mode", lambda v: v in MODES, f"must be one of {MODES}")
        num("mu_mode", lambda v: v in MU_MODES, f"must be one of {MU_MODES}")
        num("selection", lambda v: v in SELECTIONS, f"must be one of {SELECTIONS}")
        num("fock_cutoff", lambda v: v is None or (int(v) == v and v >= self.n_photon + 2),
            "must be an integer >= n_photon + 2")
        num("outputs", lambda v: len(v) > 0 and set(v) <= set(OUTPUT_KINDS),
            f"must be a non-empty subset of {OUTPUT_KINDS}")
        num("a", lambda v: math.isfinite(float(v)), "must be finite")
        if self.init == "superposed":
            num("alpha", lambda v: abs(v) + abs(self.beta) > 0, "alpha and beta cannot both vanish")
        if self.selection == "paper_pair":
            num("n_photon", lambda v: v >= 1, "paper_pair selection needs n_photon >= 1")
        return out

    def validate(self) -> None:
        probs = self.problems()
        if probs:
            raise SpecError(probs)

    def params(self) -> ModelParams:
        return figure_params(self.c_jg, self.delta, int(self.n_photon))

    def initial_state(self) -> InitialState:
        n = int(self.n_photon)
        return {
            "ground": lambda: GroundFock(n),
            "excited": lambda: ExcitedFock(n),
            "figure3": lambda: FigureThree(self.a, n),
            "superposed": lambda: SuperposedQubitFock(self.alpha, self.beta, n),
        }[self.init]()

    def space(self) -> HilbertSpace:
        if self.fock_cutoff is None:
            return HilbertSpace.for_photons(int(self.n_photon))
        return HilbertSpace(int(self.fock_cutoff))

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, float(self.tau_max), int(self.steps))

    def input_state(self) -> UnknownQubit:
        return UnknownQubit.from_bloch(self.input_theta, self.input_phi)


def run_rows(spec: SweepSpec, workers: int | None = 1) -> list[dict[str, float]]:
    """Evaluate a validated spec into one row dict per grid point."""
    spec.validate()
    params, init, space, taus = spec.params(), spec.initial_state(), spec.space(), spec.grid()
    n = int(spec.n_photon)
    ent_kinds = set(spec.outputs) - {"fidelity"}
    rows = [{"tau": float(t)} for t in taus]
    if ent_kinds:
        rhos = sweep(params, init, taus, spec.mode, spec.mu_mode, space, workers)
        reports = parallel_map(
            lambda tr: analyze(tr[1], spec.selection, n, tau=tr[0]),
            list(zip(taus.tolist(), rhos)),
            workers,
        )
        for row, rep in zip(rows, reports):
            row.update(entanglement_row(rep))
    if "fidelity" in spec.outputs:
        results = fidelity_sweep(params, init, taus, spec.input_state(), spec.mode, spec.mu_mode,
                                 spec.selection, space, workers=workers)
        for row, res in zip(rows, results):
            row.update(teleport_row(res))
    return rows


# --------------------------------------------------------------------------- #
# writing
# --------------------------------------------------------------------------- #


def params_comment(label: str, params: ModelParams) -> str:
    body = " ".join(f"{k}={format_value(float(v))}" for k, v in params.as_dict().items())
    return f"params {label}: {body}"


def render(columns: Sequence[str], rows: Sequence[dict[str, float]], comments: Sequence[str],
           fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# cpb_cavity {__version__}\n")
        for c in comments:
            buf.write(f"# {c}\n")
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(format_value(float(row[c])) for c in columns) + "\n")
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "version": __version__,
            "comments": list(comments),
            "columns": list(columns),
            "rows": [{c: _json_value(row[c]) for c in columns} for row in rows],
        }
        return json.dumps(doc, indent=1) + "\n"
    raise DomainError(f"unknown format {fmt!r}; expected 'csv' or 'json'")


def _json_value(x: float):
    x = float(x)
    return None if math.isnan(x) else float(format_value(x))


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def run_custom(spec: SweepSpec, out_path: str | Path, fmt: str = "csv",
               workers: int | None = 1) -> Path:
    spec.validate()
    columns = schema(spec.outputs)
    rows = run_rows(spec, workers)
    space = spec.space()
    comments = [
        "kind: sweep",
        f"spec: {json.dumps(asdict(spec), sort_keys=True)}",
        f"curve main: init={spec.initial_state().describe()} mode={spec.mode} "
        f"mu_mode={spec.mu_mode} selection={spec.selection} fock_cutoff={space.fock_cutoff}",
        params_comment("main", spec.params()),
    ]
    return write_text(out_path, render(columns, rows, comments, fmt))


def compare_mu_modes(spec: SweepSpec, out_dir: str | Path, stem: str = "sweep",
                     fmt: str = "csv", workers: int | None = 1) -> dict[str, Path]:
    """Run ``spec`` under both mu modes (closed form) and write a divergence report."""
    out_dir = Path(out_dir)
    paths: dict[str, Path] = {}
    tables: dict[str, list[dict[str, float]]] = {}
    for mu in MU_MODES:
        s = SweepSpec(**{**asdict(spec), "mu_mode": mu, "mode": "closed_form"})
        paths[mu] = run_custom(s, out_dir / f"{stem}_{mu}.{fmt}", fmt, workers)
        tables[mu] = run_rows(s, workers)
    lines = [f"# cpb_cavity {__version__}", "# divergence paper_literal - standard (max abs)"]
    for col in schema(spec.outputs)[1:]:
        a = np.array([r[col] for r in tables["standard"]])
        b = np.array([r[col] for r in tables["paper_literal"]])
        lines.append(f"{col},{format_value(float(np.nanmax(np.abs(a - b))))}")
    paths["divergence"] = write_text(out_dir / f"{stem}_divergence.txt", "\n".join(lines) + "\n")
    return paths


# --------------------------------------------------------------------------- #
# figure presets
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Curve:
    label: str
    c_jg: float
    delta: float
    n: int
    init: str = "ground"
    a: float = 0.5


@dataclass(frozen=True)
class FigurePreset:
    fig_id: str
    outputs: tuple[str, ...]
    curves: tuple[Curve, ...]
    tau_max: float = DEFAULT_TAU_MAX
    selection: str = "paper_pair"

    @property
    def teleport(self) -> bool:
        return "fidelity" in self.outputs

    def columns(self) -> list[str]:
        if not self.teleport:
            return schema(self.outputs)
        return ["tau"] + [f"{c}_{cv.label}" for cv in self.curves for c in FIDELITY_COLUMNS]

    def spec(self, curve: Curve, steps: int, tau_max: float) -> SweepSpec:
        return SweepSpec(
            c_jg=curve.c_jg, delta=curve.delta, n_photon=curve.n, init=curve.init, a=curve.a,
            tau_max=tau_max, steps=steps, mode="oracle", mu_mode="standard",
            selection=self.selection, outputs=list(self.outputs),
        )


def _fig1(delta: float) -> tuple[Curve, ...]:
    return (Curve(f"delta{delta:g}", 2.5, delta, 1),)


PRESETS: dict[str, FigurePreset] = {
    "1a": FigurePreset("1a", ("pt_eigs",), _fig1(0.0)),
    "1b": FigurePreset("1b", ("pt_eigs",), _fig1(1.0)),
    "1c": FigurePreset("1c", ("populations",), _fig1(0.0)),
    "1d": FigurePreset("1d", ("populations",), _fig1(1.0)),
    "1e": FigurePreset("1e", ("concurrence",), _fig1(0.0)),
    "1f": FigurePreset("1f", ("concurrence",), _fig1(1.0)),
    "2a": FigurePreset("2a", ("populations",), (Curve("cjg2_5", 0.4, 0.0, 1),)),
    "2b": FigurePreset("2b", ("concurrence",), (Curve("cjg2_5", 0.4, 0.0, 1),)),
    "3a": FigurePreset("3a", ("concurrence", "negativity"),
                       (Curve("delta0", 2.5, 0.0, 1, "figure3", 0.5),),
                       tau_max=15.0, selection="top_two_fock"),
    "3b": FigurePreset("3b", ("concurrence", "negativity"),
                       (Curve("delta1", 2.5, 1.0, 1, "figure3", 0.5),),
                       tau_max=15.0, selection="top_two_fock"),
    "4a": FigurePreset("4a", ("fidelity",), tuple(
        Curve(f"delta{d:g}", 5.0, d, 1) for d in (0.1, 0.5, 1.0))),
    "4b": FigurePreset("4b", ("fidelity",), (
        Curve("cjg5_3", 5.0 / 3.0, 0.1, 1),
        Curve("cjg5_2", 2.5, 0.1, 1),
        Curve("cjg5", 5.0, 0.1, 1),
    )),
    "5": FigurePreset("5", ("fidelity",), tuple(Curve(f"n{n}", 5.0, 0.1, n) for n in (3, 2, 1))),
}
FIGURE_IDS = tuple(PRESETS)


def concurrence_peak(spec: SweepSpec, mu_mode: str) -> float:
    """First concurrence maximum (closed form, refined), NaN if none on the grid."""
    params, init, space = spec.params(), spec.initial_state(), spec.space()
    n = int(spec.n_photon)

    def conc(t):
        return analyze(closed_form_rho(params, init, float(t), mu_mode, space), spec.selection, n).concurrence

    taus = spec.grid()
    vals = np.array([conc(t) for t in taus])
    i = first_local_max(vals)
    if i is None:
        return float("nan")
    return refine_max(conc, taus, vals, i)[0]


def run_figure(fig_id: str, out_path: str | Path, steps: int = DEFAULT_STEPS,
               tau_max: float | None = None, fmt: str = "csv",
               workers: int | None = 1) -> Path:
    if fig_id not in PRESETS:
        raise DomainError(f"unknown figure {fig_id!r}; expected one of {FIGURE_IDS}")
    preset = PRESETS[fig_id]
    tau_max = preset.tau_max if tau_max is None else tau_max
    comments = [f"kind: figure {fig_id}", f"grid: tau_max={format_value(tau_max)} steps={steps}"]
    per_curve: list[list[dict[str, float]]] = []
    for curve in preset.curves:
        spec = preset.spec(curve, steps, tau_max)
        comments.append(
            f"curve {curve.label}: init={spec.initial_state().describe()} mode={spec.mode} "
            f"mu_mode={spec.mu_mode} selection={spec.selection} "
            f"fock_cutoff={spec.space().fock_cutoff}"
        )
        comments.append(params_comment(curve.label, spec.params()))
        if "concurrence" in preset.outputs:
            peaks = " ".join(f"{mu}={format_value(concurrence_peak(spec, mu))}" for mu in MU_MODES)
            comments.append(f"first_concurrence_peak_tau {curve.label}: {peaks}")
        per_curve.append(run_rows(spec, workers))

    if preset.teleport:
        rows = []
        for i, base in enumerate(per_curve[0]):
            row = {"tau": base["tau"]}
            for curve, table in zip(preset.curves, per_curve):
                for c in FIDELITY_COLUMNS:
                    row[f"{c}_{curve.label}"] = table[i][c]
            rows.append(row)
    else:
        rows = per_curve[0]
    return write_text(out_path, render(preset.columns(), rows, comments, fmt))


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray, list[str]]:
    """Parse a file written by :func:`render`: ``(columns, data, comments)``."""
    comments, lines = [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            comments.append(line[1:].strip())
        elif line:
            lines.append(line)
    columns = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return columns, data, comments
