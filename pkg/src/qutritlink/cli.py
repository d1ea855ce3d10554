"""Command-line front end.

Every subcommand writes its artifacts into ``--output-dir`` and a JSON
report that embeds the full run configuration, the seed and the package
version. Outputs depend only on (inputs, seed, version).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, FitError, InvariantError, ReconstructionError, TableFormatError
from .linkmodel import LinkParameters, fit_dispersion, read_delay_scan, source_for_fidelity, sweep_link, write_sweep
from .linkmodel.dispersion import fit_gaussian
from .linkmodel.source import SpiralCoefficients
from .qstate import DensityMatrix, purity
from .slm import Grid, build_hologram, lg_field, phase_flatten_mask, superposition_field, write_pgm, write_phase_csv
from .tomography import (
    bootstrap_uncertainty,
    build_projector_set,
    identity_process,
    load_bundled_table,
    mle_reconstruct,
    process_fidelity,
    process_reconstruct,
    read_table,
)
from .witness import best_mes_fidelity, cglmp_optimize, cglmp_value, witness_report

log = logging.getLogger("qutritlink")

SUBCOMMANDS = ("tomography", "witness", "cglmp", "process", "simulate", "dispersion-fit", "hologram")
BUNDLED = "bundled"


@dataclass
class RunConfig:
    """Validated settings of one CLI invocation."""

    subcommand: str
    output_dir: str = "."
    seed: int = 0
    inputs: dict[str, str] = field(default_factory=dict)
    bootstrap: int = 0
    restarts: int = 8
    max_iter: int = 5000
    cglmp_starts: int = 32
    convention: str = "main"
    options: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"unknown subcommand {self.subcommand!r}")
        if self.seed < 0:
            raise ValueError("--seed must be nonnegative")
        for name in ("restarts", "max_iter", "cglmp_starts"):
            if getattr(self, name) < 1:
                raise ValueError(f"--{name.replace('_', '-')} must be positive")
        if self.bootstrap < 0 or self.bootstrap == 1:
            raise ValueError("--bootstrap must be 0 (off) or at least 2")
        for name, path in self.inputs.items():
            if path != BUNDLED and not Path(path).is_file():
                raise FileNotFoundError(f"{name} file not found: {path}")


# ---------------------------------------------------------------- file helpers

def write_density_csv(rho, path: str | Path) -> None:
    """Long format ``row,col,re,im`` with exact ``repr`` floats."""
    m = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "re", "im"])
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                w.writerow([i, j, repr(float(m[i, j].real)), repr(float(m[i, j].imag))])


def read_density_csv(path: str | Path) -> DensityMatrix:
    entries = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            cells = [c.strip() for c in line.split(",")]
            if cells[0] == "row":
                continue
            if len(cells) != 4:
                raise TableFormatError("expected row,col,re,im", lineno)
            try:
                entries[(int(cells[0]), int(cells[1]))] = complex(float(cells[2]), float(cells[3]))
            except ValueError:
                raise TableFormatError("non-numeric entry", lineno) from None
    dim = int(round(np.sqrt(len(entries))))
    if dim not in (3, 9) or len(entries) != dim * dim:
        raise TableFormatError(f"expected 9 or 81 entries, found {len(entries)}")
    m = np.zeros((dim, dim), dtype=np.complex128)
    for (i, j), v in entries.items():
        m[i, j] = v
    return DensityMatrix(m)


def _matrix_json(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def _matrix_from_json(doc) -> np.ndarray:
    return np.asarray(doc["re"], dtype=float) + 1j * np.asarray(doc.get("im", 0.0), dtype=float)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_report(cfg: RunConfig, name: str, results: dict) -> Path:
    doc = {"config": asdict(cfg), "seed": cfg.seed, "version": __version__, "results": results}
    path = Path(cfg.output_dir) / name
    path.write_text(json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------- subcommands

def _load_table(cfg: RunConfig):
    src = cfg.inputs["input"]
    return load_bundled_table() if src == BUNDLED else read_table(src)


def run_tomography(cfg: RunConfig) -> dict:
    table = _load_table(cfg)
    alice = build_projector_set(cfg.convention)
    frame = cfg.options.get("bob_frame", "auto")
    bob = None
    if frame != "auto":
        bob = alice.as_mirrored() if frame == "mirrored" else alice
    fit = mle_reconstruct(table, alice, bob_projectors=bob, restarts=cfg.restarts, seed=cfg.seed,
                          max_iter=cfg.max_iter)
    write_density_csv(fit.rho, Path(cfg.output_dir) / "density_matrix.csv")
    report = witness_report(fit.rho, with_cglmp=not cfg.options.get("no_cglmp", False),
                            n_starts=cfg.cglmp_starts, seed=cfg.seed)
    results = {
        "mle": {
            "log_likelihood": fit.log_likelihood,
            "scale": fit.scale,
            "iterations": fit.iterations,
            "failed_restarts": fit.failed_restarts,
            "informationally_complete": alice.informationally_complete,
        },
        "witness": report.to_dict(),
    }
    if cfg.bootstrap:
        settings = None
        if report.i3 is not None:
            settings = cglmp_optimize(fit.rho, n_starts=cfg.cglmp_starts, seed=cfg.seed).settings

        def stat(rho):
            out = [purity(rho), best_mes_fidelity(rho)[0]]
            return out + ([cglmp_value(rho, settings)] if settings is not None else [])

        boot = bootstrap_uncertainty(table, alice, cfg.bootstrap, stat, seed=cfg.seed,
                                     bob_projectors=bob, max_iter=cfg.max_iter)
        names = ["purity", "fidelity", "i3_fixed_settings"]
        results["bootstrap"] = {
            "n_resamples": cfg.bootstrap,
            "failures": boot.failures,
            **{n: {"mean": float(m), "std": float(s)} for n, m, s in zip(names, boot.mean, boot.std)},
        }
    return results


def run_witness(cfg: RunConfig) -> dict:
    rho = read_density_csv(cfg.inputs["rho"])
    report = witness_report(rho, with_cglmp=not cfg.options.get("no_cglmp", False),
                            n_starts=cfg.cglmp_starts, seed=cfg.seed)
    return {"witness": report.to_dict()}


def run_cglmp(cfg: RunConfig) -> dict:
    rho = read_density_csv(cfg.inputs["rho"])
    opt = cglmp_optimize(rho, family=cfg.options.get("family", "unitary"), n_starts=cfg.cglmp_starts,
                         seed=cfg.seed)
    return {"i3": opt.value, "settings": opt.settings.to_dict()}


def run_process(cfg: RunConfig) -> dict:
    doc = json.loads(Path(cfg.inputs["input"]).read_text(encoding="utf-8"))
    if "outputs" not in doc:
        raise TableFormatError("process input needs an 'outputs' list")
    outputs = [_matrix_from_json(o) for o in doc["outputs"]]
    inputs = [_matrix_from_json(i) for i in doc["inputs"]] if "inputs" in doc else None
    chi = process_reconstruct(outputs, inputs)
    return {
        "chi": _matrix_json(chi.chi),
        "fit_residual": chi.fit_residual,
        "tp_residual": chi.tp_residual,
        "fidelity_to_identity": process_fidelity(chi, identity_process()),
        "fidelity_to_identity_raw": process_fidelity(chi, identity_process(), raw=True),
    }


def run_simulate(cfg: RunConfig) -> dict:
    o = cfg.options
    f_src = o.get("source_fidelity")
    source = SpiralCoefficients.ideal() if f_src is None else source_for_fidelity(f_src)
    points = [
        LinkParameters(tau_disp=td, tau_comp=tc, bandwidth=o["bandwidth"], wavelength=o["wavelength"], crosstalk=e)
        for td in o["tau_disp"] for tc in o["tau_comp"] for e in o["crosstalk"]
    ]
    results = sweep_link(source, points, with_cglmp=not o.get("no_cglmp", False),
                         n_starts=cfg.cglmp_starts, seed=cfg.seed)
    out = Path(cfg.output_dir)
    write_sweep(results, out / "sweep.csv", out / "sweep.json")
    return {
        "source": {"c00": [source.c00.real, source.c00.imag], "c1m1": [source.c1m1.real, source.c1m1.imag],
                   "cm11": [source.cm11.real, source.cm11.imag]},
        "points": [{"parameters": asdict(p), "gamma": p.gamma, "report": r.to_dict()} for p, r in results],
    }


def run_dispersion(cfg: RunConfig) -> dict:
    scan = read_delay_scan(cfg.inputs["input"])
    even = fit_gaussian(scan[:, 0], scan[:, 1])
    odd = fit_gaussian(scan[:, 0], scan[:, 2])
    return {"delta_t_s": fit_dispersion(scan), "fit_00": asdict(even), "fit_m11": asdict(odd),
            "points": int(scan.shape[0])}


def run_hologram(cfg: RunConfig) -> dict:
    o = cfg.options
    grid = Grid(o["nx"], o["ny"], o["pitch"])
    if o["mask"] == "flatten":
        holo = phase_flatten_mask(o["l"][0], grid, o["lambda_px"])
    else:
        if len(o["l"]) == 1:
            field_ = lg_field(o["l"][0], 0, o["w0"], grid)
        else:
            field_ = superposition_field({ell: 1.0 for ell in o["l"]}, o["w0"], grid)
        holo = build_hologram(field_, o["lambda_px"], o["carrier"])
    out = Path(cfg.output_dir)
    write_pgm(holo, out / "hologram.pgm")
    write_phase_csv(holo, out / "hologram.csv")
    cy, cx = grid.center
    return {"shape": list(holo.shape), "center_pixel_level": int(holo.gray_levels()[cy, cx]),
            "phase_min": float(holo.phase.min()), "phase_max": float(holo.phase.max())}


_RUNNERS = {
    "tomography": (run_tomography, "tomography_report.json"),
    "witness": (run_witness, "witness_report.json"),
    "cglmp": (run_cglmp, "cglmp_report.json"),
    "process": (run_process, "process_report.json"),
    "simulate": (run_simulate, "simulate_report.json"),
    "dispersion-fit": (run_dispersion, "dispersion_report.json"),
    "hologram": (run_hologram, "hologram_report.json"),
}


def run(cfg: RunConfig) -> int:
    """Execute one configured run; returns the process exit status."""
    try:
        cfg.validate()
        Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
        runner, report_name = _RUNNERS[cfg.subcommand]
        results = runner(cfg)
        path = _write_report(cfg, report_name, results)
    except (TableFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: {exc}; diagnostics: {json.dumps(exc.diagnostics, sort_keys=True)}", file=sys.stderr)
        return 1
    except (ReconstructionError, FitError, InvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


# ---------------------------------------------------------------- argparse

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qutritlink", description="Qutrit OAM link analysis toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, cglmp=False):
        p.add_argument("--output-dir", default=".", help="directory for reports and artifacts")
        p.add_argument("--seed", type=int, default=0)
        if cglmp:
            p.add_argument("--cglmp-starts", type=int, default=32, help="random starts of the I3 search")
            p.add_argument("--no-cglmp", action="store_true", help="skip the I3 optimization")

    p = sub.add_parser("tomography", help="MLE state reconstruction and witnesses from a count table")
    p.add_argument("--input", default=BUNDLED, help="coincidence CSV (default: bundled 1 km table)")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--bootstrap", type=int, default=0, help="number of Poisson resamples (0 = off)")
    p.add_argument("--convention", choices=("main", "table"), default="main")
    p.add_argument("--bob-frame", choices=("auto", "direct", "mirrored"), default="auto",
                   help="Bob's projector frame; 'auto' follows the table metadata")
    common(p, cglmp=True)

    p = sub.add_parser("witness", help="fidelity witness and I3 for a density matrix CSV")
    p.add_argument("--rho", required=True)
    common(p, cglmp=True)

    p = sub.add_parser("cglmp", help="optimize the CGLMP value of a density matrix CSV")
    p.add_argument("--rho", required=True)
    p.add_argument("--family", choices=("unitary", "fourier"), default="unitary")
    p.add_argument("--cglmp-starts", type=int, default=32)
    p.add_argument("--output-dir", default=".")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("process", help="process matrix from a JSON file of input/output states")
    p.add_argument("--input", required=True)
    common(p)

    p = sub.add_parser("simulate", help="link simulation over a parameter grid")
    p.add_argument("--tau-disp", type=float, nargs="+", default=[2.4e-9], help="seconds")
    p.add_argument("--tau-comp", type=float, nargs="+", default=[0.0], help="precompensation delay(s), seconds")
    p.add_argument("--bandwidth", type=float, default=0.5e-9, help="metres")
    p.add_argument("--wavelength", type=float, default=1550e-9, help="metres")
    p.add_argument("--crosstalk", type=float, nargs="+", default=[0.0])
    p.add_argument("--source-fidelity", type=float, default=None,
                   help="best-MES fidelity of the source (default: ideal MES)")
    common(p, cglmp=True)

    p = sub.add_parser("dispersion-fit", help="intermodal delay from a delay-scan CSV")
    p.add_argument("--input", required=True)
    common(p)

    p = sub.add_parser("hologram", help="SLM hologram as PGM and CSV")
    p.add_argument("--l", type=int, nargs="+", default=[1], help="OAM label(s); several give an equal superposition")
    p.add_argument("--lambda-px", type=float, default=8.0, help="grating period in pixels")
    p.add_argument("--nx", type=int, default=512)
    p.add_argument("--ny", type=int, default=512)
    p.add_argument("--pitch", type=float, default=8e-6, help="metres per pixel")
    p.add_argument("--w0", type=float, default=1e-3, help="beam waist, metres")
    p.add_argument("--mask", choices=("generation", "flatten"), default="generation")
    p.add_argument("--carrier", choices=("product", "shifted"), default="product")
    common(p)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cmd = ns.subcommand
    cfg = RunConfig(subcommand=cmd, output_dir=ns.output_dir, seed=ns.seed,
                    cglmp_starts=getattr(ns, "cglmp_starts", 32))
    if cmd == "tomography":
        cfg.inputs = {"input": ns.input}
        cfg.bootstrap, cfg.restarts, cfg.max_iter, cfg.convention = ns.bootstrap, ns.restarts, ns.max_iter, ns.convention
        cfg.options = {"bob_frame": ns.bob_frame, "no_cglmp": ns.no_cglmp}
    elif cmd == "witness":
        cfg.inputs = {"rho": ns.rho}
        cfg.options = {"no_cglmp": ns.no_cglmp}
    elif cmd == "cglmp":
        cfg.inputs = {"rho": ns.rho}
        cfg.options = {"family": ns.family}
    elif cmd in ("process", "dispersion-fit"):
        cfg.inputs = {"input": ns.input}
    elif cmd == "simulate":
        cfg.options = {
            "tau_disp": ns.tau_disp,
            "tau_comp": ns.tau_comp,
            "bandwidth": ns.bandwidth, "wavelength": ns.wavelength, "crosstalk": ns.crosstalk,
            "source_fidelity": ns.source_fidelity, "no_cglmp": ns.no_cglmp,
        }
    elif cmd == "hologram":
        cfg.options = {"l": ns.l, "lambda_px": ns.lambda_px, "nx": ns.nx, "ny": ns.ny, "pitch": ns.pitch,
                       "w0": ns.w0, "mask": ns.mask, "carrier": ns.carrier}
    return cfg


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("QUTRITLINK_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
