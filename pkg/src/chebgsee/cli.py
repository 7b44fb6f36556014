"""Experiment runner and command-line interface.

Subcommands cover each pipeline stage (``prepare-init``, ``filter-poly``,
``moments``, ``extrapolate``, ``gsee``, ``oracle``), the full pipeline
(``run``), and run comparison (``compare``).  All artifacts are plain CSV
and JSON; every file records the hash of the config that produced it, and
re-running an identical config reproduces identical bytes.

Exit codes: 0 success, 2 validation, 3 capacity, 4 numerical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .chebyshev import ChebRunConfig, MomentSequence, run_chebyshev
from .dmrg import DmrgConfig, dmrg_ground, load_guiding_state
from .errors import ChebGseeError, ParameterError, exit_code_for
from .filters import shifted_sign_cheb
from .gsee import GseeResult, cumulative_scan, estimate_energy
from .hamiltonians import NormalizedHamiltonian, PauliSum, normalize_pauli_sum, tfim_1d, tfim_2d
from .linear_prediction import extrapolate, fit_lp, select_lp, stabilize
from .mps import Mps, save_mps, to_dense
from .oracle import DenseSystem, overlap_chi


@dataclass(frozen=True)
class RunConfig:
    """Validated view of the single-JSON run configuration."""

    model: dict
    chi_init: int
    dmrg: dict = field(default_factory=dict)
    chebyshev: dict = field(default_factory=dict)
    lp: dict = field(default_factory=dict)
    gsee: dict = field(default_factory=dict)
    output_dir: str = "run"
    seed: int = 0
    guiding_state: str | None = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {"model", "chi_init", "dmrg", "chebyshev", "lp", "gsee",
                 "output_dir", "seed", "guiding_state"}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        for key in ("model", "chebyshev"):
            if key not in data:
                raise ParameterError(f"config is missing required section {key!r}")
        cfg = cls(
            model=dict(data["model"]),
            chi_init=int(data.get("chi_init", 1)),
            dmrg=dict(data.get("dmrg", {})),
            chebyshev=dict(data.get("chebyshev", {})),
            lp=dict(data.get("lp", {})),
            gsee=dict(data.get("gsee", {})),
            output_dir=str(data.get("output_dir", "run")),
            seed=int(data.get("seed", 0)),
            guiding_state=data.get("guiding_state"),
            raw=data,
        )
        cfg.cheb_config()  # validate eagerly, before any compute
        build_model(cfg.model)
        return cfg

    def cheb_config(self) -> ChebRunConfig:
        cheb = self.chebyshev
        chi = cheb.get("chi_mps")
        return ChebRunConfig(
            chi_mps=None if chi in (None, "inf") else int(chi),
            n_max=int(cheb.get("n_max", 100)),
            svd_tol=cheb.get("svd_tol", 0.0),
            checkpoint_every=int(cheb.get("checkpoint_every", 0)),
            max_intermediate_bond=int(cheb.get("max_intermediate_bond", 4096)),
        )

    def dmrg_config(self) -> DmrgConfig:
        return DmrgConfig(
            chi_init=self.chi_init,
            sweeps=int(self.dmrg.get("sweeps", 10)),
            conv_tol=float(self.dmrg.get("conv_tol", 1e-10)),
            local_eig_iters=int(self.dmrg.get("local_eig_iters", 40)),
        )

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def build_model(spec: dict) -> NormalizedHamiltonian:
    """Construct the Hamiltonian named by a config model section."""
    kind = spec.get("model")
    if kind == "tfim1d":
        return tfim_1d(int(spec["L"]), float(spec.get("J", 1.0)), float(spec.get("h", 1.0)))
    if kind == "tfim2d":
        return tfim_2d(int(spec["L"]), float(spec.get("J", 1.0)), float(spec.get("h", 1.0)))
    if kind == "pauli_file":
        text = Path(spec["path"]).read_text()
        return normalize_pauli_sum(PauliSum.from_text(text), model_meta={"path": spec["path"]})
    raise ParameterError(f"unknown model {kind!r}; expected tfim1d, tfim2d, or pauli_file")


# ---------------------------------------------------------------------------
# Artifact I/O
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_moments_csv(path: Path, seq: MomentSequence, config_hash: str) -> None:
    """k,mu,cos_err,trunc_err rows; step diagnostics follow the producing step."""
    lines = [f"# config_hash: {config_hash}", "k,mu,cos_err,trunc_err"]
    n_steps = len(seq.cosine_errors) - 1 if len(seq.cosine_errors) else 0
    for k in range(seq.n_computed):
        step = min((k + 1) // 2, n_steps)
        cos_err = seq.cosine_errors[step] if n_steps else 0.0
        trunc_err = seq.trunc_errors[step] if n_steps else 0.0
        lines.append(f"{k},{_fmt(seq.moments[k])},{_fmt(cos_err)},{_fmt(trunc_err)}")
    path.write_text("\n".join(lines) + "\n")


def write_extended_csv(path: Path, seq: MomentSequence, config_hash: str) -> None:
    lines = [f"# config_hash: {config_hash}", "k,mu,source"]
    for k, label in enumerate(seq.source_labels()):
        lines.append(f"{k},{_fmt(seq.moments[k])},{label}")
    path.write_text("\n".join(lines) + "\n")


def write_diagnostics_csv(path: Path, seq: MomentSequence, config_hash: str) -> None:
    lines = [f"# config_hash: {config_hash}", "step,trunc_err,cos_err,max_bond"]
    for k in range(len(seq.trunc_errors)):
        lines.append(f"{k},{_fmt(seq.trunc_errors[k])},{_fmt(seq.cosine_errors[k])},"
                     f"{int(seq.max_bonds[k])}")
    path.write_text("\n".join(lines) + "\n")


def write_cumulative_csv(path: Path, trace: np.ndarray, config_hash: str) -> None:
    lines = [f"# config_hash: {config_hash}", "x,C"]
    for x, c in trace:
        lines.append(f"{_fmt(x)},{_fmt(c)}")
    path.write_text("\n".join(lines) + "\n")


def read_moments_csv(path: Path) -> tuple[np.ndarray, dict]:
    header: dict = {}
    ks, mus = [], []
    columns = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            if ":" in line:
                key, value = line[1:].split(":", 1)
                header[key.strip()] = value.strip()
            continue
        if not line.strip():
            continue
        if columns is None:
            columns = line.split(",")
            continue
        parts = line.split(",")
        ks.append(int(parts[0]))
        mus.append(float(parts[1]))
    if columns is None or not ks:
        raise ParameterError(f"{path} holds no moment rows")
    mu = np.zeros(max(ks) + 1)
    mu[np.array(ks)] = mus
    return mu, header


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def _resolve_chi(cfg: RunConfig, ham: NormalizedHamiltonian, psi: Mps) -> tuple[float, str]:
    spec = cfg.gsee.get("chi", "oracle")
    if isinstance(spec, (int, float)):
        return float(spec), "config"
    if spec == "oracle":
        system = DenseSystem(ham)
        return overlap_chi(psi, system), "oracle"
    raise ParameterError(f"gsee.chi must be a number or 'oracle', got {spec!r}")


def run_pipeline(config: RunConfig | dict, resume: bool = False) -> Path:
    """Execute prepare-init -> moments -> (lp) -> gsee, writing all artifacts.

    Stage failures are recorded in the manifest (with partial outputs kept)
    and then re-raised.
    """
    if isinstance(config, dict):
        config = RunConfig.from_dict(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    config_hash = config.config_hash()
    manifest: dict = {
        "config": config.raw,
        "config_hash": config_hash,
        "version": __version__,
        "stages": {},
    }
    manifest_path = out / "manifest.json"

    def record(stage: str, status: str, **extra) -> None:
        manifest["stages"][stage] = {"status": status, **extra}
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    stage = "model"
    try:
        started = time.time()
        ham = build_model(config.model)
        record(stage, "ok", scale=ham.scale, growth_factor=ham.growth_factor)

        stage = "prepare-init"
        if config.guiding_state:
            psi0 = load_guiding_state(config.guiding_state)
            init_info = {"source": config.guiding_state}
        else:
            result = dmrg_ground(ham, config.dmrg_config())
            psi0 = result.mps
            init_info = {
                "energy": result.energy,
                "energy_raw": result.energy * ham.scale,
                "converged": result.converged,
                "sweeps_run": len(result.sweep_energies),
            }
        save_mps(psi0, out / "init_state.mpsc")
        record(stage, "ok", **init_info)

        stage = "moments"
        cheb_cfg = config.cheb_config()
        ckpt_dir = out / "checkpoints" if cheb_cfg.checkpoint_every > 0 else None
        seq = run_chebyshev(ham, psi0, cheb_cfg, checkpoint_dir=ckpt_dir, resume=resume)
        write_moments_csv(out / "moments.csv", seq, config_hash)
        write_diagnostics_csv(out / "diagnostics.csv", seq, config_hash)
        record(stage, "ok", n_moments=int(seq.n_computed),
               max_bond=int(seq.max_bonds.max()))

        stage = "extrapolate"
        gsee_seq = seq
        if config.lp.get("enabled", False):
            n_fit_cfg = config.lp.get("n_fit")
            if n_fit_cfg is None:
                # validated hyperparameter selection on held-out moments
                model, selection = select_lp(seq)
                lp_info = {"n_fit": model.n_fit, "selected": True,
                           "validation_score": selection["best_score"]}
            else:
                model = stabilize(fit_lp(seq, int(n_fit_cfg), config.lp.get("ridge")))
                lp_info = {"n_fit": model.n_fit, "selected": False}
            gsee_seq = extrapolate(seq, model, int(config.lp["d_target"]),
                                   method=config.lp.get("method", "modal"))
            write_extended_csv(out / "extrapolated.csv", gsee_seq, config_hash)
            record(stage, "ok", residual_rms=model.residual_rms,
                   d_target=int(config.lp["d_target"]), **lp_info)
        else:
            record(stage, "skipped")

        stage = "gsee"
        chi, chi_source = _resolve_chi(config, ham, psi0)
        degree = int(config.gsee.get("degree") or (len(gsee_seq.moments) - 1))
        delta = float(config.gsee.get("delta") or 1.0 / degree)
        result = estimate_energy(gsee_seq, chi=chi, delta=delta, d=degree,
                                 eta=config.gsee.get("eta"), scale_back=ham.scale)
        payload = result.to_dict()
        payload["chi_source"] = chi_source
        payload["config_hash"] = config_hash
        (out / "gsee.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        write_cumulative_csv(out / "cumulative.csv", result.c_trace, config_hash)
        record(stage, "ok", interval=list(result.interval), chi=chi,
               wall_time_s=round(time.time() - started, 3))
    except Exception as exc:
        record(stage, "error", error=f"{type(exc).__name__}: {exc}")
        raise
    return out


def compare_runs(run_a: Path | str, run_b: Path | str, out_dir: Path | str | None = None) -> dict:
    """Per-degree moment differences, C(x) overlay, and energy table."""
    run_a, run_b = Path(run_a), Path(run_b)
    mu_a, _ = read_moments_csv(run_a / "moments.csv")
    mu_b, _ = read_moments_csv(run_b / "moments.csv")
    if len(mu_a) != len(mu_b):
        raise ParameterError(
            f"incompatible moment degrees: {len(mu_a) - 1} vs {len(mu_b) - 1}")
    diffs = np.abs(mu_a - mu_b)
    report: dict = {
        "runs": [str(run_a), str(run_b)],
        "moment_diff": {
            "max": float(diffs.max()),
            "median": float(np.median(diffs)),
            "final": float(diffs[-1]),
        },
    }

    energies = {}
    for name, run in (("a", run_a), ("b", run_b)):
        gsee_path = run / "gsee.json"
        if gsee_path.exists():
            data = json.loads(gsee_path.read_text())
            energies[name] = {"interval": data["interval"], "degree": data["degree"]}
    if energies:
        report["energies"] = energies

    overlay = None
    ca, cb = run_a / "cumulative.csv", run_b / "cumulative.csv"
    if ca.exists() and cb.exists():
        grid_a = np.genfromtxt(ca, delimiter=",", skip_header=2)
        grid_b = np.genfromtxt(cb, delimiter=",", skip_header=2)
        if grid_a.shape != grid_b.shape or not np.allclose(grid_a[:, 0], grid_b[:, 0]):
            raise ParameterError("cumulative grids are incompatible")
        overlay = np.column_stack([grid_a[:, 0], grid_a[:, 1], grid_b[:, 1]])
        report["cumulative_diff_max"] = float(np.abs(grid_a[:, 1] - grid_b[:, 1]).max())

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "compare.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        lines = ["k,abs_diff"] + [f"{k},{_fmt(d)}" for k, d in enumerate(diffs)]
        (out / "moment_diffs.csv").write_text("\n".join(lines) + "\n")
        if overlay is not None:
            lines = ["x,C_a,C_b"] + [f"{_fmt(x)},{_fmt(a)},{_fmt(b)}" for x, a, b in overlay]
            (out / "cumulative_overlay.csv").write_text("\n".join(lines) + "\n")
    return report


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, choices=["tfim1d", "tfim2d", "pauli_file"])
    parser.add_argument("--L", type=int, default=None)
    parser.add_argument("--J", type=float, default=1.0)
    parser.add_argument("--h", type=float, default=1.0)
    parser.add_argument("--pauli-path", default=None)


def _model_spec(args) -> dict:
    spec = {"model": args.model}
    if args.model == "pauli_file":
        if not args.pauli_path:
            raise ParameterError("pauli_file model needs --pauli-path")
        spec["path"] = args.pauli_path
    else:
        if args.L is None:
            raise ParameterError(f"{args.model} needs --L")
        spec.update({"L": args.L, "J": args.J, "h": args.h})
    return spec


def _cmd_prepare_init(args) -> int:
    ham = build_model(_model_spec(args))
    cfg = DmrgConfig(chi_init=args.chi_init, sweeps=args.sweeps, conv_tol=args.conv_tol)
    result = dmrg_ground(ham, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_mps(result.mps, out / "init_state.mpsc")
    info = {
        "energy": result.energy,
        "energy_raw": result.energy * ham.scale,
        "converged": result.converged,
        "sweeps_run": len(result.sweep_energies),
        "chi_init": args.chi_init,
        "model": ham.model_meta,
    }
    if ham.n_sites <= args.oracle_limit:
        info["chi"] = overlap_chi(result.mps, DenseSystem(ham))
    (out / "init_state.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    print(f"prepared guiding state: energy={result.energy:.10f} (normalized units), "
          f"converged={result.converged}")
    return 0


def _cmd_filter_poly(args) -> int:
    filt = shifted_sign_cheb(args.c, args.delta, args.eta, args.degree)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["k,a_k"] + [f"{k},{_fmt(a)}" for k, a in enumerate(filt.coeffs)]
    (out / "filter.csv").write_text("\n".join(lines) + "\n")
    meta = {
        "c": filt.meta.c, "delta": filt.meta.delta, "eta": filt.meta.eta,
        "degree": filt.meta.degree, "kappa": filt.meta.kappa,
        "quality_warning": filt.meta.quality_warning,
        "max_plateau_error": filt.meta.max_plateau_error,
    }
    (out / "filter.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    if filt.meta.quality_warning:
        print(f"warning: plateau error {filt.meta.max_plateau_error:.3e} exceeds 2*eta; "
              "degree too small for (delta, eta)", file=sys.stderr)
    print(f"wrote degree-{args.degree} filter to {out}")
    return 0


def _load_config(path: str) -> RunConfig:
    return RunConfig.from_dict(json.loads(Path(path).read_text()))


def _cmd_moments(args) -> int:
    config = _load_config(args.config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ham = build_model(config.model)
    if config.guiding_state:
        psi0 = load_guiding_state(config.guiding_state)
    else:
        psi0 = dmrg_ground(ham, config.dmrg_config()).mps
    cheb_cfg = config.cheb_config()
    ckpt = out / "checkpoints" if cheb_cfg.checkpoint_every > 0 else None
    seq = run_chebyshev(ham, psi0, cheb_cfg, checkpoint_dir=ckpt, resume=args.resume)
    config_hash = config.config_hash()
    write_moments_csv(out / "moments.csv", seq, config_hash)
    write_diagnostics_csv(out / "diagnostics.csv", seq, config_hash)
    manifest = {
        "config": config.raw, "config_hash": config_hash, "version": __version__,
        "n_moments": int(seq.n_computed), "max_bond": int(seq.max_bonds.max()),
        "model": ham.model_meta,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {seq.n_computed} moments to {out / 'moments.csv'}")
    return 0


def _cmd_extrapolate(args) -> int:
    mu, header = read_moments_csv(Path(args.moments))
    n_fit = args.n_fit or (len(mu) - 1) // 2
    model = stabilize(fit_lp(mu, n_fit, args.ridge))
    seq = extrapolate(mu, model, args.d_target, method=args.method)
    write_extended_csv(Path(args.out), seq, header.get("config_hash", "unknown"))
    print(f"extended moments to degree {args.d_target} "
          f"(n_fit={n_fit}, residual_rms={model.residual_rms:.3e})")
    return 0


def _cmd_gsee(args) -> int:
    mu, header = read_moments_csv(Path(args.moments))
    degree = args.degree or (len(mu) - 1)
    delta = args.delta or 1.0 / degree
    result = estimate_energy(mu, chi=args.chi, delta=delta, d=degree, eta=args.eta,
                             scale_back=args.scale_back)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = result.to_dict()
    payload["config_hash"] = header.get("config_hash", "unknown")
    (out / "gsee.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    write_cumulative_csv(out / "cumulative.csv", result.c_trace,
                         header.get("config_hash", "unknown"))
    lo, hi = result.interval
    print(f"energy interval [{lo:.8f}, {hi:.8f}] (normalized), midpoint {result.c_star:.8f}")
    return 0


def _cmd_oracle(args) -> int:
    ham = build_model(_model_spec(args))
    system = DenseSystem(ham)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    info: dict = {"model": ham.model_meta, "scale": ham.scale}
    lam0, _ = system.ground()
    info["lambda0"] = lam0
    info["lambda0_raw"] = lam0 * ham.scale
    if args.state:
        psi = load_guiding_state(args.state)
        info["chi"] = overlap_chi(psi, system)
        if args.degree:
            mu = system.cheb_moments(to_dense(psi), args.degree)
            lines = ["k,mu"] + [f"{k},{_fmt(m)}" for k, m in enumerate(mu)]
            (out / "oracle_moments.csv").write_text("\n".join(lines) + "\n")
    (out / "oracle.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    print(f"lambda0 = {lam0:.12f} (normalized); artifacts in {out}")
    return 0


def _cmd_run(args) -> int:
    out = run_pipeline(_load_config(args.config), resume=args.resume)
    print(f"pipeline complete; artifacts in {out}")
    return 0


def _cmd_compare(args) -> int:
    report = compare_runs(args.run_a, args.run_b, args.out)
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chebgsee",
                                     description="Chebyshev-filtered MPS ground-state "
                                                 "energy estimation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare-init", help="DMRG guiding-state preparation")
    _add_model_flags(p)
    p.add_argument("--chi-init", type=int, required=True)
    p.add_argument("--sweeps", type=int, default=10)
    p.add_argument("--conv-tol", type=float, default=1e-10)
    p.add_argument("--oracle-limit", type=int, default=14)
    p.add_argument("--out", default="init")
    p.set_defaults(func=_cmd_prepare_init)

    p = sub.add_parser("filter-poly", help="emit filter coefficients as CSV + JSON")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--out", default="filter")
    p.set_defaults(func=_cmd_filter_poly)

    p = sub.add_parser("moments", help="run the Chebyshev recursion from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("extrapolate", help="linear-prediction extension of moments.csv")
    p.add_argument("--moments", required=True)
    p.add_argument("--n-fit", type=int, default=None)
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--d-target", type=int, required=True)
    p.add_argument("--method", choices=["modal", "recursion"], default="modal")
    p.add_argument("--out", default="extrapolated.csv")
    p.set_defaults(func=_cmd_extrapolate)

    p = sub.add_parser("gsee", help="energy interval from a moment file")
    p.add_argument("--moments", required=True)
    p.add_argument("--chi", type=float, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--degree", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--scale-back", type=float, default=1.0)
    p.add_argument("--out", default="gsee")
    p.set_defaults(func=_cmd_gsee)

    p = sub.add_parser("oracle", help="exact energies/moments/overlaps at small sizes")
    _add_model_flags(p)
    p.add_argument("--state", default=None, help="MPS container for chi and moments")
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--out", default="oracle")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("compare", help="diff two run directories")
    p.add_argument("--run-a", required=True)
    p.add_argument("--run-b", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChebGseeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
