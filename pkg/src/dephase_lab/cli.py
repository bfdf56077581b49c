"""``dephase-lab`` command line: sweeps over noise strength and phase, written as CSV."""
import argparse
import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import scipy

from . import __version__, kernels, metrics
from .coherence import robustness
from .config import (
    COMMANDS, ConfigError, RunConfig, build_config, config_from_dict, read_config_file,
)
from .families import Family, make_family
from .metrology import closed_form_qfi, family_qfi, fringe, phase_variance
from .operators import z_weights
from .sdp import SolverError
from .shotsim import frequency, mc_interval, sample_counts
from .states import EncodingMask, read_graph

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMPARE_THRESHOLD = 1e-7
MANIFEST_KEYS = ("command", "config", "config_hash", "seed", "versions", "kernel_backend",
                 "wall_time_s", "outputs", "status", "flags", "notes")


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)


@dataclass
class RunResult:
    tables: list
    notes: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    failed: bool = False


# formatting -----------------------------------------------------------------------

def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.15g" % float(value)


def write_csv(table: Table, path: Path) -> None:
    lines = [",".join(table.columns)]
    lines += [",".join(fmt(row.get(c)) for c in table.columns) for row in table.rows]
    # newline="" keeps line endings identical across platforms
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _plabel(p: float) -> str:
    return "%.15g" % p


# helpers ---------------------------------------------------------------------------

def _pmap(fn: Callable, items: Sequence, workers: int) -> list:
    """Ordered parallel map; results come back in input order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _single_n(cfg: RunConfig) -> int:
    ns = cfg.n_values()
    if len(ns) != 1:
        raise ConfigError(f"{cfg.command} takes a single --n value, got {cfg.n!r}")
    return ns[0]


def build_family(cfg: RunConfig, n: Optional[int] = None, name: Optional[str] = None) -> Family:
    try:
        graph = read_graph(cfg.graph) if cfg.graph else None
        mask = EncodingMask.from_bits(cfg.mask) if cfg.mask else None
        if graph is not None:
            n = graph.n_qubits
        return make_family(name or cfg.family, n if n is not None else _single_n(cfg), mask, graph)
    except (OSError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _family_for(cfg: RunConfig) -> Family:
    return build_family(cfg, None if cfg.graph else _single_n(cfg))


def _check_k(cfg: RunConfig, fam: Family) -> tuple:
    ks = cfg.k_values()
    if max(ks) > 2 ** fam.n:
        raise ConfigError(f"k must not exceed the dimension 2^{fam.n}")
    return ks


def _coherence_point(fam: Family, p: float, k: int) -> dict:
    try:
        value, cert = robustness(fam.rho(p), k)
        return {"value": value, "gap": cert.dual_gap, "ok": True}
    except SolverError as exc:
        return {"value": float("nan"), "gap": exc.gap, "ok": False}


# subcommands -----------------------------------------------------------------------

def run_sweep(cfg: RunConfig) -> RunResult:
    fam = _family_for(cfg)
    outs = cfg.outputs()
    bad = set(outs) - {"negativity", "purity", "entropy", "qfi", "coherence"}
    if bad:
        raise ConfigError(f"sweep cannot produce {sorted(bad)}")
    parts = cfg.bipartitions(fam.n)
    ks = _check_k(cfg, fam) if "coherence" in outs else ()
    gdiag = 0.5 * z_weights(fam.n)
    ps = list(cfg.p_values())

    def point(p):
        rho = fam.rho(p)
        row = {"p": p}
        if "negativity" in outs:
            for part in parts:
                row["negativity_" + part.label] = metrics.negativity(rho, part)
        if "purity" in outs:
            row["purity"] = metrics.purity(rho)
        if "entropy" in outs:
            row["entropy"] = metrics.entropy(rho)
        if "qfi" in outs:
            row["qfi"] = metrics.qfi_diagonal_generator(rho, gdiag)
        return row

    rows = _pmap(point, ps, cfg.worker_count())
    result = RunResult([])
    for out in outs:
        if out == "negativity":
            cols = ["p"] + ["negativity_" + part.label for part in parts]
        elif out == "coherence":
            continue
        else:
            cols = ["p", out]
        result.tables.append(Table(out, cols, [{c: r[c] for c in cols} for r in rows]))
    if "coherence" in outs:
        table, failed = _coherence_table(cfg, fam, ps, ks)
        table.name = "coherence"
        result.tables.append(table)
        if failed:
            result.failed = True
            result.flags.append("partial: SDP did not converge at " + ", ".join(failed))
    return result


def _coherence_table(cfg: RunConfig, fam: Family, ps, ks):
    tasks = [(p, k) for p in ps for k in ks]
    values = _pmap(lambda t: _coherence_point(fam, t[0], t[1]), tasks, cfg.worker_count())
    cols = ["p"]
    for k in ks:
        cols += [f"R_C{k}", f"gap_C{k}"]
    rows, failed = [], []
    it = iter(values)
    for p in ps:
        row = {"p": p}
        for k in ks:
            v = next(it)
            row[f"R_C{k}"] = v["value"]
            row[f"gap_C{k}"] = v["gap"]
            if not v["ok"]:
                failed.append(f"p={_plabel(p)} k={k}")
        rows.append(row)
    return Table("coherence", cols, rows), failed


def run_coherence(cfg: RunConfig) -> RunResult:
    fam = _family_for(cfg)
    ks = _check_k(cfg, fam)
    table, failed = _coherence_table(cfg, fam, list(cfg.p_values()), ks)
    result = RunResult([table])
    if failed:
        result.failed = True
        result.flags.append("partial: SDP did not converge at " + ", ".join(failed))
    return result


def run_fringes(cfg: RunConfig) -> RunResult:
    fam = _family_for(cfg)
    ps = list(cfg.p_values())
    phis = cfg.phi_values()
    curves = _pmap(lambda p: fringe(fam, p, phis), ps, cfg.worker_count())
    if len(ps) == 1:
        cols = ["phi", "expectation"]
        rows = [{"phi": phi, "expectation": e} for phi, e in zip(phis, curves[0].expectation)]
    else:
        names = ["expectation_p" + _plabel(p) for p in ps]
        cols = ["phi"] + names
        rows = [{"phi": phi, **{nm: c.expectation[i] for nm, c in zip(names, curves)}}
                for i, phi in enumerate(phis)]
    return RunResult([Table("fringes", cols, rows)])


def run_variance(cfg: RunConfig) -> RunResult:
    fam = _family_for(cfg)
    ps = list(cfg.p_values())
    phis = cfg.phi_values()

    def point(task):
        i, p = task
        rep = phase_variance(fringe(fam, p, phis), cfg.shots)
        eps = min(max(rep.expectation, 0.0), 1.0)
        # two-outcome record: all-plus versus anything else
        rec = sample_counts([eps, 1.0 - eps], cfg.shots, cfg.seed, labels=("all_plus", "other"),
                            task=(i,))
        ci = mc_interval(frequency(0), rec, cfg.resamples, level=3)
        f = ci.center
        slope2 = rep.slope ** 2
        var_mc = f * (1 - f) / cfg.shots / slope2 if slope2 > 0 else float("inf")
        return {
            "p": p, "phi_star": rep.phi_star, "expectation": rep.expectation,
            "slope": rep.slope, "var_phi": rep.var_phi, "cramer_rao": rep.cramer_rao_bound,
            "qfi": rep.qfi, "shots": cfg.shots, "seed": cfg.seed,
            "mc_frequency": f, "mc_lower": ci.lower, "mc_upper": ci.upper, "var_phi_mc": var_mc,
        }

    rows = _pmap(point, list(enumerate(ps)), cfg.worker_count())
    cols = ["p", "phi_star", "expectation", "slope", "var_phi", "cramer_rao", "qfi", "shots",
            "seed", "mc_frequency", "mc_lower", "mc_upper", "var_phi_mc"]
    return RunResult([Table("variance", cols, rows)],
                     notes=[f"Monte-Carlo resamples: {cfg.resamples}", "intervals: 3 sigma"])


def run_qfi(cfg: RunConfig) -> RunResult:
    base = cfg.family.removesuffix("_encoded")
    ns = (build_family(cfg).n,) if cfg.graph else cfg.n_values()
    tasks = []
    for n in ns:
        bare = build_family(cfg, n, base).bare()
        enc = build_family(cfg, n, base + "_encoded")
        if not enc.encoded:
            raise ConfigError("the encoded family needs a non-identity mask")
        tasks += [(n, p, bare, enc) for p in cfg.p_values()]

    def point(t):
        n, p, bare, enc = t
        return {
            "n": n, "p": p,
            "qfi_bare": family_qfi(bare, p), "qfi_encoded": family_qfi(enc, p),
            "qfi_bare_closed": closed_form_qfi(bare, p),
            "qfi_encoded_closed": closed_form_qfi(enc, p),
            "snl": float(n), "hl": float(n * n),
        }

    rows = _pmap(point, tasks, cfg.worker_count())
    cols = ["n", "p", "qfi_bare", "qfi_encoded", "qfi_bare_closed", "qfi_encoded_closed",
            "snl", "hl"]
    return RunResult([Table("qfi", cols, rows)])


def _closed_quantities(fam: Family, p: float) -> dict:
    """Analytic values available for ``fam`` at ``p`` (missing keys mean none)."""
    n = fam.n
    out = {}
    q = closed_form_qfi(fam, p)
    if q is not None:
        out["qfi"] = q
    if fam.base == "ghz":
        if not fam.encoded:
            out["purity"] = metrics.bare_ghz_purity(n, p)
            out["entropy"] = metrics.entropy_from_spectrum(metrics.bare_ghz_spectrum(n, p))
            out["negativity"] = metrics.bare_ghz_negativity(n, p)
        elif fam.mask.hadamard == (True,) * n:
            out["purity"] = metrics.encoded_ghz_purity(n, p)
            out["entropy"] = metrics.entropy_from_spectrum(metrics.encoded_ghz_spectrum(n, p))
    return out


def run_compare(cfg: RunConfig) -> RunResult:
    outs = cfg.outputs()
    bad = set(outs) - {"negativity", "purity", "entropy", "qfi"}
    if bad:
        raise ConfigError(f"compare cannot check {sorted(bad)}")
    fams = [build_family(cfg)] if cfg.graph else [build_family(cfg, n) for n in cfg.n_values()]
    tasks = [(fam, p) for fam in fams for p in cfg.p_values()]

    def point(t):
        fam, p = t
        rho = fam.rho(p)
        num = {
            "purity": metrics.purity(rho),
            "entropy": metrics.entropy(rho),
            "qfi": metrics.qfi_diagonal_generator(rho, 0.5 * z_weights(fam.n)),
        }
        if "negativity" in outs:
            num["negativity"] = {b.label: metrics.negativity(rho, b) for b in cfg.bipartitions(fam.n)}
        return num, _closed_quantities(fam, p)

    results = _pmap(point, tasks, cfg.worker_count())
    result = RunResult([])
    worst = None
    for q in outs:
        has_closed = all(q in closed for _, closed in results)
        cols = ["n", "p"] + (["partition"] if q == "negativity" else []) + ["numeric"]
        if has_closed:
            cols += ["closed", "absdev"]
        else:
            result.notes.append(f"{q}: numeric only")
        rows = []
        for (fam, p), (num, closed) in zip(tasks, results):
            entries = num[q].items() if q == "negativity" else [(None, num[q])]
            for label, value in entries:
                row = {"n": fam.n, "p": p, "partition": label, "numeric": value}
                if has_closed:
                    row["closed"] = closed[q]
                    row["absdev"] = abs(value - closed[q])
                    worst = row["absdev"] if worst is None else max(worst, row["absdev"])
                rows.append(row)
        result.tables.append(Table(q, cols, rows))
    if len(result.notes) == len(outs):
        result.notes.append("numeric only")
    result.summary = {"max_abs_deviation": worst, "threshold": COMPARE_THRESHOLD}
    if worst is not None and worst > COMPARE_THRESHOLD:
        result.failed = True
        result.flags.append(f"deviation {worst:.3g} exceeds {COMPARE_THRESHOLD:g}")
    return result


RUNNERS = {
    "sweep": run_sweep, "fringes": run_fringes, "variance": run_variance,
    "qfi": run_qfi, "coherence": run_coherence, "compare": run_compare,
}


# manifest --------------------------------------------------------------------------

def versions() -> dict:
    return {"dephase_lab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def output_name(cfg: RunConfig, table: Table) -> str:
    if table.name == cfg.command:
        return f"{cfg.command}_{cfg.config_hash()}.csv"
    return f"{cfg.command}_{table.name}_{cfg.config_hash()}.csv"


def manifest_name(cfg: RunConfig) -> str:
    return f"manifest_{cfg.config_hash()}.json"


def load_manifest(path) -> dict:
    """Read a manifest and check it against the configuration it echoes."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"unreadable manifest {path}: {exc}") from exc
    missing = [k for k in MANIFEST_KEYS if k not in data]
    if missing:
        raise ConfigError(f"manifest lacks {missing}")
    cfg = config_from_dict(data["config"])
    h = cfg.config_hash()
    if h != data["config_hash"] or cfg.seed != data["seed"]:
        raise ConfigError("manifest config does not reproduce its hash")
    for out in data["outputs"]:
        if h not in out["file"]:
            raise ConfigError(f"output {out['file']} is not tagged with {h}")
    data["config"] = cfg
    return data


def run(cfg: RunConfig) -> tuple:
    """Execute ``cfg``; returns ``(exit_code, manifest_path)``."""
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    status, code = "ok", EXIT_OK
    try:
        result = RUNNERS[cfg.command](cfg)
    except (SolverError, np.linalg.LinAlgError, ArithmeticError) as exc:
        result = RunResult([], failed=True, flags=[f"numeric failure: {exc}"])
    if result.failed:
        status, code = "failed", EXIT_NUMERIC
    outputs = []
    for table in result.tables:
        name = output_name(cfg, table)
        write_csv(table, out_dir / name)
        outputs.append({"name": table.name, "file": name, "rows": len(table.rows),
                        "columns": table.columns})
    manifest = {
        "command": cfg.command,
        "config": asdict(cfg),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "mc_resamples": cfg.resamples,
        "versions": versions(),
        "kernel_backend": kernels.BACKEND,
        "wall_time_s": time.perf_counter() - t0,
        "outputs": outputs,
        "status": status,
        "flags": result.flags,
        "notes": result.notes,
        "summary": result.summary,
    }
    mpath = out_dir / manifest_name(cfg)
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return code, mpath


# argument parsing ------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--family", help="ghz, ghz_encoded, cluster, cluster_encoded, graph, "
                                         "graph_encoded, product, product_encoded")
    common.add_argument("--n", help="qubit count, range a:b or list")
    common.add_argument("--mask", help="encoding bitstring, 1 = Hadamard on that qubit")
    common.add_argument("--graph", help="edge-list file for the graph family")
    common.add_argument("--p", help="dephasing grid start:stop:step or list")
    common.add_argument("--phi", help="phase grid; 'pi' is understood")
    common.add_argument("--shots", type=int)
    common.add_argument("--resamples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--partitions", help="'all' or labels like 1v234,12v34")
    common.add_argument("--k", help="coherence levels, e.g. 1:3")
    common.add_argument("--out", help="comma list of outputs")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--threads", type=int)

    parser = argparse.ArgumentParser(prog="dephase-lab",
                                     description="Dephasing, encoding and phase-estimation sweeps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "sweep": "entanglement, purity, entropy, QFI and coherence versus p",
        "fringes": "all-plus expectation versus phi",
        "variance": "phase variance at the steepest fringe point with MC intervals",
        "qfi": "bare and encoded QFI over n and p",
        "coherence": "robustness of k-level coherence versus p",
        "compare": "numeric values against closed forms",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = vars(_parser().parse_args(argv))
    command = args.pop("command")
    cfg_path = args.pop("config")
    try:
        file_values = read_config_file(cfg_path) if cfg_path else {}
        cfg = build_config(command, file_values, args)
        code, mpath = run(cfg)
    except ConfigError as exc:
        print(f"dephase-lab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    manifest = json.loads(mpath.read_text())
    for out in manifest["outputs"]:
        print(Path(cfg.out_dir) / out["file"])
    print(mpath)
    if manifest["summary"]:
        worst = manifest["summary"]["max_abs_deviation"]
        print("numeric only" if worst is None else f"max |numeric - closed| = {worst:.3g}")
    for flag in manifest["flags"]:
        print(f"dephase-lab: {flag}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
