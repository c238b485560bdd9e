"""Command-line pipeline: vqe -> qse -> greens/dsf, plus the ED fixture.

Every output file starts with '#'-prefixed metadata lines carrying the
resolved configuration, package version and seed; the timestamp sits on
its own line so reruns differ in exactly that one line. Plotting is
deliberately out of scope; files are plain CSV/JSON for downstream use.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, greens, lattice as lattice_mod, oracle, qse, vqe
from .config import ConfigError, RunConfig, config_from_dict, load_config
from .greens import GreensEngine, KrylovBasisConfig
from .pauli import gershgorin_kappa, single_site
from .simulator import EvolutionOperator, StateVector


class PipelineError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _metadata_lines(config: RunConfig, extra: dict | None = None) -> list[str]:
    echo = config.to_json_dict()
    # where the run writes and how many workers it uses are not physics
    echo.pop("output_dir", None)
    echo.pop("threads", None)
    lines = [
        f"# kitaevqse_version = {__version__}",
        f"# seed = {config.seed}",
        f"# config = {json.dumps(echo, sort_keys=True)}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"# {key} = {value}")
    lines.append(f"# timestamp = {datetime.now(timezone.utc).isoformat()}")
    return lines


def write_csv(
    path: Path,
    config: RunConfig,
    header: list[str],
    rows: list[list],
    extra_metadata: dict | None = None,
) -> None:
    out = _metadata_lines(config, extra_metadata)
    out.append(",".join(header))
    for row in rows:
        out.append(",".join(_format_cell(x) for x in row))
    path.write_text("\n".join(out) + "\n")


def _format_cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_json(path: Path, config: RunConfig, payload: dict) -> None:
    payload = dict(payload)
    payload["_meta"] = {
        "kitaevqse_version": __version__,
        "seed": config.seed,
        "config": config.to_json_dict(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    path.write_text(json.dumps(payload, indent=2))


def _map_tasks(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Shared pipeline pieces
# ---------------------------------------------------------------------------

def _build_lattice(config: RunConfig):
    return lattice_mod.build_lattice(config.lattice.rows, config.lattice.cols)


def _hamiltonians(config: RunConfig, lat):
    h0 = lattice_mod.kitaev_hamiltonian(lat, config.coupling)
    h = lattice_mod.kitaev_hamiltonian(lat, config.coupling, config.field_z)
    return h0, h


def _config_echo(config: RunConfig) -> dict:
    return {
        "rows": config.lattice.rows,
        "cols": config.lattice.cols,
        "coupling": config.coupling,
        "field_z": config.field_z,
    }


def _check_echo(stored: dict, config: RunConfig, artifact: str) -> None:
    if stored != _config_echo(config):
        raise PipelineError(
            f"{artifact} was produced for {stored}, current config wants {_config_echo(config)}"
        )


def _load_artifact(out_dir: Path, name: str) -> dict:
    path = out_dir / name
    if not path.exists():
        raise PipelineError(f"missing upstream artifact {path}; run the earlier pipeline stage first")
    return json.loads(path.read_text())


def _reference_from_artifact(config: RunConfig, lat, artifact: dict) -> StateVector:
    _check_echo(artifact["config_echo"], config, "vqe_result.json")
    group = lattice_mod.stabilizer_group(
        lat,
        artifact["sector_targets"][: len(lat.plaquettes)],
        tuple(artifact["sector_targets"][len(lat.plaquettes):]),
    )
    init_state = vqe.prepare_sector_state(group, lat)
    ansatz = vqe.AnsatzCircuit.for_lattice(lat, artifact["layers"])
    params = np.asarray(artifact["optimal_parameters"], dtype=float)
    if ansatz.num_parameters == 0:
        return init_state
    return ansatz.apply(params, init_state)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_vqe(config: RunConfig, out_dir: Path) -> None:
    lat = _build_lattice(config)
    h0, _ = _hamiltonians(config, lat)
    decomp = oracle.diagonalize(h0)

    sweep_rows = []
    for d in config.vqe.layer_sweep:
        _, result, _ = vqe.prepare_reference_state(
            lat, h0, layers=d,
            epochs=config.vqe.epochs, learning_rate=config.vqe.learning_rate,
            seed=config.seed, scan_epochs=config.vqe.scan_epochs,
            oracle_decomp=decomp,
        )
        sweep_rows.append([d, result.infidelity, result.energy_distance])
    write_csv(out_dir / "vqe_layer_sweep.csv", config, ["d", "infidelity", "delta_e"], sweep_rows)

    state, result, group = vqe.prepare_reference_state(
        lat, h0, layers=config.vqe.layers,
        epochs=config.vqe.epochs, learning_rate=config.vqe.learning_rate,
        seed=config.seed, scan_epochs=config.vqe.scan_epochs,
        oracle_decomp=decomp, tolerance=1e-8,
    )
    payload = result.to_json_dict()
    payload["layers"] = config.vqe.layers
    payload["config_echo"] = _config_echo(config)
    write_json(out_dir / "vqe_result.json", config, payload)
    print(f"vqe: dE={result.energy_distance:.3e} infidelity={result.infidelity:.3e} "
          f"sector={result.sector_targets}")


def cmd_qse(config: RunConfig, out_dir: Path) -> None:
    lat = _build_lattice(config)
    _, h = _hamiltonians(config, lat)
    artifact = _load_artifact(out_dir, "vqe_result.json")
    reference = _reference_from_artifact(config, lat, artifact)

    exact_energy = oracle.diagonalize(h).ground_energy
    kappa = gershgorin_kappa(h)
    delta_t = qse.default_time_step(h)

    shape_rows = qse.qse_energy_curve(
        reference, h, config.qse.shape_sweep, exact_energy=exact_energy,
        evolution_mode=config.qse.evolution_mode,
        trotter_steps=[config.qse.trotter_steps],
    )
    write_csv(
        out_dir / "qse_shape_sweep.csv", config,
        ["n_l", "n_k", "n_phi", "r", "mode", "energy", "delta_e"],
        [[r["n_l"], r["n_k"], r["n_phi"], r["r"], r["mode"], r["energy"], r["delta_e"]] for r in shape_rows],
        {"kappa": kappa, "delta_t": delta_t, "exact_energy": exact_energy},
    )

    trotter_rows = qse.qse_energy_curve(
        reference, h, [(config.qse.n_l, config.qse.n_k)], exact_energy=exact_energy,
        evolution_mode="trotter2", trotter_steps=config.qse.trotter_sweep,
    )
    write_csv(
        out_dir / "qse_trotter_sweep.csv", config,
        ["n_l", "n_k", "n_phi", "r", "mode", "energy", "delta_e"],
        [[r["n_l"], r["n_k"], r["n_phi"], r["r"], r["mode"], r["energy"], r["delta_e"]] for r in trotter_rows],
        {"kappa": kappa, "delta_t": delta_t, "exact_energy": exact_energy},
    )

    hoa_tau = config.qse.hoa_tau_scale / kappa if config.qse.assembly_mode == "hoa" else None
    gs, basis, mats = qse.prepare_qse_ground_state(
        reference, h, config.qse.n_k, config.qse.n_l,
        evolution_mode=config.qse.evolution_mode,
        trotter_steps=config.qse.trotter_steps,
        assembly_mode=config.qse.assembly_mode,
        hoa_tau=hoa_tau,
    )
    mats.save_json(out_dir / "qse_matrices.json")
    payload = {
        "energy": gs.energy,
        "exact_energy": exact_energy,
        "delta_e": abs(gs.energy - exact_energy),
        "coefficients_re": [float(c.real) for c in gs.coefficients],
        "coefficients_im": [float(c.imag) for c in gs.coefficients],
        "n_k": config.qse.n_k,
        "n_l": config.qse.n_l,
        "delta_t": basis.delta_t,
        "kappa": kappa,
        "evolution_mode": config.qse.evolution_mode,
        "trotter_steps": config.qse.trotter_steps,
        "assembly_mode": config.qse.assembly_mode,
        "regularization": gs.regularization_report,
        "config_echo": _config_echo(config),
    }
    write_json(out_dir / "qse_ground_state.json", config, payload)
    print(f"qse: E={gs.energy:.12f} dE={abs(gs.energy - exact_energy):.3e} "
          f"(mode={config.qse.evolution_mode})")


def _rebuild_engine(config: RunConfig, out_dir: Path):
    lat = _build_lattice(config)
    _, h = _hamiltonians(config, lat)
    vqe_artifact = _load_artifact(out_dir, "vqe_result.json")
    qse_artifact = _load_artifact(out_dir, "qse_ground_state.json")
    _check_echo(qse_artifact["config_echo"], config, "qse_ground_state.json")

    reference = _reference_from_artifact(config, lat, vqe_artifact)
    op = EvolutionOperator(
        h, mode=qse_artifact["evolution_mode"], trotter_steps=qse_artifact["trotter_steps"]
    )
    basis = qse.build_basis(
        reference, qse_artifact["n_k"], qse_artifact["n_l"], qse_artifact["delta_t"], op
    )
    coeffs = np.asarray(qse_artifact["coefficients_re"], dtype=complex)
    coeffs = coeffs + 1j * np.asarray(qse_artifact["coefficients_im"], dtype=float)
    gs = qse.QseGroundState(coeffs, qse_artifact["energy"], qse_artifact["regularization"])

    cfg = KrylovBasisConfig(
        tilde_n_k=config.gf.tilde_n_k,
        tilde_n_l=config.gf.tilde_n_l,
        evolution_mode=config.gf.evolution_mode,
        trotter_steps=config.gf.trotter_steps,
    )
    return lat, h, GreensEngine(h, gs, basis, cfg)


def cmd_greens(config: RunConfig, out_dir: Path) -> None:
    lat, h, engine = _rebuild_engine(config, out_dir)
    site_a, site_b = (s - 1 for s in config.gf.site_pair)
    omega = config.gf.omega_grid()
    delta = config.gf.delta
    z = omega + 1j * delta
    decomp = oracle.diagonalize(h)

    for kind in config.gf.kinds:
        samples = greens.retarded_gf(engine, site_a, site_b, kind, omega, delta)
        c_a = single_site(kind, site_a, lat.num_sites)
        c_b = single_site(kind, site_b, lat.num_sites)
        gf_ed = oracle.exact_resolvent_gf(decomp, c_a, c_b, z)
        suffix = kind.lower()
        write_csv(
            out_dir / f"gf_curve_{suffix}.csv", config,
            ["omega", "re_qse", "im_qse", "re_ed", "im_ed"],
            [
                [float(w), float(v.real), float(v.imag), float(e.real), float(e.imag)]
                for w, v, e in zip(omega, samples.values, gf_ed)
            ],
            {"site_pair": config.gf.site_pair, "kind": kind, "delta": delta},
        )
        sf_qse = samples.spectral_function()
        sf_ed = -np.imag(gf_ed) / np.pi
        write_csv(
            out_dir / f"sf_curve_{suffix}.csv", config,
            ["omega", "sf_qse", "sf_ed"],
            [[float(w), float(a), float(b)] for w, a, b in zip(omega, sf_qse, sf_ed)],
            {"site_pair": config.gf.site_pair, "kind": kind, "delta": delta},
        )
        dev = np.max(np.abs(samples.values.real - gf_ed.real)) / np.max(np.abs(gf_ed.real))
        print(f"greens[{kind}]: max rel deviation of Re G vs ED = {dev:.4f}")

        # tridiagonal coefficients for the pair seed, for reproducibility audits
        from .pauli import pauli_sum

        combined = pauli_sum([c_a, c_b], lat.num_sites)
        _, psi_mats, psi0, _ = engine.seed_subspace(combined)
        for tag, negate in (("greater", False), ("lesser", True)):
            coeffs = greens.lanczos_iterate(
                psi_mats, psi0, negate_hamiltonian=negate, kappa=engine.kappa
            )
            coeffs.save(out_dir / f"lanczos_{tag}_{suffix}.json")


def cmd_dsf(config: RunConfig, out_dir: Path) -> None:
    lat = _build_lattice(config)
    vqe_artifact = _load_artifact(out_dir, "vqe_result.json")
    reference = _reference_from_artifact(config, lat, vqe_artifact)
    omega = config.dsf.omega_grid()
    delta = config.dsf.delta
    q = np.asarray(config.dsf.q, dtype=float)

    def one_field(hz: float):
        h = lattice_mod.kitaev_hamiltonian(lat, config.coupling, hz)
        gs, basis, _ = qse.prepare_qse_ground_state(
            reference, h, config.qse.n_k, config.qse.n_l,
            evolution_mode=config.qse.evolution_mode,
            trotter_steps=config.qse.trotter_steps,
        )
        cfg = KrylovBasisConfig(
            tilde_n_k=config.gf.tilde_n_k,
            tilde_n_l=config.gf.tilde_n_l,
            evolution_mode=config.gf.evolution_mode,
            trotter_steps=config.gf.trotter_steps,
        )
        engine = GreensEngine(h, gs, basis, cfg)
        s_qse = greens.dynamical_structure_factor(engine, lat.positions, q, omega, delta)
        if np.iscomplexobj(s_qse):
            raise PipelineError(
                "structure factor came out complex; only q = 0 is supported end to end"
            )
        decomp = oracle.diagonalize(h)
        s_ed = greens.dynamical_structure_factor_ed(decomp, lat.num_sites, omega, delta)
        return s_qse, s_ed

    results = _map_tasks(one_field, list(config.dsf.h_values), config.threads)
    table_qse = greens.normalize_intensity(np.array([r[0] for r in results]))
    table_ed = greens.normalize_intensity(np.array([r[1] for r in results]))

    for name, table in (("dsf_qse.csv", table_qse), ("dsf_ed.csv", table_ed)):
        rows = []
        for i, hz in enumerate(config.dsf.h_values):
            for j, w in enumerate(omega):
                rows.append([float(hz), float(w), float(table[i, j])])
        write_csv(
            out_dir / name, config, ["h_z", "omega", "s_normalized"], rows,
            {"delta": delta, "q": list(config.dsf.q)},
        )
    print(f"dsf: max |QSE - ED| of normalized tables = {np.max(np.abs(table_qse - table_ed)):.4f}")


def cmd_ed_reference(config: RunConfig, out_dir: Path) -> None:
    lat = _build_lattice(config)
    h0, h = _hamiltonians(config, lat)
    entries = [
        oracle.fixture_entry(f"h0_j{config.coupling}", h0, oracle.diagonalize(h0)),
        oracle.fixture_entry(f"h_j{config.coupling}_hz{config.field_z}", h, oracle.diagonalize(h)),
    ]
    lat.export_fixture(out_dir / "lattice_fixture.json")
    write_json(out_dir / "ed_reference.json", config, {"entries": entries})
    for e in entries:
        print(f"ed-reference[{e['label']}]: E0={e['ground_energy']:.12f} "
              f"degeneracy={e['ground_degeneracy']}")


_COMMANDS = {
    "vqe": cmd_vqe,
    "qse": cmd_qse,
    "greens": cmd_greens,
    "dsf": cmd_dsf,
    "ed-reference": cmd_ed_reference,
}


def cmd_all(config: RunConfig, out_dir: Path) -> None:
    for name in ("ed-reference", "vqe", "qse", "greens", "dsf"):
        _COMMANDS[name](config, out_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kitaevqse",
        description="Honeycomb Kitaev model: VQE + subspace-expansion pipeline",
    )
    parser.add_argument("command", choices=[*_COMMANDS, "all"])
    parser.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    parser.add_argument("--out", type=Path, default=None, help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, default=None, help="worker cap for parallel stages")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (overrides config)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else config_from_dict({})
        if args.seed is not None:
            config.seed = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads: must be >= 1")
            config.threads = args.threads
        if args.out is not None:
            config.output_dir = str(args.out)
        out_dir = Path(config.output_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "all":
            cmd_all(config, out_dir)
        else:
            _COMMANDS[args.command](config, out_dir)
    except (ConfigError, PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
